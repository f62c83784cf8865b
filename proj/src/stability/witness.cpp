#include "switchkit/stability.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace switchkit {

std::vector<double> ball_point(std::size_t n, double radius, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> x(n);
    double norm = 0;
    do {
        norm = 0;
        for (auto& xi : x) {
            // Box-Muller keeps the stream independent of the library's
            // normal_distribution.
            double a = u(rng), b = u(rng);
            xi = std::sqrt(-2.0 * std::log1p(-a)) * std::cos(2.0 * std::numbers::pi * b);
            norm += xi * xi;
        }
    } while (norm == 0);
    norm = std::sqrt(norm);
    double r = radius * std::pow(u(rng), 1.0 / static_cast<double>(n));
    for (auto& xi : x)
        xi *= r / norm;
    return x;
}

namespace {

struct Search {
    std::vector<CompiledTerm> v;
    std::vector<std::vector<double>> dirs;
};

Search prepare(const SwitchedSystem& sys, const LyapunovCertificate& cert, double epsilon, const WitnessConfig& cfg)
{
    if (!(epsilon > 0) || !std::isfinite(epsilon))
        throw std::invalid_argument("epsilon must be positive");
    cfg.exec.validate();
    Search s;
    if (cert.kind == CertificateKind::MultipleDwell) {
        for (const auto& m : sys.modes)
            s.v.emplace_back(cert.function(m.id).rebase(sys.state), *sys.state);
    } else {
        s.v.emplace_back(cert.function("").rebase(sys.state), *sys.state);
    }
    const std::size_t n = sys.dimension();
    const std::size_t count = std::max<std::size_t>(cfg.directions, 2);
    if (n == 1) {
        s.dirs = {{1.0}, {-1.0}};
    } else if (n == 2) {
        for (std::size_t i = 0; i < count; ++i) {
            double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(count);
            s.dirs.push_back({std::cos(a), std::sin(a)});
        }
    } else {
        for (std::size_t d = 0; d < n; ++d)
            for (double sign : {1.0, -1.0}) {
                std::vector<double> e(n, 0.0);
                e[d] = sign;
                s.dirs.push_back(e);
            }
        for (std::size_t i = 0; i < count; ++i) {
            auto x = ball_point(n, 1.0, trial_seed(cfg.seed, 11, i));
            double norm = 0;
            for (double xi : x)
                norm += xi * xi;
            norm = std::sqrt(norm);
            for (auto& xi : x)
                xi /= norm;
            s.dirs.push_back(std::move(x));
        }
    }
    return s;
}

double value_at(const CompiledTerm& v, const std::vector<double>& dir, double r)
{
    std::vector<double> x(dir.size());
    for (std::size_t i = 0; i < dir.size(); ++i)
        x[i] = r * dir[i];
    return v.eval(x);
}

/// k from the sphere, δ by scanning then bisecting each ray.
void levels(const Search& s, double epsilon, const WitnessConfig& cfg, DeltaWitness& w)
{
    double k = std::numeric_limits<double>::infinity();
    for (const auto& v : s.v)
        for (const auto& d : s.dirs)
            k = std::min(k, value_at(v, d, epsilon));
    // Sublevels this thin come from rounding, not from V.
    constexpr double kFloor = 1e-12;
    double delta = epsilon;
    if (k > kFloor && std::isfinite(k)) {
        constexpr int kScan = 64;
        for (const auto& v : s.v)
            for (const auto& d : s.dirs) {
                double lo = 0, hi = epsilon;
                for (int j = 1; j <= kScan; ++j) {
                    double r = epsilon * j / kScan;
                    if (!(value_at(v, d, r) < k)) {
                        hi = r;
                        break;
                    }
                    lo = r;
                }
                if (hi > lo && !(value_at(v, d, hi) < k))
                    for (std::size_t it = 0; it < cfg.bisection_steps; ++it) {
                        double mid = 0.5 * (lo + hi);
                        (value_at(v, d, mid) < k ? lo : hi) = mid;
                    }
                delta = std::min(delta, lo);
            }
    }
    if (!(k > kFloor) || !std::isfinite(k) || !(delta > 0))
        throw std::runtime_error(
            fmt::format("no epsilon-delta witness for eps = {:.12g}: tightest k = {:.12g}, delta = {:.12g}", epsilon,
                        k, delta));
    w.epsilon = epsilon;
    w.k = k;
    w.delta = delta;
}

double run_one(const SwitchedSystem& sys, const DeltaWitness& w, const WitnessConfig& cfg, std::size_t i)
{
    const std::uint64_t seed = trial_seed(cfg.seed, 13, i);
    auto x0 = ball_point(sys.dimension(), w.delta, seed);
    SampledSignal s = sample_signal(sys, x0, cfg.exec, seed);
    ExecConfig ec = cfg.exec;
    ec.horizon = s.horizon;
    double worst = 0;
    if (s.horizon <= 0 || s.signal.size() == 0) {
        for (double xi : x0)
            worst += xi * xi;
        return std::sqrt(worst);
    }
    Trajectory t = simulate_signal(sys, s.signal, x0, ec);
    for (const auto& smp : t.samples) {
        double n2 = 0;
        for (double xi : smp.state)
            n2 += xi * xi;
        worst = std::max(worst, std::sqrt(n2));
    }
    return t.blew_up() ? std::numeric_limits<double>::infinity() : worst;
}

void finish(DeltaWitness& w, const std::vector<double>& norms)
{
    w.trajectories = norms.size();
    w.max_norm = 0;
    for (double m : norms)
        w.max_norm = std::max(w.max_norm, m);
    w.sane = w.max_norm < w.epsilon;
}

} // namespace

DeltaWitness delta_witness(const SwitchedSystem& sys, const LyapunovCertificate& cert, double epsilon,
                           const WitnessConfig& cfg)
{
    Search s = prepare(sys, cert, epsilon, cfg);
    DeltaWitness w;
    levels(s, epsilon, cfg, w);
    std::vector<double> norms(cfg.trajectories, 0.0);
    const auto total = static_cast<std::int64_t>(cfg.trajectories);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t i = 0; i < total; ++i)
        norms[static_cast<std::size_t>(i)] = run_one(sys, w, cfg, static_cast<std::size_t>(i));
    finish(w, norms);
    return w;
}

DeltaWitness delta_witness_serial(const SwitchedSystem& sys, const LyapunovCertificate& cert, double epsilon,
                                  const WitnessConfig& cfg)
{
    Search s = prepare(sys, cert, epsilon, cfg);
    DeltaWitness w;
    levels(s, epsilon, cfg, w);
    std::vector<double> norms;
    for (std::size_t i = 0; i < cfg.trajectories; ++i)
        norms.push_back(run_one(sys, w, cfg, i));
    finish(w, norms);
    return w;
}

} // namespace switchkit
