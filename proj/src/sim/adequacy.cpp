#include "flow.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

namespace switchkit {

namespace {

// Dwell and period side conditions on extracted signals.
constexpr double kSideTol = 1e-8;
// Minimum progress for a sampled state-dependent piece.
constexpr double kMinPiece = 1e-6;

std::vector<double> to_doubles(const std::vector<Rational>& v)
{
    std::vector<double> out;
    for (const auto& q : v)
        out.push_back(to_double(q));
    return out;
}

SampledSignal from_pieces(const std::vector<std::pair<std::size_t, double>>& pieces, double horizon)
{
    SampledSignal s{SwitchingSignal::from_pieces(pieces), horizon};
    return s;
}

SampledSignal sample_state(const SwitchedSystem& sys, std::span<const double> x0, const ExecConfig& cfg,
                           std::mt19937_64& rng)
{
    const VarList& order = *sys.state;
    std::vector<CompiledField> fields;
    std::vector<CompiledFormula> domains;
    for (const auto& m : sys.modes) {
        fields.emplace_back(m.field, order);
        domains.emplace_back(normalize(m.domain), order);
    }
    // A quarter of the tolerance leaves slack for the executor and the
    // simulator, which re-integrate the same pieces.
    const double margin = 0.25 * cfg.domain_tol;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::pair<std::size_t, double>> pieces;
    std::vector<double> x(x0.begin(), x0.end());
    double t = 0;
    while (pieces.size() < cfg.max_iterations && t < cfg.horizon) {
        std::vector<std::size_t> candidates;
        for (std::size_t p = 0; p < sys.modes.size(); ++p)
            if (domains[p].holds(x, margin))
                candidates.push_back(p);
        std::shuffle(candidates.begin(), candidates.end(), rng);
        bool last = !(unit(rng) < cfg.continue_probability) || pieces.size() + 1 == cfg.max_iterations;
        bool progressed = false;
        for (std::size_t p : candidates) {
            double remaining = cfg.horizon - t;
            double d = last ? remaining : remaining * unit(rng);
            std::vector<double> y = x;
            auto res = detail::flow(fields[p], y, d, cfg, &domains[p], margin, nullptr,
                                    [](double, const std::vector<double>&) {});
            if (res.blowup) {
                pieces.emplace_back(p, d);
                return from_pieces(pieces, t + d);
            }
            if (res.elapsed > kMinPiece) {
                pieces.emplace_back(p, res.elapsed);
                x = std::move(y);
                t += res.elapsed;
                progressed = true;
                break;
            }
        }
        if (!progressed || last)
            break;
    }
    if (pieces.empty())
        return from_pieces({{0, 1.0}}, 0.0);
    return from_pieces(pieces, t);
}

std::vector<std::pair<std::size_t, double>> sample_timed(std::size_t modes, const ExecConfig& cfg, double min_dwell,
                                                         std::mt19937_64& rng)
{
    std::uniform_int_distribution<std::size_t> pick(0, modes - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::pair<std::size_t, double>> pieces;
    double t = 0;
    while (true) {
        std::size_t p = pick(rng);
        double remaining = cfg.horizon - t;
        bool last = pieces.size() + 1 >= cfg.max_iterations || !(unit(rng) < cfg.continue_probability) ||
                    remaining <= 2 * min_dwell;
        if (last) {
            pieces.emplace_back(p, remaining);
            return pieces;
        }
        double d = min_dwell > 0 ? min_dwell * (1 + unit(rng)) : remaining * unit(rng);
        if (!(d > 0))
            continue;
        pieces.emplace_back(p, d);
        t += d;
    }
}

TrialOutcome compare(const Trajectory& traj, const Run& run, std::size_t dim, double tol)
{
    TrialOutcome out;
    out.blowup_sim = traj.blew_up();
    out.blowup_exec = run.blowup;
    out.time_sim = traj.end_time();
    out.time_exec = run.time;
    if (out.blowup_sim != out.blowup_exec) {
        out.note = fmt::format("blowup only in the {}", out.blowup_sim ? "simulation" : "program run");
        return out;
    }
    if (out.blowup_sim) {
        out.error = std::fabs(out.time_sim - out.time_exec) / std::max(1.0, std::fabs(out.time_sim));
        out.ok = out.error <= tol;
        if (!out.ok)
            out.note = fmt::format("blowup times {:.12g} and {:.12g} differ", out.time_sim, out.time_exec);
        return out;
    }
    const auto& a = traj.end_state();
    double scale = 1.0, diff = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        scale = std::max(scale, std::fabs(a[i]));
        diff = std::max(diff, std::fabs(a[i] - run.state[i]));
    }
    out.error = diff / scale;
    out.ok = out.error <= tol;
    if (!out.ok)
        out.note = fmt::format("endpoints differ by {:.3g} (relative)", out.error);
    return out;
}

struct Harness {
    const SwitchedSystem& sys;
    std::span<const double> x0;
    const ExecConfig& cfg;
    Executor executor;
    std::vector<std::size_t> modes;

    Harness(const SwitchedSystem& s, std::span<const double> x, const ExecConfig& c)
        : sys(s), x0(x), cfg(c), executor(s.program(), *s.state, c), modes(ode_modes(s))
    {
    }

    [[nodiscard]] bool state_dependent() const
    {
        return std::holds_alternative<mechanism::StateDependent>(sys.mechanism);
    }

    [[nodiscard]] TrialOutcome forward(std::size_t i) const
    {
        SampledSignal s = sample_signal(sys, x0, cfg, trial_seed(cfg.seed, 1, i));
        TrialOutcome out;
        out.pieces = s.signal.size();
        if (!(s.horizon > 0)) {
            out.ok = true;
            out.note = "no mode can progress from x0";
            return out;
        }
        ExecConfig c = cfg;
        c.horizon = s.horizon;
        Trajectory traj = simulate_signal(sys, s.signal, x0, c);
        Run run = executor.run(x0, GuidedStrategy{s.signal, s.horizon, modes}, trial_seed(cfg.seed, 3, i));
        if (run.status != RunStatus::Completed) {
            out.time_sim = traj.end_time();
            out.blowup_sim = traj.blew_up();
            out.note = fmt::format("no program run follows the signal ({})", to_string(run.status));
            return out;
        }
        out = compare(traj, run, sys.dimension(), cfg.match_tol);
        out.pieces = s.signal.size();
        if (state_dependent() && !traj.obeyed_domains) {
            out.ok = false;
            out.note = "sampled signal leaves a domain";
        }
        return out;
    }

    [[nodiscard]] TrialOutcome backward(std::size_t i) const
    {
        TrialOutcome out;
        Run run = executor.run(x0, RandomStrategy{}, trial_seed(cfg.seed, 2, i));
        if (run.status != RunStatus::Completed) {
            out.note = fmt::format("random run did not complete ({})", to_string(run.status));
            return out;
        }
        SwitchingSignal sig = extract_signal(run, modes);
        out.pieces = sig.size();
        if (sig.size() == 0) {
            out.ok = std::equal(x0.begin(), x0.end(), run.state.begin());
            out.time_exec = run.time;
            if (!out.ok)
                out.note = "state changed without time elapsing";
            return out;
        }
        const double end = sig.times.back();
        Verdict v = validate_signal(sig, sys.modes.size(), end);
        if (v.is_valid()) {
            if (const auto* slow = std::get_if<mechanism::Slow>(&sys.mechanism))
                v = check_dwell(sig, to_double(slow->tau), end, kSideTol);
            else if (const auto* fast = std::get_if<mechanism::Fast>(&sys.mechanism))
                v = check_period(sig, to_doubles(fast->zeta), end, kSideTol);
        }
        if (!v.is_valid()) {
            out.note = "extracted signal rejected: " + v.reason;
            return out;
        }
        ExecConfig c = cfg;
        // Past a blowup the last mode continues, on the same grid as the run.
        c.horizon = run.blowup ? end + cfg.step : end;
        Trajectory traj = simulate_signal(sys, sig, x0, c);
        out = compare(traj, run, sys.dimension(), cfg.match_tol);
        out.pieces = sig.size();
        if (state_dependent() && !traj.obeyed_domains) {
            out.ok = false;
            out.note = "re-simulation leaves a domain";
        }
        return out;
    }
};

void require_supported(const SwitchedSystem& sys, std::span<const double> x0, const ExecConfig& cfg)
{
    if (std::holds_alternative<mechanism::Controlled>(sys.mechanism))
        throw std::invalid_argument("adequacy cross-check does not support controlled switching");
    sys.validate();
    cfg.validate();
    if (x0.size() != sys.dimension())
        throw std::invalid_argument("initial state has the wrong dimension");
}

AdequacyReport empty_report(const SwitchedSystem& sys, std::size_t trials)
{
    AdequacyReport r;
    r.mechanism = mechanism_name(sys.mechanism);
    r.forward.resize(trials);
    r.backward.resize(trials);
    if (const auto* fast = std::get_if<mechanism::Fast>(&sys.mechanism)) {
        Rational sum(0);
        for (const auto& z : fast->zeta)
            sum += z;
        r.period = to_double(sum);
    }
    return r;
}

} // namespace

std::vector<std::size_t> ode_modes(const SwitchedSystem& sys)
{
    std::size_t count = sys.program()->odes().size();
    if (count != sys.modes.size())
        throw std::logic_error("built program does not have one ODE per mode");
    std::vector<std::size_t> out(count);
    std::iota(out.begin(), out.end(), std::size_t{0});
    return out;
}

SampledSignal sample_signal(const SwitchedSystem& sys, std::span<const double> x0, const ExecConfig& cfg,
                            std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    const std::size_t m = sys.modes.size();
    return std::visit(
        [&](const auto& mech) -> SampledSignal {
            using T = std::decay_t<decltype(mech)>;
            if constexpr (std::is_same_v<T, mechanism::StateDependent>) {
                return sample_state(sys, x0, cfg, rng);
            } else if constexpr (std::is_same_v<T, mechanism::Slow>) {
                return from_pieces(sample_timed(m, cfg, to_double(mech.tau), rng), cfg.horizon);
            } else if constexpr (std::is_same_v<T, mechanism::Fast>) {
                std::uniform_real_distribution<double> unit(0.0, 1.0);
                double horizon = cfg.horizon * (1.0 - unit(rng));
                std::vector<std::pair<std::size_t, double>> pieces;
                double t = 0;
                for (std::size_t k = 0; t < horizon; ++k) {
                    double d = to_double(mech.zeta[k % m]);
                    pieces.emplace_back(k % m, d);
                    t += d;
                }
                return from_pieces(pieces, horizon);
            } else {
                return from_pieces(sample_timed(m, cfg, 0.0, rng), cfg.horizon);
            }
        },
        sys.mechanism);
}

bool AdequacyReport::passed() const { return failures() == 0; }

std::size_t AdequacyReport::failures() const
{
    auto bad = [](const TrialOutcome& o) { return !o.ok; };
    return static_cast<std::size_t>(std::count_if(forward.begin(), forward.end(), bad) +
                                    std::count_if(backward.begin(), backward.end(), bad));
}

std::vector<std::size_t> AdequacyReport::blowup_cycles(bool forward_side, bool simulated) const
{
    std::vector<std::size_t> out;
    for (const auto& o : forward_side ? forward : backward) {
        bool blew = simulated ? o.blowup_sim : o.blowup_exec;
        if (!blew)
            continue;
        double t = simulated ? o.time_sim : o.time_exec;
        out.push_back(period > 0 ? static_cast<std::size_t>(std::floor(t / period)) + 1 : 0);
    }
    return out;
}

std::string AdequacyReport::summary() const
{
    auto side = [&](const char* name, const std::vector<TrialOutcome>& v, bool fwd) {
        std::size_t ok = 0;
        double worst = 0;
        const TrialOutcome* first_bad = nullptr;
        for (const auto& o : v) {
            if (o.ok)
                ++ok;
            else if (!first_bad)
                first_bad = &o;
            worst = std::max(worst, o.error);
        }
        std::string line = fmt::format("  {}: {}/{} matched, max relative error {:.3g}", name, ok, v.size(), worst);
        auto sim = blowup_cycles(fwd, true), exec = blowup_cycles(fwd, false);
        if (!sim.empty() || !exec.empty()) {
            std::set<std::size_t> cycles(sim.begin(), sim.end());
            cycles.insert(exec.begin(), exec.end());
            std::string list;
            for (auto c : cycles)
                list += (list.empty() ? "" : ",") + std::to_string(c);
            line += fmt::format(", blowups {} simulated / {} executed", sim.size(), exec.size());
            if (period > 0)
                line += " in cycle " + list;
        }
        if (first_bad)
            line += "\n    first mismatch: " + first_bad->note;
        return line + "\n";
    };
    return fmt::format("adequacy {} ({} trials per direction): {}\n", mechanism, forward.size(),
                       passed() ? "PASS" : "FAIL") +
           side("signal -> program", forward, true) + side("program -> signal", backward, false);
}

AdequacyReport crosscheck_adequacy(const SwitchedSystem& sys, std::span<const double> x0, const ExecConfig& cfg,
                                   std::size_t trials)
{
    require_supported(sys, x0, cfg);
    const Harness harness(sys, x0, cfg);
    AdequacyReport report = empty_report(sys, trials);
    const auto total = static_cast<long>(2 * trials);
#pragma omp parallel for schedule(dynamic)
    for (long k = 0; k < total; ++k) {
        auto i = static_cast<std::size_t>(k);
        if (i < trials)
            report.forward[i] = harness.forward(i);
        else
            report.backward[i - trials] = harness.backward(i - trials);
    }
    return report;
}

AdequacyReport crosscheck_adequacy_serial(const SwitchedSystem& sys, std::span<const double> x0,
                                          const ExecConfig& cfg, std::size_t trials)
{
    require_supported(sys, x0, cfg);
    const Harness harness(sys, x0, cfg);
    AdequacyReport report = empty_report(sys, trials);
    for (std::size_t i = 0; i < trials; ++i)
        report.forward[i] = harness.forward(i);
    for (std::size_t i = 0; i < trials; ++i)
        report.backward[i] = harness.backward(i);
    return report;
}

} // namespace switchkit
