#include "switchkit/symbolic.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>

namespace switchkit {

namespace {

std::uint64_t mix(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double unit(std::uint64_t seed, std::uint64_t index, std::uint64_t coord)
{
    return static_cast<double>(mix(mix(mix(seed) ^ index) ^ coord) >> 11) * 0x1.0p-53;
}

/// Candidate points in a fixed order: simple-value shells, then a dyadic
/// grid over the box, then seeded random points snapped to rationals.
class Candidates {
public:
    Candidates(std::size_t n, const DecideConfig& cfg) : n_(n), cfg_(cfg), box_(from_double(cfg.box))
    {
        total_ = n == 0 ? 1 : cfg.samples;
        if (n == 0)
            return;
        const std::size_t quarter = std::max<std::size_t>(1, cfg.samples / 4);

        static const Rational kSimple[] = {Rational(0),     Rational(1),     Rational(-1),    Rational(2),
                                           Rational(-2),    Rational(1, 2),  Rational(-1, 2), Rational(3),
                                           Rational(-3),    Rational(1, 4),  Rational(-1, 4), Rational(4),
                                           Rational(-4),    Rational(10),    Rational(-10),   Rational(1, 10),
                                           Rational(-1, 10)};
        for (const auto& v : kSimple)
            if (abs(v) <= box_)
                values_.push_back(v);
        std::size_t levels = 1;
        while (levels < values_.size() && ipow(levels + 1, n) <= quarter)
            ++levels;
        // Tuples over the first `levels` values ordered by their largest
        // index, then lexicographically.
        std::vector<std::uint32_t> t(n, 0);
        for (std::size_t count = ipow(levels, n), i = 0; i < count; ++i) {
            std::size_t r = i;
            for (std::size_t d = n; d-- > 0;) {
                t[d] = static_cast<std::uint32_t>(r % levels);
                r /= levels;
            }
            shells_.push_back(t);
        }
        std::stable_sort(shells_.begin(), shells_.end(), [](const auto& a, const auto& b) {
            return *std::max_element(a.begin(), a.end()) < *std::max_element(b.begin(), b.end());
        });

        for (std::size_t h = 1; h <= (1u << 20) && ipow(2 * h + 1, n) <= quarter; h *= 2)
            half_ = h;
        grid_ = half_ == 0 ? 0 : ipow(2 * half_ + 1, n);
        shells_.resize(std::min(shells_.size(), total_));
        grid_ = std::min(grid_, total_ - shells_.size());
    }

    [[nodiscard]] std::size_t size() const { return total_; }

    [[nodiscard]] const char* source(std::size_t i) const
    {
        if (i < shells_.size())
            return "simple values";
        if (i < shells_.size() + grid_)
            return "grid";
        return "random sampling";
    }

    void point(std::size_t i, std::vector<Rational>& q, std::vector<double>& x) const
    {
        q.resize(n_);
        x.resize(n_);
        if (i < shells_.size()) {
            for (std::size_t d = 0; d < n_; ++d)
                q[d] = values_[shells_[i][d]];
        } else if (i < shells_.size() + grid_) {
            std::size_t r = i - shells_.size();
            const std::size_t side = 2 * half_ + 1;
            for (std::size_t d = n_; d-- > 0;) {
                long j = static_cast<long>(r % side) - static_cast<long>(half_);
                r /= side;
                q[d] = box_ * Rational(j, static_cast<long>(half_));
                q[d].canonicalize();
            }
        } else {
            for (std::size_t d = 0; d < n_; ++d)
                q[d] = snap((2.0 * unit(cfg_.seed, i, d) - 1.0) * cfg_.box, cfg_.max_denominator);
        }
        for (std::size_t d = 0; d < n_; ++d)
            x[d] = to_double(q[d]);
    }

private:
    static std::size_t ipow(std::size_t b, std::size_t e)
    {
        std::size_t r = 1;
        for (std::size_t k = 0; k < e; ++k) {
            if (r > std::numeric_limits<std::size_t>::max() / std::max<std::size_t>(b, 1))
                return std::numeric_limits<std::size_t>::max();
            r *= b;
        }
        return r;
    }

    std::size_t n_;
    const DecideConfig& cfg_;
    Rational box_;
    std::size_t total_ = 0;
    std::vector<Rational> values_;
    std::vector<std::vector<std::uint32_t>> shells_;
    std::size_t half_ = 0;
    std::size_t grid_ = 0;
};

struct Probe {
    Formula core;
    CompiledFormula compiled;
    const VarList& vars;

    Probe(const Formula& f, const VarList& v) : core(f), compiled(normalize(f), v), vars(v)
    {
        if (!f.is_quantifier_free())
            throw std::invalid_argument("falsifier needs a quantifier-free formula");
    }

    [[nodiscard]] std::map<std::string, Rational> valuation(const std::vector<Rational>& q) const
    {
        std::map<std::string, Rational> v;
        for (std::size_t d = 0; d < vars.size(); ++d)
            v.emplace(vars[d], q[d]);
        return v;
    }

    /// Exact violation at q; floating point screens first.
    [[nodiscard]] bool violated(const std::vector<Rational>& q, const std::vector<double>& x) const
    {
        if (compiled.eval(x) == Truth::True)
            return false;
        return !core.eval(valuation(q));
    }
};

Verdict report(const Probe& probe, const Candidates& cands, std::size_t best)
{
    if (best == std::numeric_limits<std::size_t>::max()) {
        Verdict v = Verdict::unknown(fmt::format("no counterexample in {} samples", cands.size()));
        v.samples = cands.size();
        return v;
    }
    std::vector<Rational> q;
    std::vector<double> x;
    cands.point(best, q, x);
    auto val = probe.valuation(q);
    Verdict v = Verdict::falsified(fmt::format("counterexample from {}", cands.source(best)), val);
    v.samples = best + 1;
    for (const auto& a : sign_atoms(normalize(probe.core)))
        v.evidence.push_back(
            fmt::format("{} {} 0: value {}", a.p.to_string(), a.strict ? ">" : ">=", to_string(a.p.eval(val))));
    return v;
}

} // namespace

Verdict falsify(const Formula& core, const VarList& vars, const DecideConfig& cfg)
{
    Probe probe(core, vars);
    Candidates cands(vars.size(), cfg);
    std::atomic<std::size_t> best{std::numeric_limits<std::size_t>::max()};
    const auto total = static_cast<std::int64_t>(cands.size());
#pragma omp parallel
    {
        std::vector<Rational> q;
        std::vector<double> x;
#pragma omp for schedule(dynamic, 512)
        for (std::int64_t i = 0; i < total; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            if (idx >= best.load(std::memory_order_relaxed))
                continue;
            cands.point(idx, q, x);
            if (!probe.violated(q, x))
                continue;
            std::size_t cur = best.load();
            while (idx < cur && !best.compare_exchange_weak(cur, idx)) {
            }
        }
    }
    return report(probe, cands, best.load());
}

Verdict falsify_serial(const Formula& core, const VarList& vars, const DecideConfig& cfg)
{
    Probe probe(core, vars);
    Candidates cands(vars.size(), cfg);
    std::vector<Rational> q;
    std::vector<double> x;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        cands.point(i, q, x);
        if (probe.violated(q, x))
            return report(probe, cands, i);
    }
    return report(probe, cands, std::numeric_limits<std::size_t>::max());
}

} // namespace switchkit
