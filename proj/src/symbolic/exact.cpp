#include "switchkit/symbolic.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace switchkit {

namespace {

bool all_even(const Exponents& e)
{
    return std::all_of(e.begin(), e.end(), [](unsigned k) { return k % 2 == 0; });
}

Exponents halved(const Exponents& e)
{
    Exponents h(e.size());
    for (std::size_t i = 0; i < e.size(); ++i)
        h[i] = e[i] / 2;
    return h;
}

Exponents added(const Exponents& a, const Exponents& b)
{
    Exponents s(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        s[i] = a[i] + b[i];
    return s;
}

bool is_pure_power(const Exponents& e, std::size_t var)
{
    for (std::size_t i = 0; i < e.size(); ++i)
        if ((i == var) != (e[i] > 0))
            return false;
    return true;
}

struct Ldl {
    bool psd = false;
    bool pd = false;
};

Ldl ldl(std::vector<std::vector<Rational>> g)
{
    const std::size_t n = g.size();
    Ldl out{true, true};
    for (std::size_t k = 0; k < n; ++k) {
        const Rational d = g[k][k];
        if (d < 0)
            return {};
        if (d == 0) {
            out.pd = false;
            for (std::size_t j = k + 1; j < n; ++j)
                if (g[j][k] != 0)
                    return {};
            continue;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            if (g[i][k] == 0)
                continue;
            const Rational f = g[i][k] / d;
            for (std::size_t j = k + 1; j < n; ++j)
                g[i][j] -= f * g[k][j];
        }
    }
    return out;
}

/// Gram matrix over the halves of the square monomials; each remaining
/// monomial goes to the first basis pair producing it.
NonnegCertificate gram(const Term& p)
{
    std::vector<Exponents> basis;
    std::map<Exponents, std::size_t> index;
    for (const auto& [e, c] : p.monomials())
        if (all_even(e)) {
            index.emplace(halved(e), basis.size());
            basis.push_back(halved(e));
        }
    const std::size_t n = basis.size();
    std::vector<std::vector<Rational>> g(n, std::vector<Rational>(n));
    bool diagonal = true;
    for (const auto& [e, c] : p.monomials()) {
        if (all_even(e)) {
            auto i = index.at(halved(e));
            g[i][i] += c;
            continue;
        }
        bool placed = false;
        for (std::size_t i = 0; i < n && !placed; ++i)
            for (std::size_t j = i + 1; j < n && !placed; ++j)
                if (added(basis[i], basis[j]) == e) {
                    g[i][j] += c / 2;
                    g[j][i] += c / 2;
                    placed = true;
                }
        if (!placed)
            return {};
        diagonal = false;
    }
    Ldl f = ldl(g);
    NonnegCertificate out;
    if (!f.psd)
        return out;
    out.nonneg = true;
    out.method = diagonal ? "even-power sum" : "Gram LDL";
    const std::size_t vars = p.vars() ? p.vars()->size() : 0;
    bool has_one = index.count(Exponents(vars, 0)) > 0;
    out.positive = f.pd && has_one;
    if (f.pd) {
        out.definite = true;
        for (std::size_t v = 0; v < vars && out.definite; ++v)
            out.definite = std::any_of(basis.begin(), basis.end(),
                                       [&](const Exponents& b) { return is_pure_power(b, v); });
    }
    return out;
}

} // namespace

NonnegCertificate certify_nonneg(const Term& p)
{
    if (p.is_constant()) {
        Rational c = p.constant_term();
        NonnegCertificate out;
        out.nonneg = c >= 0;
        out.positive = c > 0;
        out.definite = out.positive;
        out.method = "constant";
        return out;
    }
    NonnegCertificate out = gram(p);
    if (!out.positive && p.constant_term() > 0) {
        NonnegCertificate rest = gram(p - Term::constant(p.constant_term(), p.vars()));
        if (rest.nonneg) {
            out.nonneg = out.positive = true;
            out.definite = true;
            if (out.method.empty())
                out.method = rest.method + " plus constant";
        }
    }
    return out;
}

std::optional<std::string> certify_on(const Term& p, const std::vector<Term>& atoms, const std::vector<Rational>& sigma)
{
    if (atoms.size() != sigma.size())
        throw std::invalid_argument("one multiplier per atom is required");
    Term r = p;
    std::string sum;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (sigma[i] < 0)
            throw std::invalid_argument("multipliers must be nonnegative");
        if (sigma[i] == 0)
            continue;
        r -= atoms[i].scaled(sigma[i]);
        sum += fmt::format(" - {}*({})", to_string(sigma[i]), atoms[i].to_string());
    }
    NonnegCertificate c = certify_nonneg(r);
    if (!c.nonneg)
        return std::nullopt;
    return fmt::format("({}){} = {} >= 0 by {}", p.to_string(), sum, r.to_string(), c.method);
}

namespace {

struct Atom {
    Term p;
    bool strict;
};

/// Primitive representative: p divided by its content.
Term primitive(const Term& p) { return p.scaled(Rational(1) / p.content()); }

/// Identifies atoms up to a positive factor.
std::string key(const Term& p) { return primitive(p).to_string(); }

/// Greatest monomial dividing every monomial of p.
Exponents monomial_gcd(const Term& p)
{
    Exponents g;
    for (const auto& [e, c] : p.monomials()) {
        if (g.empty()) {
            g = e;
            continue;
        }
        for (std::size_t i = 0; i < g.size(); ++i)
            g[i] = std::min(g[i], e[i]);
    }
    return g;
}

Term divide_monomial(const Term& p, const Exponents& m)
{
    const auto& vars = p.vars();
    Term out = Term::constant(0, vars);
    for (const auto& [e, c] : p.monomials()) {
        Term t = Term::constant(c, vars);
        for (std::size_t i = 0; i < e.size(); ++i)
            if (e[i] > m[i])
                t *= Term::variable((*vars)[i], vars).pow(e[i] - m[i]);
        out += t;
    }
    return out;
}

class Refuter {
public:
    explicit Refuter(const DecideConfig& cfg) : cfg_(cfg) {}

    /// True when conj ∧ pending is unsatisfiable.
    bool refute(std::vector<Atom> conj, std::vector<Formula> pending)
    {
        while (!pending.empty()) {
            Formula f = std::move(pending.back());
            pending.pop_back();
            if (f.is_true())
                continue;
            if (f.is_false()) {
                ++counts_["constant"];
                return true;
            }
            if (const auto* a = f.as<formula_node::Atom>()) {
                conj.push_back({a->lhs - a->rhs, a->op == Cmp::Gt});
            } else if (const auto* a = f.as<formula_node::And>()) {
                pending.insert(pending.end(), a->args.begin(), a->args.end());
            } else if (const auto* o = f.as<formula_node::Or>()) {
                if (refute_conj(conj, 0, true))
                    return true;
                for (const auto& arg : o->args) {
                    auto next = pending;
                    next.push_back(arg);
                    if (!refute(conj, std::move(next)))
                        return false;
                }
                return true;
            } else {
                throw std::invalid_argument("formula is not normalized: " + f.to_string());
            }
        }
        if (++cases_ > cfg_.max_cases) {
            exhausted_ = true;
            return false;
        }
        return refute_conj(std::move(conj), 0, false);
    }

    [[nodiscard]] bool exhausted() const { return exhausted_; }
    [[nodiscard]] std::size_t cases() const { return cases_; }

    [[nodiscard]] std::vector<std::string> evidence() const
    {
        std::vector<std::string> out;
        std::string summary = fmt::format("refuted {} case(s) of the negation", cases_);
        for (const auto& [m, k] : counts_)
            summary += fmt::format("; {}: {}", m, k);
        out.push_back(summary);
        out.insert(out.end(), samples_.begin(), samples_.end());
        return out;
    }

private:
    void note(const std::string& method, std::string detail = {})
    {
        ++counts_[method];
        if (!detail.empty() && samples_.size() < 4)
            samples_.push_back(std::move(detail));
    }

    /// Folds constants and rescales atoms to primitive parts, so that
    /// results do not depend on positive factors. False means a constant
    /// atom already fails.
    bool simplify(std::vector<Atom>& atoms)
    {
        std::map<std::string, std::size_t> seen;
        std::vector<Atom> out;
        for (auto& a : atoms) {
            if (a.p.is_constant()) {
                Rational c = a.p.constant_term();
                if (a.strict ? c > 0 : c >= 0)
                    continue;
                return false;
            }
            Term q = primitive(a.p);
            auto [it, fresh] = seen.emplace(q.to_string(), out.size());
            if (fresh)
                out.push_back({std::move(q), a.strict});
            else
                out[it->second].strict = out[it->second].strict || a.strict;
        }
        atoms = std::move(out);
        return true;
    }

    static std::vector<Atom> substitute(const std::vector<Atom>& atoms, const std::string& var, const Term& value)
    {
        std::vector<Atom> out;
        out.reserve(atoms.size());
        for (const auto& a : atoms)
            out.push_back({a.p.substitute({{var, value}}), a.strict});
        return out;
    }

    bool refute_conj(std::vector<Atom> atoms, int depth, bool quick)
    {
        if (!simplify(atoms)) {
            note("constant");
            return true;
        }
        if (atoms.empty())
            return false;
        if (!quick && depth < kMaxDepth && by_equalities(atoms, depth))
            return true;
        return by_multipliers(atoms, quick ? std::min(2u, cfg_.max_support) : cfg_.max_support);
    }

    /// Equalities g = 0 come from pairs g ≥ 0, −g ≥ 0. A linear occurrence
    /// of a variable is eliminated; a monomial factor splits into cases.
    bool by_equalities(const std::vector<Atom>& atoms, int depth)
    {
        std::set<std::string> keys;
        for (const auto& a : atoms)
            keys.insert(key(a.p));
        std::vector<Term> eqs;
        for (const auto& a : atoms)
            if (!a.strict && keys.count(key(-a.p)) && a.p.monomials().begin()->second > 0)
                eqs.push_back(a.p);

        for (const auto& g : eqs) {
            const auto& vars = *g.vars();
            for (std::size_t v = 0; v < vars.size(); ++v) {
                Exponents unit(vars.size(), 0);
                unit[v] = 1;
                bool linear = true;
                Rational coef;
                for (const auto& [e, c] : g.monomials()) {
                    if (e == unit)
                        coef = c;
                    else if (e[v] > 0)
                        linear = false;
                }
                if (!linear || coef == 0)
                    continue;
                Term x = Term::variable(vars[v], g.vars());
                Term value = (x.scaled(coef) - g).scaled(Rational(1) / coef);
                if (!refute_conj(substitute(atoms, vars[v], value), depth + 1, false))
                    return false;
                note("substitution", fmt::format("eliminated {} using {} = 0", vars[v], g.to_string()));
                return true;
            }
        }
        for (const auto& g : eqs) {
            Exponents m = monomial_gcd(g);
            if (std::all_of(m.begin(), m.end(), [](unsigned k) { return k == 0; }))
                continue;
            const auto& vars = *g.vars();
            for (std::size_t v = 0; v < vars.size(); ++v) {
                if (m[v] == 0)
                    continue;
                if (!refute_conj(substitute(atoms, vars[v], Term::constant(0, g.vars())), depth + 1, false))
                    return false;
            }
            Term h = divide_monomial(g, m);
            if (!h.is_constant()) {
                std::vector<Atom> rest;
                for (const auto& a : atoms)
                    if (key(a.p) != key(g) && key(a.p) != key(-g))
                        rest.push_back(a);
                rest.push_back({h, false});
                rest.push_back({-h, false});
                if (!refute_conj(std::move(rest), depth + 1, false))
                    return false;
            }
            note("monomial split", fmt::format("case split on {} = 0", g.to_string()));
            return true;
        }
        return false;
    }

    /// Nonnegative constants λ with −Σ λ_i g_i certified nonnegative (and
    /// positive unless some strict atom has λ_i > 0).
    bool by_multipliers(const std::vector<Atom>& atoms, unsigned max_support)
    {
        const std::size_t k = atoms.size();
        VarListPtr vars = atoms.front().p.vars();
        for (const auto& a : atoms)
            vars = Term::merge_vars(vars, a.p.vars());

        // Screening points: a candidate negative at any of them is skipped.
        constexpr std::size_t kPoints = 24;
        std::vector<std::vector<double>> values(k, std::vector<double>(kPoints));
        std::vector<std::vector<double>> mags(k, std::vector<double>(kPoints));
        {
            std::vector<double> x(vars->size());
            std::uint64_t state = 0x2545f4914f6cdd1dULL;
            auto next = [&] {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                return static_cast<double>(state >> 11) * 0x1.0p-53 * 6.0 - 3.0;
            };
            std::vector<CompiledTerm> compiled;
            for (const auto& a : atoms)
                compiled.emplace_back(a.p, *vars);
            for (std::size_t j = 0; j < kPoints; ++j) {
                for (auto& xi : x)
                    xi = next();
                for (std::size_t i = 0; i < k; ++i) {
                    values[i][j] = compiled[i].eval(x);
                    mags[i][j] = compiled[i].magnitude(x);
                }
            }
        }

        const auto& lambdas = cfg_.multipliers;
        std::vector<std::size_t> subset;
        std::vector<std::size_t> choice;
        for (unsigned s = 1; s <= max_support && s <= k; ++s) {
            subset.resize(s);
            for (unsigned i = 0; i < s; ++i)
                subset[i] = i;
            while (true) {
                bool strict = std::any_of(subset.begin(), subset.end(), [&](std::size_t i) { return atoms[i].strict; });
                choice.assign(s, 0);
                while (true) {
                    if (try_combination(atoms, subset, choice, strict, values, mags))
                        return true;
                    std::size_t pos = 0;
                    while (pos < s && ++choice[pos] == lambdas.size())
                        choice[pos++] = 0;
                    if (pos == s)
                        break;
                }
                int pos = static_cast<int>(s) - 1;
                while (pos >= 0 && subset[pos] == k - s + pos)
                    --pos;
                if (pos < 0)
                    break;
                ++subset[pos];
                for (unsigned i = pos + 1; i < s; ++i)
                    subset[i] = subset[i - 1] + 1;
            }
        }
        return false;
    }

    bool try_combination(const std::vector<Atom>& atoms, const std::vector<std::size_t>& subset,
                         const std::vector<std::size_t>& choice, bool strict,
                         const std::vector<std::vector<double>>& values, const std::vector<std::vector<double>>& mags)
    {
        const auto& lambdas = cfg_.multipliers;
        for (std::size_t j = 0; j < values.front().size(); ++j) {
            double sum = 0, mag = 0;
            for (std::size_t i = 0; i < subset.size(); ++i) {
                double l = to_double(lambdas[choice[i]]);
                sum -= l * values[subset[i]][j];
                mag += l * mags[subset[i]][j];
            }
            if (sum < -1e-9 * (1.0 + mag))
                return false;
        }
        Term c = Term::constant(0, atoms.front().p.vars());
        std::string combo;
        for (std::size_t i = 0; i < subset.size(); ++i) {
            const Rational& l = lambdas[choice[i]];
            c -= atoms[subset[i]].p.scaled(l);
            combo += fmt::format("{}{}*({} {} 0)", i ? " + " : "", to_string(l), atoms[subset[i]].p.to_string(),
                                 atoms[subset[i]].strict ? ">" : ">=");
        }
        NonnegCertificate cert = certify_nonneg(c);
        if (strict ? !cert.nonneg : !cert.positive)
            return false;
        note("multipliers", fmt::format("-({}) = {} {} 0 by {}", combo, c.to_string(), strict ? ">=" : ">",
                                        cert.method));
        return true;
    }

    static constexpr int kMaxDepth = 6;
    const DecideConfig& cfg_;
    std::size_t cases_ = 0;
    bool exhausted_ = false;
    std::map<std::string, std::size_t> counts_;
    std::vector<std::string> samples_;
};

} // namespace

Verdict prove_exact(const Formula& core, const DecideConfig& cfg)
{
    Formula neg = normalize_negation(core);
    if (neg.is_false())
        return Verdict::valid("negation folds to false");
    Refuter r(cfg);
    if (r.refute({}, {neg})) {
        Verdict v = Verdict::valid("every case of the negation is infeasible");
        v.evidence = r.evidence();
        return v;
    }
    return Verdict::unknown(r.exhausted() ? fmt::format("exact layer gave up after {} cases", r.cases())
                                          : "exact layer found no certificate");
}

} // namespace switchkit
