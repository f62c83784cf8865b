#include "switchkit/stability.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace switchkit {

namespace {

Term over_state(const Term& v, const SwitchedSystem& sys)
{
    for (const auto& name : v.used_vars())
        if (std::find(sys.state->begin(), sys.state->end(), name) == sys.state->end())
            throw std::invalid_argument(fmt::format("V mentions {}, which is not a state variable", name));
    return v.rebase(sys.state);
}

Provenance lyap(std::string detail) { return {Provenance::Kind::Lyapunov, {}, Direction::Into, std::move(detail)}; }

Formula origin(const SwitchedSystem& sys)
{
    std::vector<Formula> eqs;
    for (const auto& x : *sys.state)
        eqs.push_back(Formula::compare_zero(Term::variable(x, sys.state), Cmp::Eq));
    return f_and(std::move(eqs));
}

std::string label_of(const std::string& mode) { return mode.empty() ? "V" : "V_" + mode; }

Obligation positivity_obligation(const SwitchedSystem& sys, const std::string& mode, const Term& v)
{
    std::string name = mode.empty() ? "lyap_pos" : "lyap_pos_" + mode;
    return make_obligation(name, sys.state, f_or({Formula::compare_zero(v, Cmp::Gt), origin(sys)}), std::nullopt,
                           lyap(mode.empty() ? "positive" : "positive(" + mode + ")"));
}

/// V(0) = 0 and V > 0 away from the origin.
Verdict check_positive(const SwitchedSystem& sys, const std::string& mode, const Term& v, const DecideConfig& cfg,
                       std::vector<std::string>& lines)
{
    const std::string name = label_of(mode);
    Rational c = v.constant_term();
    if (c != 0) {
        std::map<std::string, Rational> at0;
        for (const auto& x : *sys.state)
            at0.emplace(x, Rational(0));
        lines.push_back(fmt::format("{}(0) = {}: falsified", name, to_string(c)));
        return Verdict::falsified(fmt::format("{}(0) = {} is not zero", name, to_string(c)), at0);
    }
    NonnegCertificate nc = certify_nonneg(v);
    if (nc.definite) {
        lines.push_back(fmt::format("{} = {} positive definite by {}: valid-exact", name, v.to_string(), nc.method));
        return Verdict::valid(fmt::format("{} positive definite by {}", name, nc.method));
    }
    Verdict out = decide_formula(positivity_obligation(sys, mode, v), cfg);
    lines.push_back(fmt::format("{} = {} positive definite: {}", name, v.to_string(), out.label()));
    return out;
}

std::vector<std::pair<std::string, Term>> derivatives_of(const SwitchedSystem& sys, const LyapunovCertificate& cert)
{
    std::vector<std::pair<std::string, Term>> out;
    for (const auto& m : sys.modes)
        out.emplace_back(m.id, lie_derivative(over_state(cert.function(m.id), sys), m.field).rebase(sys.state));
    return out;
}

Obligation decrease_obligation(const SwitchedSystem& sys, const Mode& m, const Term& lv, bool on_domain)
{
    Formula core = Formula::compare_zero(lv, Cmp::Le);
    if (on_domain)
        core = f_implies(m.domain, core);
    return make_obligation("lyap_decrease_" + m.id, sys.state, core, std::nullopt, lyap("decrease(" + m.id + ")"));
}

Verdict check_decrease(const SwitchedSystem& sys, const LyapunovCertificate& cert, const Mode& m, const Term& v,
                       const DecideConfig& cfg, std::vector<std::string>& lines)
{
    const bool on_domain = cert.kind == CertificateKind::StateDomain;
    const Term lv = lie_derivative(v, m.field).rebase(sys.state);
    const std::string what = fmt::format("L_{} V <= 0{}", m.id, on_domain ? " on domain" : "");

    NonnegCertificate nc = certify_nonneg(-lv);
    if (nc.nonneg) {
        lines.push_back(fmt::format("{}: -L_{} V = {} >= 0 by {}: valid-exact", what, m.id, (-lv).to_string(),
                                    nc.method));
        return Verdict::valid(fmt::format("{} by {}", what, nc.method));
    }
    if (on_domain) {
        std::vector<Term> atoms;
        for (const auto& a : sign_atoms(normalize(m.domain)))
            atoms.push_back(a.p);
        std::vector<Rational> sigma(atoms.size(), Rational(0));
        bool given = false;
        for (const auto& [key, s] : cert.multipliers) {
            if (key.first != m.id)
                continue;
            if (key.second > atoms.size())
                throw std::invalid_argument(fmt::format("multiplier for ({}, atom{}) but the domain has {} atom(s)",
                                                        m.id, key.second, atoms.size()));
            sigma[key.second - 1] = s;
            given = true;
        }
        if (given) {
            // Multipliers refer to the primitive part of V.
            const Rational c = v.content();
            const Term neg = -lv.scaled(Rational(1) / c);
            if (auto how = certify_on(neg, atoms, sigma)) {
                std::string scale = c == 1 ? std::string() : fmt::format(" (V scaled by {})", to_string(1 / c));
                lines.push_back(fmt::format("{}: {}{}: valid-exact", what, *how, scale));
                return Verdict::valid(what + ": " + *how);
            }
        }
    }
    Verdict out = decide_formula(decrease_obligation(sys, m, lv, on_domain), cfg);
    if (out.is_falsified()) {
        out.reason = fmt::format("L_{} V = {} > 0 at {}", m.id, to_string(lv.eval(out.witness)),
                                 out.witness_text(*sys.state));
    }
    lines.push_back(fmt::format("{}: {}{}", what, out.label(), out.is_falsified() ? ": " + out.reason : ""));
    return out;
}

} // namespace

LyapunovReport check_common_lyapunov(const SwitchedSystem& sys, const LyapunovCertificate& cert,
                                     const DecideConfig& cfg)
{
    if (cert.kind == CertificateKind::MultipleDwell)
        throw std::invalid_argument("multiple-dwell certificates need the dwell-time check");
    cert.validate();
    sys.validate();
    const Term v = over_state(cert.function(""), sys);

    LyapunovReport rep;
    rep.derivatives = derivatives_of(sys, cert);
    std::vector<Verdict> parts{check_positive(sys, "", v, cfg, rep.lines)};
    for (const auto& m : sys.modes)
        parts.push_back(check_decrease(sys, cert, m, v, cfg, rep.lines));

    std::string norm;
    for (const auto& x : *sys.state)
        norm += (norm.empty() ? "" : " + ") + x + "^2";
    rep.invariant = fmt::format("{} < k & {} < eps^2", v.to_string(), norm);
    rep.verdict = combine(parts, fmt::format("{} Lyapunov function {}", to_string(cert.kind), v.to_string()));
    for (const auto& p : parts)
        if (p.is_falsified()) {
            rep.verdict.reason = p.reason;
            break;
        }
    return rep;
}

const std::vector<Rational>& default_decay_rates()
{
    static const std::vector<Rational> rates{Rational(1), Rational(1, 2), Rational(1, 4), Rational(1, 8)};
    return rates;
}

namespace {

struct DwellParts {
    std::map<std::string, Term> v;
    std::vector<Verdict> verdicts;
    std::map<std::string, Rational> lambda;
    std::optional<Rational> mu;
};

Term decay_term(const Term& v, const Mode& m, const Rational& lambda, const SwitchedSystem& sys)
{
    return (lie_derivative(v, m.field) + v.scaled(lambda)).rebase(sys.state);
}

Obligation decay_obligation(const SwitchedSystem& sys, const Mode& m, const Term& t, const Rational& lambda)
{
    return make_obligation("lyap_decay_" + m.id, sys.state, Formula::compare_zero(t, Cmp::Le), std::nullopt,
                           lyap(fmt::format("decay({}, {})", m.id, to_string(lambda))));
}

Obligation compat_obligation(const SwitchedSystem& sys, const std::string& p, const std::string& q, const Term& t,
                             const Rational& mu)
{
    return make_obligation(fmt::format("lyap_compat_{}_{}", p, q), sys.state, Formula::compare_zero(t, Cmp::Ge),
                           std::nullopt, lyap(fmt::format("compat({}, {}, {})", p, q, to_string(mu))));
}

/// Candidate μ values: 1 and every coefficient ratio ≥ 1 between two
/// functions on a shared monomial, ascending.
std::vector<Rational> mu_candidates(const std::map<std::string, Term>& v)
{
    std::set<Rational> out{Rational(1)};
    for (const auto& [p, vp] : v)
        for (const auto& [q, vq] : v) {
            if (p == q)
                continue;
            for (const auto& [e, c] : vp.monomials()) {
                auto it = vq.monomials().find(e);
                if (it == vq.monomials().end())
                    continue;
                Rational r = c / it->second;
                if (r >= 1)
                    out.insert(r);
            }
        }
    return {out.begin(), out.end()};
}

bool compatible(const std::map<std::string, Term>& v, const Rational& mu)
{
    for (const auto& [p, vp] : v)
        for (const auto& [q, vq] : v)
            if (p != q && !certify_nonneg(vq.scaled(mu) - vp).nonneg)
                return false;
    return true;
}

DwellParts dwell_parts(const SwitchedSystem& sys, const LyapunovCertificate& cert, const DecideConfig& cfg,
                       std::vector<std::string>* lines)
{
    auto note = [&](std::string s) {
        if (lines)
            lines->push_back(std::move(s));
    };
    DwellParts out;
    for (const auto& m : sys.modes)
        out.v.emplace(m.id, over_state(cert.function(m.id), sys));

    for (const auto& m : sys.modes) {
        const Term& v = out.v.at(m.id);
        std::vector<Rational> rates;
        bool given = true;
        if (auto it = cert.lambda.find(m.id); it != cert.lambda.end())
            rates = {it->second};
        else if (auto all = cert.lambda.find(""); all != cert.lambda.end())
            rates = {all->second};
        else {
            rates = default_decay_rates();
            given = false;
        }
        bool found = false;
        for (const auto& l : rates) {
            Term t = decay_term(v, m, l, sys);
            NonnegCertificate nc = certify_nonneg(-t);
            if (!nc.nonneg)
                continue;
            out.lambda.emplace(m.id, l);
            note(fmt::format("decay {}: L_{} V_{} + {}*V_{} = {} <= 0 by {}: valid-exact", m.id, m.id, m.id,
                             to_string(l), m.id, t.to_string(), nc.method));
            out.verdicts.push_back(Verdict::valid(fmt::format("decay rate {} for mode {}", to_string(l), m.id)));
            found = true;
            break;
        }
        if (found)
            continue;
        // No certificate: look for a witness against the weakest candidate.
        const Rational& weakest = rates.back();
        Verdict w = decide_formula(decay_obligation(sys, m, decay_term(v, m, weakest, sys), weakest), cfg);
        if (w.is_valid()) {
            out.lambda.emplace(m.id, weakest);
            note(fmt::format("decay {}: rate {}: {}", m.id, to_string(weakest), w.label()));
            out.verdicts.push_back(w);
            continue;
        }
        if (w.is_falsified() && given)
            w.reason = fmt::format("decay rate {} fails for mode {} at {}", to_string(weakest), m.id,
                                   w.witness_text(*sys.state));
        else if (w.is_falsified())
            w.reason = fmt::format("no decay rate among the candidates holds for mode {}: rate {} fails at {}",
                                   m.id, to_string(weakest), w.witness_text(*sys.state));
        else
            w.reason = fmt::format("no decay rate certified for mode {}", m.id);
        note(fmt::format("decay {}: {}: {}", m.id, w.label(), w.reason));
        out.verdicts.push_back(w);
    }

    std::vector<Rational> mus = cert.mu ? std::vector<Rational>{*cert.mu} : mu_candidates(out.v);
    for (const auto& mu : mus)
        if (compatible(out.v, mu)) {
            out.mu = mu;
            break;
        }
    if (out.mu) {
        for (const auto& [p, vp] : out.v)
            for (const auto& [q, vq] : out.v)
                if (p != q)
                    note(fmt::format("compat {}/{}: {}*V_{} - V_{} = {} >= 0: valid-exact", p, q, to_string(*out.mu),
                                     q, p, (vq.scaled(*out.mu) - vp).to_string()));
        out.verdicts.push_back(Verdict::valid(fmt::format("mu = {}", to_string(*out.mu))));
    } else if (cert.mu) {
        Verdict first = Verdict::unknown("no certificate for the supplied mu");
        for (const auto& [p, vp] : out.v)
            for (const auto& [q, vq] : out.v) {
                if (p == q || !first.is_unknown())
                    continue;
                Term t = vq.scaled(*cert.mu) - vp;
                if (certify_nonneg(t).nonneg)
                    continue;
                Verdict w = decide_formula(compat_obligation(sys, p, q, t, *cert.mu), cfg);
                if (w.is_falsified()) {
                    w.reason = fmt::format("V_{} > {}*V_{} at {}", p, to_string(*cert.mu), q,
                                           w.witness_text(*sys.state));
                    first = w;
                }
            }
        note(fmt::format("compat: {}: {}", first.label(), first.reason));
        out.verdicts.push_back(first);
    } else {
        Verdict u = Verdict::unknown("no mu among the coefficient ratios certified");
        note("compat: unknown: " + u.reason);
        out.verdicts.push_back(u);
    }
    return out;
}

void require_dwell(const SwitchedSystem& sys, const LyapunovCertificate& cert)
{
    if (cert.kind != CertificateKind::MultipleDwell)
        throw std::invalid_argument("the dwell-time check needs a multiple-dwell certificate");
    cert.validate();
    sys.validate();
    if (!std::holds_alternative<mechanism::Slow>(sys.mechanism))
        throw std::invalid_argument(
            fmt::format("the dwell-time check applies to slow switching, not {}", mechanism_name(sys.mechanism)));
    for (const auto& [mode, v] : cert.functions)
        if (sys.mode_index(mode) == sys.modes.size())
            throw std::invalid_argument("certificate names unknown mode " + mode);
}

} // namespace

DwellReport check_multiple_lyapunov_dwell(const SwitchedSystem& sys, const LyapunovCertificate& cert,
                                          std::optional<Rational> tau, const DecideConfig& cfg)
{
    require_dwell(sys, cert);
    DwellReport rep;
    rep.tau = tau ? *tau : std::get<mechanism::Slow>(sys.mechanism).tau;
    if (rep.tau <= 0)
        throw std::invalid_argument("dwell time must be positive");
    rep.derivatives = derivatives_of(sys, cert);

    std::vector<Verdict> parts;
    for (const auto& m : sys.modes)
        parts.push_back(check_positive(sys, m.id, over_state(cert.function(m.id), sys), cfg, rep.lines));
    DwellParts dp = dwell_parts(sys, cert, cfg, &rep.lines);
    parts.insert(parts.end(), dp.verdicts.begin(), dp.verdicts.end());
    rep.lambda = dp.lambda;
    rep.mu = dp.mu.value_or(Rational(0));

    Verdict base = combine(parts);
    if (!base.is_valid() || dp.lambda.size() != sys.modes.size() || !dp.mu) {
        rep.bound = std::numeric_limits<double>::quiet_NaN();
        rep.verdict = base;
        for (const auto& p : parts)
            if (!p.is_valid()) {
                rep.verdict.reason = p.reason;
                rep.verdict.witness = p.witness;
                break;
            }
        return rep;
    }

    Rational min_lambda = dp.lambda.begin()->second;
    for (const auto& [mode, l] : dp.lambda)
        min_lambda = std::min(min_lambda, l);
    rep.bound = std::log(to_double(*dp.mu)) / to_double(min_lambda);
    const double t = to_double(rep.tau);
    rep.lines.push_back(fmt::format("dwell bound ln({})/({}) = {:.12g}; tau = {}", to_string(*dp.mu),
                                    to_string(min_lambda), rep.bound, to_string(rep.tau)));
    if (t > rep.bound + 1e-12) {
        rep.verdict = Verdict::valid(
            fmt::format("dwell time {} exceeds bound {:.12g}", to_string(rep.tau), rep.bound), base.exact);
    } else {
        rep.verdict = Verdict::falsified(
            fmt::format("dwell time {} does not exceed bound {:.12g}", to_string(rep.tau), rep.bound));
    }
    return rep;
}

std::vector<Obligation> lyapunov_obligations(const SwitchedSystem& sys, const LyapunovCertificate& cert)
{
    std::vector<Obligation> out;
    if (cert.kind != CertificateKind::MultipleDwell) {
        cert.validate();
        const Term v = over_state(cert.function(""), sys);
        out.push_back(positivity_obligation(sys, "", v));
        for (const auto& m : sys.modes)
            out.push_back(decrease_obligation(sys, m, lie_derivative(v, m.field).rebase(sys.state),
                                              cert.kind == CertificateKind::StateDomain));
        return out;
    }
    require_dwell(sys, cert);
    DwellParts dp = dwell_parts(sys, cert, {}, nullptr);
    for (const auto& m : sys.modes)
        out.push_back(positivity_obligation(sys, m.id, dp.v.at(m.id)));
    for (const auto& m : sys.modes) {
        auto it = dp.lambda.find(m.id);
        Rational l = it != dp.lambda.end() ? it->second : default_decay_rates().back();
        out.push_back(decay_obligation(sys, m, decay_term(dp.v.at(m.id), m, l, sys), l));
    }
    Rational mu = dp.mu.value_or(cert.mu.value_or(Rational(1)));
    for (const auto& [p, vp] : dp.v)
        for (const auto& [q, vq] : dp.v)
            if (p != q)
                out.push_back(compat_obligation(sys, p, q, vq.scaled(mu) - vp, mu));
    return out;
}

StabilitySpec gen_stability_spec(const SwitchedSystem& sys)
{
    if (!std::holds_alternative<mechanism::Arbitrary>(sys.mechanism) &&
        !std::holds_alternative<mechanism::StateDependent>(sys.mechanism) &&
        !std::holds_alternative<mechanism::Slow>(sys.mechanism))
        throw std::invalid_argument(
            fmt::format("no stability specification for {} switching", mechanism_name(sys.mechanism)));
    StabilitySpec spec;
    spec.program = sys.program();
    spec.state = sys.state;

    std::vector<std::string> taken(sys.state->begin(), sys.state->end());
    Auxiliaries aux = sys.auxiliaries();
    taken.push_back(aux.clock);
    taken.push_back(aux.flag);
    spec.epsilon = fresh_name("eps", taken);
    taken.push_back(spec.epsilon);
    spec.delta = fresh_name("delta", taken);

    VarList all(sys.state->begin(), sys.state->end());
    all.push_back(spec.epsilon);
    all.push_back(spec.delta);
    VarListPtr vars = make_vars(std::move(all));
    spec.norm2 = Term(vars);
    for (const auto& x : *sys.state)
        spec.norm2 += Term::variable(x, vars).pow(2);
    spec.pre = Formula::atom(spec.norm2, Cmp::Lt, Term::variable(spec.delta, vars).pow(2));
    spec.post = Formula::atom(spec.norm2, Cmp::Lt, Term::variable(spec.epsilon, vars).pow(2));
    return spec;
}

std::string StabilitySpec::to_string() const
{
    std::string xs;
    for (const auto& x : *state)
        xs += fmt::format("forall {}. ", x);
    return fmt::format("forall {e}. {e} > 0 -> exists {d}. {d} > 0 & {xs}({pre} -> [{prog}] {post})",
                       fmt::arg("e", epsilon), fmt::arg("d", delta), fmt::arg("xs", xs),
                       fmt::arg("pre", pre.to_string()), fmt::arg("prog", program->to_string()),
                       fmt::arg("post", post.to_string()));
}

} // namespace switchkit
