#include "switchkit/symbolic.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <stdexcept>

namespace switchkit {

std::string Provenance::to_string() const
{
    switch (kind) {
    case Kind::Cond1:
        return "cond1";
    case Kind::Cond2:
        return "cond2(" + mode + ")";
    case Kind::Cond3:
        return "cond3";
    case Kind::SaiState:
        return fmt::format("sai_state({}, {})", mode, switchkit::to_string(direction));
    case Kind::SaiSlow:
        return fmt::format("sai_slow({}, {})", mode, switchkit::to_string(direction));
    case Kind::Lyapunov:
        return "lyapunov(" + detail + ")";
    }
    return "?";
}

Formula Obligation::closed() const { return universal_closure(*vars, core); }

Obligation make_obligation(std::string name, VarListPtr vars, Formula core, std::optional<Formula> relaxed,
                           Provenance provenance)
{
    auto check = [&](const Formula& f) {
        if (!f.is_quantifier_free())
            throw std::invalid_argument("obligation core must be quantifier-free: " + f.to_string());
        for (const auto& v : f.free_vars())
            if (std::find(vars->begin(), vars->end(), v) == vars->end())
                throw std::invalid_argument(fmt::format("obligation {} mentions undeclared variable {}", name, v));
    };
    check(core);
    if (relaxed) {
        check(*relaxed);
        if (*relaxed == core)
            relaxed.reset();
    }
    return Obligation{std::move(name), std::move(vars), std::move(core), std::move(relaxed), std::move(provenance)};
}

Verdict decide_formula(const Obligation& ob, const DecideConfig& cfg)
{
    std::string exact_reason;
    if (cfg.exact_layer) {
        Verdict v = prove_exact(ob.core, cfg);
        if (v.is_valid())
            return v;
        exact_reason = v.reason;
    }
    Verdict f = falsify(ob.weak_core(), *ob.vars, cfg);
    if (f.is_falsified())
        return f;
    std::string reason = f.reason;
    if (!exact_reason.empty())
        reason = exact_reason + "; " + reason;
    if (!ob.exact())
        reason += "; progress cascade cut at the rank bound";
    Verdict u = Verdict::unknown(reason);
    u.samples = f.samples;
    return u;
}

namespace {

void require_state_dependent(const SwitchedSystem& sys, const char* what)
{
    if (!std::holds_alternative<mechanism::StateDependent>(sys.mechanism))
        throw std::invalid_argument(fmt::format("{} applies to state-dependent switching, not {}", what,
                                                mechanism_name(sys.mechanism)));
}

} // namespace

Obligation coverage_obligation(const SwitchedSystem& sys)
{
    std::vector<Formula> domains;
    for (const auto& m : sys.modes)
        domains.push_back(m.domain);
    return make_obligation("cond1", sys.state, f_or(std::move(domains)), std::nullopt,
                           {Provenance::Kind::Cond1, {}, Direction::Into, {}});
}

std::vector<Obligation> jump_obligations(const SwitchedSystem& sys, unsigned rank)
{
    std::vector<Obligation> out;
    for (const auto& m : sys.modes) {
        ProgressFormula in = local_progress(m.field, m.domain, rank, Direction::Into);
        ProgressFormula ex = local_progress(m.field, m.domain, rank, Direction::Exit);
        Formula core = f_implies(f_or({in.formula, ex.formula}), m.domain);
        Formula relaxed = f_implies(f_or({in.under, ex.under}), m.domain);
        out.push_back(make_obligation("cond2_" + m.id, sys.state, core, relaxed,
                                      {Provenance::Kind::Cond2, m.id, Direction::Into, {}}));
    }
    return out;
}

Obligation stuck_obligation(const SwitchedSystem& sys, unsigned rank)
{
    std::vector<Formula> under, over;
    for (const auto& m : sys.modes) {
        ProgressFormula p = local_progress(m.field, m.domain, rank, Direction::Into);
        under.push_back(p.under);
        over.push_back(p.formula);
    }
    return make_obligation("cond3", sys.state, f_or(std::move(under)), f_or(std::move(over)),
                           {Provenance::Kind::Cond3, {}, Direction::Into, {}});
}

Verdict check_coverage(const SwitchedSystem& sys, const DecideConfig& cfg)
{
    require_state_dependent(sys, "coverage");
    return decide_formula(coverage_obligation(sys), cfg);
}

std::vector<Verdict> check_no_infinitesimal_jumps(const SwitchedSystem& sys, unsigned rank, const DecideConfig& cfg)
{
    require_state_dependent(sys, "the jump condition");
    std::vector<Verdict> out;
    for (const auto& ob : jump_obligations(sys, rank))
        out.push_back(decide_formula(ob, cfg));
    return out;
}

Verdict check_no_stuck_states(const SwitchedSystem& sys, unsigned rank, const DecideConfig& cfg)
{
    require_state_dependent(sys, "the stuck-state condition");
    return decide_formula(stuck_obligation(sys, rank), cfg);
}

SwitchedSystem hysteresis_inflate(const SwitchedSystem& sys, const Rational& eps)
{
    if (eps <= 0)
        throw std::invalid_argument("hysteresis width must be positive");
    SwitchedSystem out = sys;
    for (auto& m : out.modes) {
        Formula nd = normalize(m.domain);
        m.domain = map_sign_atoms(nd, [&](const SignAtom& a) {
            return Formula::compare_zero(a.p + Term::constant(eps, a.p.vars()), Cmp::Ge);
        });
    }
    return out;
}

std::vector<Obligation> ode_invariance_obligations(const Mode& mode, const VarListPtr& vars, const Formula& inv,
                                                   unsigned rank, Provenance::Kind kind)
{
    const char* prefix = kind == Provenance::Kind::SaiState ? "sai_state" : "sai_slow";
    Formula q = kind == Provenance::Kind::SaiState ? mode.domain : Formula::truth();
    Formula inside = normalize(inv);
    Formula outside = normalize_negation(inv);

    std::vector<Obligation> out;
    for (Direction dir : {Direction::Into, Direction::Exit}) {
        const Formula& start = dir == Direction::Into ? inside : outside;
        ProgressFormula dq = local_progress(mode.field, q, rank, dir);
        ProgressFormula ds = local_progress(mode.field, start, rank, dir);
        Formula core = f_implies(f_and({start, q, dq.formula}), ds.under);
        Formula relaxed = f_implies(f_and({start, q, dq.under}), ds.formula);
        out.push_back(make_obligation(fmt::format("{}_{}_{}", prefix, mode.id, to_string(dir)), vars, core, relaxed,
                                      {kind, mode.id, dir, {}}));
    }
    return out;
}

std::vector<Obligation> gen_invariance_obligation(const SwitchedSystem& sys, const Formula& inv, unsigned rank)
{
    if (!inv.is_quantifier_free())
        throw std::invalid_argument("invariant must be quantifier-free");
    for (const auto& v : inv.free_vars())
        if (std::find(sys.state->begin(), sys.state->end(), v) == sys.state->end())
            throw std::invalid_argument("invariant mentions " + v + ", which is not a state variable");
    Provenance::Kind kind;
    if (std::holds_alternative<mechanism::StateDependent>(sys.mechanism))
        kind = Provenance::Kind::SaiState;
    else if (std::holds_alternative<mechanism::Arbitrary>(sys.mechanism) ||
             std::holds_alternative<mechanism::Slow>(sys.mechanism))
        kind = Provenance::Kind::SaiSlow;
    else
        throw std::invalid_argument(
            fmt::format("no invariance reduction for {} switching", mechanism_name(sys.mechanism)));
    std::vector<Obligation> out;
    for (const auto& m : sys.modes) {
        auto part = ode_invariance_obligations(m, sys.state, inv, rank, kind);
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

} // namespace switchkit
