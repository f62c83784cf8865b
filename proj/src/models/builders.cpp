#include "switchkit/models.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace switchkit {

namespace {

Term var_term(const std::string& name) { return Term::variable(name, make_vars({name})); }
Term num(const Rational& c) { return Term::constant(c); }

void require_modes(const std::vector<Mode>& modes)
{
    if (modes.empty())
        throw std::invalid_argument("empty mode list");
}

void require_true_domains(const std::vector<Mode>& modes, const char* builder)
{
    for (const auto& m : modes)
        if (!m.domain.is_true())
            throw std::invalid_argument(std::string(builder) + " requires trivial domains; mode " + m.id +
                                        " has domain " + m.domain.to_string());
}

// ?u = p; {x' = f_p, t' = 1 & Q_p}
ProgramPtr flagged_ode(const Mode& m, std::size_t index, const Auxiliaries& aux)
{
    Formula pick = Formula::atom(var_term(aux.flag), Cmp::Eq, num(Rational(static_cast<long>(index + 1))));
    return p_seq(p_test(pick), p_ode(m.field.with(aux.clock, num(1)), m.domain));
}

} // namespace

const char* mechanism_name(const Mechanism& m)
{
    static const char* names[] = {"arbitrary", "state", "slow", "fast", "controlled"};
    return names[m.index()];
}

std::string fresh_name(const std::string& base, const std::vector<std::string>& taken)
{
    auto free = [&](const std::string& n) { return std::find(taken.begin(), taken.end(), n) == taken.end(); };
    if (free(base))
        return base;
    for (int i = 1;; ++i) {
        std::string candidate = base + "_" + std::to_string(i);
        if (free(candidate))
            return candidate;
    }
}

std::size_t SwitchedSystem::mode_index(const std::string& id) const
{
    for (std::size_t i = 0; i < modes.size(); ++i)
        if (modes[i].id == id)
            return i;
    return modes.size();
}

Auxiliaries SwitchedSystem::auxiliaries() const
{
    if (const auto* c = std::get_if<mechanism::Controlled>(&mechanism))
        return {c->clock, c->flag};
    std::vector<std::string> taken(state->begin(), state->end());
    std::string clock = fresh_name("t", taken);
    taken.push_back(clock);
    return {clock, fresh_name("u", taken)};
}

void SwitchedSystem::validate() const
{
    if (!state || state->empty())
        throw std::invalid_argument("no state variables declared");
    std::set<std::string> names(state->begin(), state->end());
    if (names.size() != state->size())
        throw std::invalid_argument("duplicate state variable");
    if (modes.empty())
        throw std::invalid_argument("no modes declared");
    std::set<std::string> ids;
    for (const auto& m : modes) {
        if (!ids.insert(m.id).second)
            throw std::invalid_argument("duplicate mode id '" + m.id + "'");
        if (m.field.equations.size() != state->size())
            throw std::invalid_argument("mode " + m.id + " must give one equation per state variable");
        for (const auto& v : *state)
            if (!m.field.rhs(v))
                throw std::invalid_argument("mode " + m.id + " has no equation for " + v);
        for (const auto& [v, rhs] : m.field.equations)
            for (const auto& used : rhs.used_vars())
                if (!names.count(used))
                    throw std::invalid_argument("mode " + m.id + " mentions undeclared variable " + used);
        if (!m.domain.is_quantifier_free())
            throw std::invalid_argument("mode " + m.id + " has a quantified domain");
        for (const auto& used : m.domain.free_vars())
            if (!names.count(used))
                throw std::invalid_argument("domain of mode " + m.id + " mentions undeclared variable " + used);
    }
    std::visit(
        [&](const auto& mech) {
            using T = std::decay_t<decltype(mech)>;
            if constexpr (std::is_same_v<T, mechanism::Slow>) {
                if (mech.tau <= 0)
                    throw std::invalid_argument("dwell time must be positive");
            } else if constexpr (std::is_same_v<T, mechanism::Fast>) {
                if (mech.zeta.size() != modes.size())
                    throw std::invalid_argument("fast switching needs one duration per mode");
                for (const auto& z : mech.zeta)
                    if (z <= 0)
                        throw std::invalid_argument("switching durations must be positive");
            } else if constexpr (std::is_same_v<T, mechanism::Controlled>) {
                if (!mech.init || !mech.controller)
                    throw std::invalid_argument("controlled switching needs init and controller programs");
                if (names.count(mech.clock) || names.count(mech.flag) || mech.clock == mech.flag)
                    throw std::invalid_argument("clock and flag must be distinct from the state variables");
            }
        },
        mechanism);
}

ProgramPtr SwitchedSystem::program() const
{
    return std::visit(
        [&](const auto& mech) -> ProgramPtr {
            using T = std::decay_t<decltype(mech)>;
            if constexpr (std::is_same_v<T, mechanism::Arbitrary>)
                return build_arbitrary(modes);
            else if constexpr (std::is_same_v<T, mechanism::StateDependent>)
                return build_state(modes);
            else if constexpr (std::is_same_v<T, mechanism::Slow>)
                return build_slow(modes, mech.tau, auxiliaries());
            else if constexpr (std::is_same_v<T, mechanism::Fast>)
                return build_fast(modes, mech.zeta, auxiliaries());
            else
                return build_controlled(mech.init, mech.controller, modes, auxiliaries(), *state);
        },
        mechanism);
}

ProgramPtr build_arbitrary(const std::vector<Mode>& modes)
{
    require_modes(modes);
    require_true_domains(modes, "arbitrary switching");
    return build_state(modes);
}

ProgramPtr build_state(const std::vector<Mode>& modes)
{
    require_modes(modes);
    std::vector<ProgramPtr> branches;
    for (const auto& m : modes)
        branches.push_back(p_ode(m.field, m.domain));
    return p_loop(p_choice_all(branches));
}

ProgramPtr build_reset(std::size_t mode_count, const Auxiliaries& aux)
{
    std::vector<ProgramPtr> picks;
    for (std::size_t p = 1; p <= mode_count; ++p)
        picks.push_back(p_assign(aux.flag, num(Rational(static_cast<long>(p)))));
    return p_seq(p_assign(aux.clock, num(0)), p_choice_all(picks));
}

ProgramPtr build_slow_controller(std::size_t mode_count, const Rational& tau, const Auxiliaries& aux)
{
    return p_if(Formula::atom(var_term(aux.clock), Cmp::Ge, num(tau)), build_reset(mode_count, aux));
}

ProgramPtr build_fast_init(const Auxiliaries& aux)
{
    return p_seq(p_assign(aux.clock, num(0)), p_assign(aux.flag, num(1)));
}

ProgramPtr build_fast_controller(const std::vector<Rational>& zeta, const Auxiliaries& aux)
{
    const auto m = static_cast<long>(zeta.size());
    Term u = var_term(aux.flag), t = var_term(aux.clock);
    ProgramPtr wrap = p_if(Formula::atom(u, Cmp::Gt, num(Rational(m))), p_assign(aux.flag, num(1)));
    ProgramPtr advance = p_seq(p_assign(aux.clock, num(0)), p_seq(p_assign(aux.flag, u + num(1)), wrap));
    std::vector<ProgramPtr> cases;
    for (long p = 1; p <= m; ++p) {
        Formula due = f_and({Formula::atom(u, Cmp::Eq, num(Rational(p))),
                             Formula::atom(t, Cmp::Eq, num(zeta[static_cast<std::size_t>(p - 1)]))});
        cases.push_back(p_if(due, advance));
    }
    return p_choice_all(cases);
}

ProgramPtr build_slow(const std::vector<Mode>& modes, const Rational& tau, const Auxiliaries& aux)
{
    require_modes(modes);
    if (tau <= 0)
        throw std::invalid_argument("dwell time must be positive");
    require_true_domains(modes, "slow switching");
    return build_controlled(build_reset(modes.size(), aux), build_slow_controller(modes.size(), tau, aux), modes,
                            aux, {});
}

ProgramPtr build_fast(const std::vector<Mode>& modes, const std::vector<Rational>& zeta, const Auxiliaries& aux)
{
    require_modes(modes);
    if (zeta.size() != modes.size())
        throw std::invalid_argument("fast switching needs one duration per mode");
    for (const auto& z : zeta)
        if (z <= 0)
            throw std::invalid_argument("switching durations must be positive");
    require_true_domains(modes, "fast switching");
    std::vector<Mode> limited = modes;
    for (std::size_t p = 0; p < modes.size(); ++p)
        limited[p].domain = Formula::atom(var_term(aux.clock), Cmp::Le, num(zeta[p]));
    return build_controlled(build_fast_init(aux), build_fast_controller(zeta, aux), limited, aux, {});
}

ProgramPtr build_controlled(const ProgramPtr& init, const ProgramPtr& controller, const std::vector<Mode>& modes,
                            const Auxiliaries& aux, const std::vector<std::string>& state_vars)
{
    require_modes(modes);
    for (const auto* part : {&init, &controller}) {
        if (!*part)
            throw std::invalid_argument("missing init or controller program");
        for (const auto& v : (*part)->assigned_vars())
            if (std::find(state_vars.begin(), state_vars.end(), v) != state_vars.end())
                throw std::invalid_argument("controller assigns state variable '" + v + "'");
        if (!(*part)->odes().empty())
            throw std::invalid_argument("init and controller programs must be discrete");
    }
    std::vector<ProgramPtr> branches;
    for (std::size_t p = 0; p < modes.size(); ++p)
        branches.push_back(flagged_ode(modes[p], p, aux));
    return p_seq(init, p_loop(p_seq(controller, p_choice_all(branches))));
}

} // namespace switchkit
