#include "switchkit/models.hpp"
#include "switchkit/parser.hpp"

#include <algorithm>

namespace switchkit {

namespace {

VarListPtr with_aux(const VarListPtr& state, const std::string& clock, const std::string& flag)
{
    VarList v = *state;
    v.push_back(clock);
    v.push_back(flag);
    return make_vars(std::move(v));
}

ProgramPtr braced_program(Parser& p)
{
    p.expect(Tok::LBrace, "'{'");
    ProgramPtr prog = p.program();
    p.expect(Tok::RBrace, "'}'");
    return prog;
}

Mechanism parse_mechanism(Parser& p, const VarListPtr& state)
{
    std::size_t at = p.peek().offset;
    std::string kind = p.ident("mechanism");
    if (kind == "arbitrary")
        return mechanism::Arbitrary{};
    if (kind == "state")
        return mechanism::StateDependent{};
    if (kind == "slow") {
        p.expect(Tok::LParen, "'('");
        p.expect_word("tau");
        p.expect(Tok::Eq, "'='");
        Rational tau = p.rational();
        p.expect(Tok::RParen, "')'");
        return mechanism::Slow{tau};
    }
    if (kind == "fast") {
        p.expect(Tok::LParen, "'('");
        std::vector<Rational> zeta{p.rational()};
        while (p.accept(Tok::Comma))
            zeta.push_back(p.rational());
        p.expect(Tok::RParen, "')'");
        return mechanism::Fast{std::move(zeta)};
    }
    if (kind == "controlled") {
        mechanism::Controlled c;
        p.expect(Tok::LParen, "'('");
        if (p.accept_word("clock")) {
            p.expect(Tok::Eq, "'='");
            c.clock = p.ident("clock name");
            p.expect(Tok::Comma, "','");
        }
        if (p.accept_word("flag")) {
            p.expect(Tok::Eq, "'='");
            c.flag = p.ident("flag name");
            p.expect(Tok::Comma, "','");
        }
        VarListPtr saved = p.vars();
        p.set_vars(with_aux(state, c.clock, c.flag));
        p.expect_word("init");
        p.expect(Tok::Eq, "'='");
        c.init = braced_program(p);
        p.expect(Tok::Comma, "','");
        p.expect_word("controller");
        p.expect(Tok::Eq, "'='");
        c.controller = braced_program(p);
        p.expect(Tok::RParen, "')'");
        p.set_vars(saved);
        return c;
    }
    p.fail_at("unknown mechanism '" + kind + "'", at);
}

std::string mechanism_text(const Mechanism& m)
{
    return std::visit(
        [](const auto& mech) -> std::string {
            using T = std::decay_t<decltype(mech)>;
            if constexpr (std::is_same_v<T, mechanism::Arbitrary>) {
                return "arbitrary";
            } else if constexpr (std::is_same_v<T, mechanism::StateDependent>) {
                return "state";
            } else if constexpr (std::is_same_v<T, mechanism::Slow>) {
                return "slow(tau = " + to_string(mech.tau) + ")";
            } else if constexpr (std::is_same_v<T, mechanism::Fast>) {
                std::string out = "fast(";
                for (std::size_t i = 0; i < mech.zeta.size(); ++i)
                    out += (i ? ", " : "") + to_string(mech.zeta[i]);
                return out + ")";
            } else {
                return "controlled(clock = " + mech.clock + ", flag = " + mech.flag + ", init = {" +
                       mech.init->to_string() + "}, controller = {" + mech.controller->to_string() + "})";
            }
        },
        m);
}

} // namespace

SwitchedSystem parse_model(std::string_view text)
{
    Parser p(text, make_vars({}));
    SwitchedSystem sys;

    p.expect_word("vars");
    VarList names;
    do {
        std::size_t at = p.peek().offset;
        std::string v = p.ident("state variable");
        if (std::find(names.begin(), names.end(), v) != names.end())
            p.fail_at("duplicate state variable '" + v + "'", at);
        names.push_back(v);
    } while (p.at(Tok::Ident) || p.accept(Tok::Comma));
    p.expect(Tok::Semi, "';'");
    sys.state = make_vars(std::move(names));
    p.set_vars(sys.state);

    while (p.at_word("mode")) {
        p.expect_word("mode");
        std::size_t at = p.peek().offset;
        Mode m;
        m.id = p.ident("mode id");
        if (sys.mode_index(m.id) != sys.modes.size())
            p.fail_at("duplicate mode id '" + m.id + "'", at);
        p.expect(Tok::LBrace, "'{'");
        p.expect_word("ode");
        std::vector<std::pair<std::string, Term>> eqs;
        do {
            std::size_t var_at = p.peek().offset;
            std::string v = p.ident("ODE variable");
            if (std::find(sys.state->begin(), sys.state->end(), v) == sys.state->end())
                p.fail_at("ODE for undeclared variable '" + v + "'", var_at);
            for (const auto& [seen, _] : eqs)
                if (seen == v)
                    p.fail_at("duplicate equation for '" + v + "'", var_at);
            p.expect(Tok::Prime, "'");
            p.expect(Tok::Eq, "'='");
            eqs.emplace_back(v, p.term());
        } while (p.accept(Tok::Comma));
        p.expect(Tok::Semi, "';'");
        for (const auto& v : *sys.state) {
            auto it = std::find_if(eqs.begin(), eqs.end(), [&](const auto& e) { return e.first == v; });
            if (it == eqs.end())
                p.fail_at("mode " + m.id + " has no equation for '" + v + "'", at);
            m.field.equations.emplace_back(v, it->second.rebase(sys.state));
        }
        if (p.accept_word("domain")) {
            m.domain = p.formula();
            if (!m.domain.is_quantifier_free())
                p.fail_at("domain of mode " + m.id + " must be quantifier-free", at);
            p.expect(Tok::Semi, "';'");
        }
        p.expect(Tok::RBrace, "'}'");
        sys.modes.push_back(std::move(m));
    }
    if (sys.modes.empty())
        p.fail("expected 'mode'");

    std::size_t mech_at = p.peek().offset;
    p.expect_word("mechanism");
    sys.mechanism = parse_mechanism(p, sys.state);
    p.expect(Tok::Semi, "';'");
    p.expect_end();

    try {
        sys.validate();
        if (const auto* c = std::get_if<mechanism::Controlled>(&sys.mechanism))
            (void)build_controlled(c->init, c->controller, sys.modes, sys.auxiliaries(), *sys.state);
    } catch (const std::invalid_argument& e) {
        p.fail_at(e.what(), mech_at);
    }
    return sys;
}

std::string print_model(const SwitchedSystem& sys)
{
    std::string out = "vars";
    for (const auto& v : *sys.state)
        out += " " + v;
    out += ";\n";
    for (const auto& m : sys.modes) {
        out += "\nmode " + m.id + " {\n  ode " + m.field.to_string() + ";\n";
        if (!m.domain.is_true())
            out += "  domain " + m.domain.to_string() + ";\n";
        out += "}\n";
    }
    out += "\nmechanism " + mechanism_text(sys.mechanism) + ";\n";
    return out;
}

} // namespace switchkit
