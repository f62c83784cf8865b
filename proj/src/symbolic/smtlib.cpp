#include "switchkit/symbolic.hpp"

#include <fmt/format.h>

namespace switchkit {

namespace {

std::string literal(const Rational& q)
{
    Rational a = abs(q);
    std::string body = a.get_den() == 1 ? a.get_num().get_str() : fmt::format("(/ {} {})", a.get_num().get_str(),
                                                                               a.get_den().get_str());
    return q < 0 ? "(- " + body + ")" : body;
}

const char* smt_op(Cmp op)
{
    switch (op) {
    case Cmp::Eq: return "=";
    case Cmp::Ge: return ">=";
    case Cmp::Gt: return ">";
    case Cmp::Le: return "<=";
    case Cmp::Lt: return "<";
    case Cmp::Ne: return "distinct";
    }
    return "?";
}

std::string joined(const char* op, const std::vector<std::string>& parts)
{
    std::string out = std::string("(") + op;
    for (const auto& p : parts)
        out += " " + p;
    return out + ")";
}

} // namespace

std::string smtlib_term(const Term& t)
{
    if (t.is_zero())
        return "0";
    std::vector<std::string> monos;
    for (const auto& [e, c] : t.monomials()) {
        std::vector<std::string> factors;
        for (std::size_t i = 0; i < e.size(); ++i)
            for (unsigned k = 0; k < e[i]; ++k)
                factors.push_back((*t.vars())[i]);
        if (factors.empty()) {
            monos.push_back(literal(c));
            continue;
        }
        if (c != 1)
            factors.insert(factors.begin(), literal(c));
        monos.push_back(factors.size() == 1 ? factors.front() : joined("*", factors));
    }
    return monos.size() == 1 ? monos.front() : joined("+", monos);
}

std::string smtlib_formula(const Formula& f)
{
    using namespace formula_node;
    return std::visit(
        [&](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, True>) {
                return "true";
            } else if constexpr (std::is_same_v<T, False>) {
                return "false";
            } else if constexpr (std::is_same_v<T, Atom>) {
                return fmt::format("({} {} {})", smt_op(v.op), smtlib_term(v.lhs), smtlib_term(v.rhs));
            } else if constexpr (std::is_same_v<T, Not>) {
                return "(not " + smtlib_formula(*v.arg) + ")";
            } else if constexpr (std::is_same_v<T, And> || std::is_same_v<T, Or>) {
                std::vector<std::string> parts;
                for (const auto& a : v.args)
                    parts.push_back(smtlib_formula(a));
                return joined(std::is_same_v<T, And> ? "and" : "or", parts);
            } else if constexpr (std::is_same_v<T, Implies>) {
                return fmt::format("(=> {} {})", smtlib_formula(*v.lhs), smtlib_formula(*v.rhs));
            } else if constexpr (std::is_same_v<T, Forall>) {
                return fmt::format("(forall (({} Real)) {})", v.var, smtlib_formula(*v.body));
            } else {
                return fmt::format("(exists (({} Real)) {})", v.var, smtlib_formula(*v.body));
            }
        },
        f.node());
}

std::string export_smtlib(const Obligation& ob)
{
    std::string out = fmt::format("; obligation {} [{}]\n", ob.name, ob.provenance.to_string());
    if (!ob.exact())
        out += "; strengthened: progress cascades cut at the rank bound\n";
    out += "(set-logic NRA)\n";
    for (const auto& v : *ob.vars)
        out += fmt::format("(declare-fun {} () Real)\n", v);
    out += fmt::format("(assert (not {}))\n(check-sat)\n(exit)\n", smtlib_formula(ob.core));
    return out;
}

std::string manifest_line(const Obligation& ob, const Verdict& v)
{
    std::string line = ob.name + " " + v.label();
    if (v.is_falsified() && !v.witness.empty())
        line += " " + v.witness_text(*ob.vars);
    return line;
}

} // namespace switchkit
