#include "switchkit/formula.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace switchkit {

using namespace formula_node;

const char* to_string(Cmp op)
{
    switch (op) {
    case Cmp::Eq: return "=";
    case Cmp::Ne: return "!=";
    case Cmp::Ge: return ">=";
    case Cmp::Gt: return ">";
    case Cmp::Le: return "<=";
    case Cmp::Lt: return "<";
    }
    return "?";
}

namespace {

bool compare(const Rational& v, Cmp op)
{
    switch (op) {
    case Cmp::Eq: return v == 0;
    case Cmp::Ne: return v != 0;
    case Cmp::Ge: return v >= 0;
    case Cmp::Gt: return v > 0;
    case Cmp::Le: return v <= 0;
    case Cmp::Lt: return v < 0;
    }
    return false;
}

Cmp negate(Cmp op)
{
    switch (op) {
    case Cmp::Eq: return Cmp::Ne;
    case Cmp::Ne: return Cmp::Eq;
    case Cmp::Ge: return Cmp::Lt;
    case Cmp::Gt: return Cmp::Le;
    case Cmp::Le: return Cmp::Gt;
    case Cmp::Lt: return Cmp::Ge;
    }
    return op;
}

// Printing precedence: quantifier 0, implies 1, or 2, and 3, not 4, atom 5.
int precedence(const Formula::Node& n)
{
    return std::visit(
        [](const auto& v) -> int {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Forall> || std::is_same_v<T, Exists>)
                return 0;
            else if constexpr (std::is_same_v<T, Implies>)
                return 1;
            else if constexpr (std::is_same_v<T, Or>)
                return 2;
            else if constexpr (std::is_same_v<T, And>)
                return 3;
            else if constexpr (std::is_same_v<T, Not>)
                return 4;
            else
                return 5;
        },
        n);
}

void print_child(const Formula& f, int min_prec, std::string& out)
{
    if (precedence(f.node()) < min_prec) {
        out += "(";
        out += f.to_string();
        out += ")";
    } else {
        out += f.to_string();
    }
}

void print_node(const Formula::Node& node, std::string& out)
{
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, True>) {
                out += "true";
            } else if constexpr (std::is_same_v<T, False>) {
                out += "false";
            } else if constexpr (std::is_same_v<T, Atom>) {
                out += v.lhs.to_string();
                out += " ";
                out += to_string(v.op);
                out += " ";
                out += v.rhs.to_string();
            } else if constexpr (std::is_same_v<T, Not>) {
                out += "!";
                print_child(*v.arg, 4, out);
            } else if constexpr (std::is_same_v<T, And> || std::is_same_v<T, Or>) {
                const char* sep = std::is_same_v<T, And> ? " & " : " | ";
                int child_prec = std::is_same_v<T, And> ? 4 : 3;
                for (std::size_t i = 0; i < v.args.size(); ++i) {
                    if (i)
                        out += sep;
                    print_child(v.args[i], child_prec, out);
                }
            } else if constexpr (std::is_same_v<T, Implies>) {
                print_child(*v.lhs, 2, out);
                out += " -> ";
                print_child(*v.rhs, 1, out);
            } else if constexpr (std::is_same_v<T, Forall> || std::is_same_v<T, Exists>) {
                out += std::is_same_v<T, Forall> ? "forall " : "exists ";
                out += v.var;
                out += ". ";
                print_child(*v.body, 0, out);
            }
        },
        node);
}

Formula normalize_impl(const Formula& f, bool negated)
{
    return std::visit(
        [&](const auto& v) -> Formula {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, True>) {
                return negated ? Formula::falsity() : Formula::truth();
            } else if constexpr (std::is_same_v<T, False>) {
                return negated ? Formula::truth() : Formula::falsity();
            } else if constexpr (std::is_same_v<T, Atom>) {
                Term d = v.lhs - v.rhs;
                Cmp op = negated ? negate(v.op) : v.op;
                switch (op) {
                case Cmp::Ge: return Formula::compare_zero(d, Cmp::Ge);
                case Cmp::Gt: return Formula::compare_zero(d, Cmp::Gt);
                case Cmp::Le: return Formula::compare_zero(-d, Cmp::Ge);
                case Cmp::Lt: return Formula::compare_zero(-d, Cmp::Gt);
                case Cmp::Eq:
                    return f_and({Formula::compare_zero(d, Cmp::Ge), Formula::compare_zero(-d, Cmp::Ge)});
                case Cmp::Ne:
                    return f_or({Formula::compare_zero(d, Cmp::Gt), Formula::compare_zero(-d, Cmp::Gt)});
                }
                return Formula::falsity();
            } else if constexpr (std::is_same_v<T, Not>) {
                return normalize_impl(*v.arg, !negated);
            } else if constexpr (std::is_same_v<T, And> || std::is_same_v<T, Or>) {
                std::vector<Formula> args;
                args.reserve(v.args.size());
                for (const auto& a : v.args)
                    args.push_back(normalize_impl(a, negated));
                bool conj = std::is_same_v<T, And> != negated;
                return conj ? f_and(std::move(args)) : f_or(std::move(args));
            } else if constexpr (std::is_same_v<T, Implies>) {
                if (negated)
                    return f_and({normalize_impl(*v.lhs, false), normalize_impl(*v.rhs, true)});
                return f_or({normalize_impl(*v.lhs, true), normalize_impl(*v.rhs, false)});
            } else {
                throw std::invalid_argument("cannot normalize quantified formula: " + f.to_string());
            }
        },
        f.node());
}

} // namespace

Formula::Formula() : Formula(True{}) {}

Formula::Formula(Node node)
{
    auto data = std::make_shared<Data>();
    data->node = std::move(node);
    std::string text;
    print_node(data->node, text);
    data->text = std::move(text);
    data_ = std::move(data);
}

Formula Formula::truth()
{
    static const Formula t{True{}};
    return t;
}

Formula Formula::falsity()
{
    static const Formula f{False{}};
    return f;
}

Formula Formula::atom(Term lhs, Cmp op, Term rhs)
{
    Term d = lhs - rhs;
    if (d.is_constant())
        return compare(d.constant_term(), op) ? truth() : falsity();
    return Formula(Atom{std::move(lhs), op, std::move(rhs)});
}

Formula Formula::compare_zero(const Term& p, Cmp op)
{
    if (p.is_constant())
        return compare(p.constant_term(), op) ? truth() : falsity();
    return Formula(Atom{p, op, Term::constant(Rational(0), p.vars())});
}

bool Formula::is_true() const { return std::holds_alternative<True>(data_->node); }
bool Formula::is_false() const { return std::holds_alternative<False>(data_->node); }

bool Formula::is_quantifier_free() const
{
    return std::visit(
        [](const auto& v) -> bool {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Forall> || std::is_same_v<T, Exists>)
                return false;
            else if constexpr (std::is_same_v<T, Not>)
                return v.arg->is_quantifier_free();
            else if constexpr (std::is_same_v<T, And> || std::is_same_v<T, Or>)
                return std::all_of(v.args.begin(), v.args.end(), [](const Formula& a) { return a.is_quantifier_free(); });
            else if constexpr (std::is_same_v<T, Implies>)
                return v.lhs->is_quantifier_free() && v.rhs->is_quantifier_free();
            else
                return true;
        },
        data_->node);
}

void Formula::for_each_atom(const std::function<void(const Atom&)>& f) const
{
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Atom>) {
                f(v);
            } else if constexpr (std::is_same_v<T, Not>) {
                v.arg->for_each_atom(f);
            } else if constexpr (std::is_same_v<T, And> || std::is_same_v<T, Or>) {
                for (const auto& a : v.args)
                    a.for_each_atom(f);
            } else if constexpr (std::is_same_v<T, Implies>) {
                v.lhs->for_each_atom(f);
                v.rhs->for_each_atom(f);
            } else if constexpr (std::is_same_v<T, Forall> || std::is_same_v<T, Exists>) {
                v.body->for_each_atom(f);
            }
        },
        data_->node);
}

std::vector<std::string> Formula::free_vars() const
{
    std::vector<std::string> out;
    std::set<std::string> seen;
    std::set<std::string> bound;
    std::function<void(const Formula&)> walk = [&](const Formula& g) {
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, Atom>) {
                    for (const Term* t : {&v.lhs, &v.rhs})
                        for (const auto& name : t->used_vars())
                            if (!bound.count(name) && seen.insert(name).second)
                                out.push_back(name);
                } else if constexpr (std::is_same_v<T, Not>) {
                    walk(*v.arg);
                } else if constexpr (std::is_same_v<T, And> || std::is_same_v<T, Or>) {
                    for (const auto& a : v.args)
                        walk(a);
                } else if constexpr (std::is_same_v<T, Implies>) {
                    walk(*v.lhs);
                    walk(*v.rhs);
                } else if constexpr (std::is_same_v<T, Forall> || std::is_same_v<T, Exists>) {
                    bool was_bound = bound.count(v.var) > 0;
                    bound.insert(v.var);
                    walk(*v.body);
                    if (!was_bound)
                        bound.erase(v.var);
                }
            },
            g.node());
    };
    walk(*this);
    return out;
}

bool Formula::eval(const std::map<std::string, Rational>& valuation) const
{
    return std::visit(
        [&](const auto& v) -> bool {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, True>)
                return true;
            else if constexpr (std::is_same_v<T, False>)
                return false;
            else if constexpr (std::is_same_v<T, Atom>)
                return compare(v.lhs.eval(valuation) - v.rhs.eval(valuation), v.op);
            else if constexpr (std::is_same_v<T, Not>)
                return !v.arg->eval(valuation);
            else if constexpr (std::is_same_v<T, And>)
                return std::all_of(v.args.begin(), v.args.end(), [&](const Formula& a) { return a.eval(valuation); });
            else if constexpr (std::is_same_v<T, Or>)
                return std::any_of(v.args.begin(), v.args.end(), [&](const Formula& a) { return a.eval(valuation); });
            else if constexpr (std::is_same_v<T, Implies>)
                return !v.lhs->eval(valuation) || v.rhs->eval(valuation);
            else
                throw std::invalid_argument("cannot evaluate quantified formula exactly");
        },
        data_->node);
}

Formula f_not(const Formula& a)
{
    if (a.is_true())
        return Formula::falsity();
    if (a.is_false())
        return Formula::truth();
    return Formula(Not{std::make_shared<const Formula>(a)});
}

namespace {

template <typename Junction>
Formula junction(std::vector<Formula> args, bool is_and)
{
    std::vector<Formula> flat;
    std::set<std::string> seen;
    for (auto& a : args) {
        if (is_and ? a.is_true() : a.is_false())
            continue;
        if (is_and ? a.is_false() : a.is_true())
            return a;
        if (const auto* inner = a.template as<Junction>()) {
            for (const auto& b : inner->args)
                if (seen.insert(b.to_string()).second)
                    flat.push_back(b);
            continue;
        }
        if (seen.insert(a.to_string()).second)
            flat.push_back(std::move(a));
    }
    if (flat.empty())
        return is_and ? Formula::truth() : Formula::falsity();
    if (flat.size() == 1)
        return flat.front();
    return Formula(Junction{std::move(flat)});
}

} // namespace

Formula f_and(std::vector<Formula> args) { return junction<And>(std::move(args), true); }
Formula f_or(std::vector<Formula> args) { return junction<Or>(std::move(args), false); }

Formula f_implies(const Formula& a, const Formula& b)
{
    if (a.is_false() || b.is_true())
        return Formula::truth();
    if (a.is_true())
        return b;
    return Formula(Implies{std::make_shared<const Formula>(a), std::make_shared<const Formula>(b)});
}

Formula f_forall(const std::string& var, const Formula& body)
{
    return Formula(Forall{var, std::make_shared<const Formula>(body)});
}

Formula f_exists(const std::string& var, const Formula& body)
{
    return Formula(Exists{var, std::make_shared<const Formula>(body)});
}

Formula universal_closure(const std::vector<std::string>& vars, const Formula& body)
{
    Formula out = body;
    for (auto it = vars.rbegin(); it != vars.rend(); ++it)
        out = f_forall(*it, out);
    return out;
}

Formula normalize(const Formula& f) { return normalize_impl(f, false); }
Formula normalize_negation(const Formula& f) { return normalize_impl(f, true); }

std::vector<SignAtom> sign_atoms(const Formula& normalized)
{
    std::vector<SignAtom> out;
    normalized.for_each_atom([&](const Atom& a) {
        if (a.op != Cmp::Ge && a.op != Cmp::Gt)
            throw std::invalid_argument("formula is not normalized");
        out.push_back({a.lhs - a.rhs, a.op == Cmp::Gt});
    });
    return out;
}

Formula map_sign_atoms(const Formula& normalized, const std::function<Formula(const SignAtom&)>& f)
{
    return std::visit(
        [&](const auto& v) -> Formula {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, True> || std::is_same_v<T, False>) {
                return normalized;
            } else if constexpr (std::is_same_v<T, Atom>) {
                if (v.op != Cmp::Ge && v.op != Cmp::Gt)
                    throw std::invalid_argument("formula is not normalized");
                return f(SignAtom{v.lhs - v.rhs, v.op == Cmp::Gt});
            } else if constexpr (std::is_same_v<T, And> || std::is_same_v<T, Or>) {
                std::vector<Formula> args;
                for (const auto& a : v.args)
                    args.push_back(map_sign_atoms(a, f));
                return std::is_same_v<T, And> ? f_and(std::move(args)) : f_or(std::move(args));
            } else {
                throw std::invalid_argument("formula is not normalized: " + normalized.to_string());
            }
        },
        normalized.node());
}

std::optional<std::vector<std::vector<SignAtom>>> to_dnf(const Formula& normalized, std::size_t max_terms)
{
    using Dnf = std::vector<std::vector<SignAtom>>;
    std::function<std::optional<Dnf>(const Formula&)> go = [&](const Formula& g) -> std::optional<Dnf> {
        return std::visit(
            [&](const auto& v) -> std::optional<Dnf> {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, True>) {
                    return Dnf{{}};
                } else if constexpr (std::is_same_v<T, False>) {
                    return Dnf{};
                } else if constexpr (std::is_same_v<T, Atom>) {
                    return Dnf{{SignAtom{v.lhs - v.rhs, v.op == Cmp::Gt}}};
                } else if constexpr (std::is_same_v<T, Or>) {
                    Dnf out;
                    for (const auto& a : v.args) {
                        auto sub = go(a);
                        if (!sub)
                            return std::nullopt;
                        out.insert(out.end(), sub->begin(), sub->end());
                        if (out.size() > max_terms)
                            return std::nullopt;
                    }
                    return out;
                } else if constexpr (std::is_same_v<T, And>) {
                    Dnf out{{}};
                    for (const auto& a : v.args) {
                        auto sub = go(a);
                        if (!sub)
                            return std::nullopt;
                        if (out.size() * sub->size() > max_terms)
                            return std::nullopt;
                        Dnf next;
                        for (const auto& left : out)
                            for (const auto& right : *sub) {
                                auto conj = left;
                                conj.insert(conj.end(), right.begin(), right.end());
                                next.push_back(std::move(conj));
                            }
                        out = std::move(next);
                    }
                    return out;
                } else {
                    throw std::invalid_argument("formula is not normalized: " + g.to_string());
                }
            },
            g.node());
    };
    return go(normalized);
}

CompiledFormula::CompiledFormula(const Formula& f, const VarList& order) { root_ = build(normalize(f), order); }

std::size_t CompiledFormula::build(const Formula& f, const VarList& order)
{
    Node n{};
    if (f.is_true()) {
        n.kind = Kind::True;
    } else if (f.is_false()) {
        n.kind = Kind::False;
    } else if (const auto* a = f.as<Atom>()) {
        n.kind = Kind::Atom;
        n.strict = a->op == Cmp::Gt;
        n.term = CompiledTerm(a->lhs - a->rhs, order);
    } else if (const auto* c = f.as<And>()) {
        n.kind = Kind::And;
        for (const auto& arg : c->args)
            n.children.push_back(build(arg, order));
    } else if (const auto* d = f.as<Or>()) {
        n.kind = Kind::Or;
        for (const auto& arg : d->args)
            n.children.push_back(build(arg, order));
    } else {
        throw std::invalid_argument("cannot compile formula: " + f.to_string());
    }
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
}

Truth CompiledFormula::eval(std::span<const double> x) const
{
    if (nodes_.empty())
        return Truth::True;
    return eval_node(root_, x);
}

Truth CompiledFormula::eval_node(std::size_t i, std::span<const double> x) const
{
    const Node& n = nodes_[i];
    switch (n.kind) {
    case Kind::True: return Truth::True;
    case Kind::False: return Truth::False;
    case Kind::Atom: {
        double v = n.term.eval(x);
        double bound = 1e-12 * n.term.magnitude(x);
        if (!std::isfinite(v) || std::fabs(v) <= bound)
            return Truth::Unknown;
        return v > 0 ? Truth::True : Truth::False;
    }
    case Kind::And: {
        Truth acc = Truth::True;
        for (auto c : n.children) {
            Truth t = eval_node(c, x);
            if (t == Truth::False)
                return Truth::False;
            if (t == Truth::Unknown)
                acc = Truth::Unknown;
        }
        return acc;
    }
    case Kind::Or: {
        Truth acc = Truth::False;
        for (auto c : n.children) {
            Truth t = eval_node(c, x);
            if (t == Truth::True)
                return Truth::True;
            if (t == Truth::Unknown)
                acc = Truth::Unknown;
        }
        return acc;
    }
    }
    return Truth::Unknown;
}

bool CompiledFormula::holds(std::span<const double> x, double tol) const
{
    if (nodes_.empty())
        return true;
    return holds_node(root_, x, tol);
}

bool CompiledFormula::holds_node(std::size_t i, std::span<const double> x, double tol) const
{
    const Node& n = nodes_[i];
    switch (n.kind) {
    case Kind::True: return true;
    case Kind::False: return false;
    case Kind::Atom: {
        double v = n.term.eval(x);
        return n.strict ? v > tol : v >= -tol;
    }
    case Kind::And:
        return std::all_of(n.children.begin(), n.children.end(), [&](std::size_t c) { return holds_node(c, x, tol); });
    case Kind::Or:
        return std::any_of(n.children.begin(), n.children.end(), [&](std::size_t c) { return holds_node(c, x, tol); });
    }
    return false;
}

} // namespace switchkit
