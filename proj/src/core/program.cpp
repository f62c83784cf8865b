#include "switchkit/program.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace switchkit {

using namespace program_node;

std::vector<std::string> VectorField::variables() const
{
    std::vector<std::string> out;
    out.reserve(equations.size());
    for (const auto& [v, _] : equations)
        out.push_back(v);
    return out;
}

const Term* VectorField::rhs(const std::string& var) const
{
    for (const auto& [v, t] : equations)
        if (v == var)
            return &t;
    return nullptr;
}

VectorField VectorField::negated() const
{
    VectorField out;
    for (const auto& [v, t] : equations)
        out.equations.emplace_back(v, -t);
    return out;
}

VectorField VectorField::with(const std::string& var, const Term& rhs) const
{
    VectorField out = *this;
    out.equations.emplace_back(var, rhs);
    return out;
}

VectorField VectorField::restricted(const std::vector<std::string>& vars) const
{
    VectorField out;
    for (const auto& [v, t] : equations)
        if (std::find(vars.begin(), vars.end(), v) != vars.end())
            out.equations.emplace_back(v, t);
    return out;
}

std::string VectorField::to_string() const
{
    std::string out;
    for (std::size_t i = 0; i < equations.size(); ++i) {
        if (i)
            out += ", ";
        out += equations[i].first + "' = " + equations[i].second.to_string();
    }
    return out;
}

bool operator==(const VectorField& a, const VectorField& b)
{
    if (a.equations.size() != b.equations.size())
        return false;
    for (std::size_t i = 0; i < a.equations.size(); ++i)
        if (a.equations[i].first != b.equations[i].first || !(a.equations[i].second == b.equations[i].second))
            return false;
    return true;
}

Term lie_derivative(const Term& p, const VectorField& f)
{
    Term out = Term::constant(Rational(0), p.vars());
    for (const auto& [var, rhs] : f.equations) {
        Term partial = p.derivative(var);
        if (!partial.is_zero())
            out += partial * rhs;
    }
    return out;
}

namespace {

void collect_term_vars(const Term& t, std::vector<std::string>& out, std::set<std::string>& seen)
{
    for (const auto& v : t.used_vars())
        if (seen.insert(v).second)
            out.push_back(v);
}

void collect_formula_vars(const Formula& f, std::vector<std::string>& out, std::set<std::string>& seen)
{
    for (const auto& v : f.free_vars())
        if (seen.insert(v).second)
            out.push_back(v);
}

// Recognizes (?F; body) ++ ?G with G the syntactic negation of F.
bool match_if(const Choice& c, Formula& cond, ProgramPtr& body)
{
    const auto* seq = c.left->as<Seq>();
    const auto* other = c.right->as<Test>();
    if (!seq || !other)
        return false;
    const auto* guard = seq->first->as<Test>();
    if (!guard)
        return false;
    if (!(f_not(guard->condition) == other->condition))
        return false;
    cond = guard->condition;
    body = seq->second;
    return true;
}

// Precedence: choice 0, seq 1, loop/atomic/if 2.
int precedence(const HybridProgram& p)
{
    if (const auto* c = p.as<Choice>()) {
        Formula cond;
        ProgramPtr body;
        return match_if(*c, cond, body) ? 2 : 0;
    }
    if (p.as<Seq>())
        return 1;
    return 2;
}

void print(const HybridProgram& p, std::string& out);

void print_child(const HybridProgram& p, int min_prec, std::string& out)
{
    if (precedence(p) < min_prec) {
        out += "(";
        print(p, out);
        out += ")";
    } else {
        print(p, out);
    }
}

void print(const HybridProgram& p, std::string& out)
{
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Assign>) {
                out += v.var + " := " + v.value.to_string();
            } else if constexpr (std::is_same_v<T, Test>) {
                out += "?" + v.condition.to_string();
            } else if constexpr (std::is_same_v<T, Ode>) {
                out += "{" + v.field.to_string();
                if (!v.domain.is_true())
                    out += " & " + v.domain.to_string();
                out += "}";
            } else if constexpr (std::is_same_v<T, Seq>) {
                // Sequence parses right-associatively.
                print_child(*v.first, 2, out);
                out += "; ";
                print_child(*v.second, 1, out);
            } else if constexpr (std::is_same_v<T, Choice>) {
                Formula cond;
                ProgramPtr body;
                if (match_if(v, cond, body)) {
                    out += "if (" + cond.to_string() + ") { ";
                    print(*body, out);
                    out += " }";
                    return;
                }
                print_child(*v.left, 1, out);
                out += " ++ ";
                print_child(*v.right, 0, out);
            } else if constexpr (std::is_same_v<T, Loop>) {
                out += "(";
                print(*v.body, out);
                out += ")*";
            }
        },
        p.node());
}

} // namespace

std::vector<std::string> HybridProgram::assigned_vars() const
{
    std::vector<std::string> out;
    std::set<std::string> seen;
    std::function<void(const HybridProgram&)> walk = [&](const HybridProgram& p) {
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, Assign>) {
                    if (seen.insert(v.var).second)
                        out.push_back(v.var);
                } else if constexpr (std::is_same_v<T, Seq>) {
                    walk(*v.first);
                    walk(*v.second);
                } else if constexpr (std::is_same_v<T, Choice>) {
                    walk(*v.left);
                    walk(*v.right);
                } else if constexpr (std::is_same_v<T, Loop>) {
                    walk(*v.body);
                }
            },
            p.node());
    };
    walk(*this);
    return out;
}

std::vector<std::string> HybridProgram::all_vars() const
{
    std::vector<std::string> out;
    std::set<std::string> seen;
    std::function<void(const HybridProgram&)> walk = [&](const HybridProgram& p) {
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, Assign>) {
                    if (seen.insert(v.var).second)
                        out.push_back(v.var);
                    collect_term_vars(v.value, out, seen);
                } else if constexpr (std::is_same_v<T, Test>) {
                    collect_formula_vars(v.condition, out, seen);
                } else if constexpr (std::is_same_v<T, Ode>) {
                    for (const auto& [var, rhs] : v.field.equations) {
                        if (seen.insert(var).second)
                            out.push_back(var);
                        collect_term_vars(rhs, out, seen);
                    }
                    collect_formula_vars(v.domain, out, seen);
                } else if constexpr (std::is_same_v<T, Seq>) {
                    walk(*v.first);
                    walk(*v.second);
                } else if constexpr (std::is_same_v<T, Choice>) {
                    walk(*v.left);
                    walk(*v.right);
                } else if constexpr (std::is_same_v<T, Loop>) {
                    walk(*v.body);
                }
            },
            p.node());
    };
    walk(*this);
    return out;
}

std::vector<const Ode*> HybridProgram::odes() const
{
    std::vector<const Ode*> out;
    std::function<void(const HybridProgram&)> walk = [&](const HybridProgram& p) {
        if (const auto* o = p.as<Ode>()) {
            out.push_back(o);
        } else if (const auto* s = p.as<Seq>()) {
            walk(*s->first);
            walk(*s->second);
        } else if (const auto* c = p.as<Choice>()) {
            walk(*c->left);
            walk(*c->right);
        } else if (const auto* l = p.as<Loop>()) {
            walk(*l->body);
        }
    };
    walk(*this);
    return out;
}

std::string HybridProgram::to_string() const
{
    std::string out;
    print(*this, out);
    return out;
}

bool operator==(const HybridProgram& a, const HybridProgram& b)
{
    if (a.node().index() != b.node().index())
        return false;
    if (const auto* x = a.as<Assign>()) {
        const auto* y = b.as<Assign>();
        return x->var == y->var && x->value == y->value;
    }
    if (const auto* x = a.as<Test>())
        return x->condition == b.as<Test>()->condition;
    if (const auto* x = a.as<Ode>()) {
        const auto* y = b.as<Ode>();
        return x->field == y->field && x->domain == y->domain;
    }
    if (const auto* x = a.as<Seq>()) {
        const auto* y = b.as<Seq>();
        return *x->first == *y->first && *x->second == *y->second;
    }
    if (const auto* x = a.as<Choice>()) {
        const auto* y = b.as<Choice>();
        return *x->left == *y->left && *x->right == *y->right;
    }
    return *a.as<Loop>()->body == *b.as<Loop>()->body;
}

ProgramPtr p_assign(const std::string& var, const Term& value)
{
    return std::make_shared<const HybridProgram>(Assign{var, value});
}

ProgramPtr p_test(const Formula& condition) { return std::make_shared<const HybridProgram>(Test{condition}); }

ProgramPtr p_ode(const VectorField& field, const Formula& domain)
{
    return std::make_shared<const HybridProgram>(Ode{field, domain});
}

ProgramPtr p_seq(ProgramPtr first, ProgramPtr second)
{
    return std::make_shared<const HybridProgram>(Seq{std::move(first), std::move(second)});
}

ProgramPtr p_choice(ProgramPtr left, ProgramPtr right)
{
    return std::make_shared<const HybridProgram>(Choice{std::move(left), std::move(right)});
}

ProgramPtr p_loop(ProgramPtr body) { return std::make_shared<const HybridProgram>(Loop{std::move(body)}); }

ProgramPtr p_choice_all(const std::vector<ProgramPtr>& family)
{
    if (family.empty())
        throw std::invalid_argument("choice over an empty family");
    ProgramPtr out = family.back();
    for (auto it = family.rbegin() + 1; it != family.rend(); ++it)
        out = p_choice(*it, out);
    return out;
}

ProgramPtr p_if(const Formula& condition, ProgramPtr body)
{
    return p_choice(p_seq(p_test(condition), std::move(body)), p_test(f_not(condition)));
}

} // namespace switchkit
