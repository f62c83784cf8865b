#pragma once

#include "switchkit/term.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace switchkit {

enum class Cmp { Eq, Ne, Ge, Gt, Le, Lt };

const char* to_string(Cmp op);

class Formula;

namespace formula_node {

struct True {};
struct False {};
struct Atom {
    Term lhs;
    Cmp op;
    Term rhs;
};
struct Not {
    std::shared_ptr<const Formula> arg;
};
struct And {
    std::vector<Formula> args;
};
struct Or {
    std::vector<Formula> args;
};
struct Implies {
    std::shared_ptr<const Formula> lhs, rhs;
};
struct Forall {
    std::string var;
    std::shared_ptr<const Formula> body;
};
struct Exists {
    std::string var;
    std::shared_ptr<const Formula> body;
};

using Node = std::variant<True, False, Atom, Not, And, Or, Implies, Forall, Exists>;

} // namespace formula_node

/// First-order real-arithmetic formula. Immutable; copies share structure.
class Formula {
public:
    using Node = formula_node::Node;

    Formula();
    explicit Formula(Node node);

    static Formula truth();
    static Formula falsity();
    static Formula atom(Term lhs, Cmp op, Term rhs);
    /// p ⋈ 0; constant p folds to true/false.
    static Formula compare_zero(const Term& p, Cmp op);

    [[nodiscard]] const Node& node() const { return data_->node; }

    template <typename T>
    [[nodiscard]] const T* as() const { return std::get_if<T>(&data_->node); }

    [[nodiscard]] bool is_true() const;
    [[nodiscard]] bool is_false() const;
    [[nodiscard]] bool is_quantifier_free() const;

    /// Free variables that occur in some atom, in first-seen order.
    [[nodiscard]] std::vector<std::string> free_vars() const;

    /// Exact truth value. Throws std::invalid_argument on quantifiers.
    [[nodiscard]] bool eval(const std::map<std::string, Rational>& valuation) const;

    /// Applies f to every atom's difference term (lhs − rhs).
    void for_each_atom(const std::function<void(const formula_node::Atom&)>& f) const;

    /// Canonical text in the formula grammar; computed at construction.
    [[nodiscard]] const std::string& to_string() const { return data_->text; }

    friend bool operator==(const Formula& a, const Formula& b) { return a.to_string() == b.to_string(); }

private:
    struct Data {
        Node node;
        std::string text;
    };
    std::shared_ptr<const Data> data_;
};

Formula f_not(const Formula& a);
Formula f_and(std::vector<Formula> args);
Formula f_or(std::vector<Formula> args);
Formula f_implies(const Formula& a, const Formula& b);
Formula f_forall(const std::string& var, const Formula& body);
Formula f_exists(const std::string& var, const Formula& body);

/// Universal closure over the given variables (innermost last).
Formula universal_closure(const std::vector<std::string>& vars, const Formula& body);

/// Normalized atom p ⋈ 0 with ⋈ ∈ {≥, >}.
struct SignAtom {
    Term p;
    bool strict;
};

/// Negation-normal form whose atoms are all p ≥ 0 or p > 0; constant atoms
/// folded. Pointwise equivalent to the input. Throws std::invalid_argument
/// if the formula contains a quantifier.
Formula normalize(const Formula& f);

/// Same as normalize(f_not(f)).
Formula normalize_negation(const Formula& f);

/// Atoms of a normalized formula, in traversal order.
std::vector<SignAtom> sign_atoms(const Formula& normalized);

/// Rebuilds a normalized formula by mapping every sign atom.
Formula map_sign_atoms(const Formula& normalized, const std::function<Formula(const SignAtom&)>& f);

/// Disjunctive normal form of a normalized formula: each inner vector is a
/// conjunction of sign atoms. Returns nullopt when more than max_terms
/// conjunctions would be produced.
std::optional<std::vector<std::vector<SignAtom>>> to_dnf(const Formula& normalized, std::size_t max_terms);

/// Three-valued truth used by floating-point screening.
enum class Truth { False, True, Unknown };

/// Floating-point evaluation of a normalized formula against a compiled
/// variable order. Atoms within the rounding bound of zero are Unknown.
class CompiledFormula {
public:
    CompiledFormula() = default;
    CompiledFormula(const Formula& normalized, const VarList& order);

    [[nodiscard]] Truth eval(std::span<const double> x) const;

    /// Tolerant Boolean evaluation: weak atoms hold when p ≥ −tol, strict
    /// atoms when p > tol. The two readings partition every boundary, so
    /// a formula and its normalized negation never both hold.
    [[nodiscard]] bool holds(std::span<const double> x, double tol) const;

private:
    enum class Kind { True, False, Atom, And, Or };
    struct Node {
        Kind kind;
        bool strict = false;
        CompiledTerm term;
        std::vector<std::size_t> children;
    };
    std::size_t build(const Formula& f, const VarList& order);
    Truth eval_node(std::size_t i, std::span<const double> x) const;
    bool holds_node(std::size_t i, std::span<const double> x, double tol) const;

    std::vector<Node> nodes_;
    std::size_t root_ = 0;
};

} // namespace switchkit
