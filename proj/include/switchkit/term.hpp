#pragma once

#include "switchkit/rational.hpp"

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace switchkit {

/// Ordered list of declared variable names. Shared between terms.
using VarList = std::vector<std::string>;
using VarListPtr = std::shared_ptr<const VarList>;

VarListPtr make_vars(VarList names);

/// Exponent vector indexed by position in a VarList.
using Exponents = std::vector<unsigned>;

/// Graded lexicographic order; sorts higher monomials first.
struct GrlexDescending {
    bool operator()(const Exponents& a, const Exponents& b) const;
};

/// Exact multivariate polynomial over a declared variable list.
///
/// Canonical form: a map from exponent vector to a nonzero rational
/// coefficient. Binary operations on terms over different variable lists
/// first merge the lists (left operand's order, then new names from the
/// right), so mixing state variables with auxiliaries is transparent.
class Term {
public:
    using Monomials = std::map<Exponents, Rational, GrlexDescending>;

    Term();
    explicit Term(VarListPtr vars);

    static Term constant(const Rational& c, VarListPtr vars = nullptr);
    static Term variable(const std::string& name, VarListPtr vars);

    [[nodiscard]] const VarListPtr& vars() const { return vars_; }
    [[nodiscard]] const Monomials& monomials() const { return terms_; }

    [[nodiscard]] bool is_zero() const { return terms_.empty(); }
    [[nodiscard]] bool is_constant() const;
    /// Constant coefficient (zero if absent).
    [[nodiscard]] Rational constant_term() const;
    [[nodiscard]] unsigned degree() const;
    /// Names of variables with a nonzero exponent somewhere.
    [[nodiscard]] std::vector<std::string> used_vars() const;
    [[nodiscard]] bool mentions(const std::string& name) const;

    /// Re-expresses the polynomial over another variable list.
    /// Throws std::invalid_argument if a used variable is missing.
    [[nodiscard]] Term rebase(VarListPtr vars) const;

    [[nodiscard]] Term derivative(const std::string& name) const;
    [[nodiscard]] Term pow(unsigned k) const;
    [[nodiscard]] Term scaled(const Rational& c) const;
    /// Substitutes each variable named in `replacement` by the given term.
    [[nodiscard]] Term substitute(const std::map<std::string, Term>& replacement) const;

    /// Exact value; values are indexed by this term's own VarList.
    [[nodiscard]] Rational eval(std::span<const Rational> values) const;
    /// Exact value under a name-keyed valuation.
    /// Throws std::out_of_range on a missing binding for a used variable.
    [[nodiscard]] Rational eval(const std::map<std::string, Rational>& valuation) const;

    /// Positive rational c such that this/c has coprime integer
    /// coefficients. One for the zero polynomial.
    [[nodiscard]] Rational content() const;

    Term& operator+=(const Term& rhs);
    Term& operator-=(const Term& rhs);
    Term& operator*=(const Term& rhs);

    friend Term operator+(Term a, const Term& b) { return a += b; }
    friend Term operator-(Term a, const Term& b) { return a -= b; }
    friend Term operator*(Term a, const Term& b) { return a *= b; }
    friend Term operator-(const Term& a) { return a.scaled(Rational(-1)); }

    /// Polynomial equality, independent of the variable lists' extra names.
    friend bool operator==(const Term& a, const Term& b);

    /// Canonical text in the expression grammar, descending grlex.
    [[nodiscard]] std::string to_string() const;

    /// Union of variable lists in first-seen order.
    static VarListPtr merge_vars(const VarListPtr& a, const VarListPtr& b);

private:
    void unify_with(Term& other);
    void add_monomial(const Exponents& e, const Rational& c);

    VarListPtr vars_;
    Monomials terms_;
};

/// Total order on canonical printed forms; usable as a map key.
struct TermLess {
    bool operator()(const Term& a, const Term& b) const { return a.to_string() < b.to_string(); }
};

/// Double-precision evaluator compiled against a fixed variable order
/// (typically the simulator's state vector).
class CompiledTerm {
public:
    CompiledTerm() = default;
    CompiledTerm(const Term& term, const VarList& order);

    [[nodiscard]] double eval(std::span<const double> x) const;
    /// Sum of |c·m(x)|, used to scale rounding-error bounds.
    [[nodiscard]] double magnitude(std::span<const double> x) const;

private:
    struct Factor {
        std::size_t index;
        unsigned power;
    };
    struct Mono {
        double coef;
        std::vector<Factor> factors;
    };
    std::vector<Mono> monos_;
};

} // namespace switchkit
