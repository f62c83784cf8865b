#pragma once

#include "switchkit/formula.hpp"
#include "switchkit/term.hpp"

#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace switchkit {

/// Right-hand sides x' = f(x), one entry per evolving variable.
struct VectorField {
    std::vector<std::pair<std::string, Term>> equations;

    [[nodiscard]] std::vector<std::string> variables() const;
    [[nodiscard]] const Term* rhs(const std::string& var) const;
    /// The field −f.
    [[nodiscard]] VectorField negated() const;
    /// The field with an extra equation appended (e.g. a clock t' = 1).
    [[nodiscard]] VectorField with(const std::string& var, const Term& rhs) const;
    /// Equations restricted to the given variables, in field order.
    [[nodiscard]] VectorField restricted(const std::vector<std::string>& vars) const;

    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const VectorField& a, const VectorField& b);
};

/// Σ_i (∂p/∂x_i)·f_i, computed exactly.
Term lie_derivative(const Term& p, const VectorField& f);

class HybridProgram;
using ProgramPtr = std::shared_ptr<const HybridProgram>;

namespace program_node {

struct Assign {
    std::string var;
    Term value;
};
struct Test {
    Formula condition;
};
struct Ode {
    VectorField field;
    Formula domain;
};
struct Seq {
    ProgramPtr first, second;
};
struct Choice {
    ProgramPtr left, right;
};
struct Loop {
    ProgramPtr body;
};

using Node = std::variant<Assign, Test, Ode, Seq, Choice, Loop>;

} // namespace program_node

/// Hybrid program AST: x := e | ?Q | {x' = f & Q} | a; b | a ++ b | a*.
class HybridProgram {
public:
    using Node = program_node::Node;

    explicit HybridProgram(Node node) : node_(std::move(node)) {}

    [[nodiscard]] const Node& node() const { return node_; }

    template <typename T>
    [[nodiscard]] const T* as() const { return std::get_if<T>(&node_); }

    /// Variables written by assignments (not ODEs).
    [[nodiscard]] std::vector<std::string> assigned_vars() const;
    /// Every variable mentioned anywhere, in first-seen order.
    [[nodiscard]] std::vector<std::string> all_vars() const;
    /// ODE nodes in depth-first, left-to-right order.
    [[nodiscard]] std::vector<const program_node::Ode*> odes() const;

    /// Text in the program grammar; parse_program(to_string()) is
    /// structurally identical to this program.
    [[nodiscard]] std::string to_string() const;

private:
    Node node_;
};

bool operator==(const HybridProgram& a, const HybridProgram& b);

ProgramPtr p_assign(const std::string& var, const Term& value);
ProgramPtr p_test(const Formula& condition);
ProgramPtr p_ode(const VectorField& field, const Formula& domain);
ProgramPtr p_seq(ProgramPtr first, ProgramPtr second);
ProgramPtr p_choice(ProgramPtr left, ProgramPtr right);
ProgramPtr p_loop(ProgramPtr body);

/// a_1 ++ (a_2 ++ (... ++ a_m)); throws on an empty family.
ProgramPtr p_choice_all(const std::vector<ProgramPtr>& family);
/// if (cond) {body}  ≡  (?cond; body) ++ ?!cond.
ProgramPtr p_if(const Formula& condition, ProgramPtr body);

} // namespace switchkit
