#pragma once

#include "switchkit/formula.hpp"
#include "switchkit/models.hpp"
#include "switchkit/program.hpp"
#include "switchkit/term.hpp"
#include "switchkit/verdict.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace switchkit {

/// Into: forward along f. Exit: forward along −f.
enum class Direction { Into, Exit };

const char* to_string(Direction d);

/// States from which the flow immediately enters a set and stays there for
/// a short time. Each atom p ≥ 0 / p > 0 becomes the cascade
/// p > 0 ∨ (p = 0 ∧ (L p > 0 ∨ (L p = 0 ∧ ...))). A cascade closes once
/// L^k p is a rational combination of p, ..., L^(k-1) p; otherwise it is cut
/// after L^rank p and the unexamined remainder is read as true in
/// `formula` and as false in `under`.
struct ProgressFormula {
    Formula formula;
    Formula under;
    Direction direction = Direction::Into;
    unsigned rank = 3;
    bool exact = true;
};

/// Throws std::invalid_argument on a quantified set or rank 0.
ProgressFormula local_progress(const VectorField& f, const Formula& q, unsigned rank = 3,
                               Direction direction = Direction::Into);

/// Lie derivatives p, L p, ..., L^k p up to closure or rank; the flag tells
/// whether the list closed.
struct Cascade {
    std::vector<Term> derivatives;
    bool closed = false;
};
Cascade lie_cascade(const Term& p, const VectorField& f, unsigned rank);

struct Provenance {
    enum class Kind { Cond1, Cond2, Cond3, SaiState, SaiSlow, Lyapunov };
    Kind kind = Kind::Cond1;
    std::string mode;
    Direction direction = Direction::Into;
    std::string detail;

    /// "cond1", "cond2(B)", "sai_state(A, into)", "lyapunov(decrease A)".
    [[nodiscard]] std::string to_string() const;
};

/// ∀ vars. core. When a progress cascade was cut, `core` strengthens the
/// true obligation and `relaxed` weakens it; the two agree otherwise.
struct Obligation {
    std::string name;
    VarListPtr vars;
    Formula core;
    std::optional<Formula> relaxed;
    Provenance provenance;

    [[nodiscard]] bool exact() const { return !relaxed; }
    [[nodiscard]] const Formula& weak_core() const { return relaxed ? *relaxed : core; }
    [[nodiscard]] Formula closed() const;
};

/// Checks that the formulas only mention `vars`; throws std::invalid_argument.
Obligation make_obligation(std::string name, VarListPtr vars, Formula core, std::optional<Formula> relaxed,
                           Provenance provenance);

struct DecideConfig {
    std::size_t samples = 100000;
    std::uint64_t seed = 1;
    /// Falsifier box [−box, box]^n.
    double box = 10.0;
    long max_denominator = 10000;
    /// Constant S-procedure multipliers tried against atoms.
    std::vector<Rational> multipliers = {Rational(1, 2), Rational(1), Rational(2), Rational(4)};
    /// Most atoms combined in one multiplier certificate.
    unsigned max_support = 3;
    /// Case-split leaves explored by the exact layer before giving up.
    std::size_t max_cases = 4096;
    /// Skip the exact layer (falsifier only).
    bool exact_layer = true;
};

/// Sound nonnegativity certificate for a polynomial: an even-power sum or
/// an exact LDLᵀ factorization of a Gram matrix over square monomials.
struct NonnegCertificate {
    bool nonneg = false;
    /// Strictly positive everywhere.
    bool positive = false;
    /// Zero only at the origin (every variable has a pure power in a
    /// positive-definite Gram basis).
    bool definite = false;
    std::string method;
};
NonnegCertificate certify_nonneg(const Term& p);

/// Proves p ≥ 0 on {g_i ≥ 0} via p − Σ σ_i g_i ≥ 0 with σ_i ≥ 0 given.
/// Returns a description on success.
std::optional<std::string> certify_on(const Term& p, const std::vector<Term>& atoms,
                                      const std::vector<Rational>& sigma);

/// Exact layer alone: Valid (exact) or Unknown.
Verdict prove_exact(const Formula& core, const DecideConfig& cfg = {});

/// Falsifier alone: Falsified with an exactly rechecked witness or Unknown.
/// Candidates are simple-value shells, a dyadic grid and seeded random
/// points snapped to rationals; the lowest-indexed violation is reported.
Verdict falsify(const Formula& core, const VarList& vars, const DecideConfig& cfg = {});
Verdict falsify_serial(const Formula& core, const VarList& vars, const DecideConfig& cfg = {});

/// Exact layer on `core`, falsifier on `weak_core()`, else Unknown.
Verdict decide_formula(const Obligation& ob, const DecideConfig& cfg = {});

/// ∀x. ⋁_p Q_p.
Obligation coverage_obligation(const SwitchedSystem& sys);
/// Per mode: ∂_f(Q) ∨ ∂_{−f}(Q) → Q.
std::vector<Obligation> jump_obligations(const SwitchedSystem& sys, unsigned rank = 3);
/// ⋁_p ∂_{f_p}(Q_p).
Obligation stuck_obligation(const SwitchedSystem& sys, unsigned rank = 3);

/// Condition ①. Throws std::invalid_argument unless state-dependent.
Verdict check_coverage(const SwitchedSystem& sys, const DecideConfig& cfg = {});
/// Condition ②, one verdict per mode.
std::vector<Verdict> check_no_infinitesimal_jumps(const SwitchedSystem& sys, unsigned rank = 3,
                                                  const DecideConfig& cfg = {});
/// Condition ③; a falsified verdict's witness is a stuck state.
Verdict check_no_stuck_states(const SwitchedSystem& sys, unsigned rank = 3, const DecideConfig& cfg = {});

/// Every domain atom p ≥ 0 / p > 0 becomes p + eps ≥ 0.
SwitchedSystem hysteresis_inflate(const SwitchedSystem& sys, const Rational& eps);

/// Invariance obligations for one ODE with domain q:
/// I ∧ Q ∧ ∂_f(Q) → ∂_f(I) and ¬I ∧ Q ∧ ∂_{−f}(Q) → ∂_{−f}(¬I).
std::vector<Obligation> ode_invariance_obligations(const Mode& mode, const VarListPtr& vars, const Formula& inv,
                                                   unsigned rank, Provenance::Kind kind);

/// Obligations whose joint validity makes inv an invariant of the system's
/// program. Throws std::invalid_argument for fast or controlled switching,
/// quantified invariants and foreign variables.
std::vector<Obligation> gen_invariance_obligation(const SwitchedSystem& sys, const Formula& inv,
                                                  unsigned rank = 3);

/// SMT-LIB 2 script asserting the negated core; unsat iff the obligation
/// is valid.
std::string export_smtlib(const Obligation& ob);
std::string smtlib_term(const Term& t);
std::string smtlib_formula(const Formula& f);

/// `name status witness?`.
std::string manifest_line(const Obligation& ob, const Verdict& v);

} // namespace switchkit
