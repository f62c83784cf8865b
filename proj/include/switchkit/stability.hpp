#pragma once

#include "switchkit/models.hpp"
#include "switchkit/sim.hpp"
#include "switchkit/symbolic.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace switchkit {

enum class CertificateKind { Common, StateDomain, MultipleDwell };

const char* to_string(CertificateKind k);

/// Lyapunov certificate. Common and state-domain certificates hold one V
/// under the key "" in `functions`; multiple-dwell certificates hold one V
/// per mode id. Multipliers are keyed by (mode id, 1-based atom index into
/// the sign atoms of the normalized domain) and apply to the primitive part
/// of V.
struct LyapunovCertificate {
    CertificateKind kind = CertificateKind::Common;
    std::map<std::string, Term> functions;
    std::map<std::pair<std::string, std::size_t>, Rational> multipliers;
    /// Decay rates: key "" for a shared rate, else per mode.
    std::map<std::string, Rational> lambda;
    std::optional<Rational> mu;

    /// V for a mode (the shared one for single-function kinds).
    [[nodiscard]] const Term& function(const std::string& mode) const;
    /// Throws std::invalid_argument on a structural problem.
    void validate() const;
};

/// `certificate { kind = ...; V = ...; mode A: V = ...; lambda = ...;
/// lambda(A) = ...; multiplier(A, atom1) = ...; mu = ...; }`.
/// Throws ParseError on syntax errors and unknown variables.
LyapunovCertificate parse_certificate(std::string_view text, const VarListPtr& state);
std::string print_certificate(const LyapunovCertificate& cert);

/// ∀ε>0 ∃δ>0 ∀x (‖x‖² < δ² → [α] ‖x‖² < ε²).
struct StabilitySpec {
    ProgramPtr program;
    VarListPtr state;
    std::string epsilon;
    std::string delta;
    /// Σ xᵢ².
    Term norm2;
    Formula pre;
    Formula post;

    [[nodiscard]] std::string to_string() const;
};

/// Throws std::invalid_argument for fast or controlled switching.
StabilitySpec gen_stability_spec(const SwitchedSystem& sys);

struct LyapunovReport {
    Verdict verdict;
    /// Per mode id: L_f V (common and state-domain) or L_f V_p.
    std::vector<std::pair<std::string, Term>> derivatives;
    /// One line per checked condition.
    std::vector<std::string> lines;
    /// Common and state-domain: the loop invariant certified.
    std::string invariant;
};

/// V(0) = 0, V positive definite and L_f V ≤ 0 for every mode, globally
/// (common) or on the mode's domain (state-domain). Throws
/// std::invalid_argument for a multiple-dwell certificate or a V over
/// non-state variables.
LyapunovReport check_common_lyapunov(const SwitchedSystem& sys, const LyapunovCertificate& cert,
                                     const DecideConfig& cfg = {});

struct DwellReport {
    Verdict verdict;
    std::map<std::string, Rational> lambda;
    Rational mu;
    /// ln μ / min λ; NaN when a rate or μ could not be certified.
    double bound = 0;
    Rational tau;
    std::vector<std::pair<std::string, Term>> derivatives;
    std::vector<std::string> lines;
};

/// Decay rates to try when a certificate omits them, largest first.
const std::vector<Rational>& default_decay_rates();

/// L_{f_p}V_p ≤ −λ_p V_p per mode, V_p ≤ μ V_q per pair, then Valid iff
/// τ > ln μ / min λ_p + 1e-12. τ defaults to the mechanism's. Throws
/// std::invalid_argument unless the certificate is multiple-dwell and the
/// mechanism slow, or on λ ≤ 0, μ < 1, or a mode without V.
DwellReport check_multiple_lyapunov_dwell(const SwitchedSystem& sys, const LyapunovCertificate& cert,
                                          std::optional<Rational> tau = std::nullopt,
                                          const DecideConfig& cfg = {});

/// Obligations checked by the two Lyapunov checkers, for export.
std::vector<Obligation> lyapunov_obligations(const SwitchedSystem& sys, const LyapunovCertificate& cert);

struct WitnessConfig {
    /// Sphere directions (angles in 2D, seeded Gaussian directions else).
    std::size_t directions = 720;
    std::size_t bisection_steps = 60;
    std::size_t trajectories = 100;
    std::uint64_t seed = 1;
    ExecConfig exec;
};

/// Numeric ε–δ evidence, not a proof.
struct DeltaWitness {
    double epsilon = 0;
    double k = 0;
    double delta = 0;
    std::size_t trajectories = 0;
    /// Largest ‖x(t)‖ seen over the sanity runs.
    double max_norm = 0;
    bool sane = false;
};

/// k: largest sublevel value of every V inside ‖x‖ < ε; δ: largest radius
/// whose ball lies in every {V < k}; then seeded random trajectories from
/// ‖x0‖ < δ checked against ε. Throws std::runtime_error when the search
/// fails and std::invalid_argument for ε ≤ 0.
DeltaWitness delta_witness(const SwitchedSystem& sys, const LyapunovCertificate& cert, double epsilon,
                           const WitnessConfig& cfg = {});
DeltaWitness delta_witness_serial(const SwitchedSystem& sys, const LyapunovCertificate& cert, double epsilon,
                                  const WitnessConfig& cfg = {});

/// Initial state uniform in the open ball of the given radius.
std::vector<double> ball_point(std::size_t n, double radius, std::uint64_t seed);

} // namespace switchkit
