#pragma once

#include "switchkit/formula.hpp"
#include "switchkit/program.hpp"
#include "switchkit/term.hpp"
#include "switchkit/verdict.hpp"

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace switchkit {

struct Mode {
    std::string id;
    VectorField field;
    Formula domain = Formula::truth();
};

namespace mechanism {

struct Arbitrary {};
struct StateDependent {};
struct Slow {
    Rational tau;
};
/// Periodic switching in declaration order, mode p running for zeta[p].
struct Fast {
    std::vector<Rational> zeta;
};
struct Controlled {
    ProgramPtr init;
    ProgramPtr controller;
    std::string clock = "t";
    std::string flag = "u";
};

} // namespace mechanism

using Mechanism = std::variant<mechanism::Arbitrary, mechanism::StateDependent, mechanism::Slow, mechanism::Fast,
                               mechanism::Controlled>;

const char* mechanism_name(const Mechanism& m);

/// Names of the clock and flag auxiliaries used by the timed builders.
struct Auxiliaries {
    std::string clock;
    std::string flag;
};

/// First of base, base_1, base_2, ... not in `taken`.
std::string fresh_name(const std::string& base, const std::vector<std::string>& taken);

struct SwitchedSystem {
    VarListPtr state;
    std::vector<Mode> modes;
    Mechanism mechanism = mechanism::Arbitrary{};

    [[nodiscard]] std::size_t dimension() const { return state->size(); }
    /// Index of a mode id; modes.size() if absent.
    [[nodiscard]] std::size_t mode_index(const std::string& id) const;
    /// Fresh clock and flag names with respect to the state variables.
    [[nodiscard]] Auxiliaries auxiliaries() const;

    /// Checks ids, field coverage, domain variables and mechanism
    /// parameters. Throws std::invalid_argument with a reason.
    void validate() const;

    /// The hybrid program for this system's mechanism.
    [[nodiscard]] ProgramPtr program() const;
};

ProgramPtr build_arbitrary(const std::vector<Mode>& modes);
ProgramPtr build_state(const std::vector<Mode>& modes);
ProgramPtr build_slow(const std::vector<Mode>& modes, const Rational& tau, const Auxiliaries& aux);
ProgramPtr build_fast(const std::vector<Mode>& modes, const std::vector<Rational>& zeta, const Auxiliaries& aux);
ProgramPtr build_controlled(const ProgramPtr& init, const ProgramPtr& controller, const std::vector<Mode>& modes,
                            const Auxiliaries& aux, const std::vector<std::string>& state_vars);

/// The reset program t := 0; (u := 1 ++ ... ++ u := m).
ProgramPtr build_reset(std::size_t mode_count, const Auxiliaries& aux);
/// if (t >= tau) { reset }.
ProgramPtr build_slow_controller(std::size_t mode_count, const Rational& tau, const Auxiliaries& aux);
/// t := 0; u := 1.
ProgramPtr build_fast_init(const Auxiliaries& aux);
/// The periodic increment controller over m modes.
ProgramPtr build_fast_controller(const std::vector<Rational>& zeta, const Auxiliaries& aux);

/// Piecewise-constant switching signal: choices[i] (0-based mode index) is
/// active on [times[i], times[i+1]); times[0] = 0 and times has one more
/// entry than choices. Past times.back() the last choice repeats with unit
/// gaps, which never produces an effective switch.
struct SwitchingSignal {
    std::vector<double> times;
    std::vector<std::size_t> choices;

    /// Builds from consecutive (mode, duration) pieces starting at time 0.
    static SwitchingSignal from_pieces(const std::vector<std::pair<std::size_t, double>>& pieces);

    [[nodiscard]] std::size_t size() const { return choices.size(); }
    /// Mode active at time t (right-continuous).
    [[nodiscard]] std::size_t mode_at(double t) const;
    /// End of the stored piece i.
    [[nodiscard]] double piece_end(std::size_t i) const { return times[i + 1]; }
    [[nodiscard]] double duration(std::size_t i) const { return times[i + 1] - times[i]; }
    /// Merges adjacent pieces with equal choices.
    [[nodiscard]] SwitchingSignal compacted() const;
};

/// Valid iff times start at 0 and strictly increase (all finite), there is
/// at least one choice, every choice names a mode, and the sizes agree.
Verdict validate_signal(const SwitchingSignal& sigma, std::size_t mode_count, double horizon);

/// Every completed piece of the compacted signal that ends before the
/// horizon lasts at least tau (up to tol).
Verdict check_dwell(const SwitchingSignal& sigma, double tau, double horizon, double tol = 1e-9);

/// On [0, horizon] the signal coincides with the periodic schedule
/// 0, 1, ..., m-1, 0, ... with durations zeta (up to tol).
Verdict check_period(const SwitchingSignal& sigma, const std::vector<double>& zeta, double horizon,
                     double tol = 1e-9);

/// Model file text: `vars ...; mode ... { ode ...; domain ...; } mechanism ...;`.
SwitchedSystem parse_model(std::string_view text);
std::string print_model(const SwitchedSystem& sys);

/// Signal file: one `MODE duration` line per piece.
SwitchingSignal parse_signal(std::string_view text, const SwitchedSystem& sys);
std::string print_signal(const SwitchingSignal& sigma, const SwitchedSystem& sys);

} // namespace switchkit
