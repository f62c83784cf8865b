#pragma once

#include "switchkit/formula.hpp"
#include "switchkit/models.hpp"
#include "switchkit/program.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace switchkit {

struct ExecConfig {
    double step = 1e-3;
    double horizon = 10.0;
    std::size_t max_iterations = 64;
    std::uint64_t seed = 1;
    double blowup_bound = 1e6;
    double domain_tol = 1e-9;
    /// Event localization accuracy in time.
    double event_tol = 1e-9;
    /// Executor node visits per run before giving up.
    std::size_t max_steps = 200000;
    /// Random strategy: probability of another loop iteration.
    double continue_probability = 0.85;
    /// Relative endpoint tolerance of the adequacy harness.
    double match_tol = 1e-6;

    /// Throws std::invalid_argument unless step, horizon and bound are positive.
    void validate() const;
};

/// Double-precision right-hand side over a fixed state order. Variables
/// without an equation have zero derivative.
class CompiledField {
public:
    CompiledField() = default;
    CompiledField(const VectorField& field, const VarList& order);

    [[nodiscard]] std::size_t size() const { return n_; }
    void eval(std::span<const double> x, std::span<double> dx) const;

private:
    std::size_t n_ = 0;
    std::vector<std::pair<std::size_t, CompiledTerm>> eqs_;
};

/// One classical RK4 step of size h.
void rk4_step(const CompiledField& f, std::span<const double> x, double h, std::span<double> out);

struct Segment {
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    bool blowup = false;
    [[nodiscard]] double end_time() const { return times.back(); }
    [[nodiscard]] const std::vector<double>& end_state() const { return states.back(); }
};

/// Fixed-step RK4 from x0 over [0, d]; the last step lands on d. Ends early
/// with blowup = true once ‖x‖∞ exceeds the bound or turns nonfinite, the
/// crossing localized by bisection.
Segment integrate_mode(const VectorField& f, const VarList& order, std::span<const double> x0, double d,
                       const ExecConfig& cfg);

enum class EventKind { Switch, DomainExit, Blowup, Horizon };
const char* to_string(EventKind k);

struct Event {
    double time;
    EventKind kind;
    std::size_t mode;
};

struct Sample {
    double time;
    std::vector<double> state;
    std::size_t mode;
};

struct Trajectory {
    std::vector<Sample> samples;
    std::vector<Event> events;
    bool obeyed_domains = true;

    [[nodiscard]] bool blew_up() const;
    [[nodiscard]] double end_time() const { return samples.back().time; }
    [[nodiscard]] const std::vector<double>& end_state() const { return samples.back().state; }
    /// `time,x1,...,xn,mode,event` with 12 significant digits.
    [[nodiscard]] std::string to_csv(const SwitchedSystem& sys) const;
};

/// Solution of the switched system under sigma on [0, cfg.horizon].
/// Throws std::invalid_argument on an invalid signal or a wrong x0 size.
Trajectory simulate_signal(const SwitchedSystem& sys, const SwitchingSignal& sigma, std::span<const double> x0,
                           const ExecConfig& cfg);

/// Compacted signal followed by a trajectory, ending at its last sample.
SwitchingSignal extract_signal(const Trajectory& traj);

/// One resolved nondeterministic choice of a run.
struct Decision {
    enum class Kind { Iterate, Stop, Branch, Evolve };
    Kind kind = Kind::Stop;
    /// Branch: 0 for the left alternative, 1 for the right.
    std::size_t branch = 0;
    /// Evolve: index into HybridProgram::odes() and the chosen duration.
    std::size_t ode = 0;
    double duration = 0;

    static Decision iterate() { return {Kind::Iterate}; }
    static Decision stop() { return {Kind::Stop}; }
    static Decision take(std::size_t b) { return {Kind::Branch, b}; }
    static Decision evolve(std::size_t ode, double d) { return {Kind::Evolve, 0, ode, d}; }

    [[nodiscard]] std::string to_string() const;
    friend bool operator==(const Decision&, const Decision&) = default;
};

/// Parses a run log; blank lines and `#` comments are skipped.
std::vector<Decision> parse_decisions(std::string_view text);

struct RandomStrategy {};

/// Follows a signal up to end_time. ode_modes[k] is the mode index of
/// odes()[k].
struct GuidedStrategy {
    SwitchingSignal signal;
    double end_time = 0;
    std::vector<std::size_t> ode_modes;
};

struct ScriptedStrategy {
    std::vector<Decision> script;
};

using Strategy = std::variant<RandomStrategy, GuidedStrategy, ScriptedStrategy>;

enum class RunStatus { Completed, Aborted, Budget };
const char* to_string(RunStatus s);

struct OdePiece {
    std::size_t ode;
    double start;
    /// Logged duration; elapsed is shorter only on blowup.
    double duration;
    double elapsed;
};

struct Run {
    RunStatus status = RunStatus::Aborted;
    /// Final state over Executor::order().
    std::vector<double> state;
    double time = 0;
    bool blowup = false;
    std::vector<Decision> decisions;
    std::vector<OdePiece> pieces;
    std::size_t steps = 0;

    /// One decision per line after a `#` header.
    [[nodiscard]] std::string log() const;
};

/// Bounded nondeterministic interpreter: depth-first over choices, loop
/// exits and durations, backtracking when a test or domain fails.
class Executor {
public:
    /// The state order lists `state` first, then the remaining program
    /// variables. Throws std::invalid_argument on quantified tests.
    Executor(ProgramPtr program, const VarList& state, ExecConfig cfg);
    ~Executor();
    Executor(const Executor&) = delete;
    Executor& operator=(const Executor&) = delete;

    [[nodiscard]] const VarList& order() const { return order_; }
    [[nodiscard]] const ExecConfig& config() const { return cfg_; }

    /// One run; x0 covers the state variables, the rest start at 0.
    [[nodiscard]] Run run(std::span<const double> x0, const Strategy& strategy, std::uint64_t seed) const;

    struct Impl;

private:
    ProgramPtr program_;
    VarList order_;
    ExecConfig cfg_;
    std::unique_ptr<Impl> impl_;
};

struct ExecResult {
    std::vector<Run> runs;
    /// Final states of completed runs, by run index.
    [[nodiscard]] std::vector<std::vector<double>> reachable() const;
};

/// `runs` independent runs seeded from cfg.seed and the run index; trials
/// run in parallel and are merged by index.
ExecResult execute_program(const ProgramPtr& program, const VarList& state, std::span<const double> x0,
                           const ExecConfig& cfg, const Strategy& strategy, std::size_t runs);
ExecResult execute_program_serial(const ProgramPtr& program, const VarList& state, std::span<const double> x0,
                                  const ExecConfig& cfg, const Strategy& strategy, std::size_t runs);

/// Compacted signal of a run up to its end (the blowup time for runs that
/// blow up): ode pieces mapped to modes, zero-duration pieces dropped.
SwitchingSignal extract_signal(const Run& run, const std::vector<std::size_t>& ode_modes);

/// Per-trial deterministic seed.
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

/// Random signal admissible for the mechanism over [0, horizon]. State
/// dependent pieces end where the mode's domain would be left; the
/// returned horizon shrinks when no mode can progress.
struct SampledSignal {
    SwitchingSignal signal;
    double horizon;
};
SampledSignal sample_signal(const SwitchedSystem& sys, std::span<const double> x0, const ExecConfig& cfg,
                            std::uint64_t seed);

struct TrialOutcome {
    bool ok = false;
    bool blowup_sim = false;
    bool blowup_exec = false;
    /// End times: blowup time when blown up, else the trial horizon.
    double time_sim = 0;
    double time_exec = 0;
    double error = 0;
    std::size_t pieces = 0;
    std::string note;
    friend bool operator==(const TrialOutcome&, const TrialOutcome&) = default;
};

struct AdequacyReport {
    std::string mechanism;
    /// Signal first, then a guided run.
    std::vector<TrialOutcome> forward;
    /// Random run first, then its extracted signal.
    std::vector<TrialOutcome> backward;
    /// Cycle length for periodic mechanisms, else 0.
    double period = 0;

    [[nodiscard]] bool passed() const;
    [[nodiscard]] std::size_t failures() const;
    /// 1-based cycles in which blowups were reported, per side.
    [[nodiscard]] std::vector<std::size_t> blowup_cycles(bool forward_side, bool simulated) const;
    [[nodiscard]] std::string summary() const;
};

/// Both directions of the reachability correspondence for `trials` seeded
/// trials each. Throws std::invalid_argument for controlled switching.
AdequacyReport crosscheck_adequacy(const SwitchedSystem& sys, std::span<const double> x0, const ExecConfig& cfg,
                                   std::size_t trials);
AdequacyReport crosscheck_adequacy_serial(const SwitchedSystem& sys, std::span<const double> x0,
                                          const ExecConfig& cfg, std::size_t trials);

/// Mode index of every ODE of sys.program(), in odes() order.
std::vector<std::size_t> ode_modes(const SwitchedSystem& sys);

} // namespace switchkit
