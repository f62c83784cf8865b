#include "switchkit/cli.hpp"

#include "switchkit/parser.hpp"
#include "switchkit/stability.hpp"
#include "switchkit/symbolic.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace switchkit {

namespace fs = std::filesystem;

namespace {

/// Error carrying its exit code.
struct CliError : std::runtime_error {
    CliError(int c, const std::string& what) : std::runtime_error(what), code(c) {}
    int code;
};

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw CliError(kExitUnsupported, "cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw CliError(kExitUnsupported, "cannot write " + path.string());
    out << text;
}

std::string num(double x) { return fmt::format("{:.12g}", x); }

Rational parse_number(const std::string& text, const char* what)
{
    try {
        return parse_rational(text);
    } catch (const std::exception&) {
        throw CliError(kExitUsage, fmt::format("bad {} '{}'", what, text));
    }
}

/// "1,2", "1 2" or "x1=1 x2=2" over the state variables.
std::map<std::string, Rational> parse_point(const std::string& text, const VarList& vars)
{
    std::string t = text;
    for (char& c : t)
        if (c == ',' || c == ';')
            c = ' ';
    std::istringstream in(t);
    std::map<std::string, Rational> out;
    std::string word;
    std::size_t pos = 0;
    while (in >> word) {
        if (auto eq = word.find('='); eq != std::string::npos) {
            std::string name = word.substr(0, eq);
            if (std::find(vars.begin(), vars.end(), name) == vars.end())
                throw CliError(kExitUsage, "point names unknown variable " + name);
            out[name] = parse_number(word.substr(eq + 1), "coordinate");
        } else {
            if (pos >= vars.size())
                throw CliError(kExitUsage, "too many coordinates in '" + text + "'");
            out[vars[pos]] = parse_number(word, "coordinate");
        }
        ++pos;
    }
    for (const auto& v : vars)
        if (!out.count(v))
            throw CliError(kExitUsage, fmt::format("point '{}' has no value for {}", text, v));
    return out;
}

struct Settings {
    DecideConfig decide;
    ExecConfig exec;
    unsigned rank = 3;
    std::size_t trajectories = 100;
    nlohmann::json overrides = nlohmann::json::object();
};

/// Defaults, then the --config file, then SWITCHKIT_BOX, then --seed.
Settings load_settings(const std::string& config, std::optional<std::uint64_t> seed)
{
    Settings s;
    if (!config.empty()) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_file(config));
        } catch (const nlohmann::json::exception& e) {
            throw CliError(kExitUsage, fmt::format("config {}: {}", config, e.what()));
        }
        if (!j.is_object())
            throw CliError(kExitUsage, "config must be a JSON object");
        for (const auto& [key, value] : j.items()) {
            try {
                if (key == "samples")
                    s.decide.samples = value.get<std::size_t>();
                else if (key == "box")
                    s.decide.box = value.get<double>();
                else if (key == "max_denominator")
                    s.decide.max_denominator = value.get<long>();
                else if (key == "max_cases")
                    s.decide.max_cases = value.get<std::size_t>();
                else if (key == "rank")
                    s.rank = value.get<unsigned>();
                else if (key == "step")
                    s.exec.step = value.get<double>();
                else if (key == "horizon")
                    s.exec.horizon = value.get<double>();
                else if (key == "trajectories")
                    s.trajectories = value.get<std::size_t>();
                else if (key == "seed") {
                    s.decide.seed = value.get<std::uint64_t>();
                    s.exec.seed = s.decide.seed;
                } else
                    throw CliError(kExitUsage, "unknown config key " + key);
            } catch (const nlohmann::json::exception&) {
                throw CliError(kExitUsage, "bad value for config key " + key);
            }
            s.overrides[key] = value;
        }
    }
    if (const char* box = std::getenv("SWITCHKIT_BOX"); box && *box) {
        double b = to_double(parse_number(box, "SWITCHKIT_BOX"));
        if (!(b > 0))
            throw CliError(kExitUsage, "SWITCHKIT_BOX must be positive");
        s.decide.box = b;
        s.overrides["box"] = b;
    }
    if (seed) {
        s.decide.seed = *seed;
        s.exec.seed = *seed;
        s.overrides["seed"] = *seed;
    }
    if (!(s.decide.box > 0) || s.decide.samples == 0 || s.rank == 0)
        throw CliError(kExitUsage, "config needs positive box, samples and rank");
    return s;
}

SwitchedSystem load_model(const std::string& path)
{
    std::string text = read_file(path);
    try {
        SwitchedSystem sys = parse_model(text);
        sys.validate();
        return sys;
    } catch (const ParseError& e) {
        throw CliError(kExitUsage, fmt::format("{}:{}:{}: {}", path, e.line(), e.column(), e.what()));
    } catch (const std::invalid_argument& e) {
        throw CliError(kExitUsage, fmt::format("{}: {}", path, e.what()));
    }
}

Formula parse_state_formula(const std::string& text, const SwitchedSystem& sys)
{
    try {
        return parse_formula(text, sys.state);
    } catch (const ParseError& e) {
        throw CliError(kExitUsage, fmt::format("formula '{}': {}", text, e.what()));
    }
}

bool is_state_dependent(const SwitchedSystem& sys)
{
    return std::holds_alternative<mechanism::StateDependent>(sys.mechanism);
}

std::string header(const std::string& path, const SwitchedSystem& sys)
{
    return fmt::format("model: {}\nmechanism: {} ({} mode{})\n", path, mechanism_name(sys.mechanism),
                       sys.modes.size(), sys.modes.size() == 1 ? "" : "s");
}

int exit_for(const Verdict& v)
{
    return v.is_valid() ? kExitPass : v.is_falsified() ? kExitFail : kExitUnknown;
}

const char* result_word(const Verdict& v) { return v.is_valid() ? "PASS" : v.is_falsified() ? "FAIL" : "UNKNOWN"; }

/// One line per obligation plus an indented reason for non-valid ones.
std::string obligation_report(const Obligation& ob, const Verdict& v)
{
    std::string out = manifest_line(ob, v) + "\n";
    if (!v.is_valid() && !v.reason.empty())
        out += "  reason: " + v.reason + "\n";
    return out;
}

/// Exact evaluation of every obligation at a point.
int evaluate_at(const std::vector<Obligation>& obs, const std::string& point, const SwitchedSystem& sys,
                std::ostream& out)
{
    auto val = parse_point(point, *sys.state);
    Verdict shown = Verdict::falsified("", val);
    std::string where = shown.witness_text(*sys.state);
    bool all = true;
    for (const auto& ob : obs) {
        bool holds = ob.core.eval(val);
        all = all && holds;
        out << fmt::format("{} {} at {}\n", ob.name, holds ? "holds" : "fails", where);
    }
    return all ? kExitPass : kExitFail;
}

void emit_smt(const std::vector<Obligation>& obs, const std::string& dir, std::vector<std::string>& artifacts,
              std::ostream& out)
{
    for (const auto& ob : obs) {
        fs::path p = fs::path(dir) / (ob.name + ".smt2");
        write_file(p, export_smtlib(ob));
        artifacts.push_back(p.string());
        out << "wrote " << p.string() << "\n";
    }
}

struct Common {
    std::optional<std::uint64_t> seed;
    std::string config;
    std::string manifest;
};

struct ModelOpts {
    std::string model;
    unsigned rank = 0;
    std::string fix;
    std::string write;
    std::string emit;
    std::string at;
};

int cmd_check_model(const ModelOpts& o, const Settings& s, std::ostream& out, std::vector<std::string>& artifacts)
{
    SwitchedSystem sys = load_model(o.model);
    const unsigned rank = o.rank ? o.rank : s.rank;
    out << header(o.model, sys);
    if (!o.fix.empty()) {
        if (!is_state_dependent(sys))
            throw CliError(kExitUnsupported, "hysteresis applies to state-dependent switching");
        Rational eps = parse_number(o.fix, "hysteresis width");
        if (eps <= 0)
            throw CliError(kExitUsage, "hysteresis width must be positive");
        sys = hysteresis_inflate(sys, eps);
        out << "hysteresis: domains inflated by " << to_string(eps) << "\n";
        for (const auto& m : sys.modes)
            out << "  domain " << m.id << ": " << m.domain.to_string() << "\n";
        if (!o.write.empty()) {
            write_file(o.write, print_model(sys));
            artifacts.push_back(o.write);
            out << "wrote " << o.write << "\n";
        }
    }
    if (!is_state_dependent(sys)) {
        if (!o.at.empty() || !o.emit.empty())
            throw CliError(kExitUnsupported,
                           fmt::format("no well-formedness obligations for {} switching", mechanism_name(sys.mechanism)));
        out << "structure: valid\n";
        out << "program: " << sys.program()->to_string() << "\n";
        out << "result: PASS\n";
        return kExitPass;
    }

    std::vector<Obligation> obs{coverage_obligation(sys)};
    for (auto& ob : jump_obligations(sys, rank))
        obs.push_back(std::move(ob));
    obs.push_back(stuck_obligation(sys, rank));
    if (!o.at.empty())
        return evaluate_at(obs, o.at, sys, out);
    if (!o.emit.empty())
        emit_smt(obs, o.emit, artifacts, out);

    std::vector<Verdict> verdicts;
    for (const auto& ob : obs) {
        verdicts.push_back(decide_formula(ob, s.decide));
        out << obligation_report(ob, verdicts.back());
    }
    Verdict all = combine(verdicts);
    out << "result: " << result_word(all) << "\n";
    return exit_for(all);
}

struct SimOpts {
    std::string model;
    std::string signal;
    std::optional<std::uint64_t> random;
    std::string x0;
    std::optional<double> horizon;
    std::optional<double> step;
    std::string csv;
    std::string svg;
};

int cmd_simulate(const SimOpts& o, const Settings& s, std::ostream& out, std::vector<std::string>& artifacts)
{
    SwitchedSystem sys = load_model(o.model);
    if (o.signal.empty() == !o.random)
        throw CliError(kExitUsage, "simulate needs exactly one of --signal and --random");
    std::vector<double> x0(sys.dimension(), 0.0);
    if (!o.x0.empty()) {
        auto p = parse_point(o.x0, *sys.state);
        for (std::size_t i = 0; i < sys.dimension(); ++i)
            x0[i] = to_double(p.at((*sys.state)[i]));
    }
    ExecConfig ec = s.exec;
    if (o.step)
        ec.step = *o.step;
    if (o.horizon)
        ec.horizon = *o.horizon;
    if (ec.horizon < 0 || !(ec.step > 0))
        throw CliError(kExitUsage, "horizon must be nonnegative and step positive");

    SwitchingSignal sigma;
    if (!o.signal.empty()) {
        try {
            sigma = parse_signal(read_file(o.signal), sys);
        } catch (const std::invalid_argument& e) {
            throw CliError(kExitSignal, fmt::format("{}: {}", o.signal, e.what()));
        }
        if (!o.horizon)
            ec.horizon = sigma.times.empty() ? 0.0 : sigma.times.back();
        Verdict v = validate_signal(sigma, sys.modes.size(), ec.horizon);
        if (v.is_valid()) {
            if (const auto* slow = std::get_if<mechanism::Slow>(&sys.mechanism))
                v = check_dwell(sigma, to_double(slow->tau), ec.horizon);
            else if (const auto* fast = std::get_if<mechanism::Fast>(&sys.mechanism)) {
                std::vector<double> zeta;
                for (const auto& z : fast->zeta)
                    zeta.push_back(to_double(z));
                v = check_period(sigma, zeta, ec.horizon);
            } else if (std::holds_alternative<mechanism::Controlled>(sys.mechanism))
                throw CliError(kExitSignal, "controlled switching is driven by its controller, not a signal");
        }
        if (!v.is_valid())
            throw CliError(kExitSignal, fmt::format("{}: invalid signal: {}", o.signal, v.reason));
    } else if (ec.horizon > 0) {
        ExecConfig sc = ec;
        sc.seed = *o.random;
        if (std::holds_alternative<mechanism::Controlled>(sys.mechanism)) {
            Executor ex(sys.program(), *sys.state, sc);
            Run run = ex.run(x0, RandomStrategy{}, trial_seed(*o.random, 5, 0));
            sigma = extract_signal(run, ode_modes(sys));
            ec.horizon = run.time;
        } else {
            SampledSignal sampled = sample_signal(sys, x0, sc, *o.random);
            sigma = sampled.signal;
            ec.horizon = sampled.horizon;
        }
    }

    Trajectory traj;
    if (ec.horizon > 0 && sigma.size() > 0) {
        traj = simulate_signal(sys, sigma, x0, ec);
    } else {
        std::size_t mode = sigma.size() > 0 ? sigma.choices.front() : 0;
        traj.samples.push_back({0.0, x0, mode});
        traj.events.push_back({0.0, EventKind::Horizon, mode});
    }

    std::string csv = traj.to_csv(sys);
    if (o.csv.empty() || o.csv == "-") {
        out << csv;
    } else {
        write_file(o.csv, csv);
        artifacts.push_back(o.csv);
        out << "wrote " << o.csv << " (" << traj.samples.size() << " rows)\n";
    }
    if (!o.svg.empty()) {
        write_file(o.svg, render_svg(sys, traj));
        artifacts.push_back(o.svg);
        if (!o.csv.empty() && o.csv != "-")
            out << "wrote " << o.svg << "\n";
    }
    if (is_state_dependent(sys) && !o.signal.empty() && !traj.obeyed_domains)
        throw CliError(kExitSignal, o.signal + ": signal leaves a mode's domain");
    return kExitPass;
}

struct InvOpts {
    std::string model;
    std::string invariant;
    std::optional<std::size_t> budget;
    unsigned rank = 0;
    std::string emit;
    std::string at;
};

int cmd_check_invariant(const InvOpts& o, const Settings& s, std::ostream& out, std::vector<std::string>& artifacts)
{
    SwitchedSystem sys = load_model(o.model);
    Formula inv = parse_state_formula(o.invariant, sys);
    DecideConfig cfg = s.decide;
    if (o.budget)
        cfg.samples = *o.budget;
    std::vector<Obligation> obs;
    try {
        obs = gen_invariance_obligation(sys, inv, o.rank ? o.rank : s.rank);
    } catch (const std::invalid_argument& e) {
        if (std::holds_alternative<mechanism::Fast>(sys.mechanism) ||
            std::holds_alternative<mechanism::Controlled>(sys.mechanism))
            throw CliError(kExitUnsupported, e.what());
        throw CliError(kExitUsage, e.what());
    }
    out << header(o.model, sys);
    out << "invariant: " << inv.to_string() << "\n";
    if (!o.at.empty())
        return evaluate_at(obs, o.at, sys, out);
    if (!o.emit.empty())
        emit_smt(obs, o.emit, artifacts, out);
    std::vector<Verdict> verdicts;
    std::size_t samples = 0;
    for (const auto& ob : obs) {
        verdicts.push_back(decide_formula(ob, cfg));
        samples += verdicts.back().samples;
        out << obligation_report(ob, verdicts.back());
    }
    Verdict all = combine(verdicts);
    out << "samples: " << samples << "\n";
    out << "result: " << result_word(all) << "\n";
    return exit_for(all);
}

struct StabOpts {
    std::string model;
    std::string certificate;
    std::string tau;
    std::vector<std::string> epsilons;
    std::string at;
};

LyapunovCertificate load_certificate(const std::string& path, const SwitchedSystem& sys)
{
    try {
        return parse_certificate(read_file(path), sys.state);
    } catch (const ParseError& e) {
        throw CliError(kExitUsage, fmt::format("{}:{}:{}: {}", path, e.line(), e.column(), e.what()));
    }
}

int cmd_check_stability(const StabOpts& o, const Settings& s, std::ostream& out)
{
    SwitchedSystem sys = load_model(o.model);
    LyapunovCertificate cert = load_certificate(o.certificate, sys);
    try {
        gen_stability_spec(sys);
    } catch (const std::invalid_argument& e) {
        throw CliError(kExitUnsupported, e.what());
    }
    out << header(o.model, sys);
    out << "certificate: " << o.certificate << " (" << to_string(cert.kind) << ")\n";

    const bool dwell = cert.kind == CertificateKind::MultipleDwell;
    if (!o.at.empty()) {
        try {
            return evaluate_at(lyapunov_obligations(sys, cert), o.at, sys, out);
        } catch (const std::invalid_argument& e) {
            throw CliError(kExitUsage, e.what());
        }
    }
    Verdict verdict;
    try {
        if (dwell) {
            std::optional<Rational> tau;
            if (!o.tau.empty())
                tau = parse_number(o.tau, "dwell time");
            DwellReport rep = check_multiple_lyapunov_dwell(sys, cert, tau, s.decide);
            for (const auto& [mode, d] : rep.derivatives)
                out << "L_" << mode << " V_" << mode << " = " << d.to_string() << "\n";
            for (const auto& line : rep.lines)
                out << line << "\n";
            for (const auto& [mode, l] : rep.lambda)
                out << "lambda(" << mode << ") = " << to_string(l) << "\n";
            if (rep.mu > 0)
                out << "mu = " << to_string(rep.mu) << "\n";
            out << "bound = " << (std::isnan(rep.bound) ? std::string("none") : num(rep.bound)) << "\n";
            out << "tau = " << to_string(rep.tau) << "\n";
            verdict = rep.verdict;
        } else {
            if (!o.tau.empty())
                throw CliError(kExitUsage, "--tau applies to multiple-dwell certificates");
            LyapunovReport rep = check_common_lyapunov(sys, cert, s.decide);
            for (const auto& [mode, d] : rep.derivatives)
                out << "L_" << mode << " V = " << d.to_string() << "\n";
            for (const auto& line : rep.lines)
                out << line << "\n";
            out << "invariant: " << rep.invariant << "\n";
            verdict = rep.verdict;
        }
    } catch (const std::invalid_argument& e) {
        throw CliError(kExitUsage, e.what());
    }
    out << "verdict: " << verdict.label() << "\n";
    if (!verdict.reason.empty())
        out << "reason: " << verdict.reason << "\n";
    if (verdict.is_falsified() && !verdict.witness.empty())
        out << "witness: " << verdict.witness_text(*sys.state) << "\n";

    if (!o.epsilons.empty()) {
        if (!verdict.is_valid())
            out << "delta witnesses skipped: certificate did not pass\n";
        else {
            WitnessConfig wc;
            wc.exec = s.exec;
            wc.seed = s.decide.seed;
            wc.trajectories = s.trajectories;
            out << "eps,k,delta,max_norm,trajectories,sane\n";
            for (const auto& e : o.epsilons) {
                double eps = to_double(parse_number(e, "epsilon"));
                try {
                    DeltaWitness w = delta_witness(sys, cert, eps, wc);
                    out << fmt::format("{},{},{},{},{},{}\n", num(eps), num(w.k), num(w.delta), num(w.max_norm),
                                       w.trajectories, w.sane ? "yes" : "no");
                } catch (const std::exception& ex) {
                    out << fmt::format("{},,,,,{}\n", num(eps), ex.what());
                }
            }
        }
    }
    out << "result: " << result_word(verdict) << "\n";
    return exit_for(verdict);
}

struct ExportOpts {
    std::string model;
    std::string invariant;
    std::string certificate;
    std::string out;
    unsigned rank = 0;
};

int cmd_export(const ExportOpts& o, const Settings& s, std::ostream& out, std::vector<std::string>& artifacts)
{
    SwitchedSystem sys = load_model(o.model);
    const unsigned rank = o.rank ? o.rank : s.rank;
    std::vector<Obligation> obs;
    if (!o.invariant.empty()) {
        try {
            obs = gen_invariance_obligation(sys, parse_state_formula(o.invariant, sys), rank);
        } catch (const std::invalid_argument& e) {
            throw CliError(kExitUnsupported, e.what());
        }
    }
    if (!o.certificate.empty()) {
        try {
            for (auto& ob : lyapunov_obligations(sys, load_certificate(o.certificate, sys)))
                obs.push_back(std::move(ob));
        } catch (const std::invalid_argument& e) {
            throw CliError(kExitUnsupported, e.what());
        }
    }
    if (o.invariant.empty() && o.certificate.empty()) {
        if (!is_state_dependent(sys))
            throw CliError(kExitUnsupported, fmt::format("no well-formedness obligations for {} switching",
                                                         mechanism_name(sys.mechanism)));
        obs.push_back(coverage_obligation(sys));
        for (auto& ob : jump_obligations(sys, rank))
            obs.push_back(std::move(ob));
        obs.push_back(stuck_obligation(sys, rank));
    }
    emit_smt(obs, o.out, artifacts, out);
    std::string index;
    for (const auto& ob : obs)
        index += fmt::format("{} [{}]{}\n", ob.name, ob.provenance.to_string(), ob.exact() ? "" : " strengthened");
    fs::path p = fs::path(o.out) / "obligations.txt";
    write_file(p, index);
    artifacts.push_back(p.string());
    out << "wrote " << p.string() << "\n";
    return kExitPass;
}

void write_manifest(const std::string& path, const std::vector<std::string>& args, const std::string& command,
                    const std::vector<std::string>& inputs, const Settings* s, int status,
                    const std::vector<std::string>& artifacts)
{
    nlohmann::json j;
    j["command"] = command;
    j["args"] = args;
    j["inputs"] = inputs;
    j["seed"] = s ? s->decide.seed : 0;
    j["overrides"] = s ? s->overrides : nlohmann::json::object();
    j["exit_status"] = status;
    j["artifacts"] = artifacts;
    write_file(path, j.dump(2) + "\n");
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Switched-system checker: well-formedness, invariants, stability, simulation", "switchkit"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--seed", common.seed, "Seed for the falsifier and random signals");
    app.add_option("--config", common.config, "JSON file with settings overrides");
    app.add_option("--manifest", common.manifest, "Write a JSON run manifest here");

    ModelOpts mo;
    auto* check_model = app.add_subcommand("check-model", "Check well-formedness conditions of a model");
    check_model->add_option("model", mo.model, "Model file")->required();
    check_model->add_option("--rank", mo.rank, "Lie-derivative rank of progress formulas");
    check_model->add_option("--fix-hysteresis,--eps", mo.fix, "Inflate domains by this width first");
    check_model->add_option("--write", mo.write, "Write the rewritten model here");
    check_model->add_option("--emit-smt", mo.emit, "Directory for SMT-LIB obligations");
    check_model->add_option("--at", mo.at, "Evaluate the obligations exactly at this point");

    SimOpts so;
    auto* simulate = app.add_subcommand("simulate", "Simulate a model under a signal or random switching");
    simulate->add_option("model", so.model, "Model file")->required();
    simulate->add_option("--signal", so.signal, "Signal file (MODE duration per line)");
    simulate->add_option("--random", so.random, "Random admissible switching with this seed");
    simulate->add_option("--x0", so.x0, "Initial state, e.g. 1,0");
    simulate->add_option("--horizon", so.horizon, "Time horizon");
    simulate->add_option("--step", so.step, "RK4 step");
    simulate->add_option("--csv", so.csv, "CSV output file (default stdout)");
    simulate->add_option("--svg", so.svg, "SVG phase portrait");

    InvOpts io;
    auto* check_inv = app.add_subcommand("check-invariant", "Check that a formula is invariant");
    check_inv->add_option("model", io.model, "Model file")->required();
    check_inv->add_option("--invariant", io.invariant, "Invariant formula")->required();
    check_inv->add_option("--budget", io.budget, "Falsifier samples per obligation");
    check_inv->add_option("--rank", io.rank, "Lie-derivative rank of progress formulas");
    check_inv->add_option("--emit-smt", io.emit, "Directory for SMT-LIB obligations");
    check_inv->add_option("--at", io.at, "Evaluate the obligations exactly at this point");

    StabOpts sto;
    auto* check_stab = app.add_subcommand("check-stability", "Check a Lyapunov certificate");
    check_stab->add_option("model", sto.model, "Model file")->required();
    check_stab->add_option("certificate", sto.certificate, "Certificate file")->required();
    check_stab->add_option("--tau", sto.tau, "Dwell time overriding the model's");
    check_stab->add_option("--epsilon", sto.epsilons, "Epsilon values for delta witnesses")->delimiter(',');
    check_stab->add_option("--at", sto.at, "Evaluate the certificate obligations exactly at this point");

    ExportOpts eo;
    auto* exp = app.add_subcommand("export-obligations", "Write obligations as SMT-LIB files");
    exp->add_option("model", eo.model, "Model file")->required();
    exp->add_option("--invariant", eo.invariant, "Invariance obligations for this formula");
    exp->add_option("--certificate", eo.certificate, "Lyapunov obligations for this certificate");
    exp->add_option("--out", eo.out, "Output directory")->required();
    exp->add_option("--rank", eo.rank, "Lie-derivative rank of progress formulas");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitPass;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitPass;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    std::string command = app.get_subcommands().front()->get_name();
    std::vector<std::string> inputs;
    std::vector<std::string> artifacts;
    std::optional<Settings> settings;
    int status = kExitPass;
    try {
        settings = load_settings(common.config, common.seed);
        if (check_model->parsed()) {
            inputs = {mo.model};
            status = cmd_check_model(mo, *settings, out, artifacts);
        } else if (simulate->parsed()) {
            inputs = {so.model};
            if (!so.signal.empty())
                inputs.push_back(so.signal);
            status = cmd_simulate(so, *settings, out, artifacts);
        } else if (check_inv->parsed()) {
            inputs = {io.model};
            status = cmd_check_invariant(io, *settings, out, artifacts);
        } else if (check_stab->parsed()) {
            inputs = {sto.model, sto.certificate};
            status = cmd_check_stability(sto, *settings, out);
        } else {
            inputs = {eo.model};
            status = cmd_export(eo, *settings, out, artifacts);
        }
    } catch (const CliError& e) {
        err << "error: " << e.what() << "\n";
        status = e.code;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        status = kExitUsage;
    }
    if (!common.manifest.empty()) {
        try {
            write_manifest(common.manifest, args, command, inputs, settings ? &*settings : nullptr, status,
                           artifacts);
        } catch (const CliError& e) {
            err << "error: " << e.what() << "\n";
            return e.code;
        }
    }
    return status;
}

} // namespace switchkit
