// Prints one PASS/FAIL line per acceptance criterion; exits nonzero if any fails.
#include "switchkit/models.hpp"
#include "switchkit/parser.hpp"
#include "switchkit/sim.hpp"
#include "switchkit/stability.hpp"
#include "switchkit/symbolic.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <regex>
#include <sstream>

using namespace switchkit;
namespace fs = std::filesystem;

namespace {

constexpr double kBoundTol = 1e-9;

std::string slurp(const std::string& name)
{
    std::ifstream in(fs::path(SWITCHKIT_SOURCE_DIR) / "corpus" / name);
    if (!in)
        throw std::runtime_error("cannot read " + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

SwitchedSystem model(const std::string& name) { return parse_model(slurp(name)); }

LyapunovCertificate cert(const SwitchedSystem& sys, const std::string& name)
{
    return parse_certificate(slurp(name), sys.state);
}

/// Collects failed checks of one criterion.
struct Criterion {
    std::vector<std::string> failures;

    void expect(bool ok, const std::string& what)
    {
        if (!ok)
            failures.push_back(what);
    }
};

bool all_valid(const std::vector<Verdict>& vs)
{
    for (const auto& v : vs)
        if (!v.is_valid())
            return false;
    return true;
}

void c1(Criterion& c)
{
    auto jump = model("jump.model");
    auto cond2 = check_no_infinitesimal_jumps(jump);
    c.expect(cond2.size() == 2 && cond2[0].is_valid() && cond2[1].is_falsified(), "jump: cond2 B not falsified");
    if (cond2.size() == 2 && cond2[1].is_falsified()) {
        auto ob = jump_obligations(jump)[1];
        c.expect(!ob.core.eval(cond2[1].witness), "jump: witness does not violate cond2 B");
    }
    c.expect(all_valid(check_no_infinitesimal_jumps(model("jump_fixed.model"))), "jump_fixed: cond2 not valid");

    auto sliding = model("sliding.model");
    c.expect(check_no_stuck_states(sliding).is_falsified(), "sliding: cond3 not falsified");
    c.expect(check_no_stuck_states(model("sliding_mode.model")).is_valid(), "sliding mode: cond3 not valid");
    auto inflated = hysteresis_inflate(sliding, Rational(1, 10));
    c.expect(check_no_stuck_states(inflated).is_valid(), "hysteresis 1/10: cond3 not valid");
}

void c2(Criterion& c)
{
    auto sys = model("ex1_arbitrary.model");
    auto r = check_common_lyapunov(sys, cert(sys, "ex1_common.cert"));
    c.expect(r.verdict.is_valid() && r.verdict.exact, "verdict " + r.verdict.label());
    Term expected = parse_term("-x1^2 - x2^4", sys.state);
    c.expect(r.derivatives.size() == 2, "derivative count");
    for (const auto& [mode, lv] : r.derivatives)
        c.expect(lv == expected, fmt::format("L_{} V = {}", mode, lv.to_string()));
}

void c3(Criterion& c)
{
    auto sys = model("ex2_state.model");
    auto sd = cert(sys, "ex2_state_domain.cert");
    for (const auto& [key, m] : sd.multipliers)
        c.expect(m == 2, "multiplier " + key.first + " is " + m.get_str());
    auto r = check_common_lyapunov(sys, sd);
    c.expect(r.verdict.is_valid() && r.verdict.exact, "state-domain verdict " + r.verdict.label());

    auto stripped = model("ex2_stripped.model");
    auto common = cert(stripped, "ex2_common.cert");
    auto s = check_common_lyapunov(stripped, common);
    c.expect(s.verdict.is_falsified(), "stripped verdict " + s.verdict.label());
    if (!s.verdict.is_falsified())
        return;
    Rational worst = 0;
    for (const auto& [mode, lv] : s.derivatives)
        worst = std::max(worst, lv.eval(s.verdict.witness));
    c.expect(worst > 0, "witness " + s.verdict.witness_text() + " has no positive Lie derivative");
    std::map<std::string, Rational> one{{"x1", 1}, {"x2", 1}};
    c.expect(s.derivatives.at(0).second.eval(one) == Rational(3, 2), "L_A V(1,1) != 3/2");
}

void c4(Criterion& c)
{
    auto sys = model("ex3_slow.model");
    auto ct = cert(sys, "ex3_dwell.cert");
    for (const auto& m : sys.modes) {
        Term lv = lie_derivative(ct.function(m.id), m.field);
        Term target = ct.function(m.id) * Term::constant(Rational(-1, 4), sys.state);
        c.expect(lv == target, "L V_" + m.id + " != -V/4");
    }
    auto r = check_multiple_lyapunov_dwell(sys, ct);
    for (const auto& [mode, l] : r.lambda)
        c.expect(l == Rational(1, 4), "lambda " + mode + " = " + l.get_str());
    c.expect(r.mu == 2, "mu = " + r.mu.get_str());
    c.expect(std::fabs(r.bound - 4 * std::log(2.0)) <= kBoundTol, fmt::format("bound {:.12f}", r.bound));
    c.expect(std::fabs(r.bound - 2.772588722240) <= kBoundTol, fmt::format("bound {:.12f}", r.bound));
    c.expect(r.verdict.is_valid(), "tau = 3 " + r.verdict.label());
    c.expect(check_multiple_lyapunov_dwell(sys, ct, Rational(5, 2)).verdict.is_falsified(), "tau = 5/2 accepted");

    auto abc = model("ex3_abc_slow.model");
    c.expect(check_multiple_lyapunov_dwell(abc, cert(abc, "ex3_abc_dwell.cert")).verdict.is_valid(),
             "ABC tau = 3 rejected");
}

void c5(Criterion& c)
{
    constexpr std::size_t kTrials = 200;
    struct Setup {
        const char* file;
        std::vector<double> x0;
        double horizon;
    };
    const std::vector<Setup> setups = {
        {"fig2_arbitrary.model", {1.0}, 3},
        {"ex2_state.model", {1.0, 0.5}, 3},
        {"ex3_slow.model", {1.0, 1.0}, 12},
        {"fast_blowup.model", {0.0}, 6},
    };
    for (const auto& s : setups) {
        auto sys = model(s.file);
        ExecConfig cfg;
        cfg.horizon = s.horizon;
        cfg.match_tol = 1e-6;
        AdequacyReport r = crosscheck_adequacy(sys, s.x0, cfg, kTrials);
        c.expect(r.forward.size() == kTrials && r.backward.size() == kTrials, std::string(s.file) + ": trial count");
        c.expect(r.passed(), std::string(s.file) + ": " + r.summary());
        if (std::holds_alternative<mechanism::Fast>(sys.mechanism)) {
            for (bool forward : {true, false}) {
                auto sim = r.blowup_cycles(forward, true), exec = r.blowup_cycles(forward, false);
                c.expect(sim == exec, "fast: blowup sides disagree");
                c.expect(!sim.empty(), "fast: no blowup observed");
                for (auto cycle : sim)
                    c.expect(cycle == 1, fmt::format("fast: blowup in cycle {}", cycle));
            }
        }
    }
}

void c6(Criterion& c)
{
    auto x = make_vars({"x"});
    VectorField f;
    f.equations.emplace_back("x", parse_term("x", x));
    std::vector<double> x0{1.0};
    auto error = [&](double h) {
        ExecConfig cfg;
        cfg.step = h;
        return std::fabs(integrate_mode(f, *x, x0, std::log(2.0), cfg).end_state()[0] - 2.0);
    };
    const double h = 0.05;
    double ratio = error(h) / error(h / 2);
    c.expect(ratio >= 8 && ratio <= 32, fmt::format("error ratio {:.3f}", ratio));
}

/// Runs a doctest binary; true when it passes with at least min_cases selected.
bool run_binary(const char* path, const std::string& filter, int min_cases)
{
    std::string cmd = fmt::format("\"{}\" {} 2>&1", path, filter);
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe)
        return false;
    std::string out;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe))
        out.append(buf, n);
    int status = pclose(pipe);
    std::smatch m;
    if (!std::regex_search(out, m, std::regex(R"(test cases:\s+(\d+) \|\s+(\d+) passed)")))
        return false;
    return status == 0 && std::stoi(m[1]) >= min_cases && m[1] == m[2];
}

void c7(Criterion& c)
{
    c.expect(run_binary(SWITCHKIT_UNIT_CORE,
                        "-tc=\"ring laws*,evaluation is a ring*,Leibniz*,normalization preserves*\"", 4),
             "hp-core properties");
    c.expect(run_binary(SWITCHKIT_UNIT_SYMBOLIC, "-tc=\"property:*\"", 8), "symbolic properties");
    c.expect(run_binary(SWITCHKIT_UNIT_STABILITY, "-tc=\"property: verdicts are invariant*\"", 1),
             "stability scaling property");
}

void c8(Criterion& c)
{
    c.expect(run_binary(SWITCHKIT_GOLDEN_CLI, "", 3), "golden files");
    c.expect(run_binary(SWITCHKIT_UNIT_CLI, "", 13), "exit codes and determinism");
}

} // namespace

int main()
{
    struct Entry {
        int id;
        const char* name;
        double limit_s;
        std::function<void(Criterion&)> run;
    };
    const std::vector<Entry> entries = {
        {1, "well-formedness replication", 5, c1},
        {2, "common Lyapunov function", 1, c2},
        {3, "state-domain Lyapunov function", 1, c3},
        {4, "dwell-time bound", 2, c4},
        {5, "adequacy harness", 60, c5},
        {6, "RK4 order", 1, c6},
        {7, "property suites", 30, c7},
        {8, "CLI golden files", 120, c8},
    };
    int failed = 0;
    for (const auto& e : entries) {
        Criterion c;
        auto t0 = std::chrono::steady_clock::now();
        try {
            e.run(c);
        } catch (const std::exception& ex) {
            c.failures.push_back(std::string("exception: ") + ex.what());
        }
        double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        c.expect(s < e.limit_s, fmt::format("took {:.2f} s, limit {} s", s, e.limit_s));
        bool ok = c.failures.empty();
        failed += !ok;
        std::string detail;
        for (const auto& f : c.failures)
            detail += (detail.empty() ? " (" : "; ") + f;
        if (!detail.empty())
            detail += ")";
        fmt::print("{} {}: {} [{:.2f} s]{}\n", ok ? "PASS" : "FAIL", e.id, e.name, s, detail);
    }
    return failed == 0 ? 0 : 1;
}
