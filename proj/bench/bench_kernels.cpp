// Serial against parallel for the sampling kernels.
#include "switchkit/models.hpp"
#include "switchkit/parser.hpp"
#include "switchkit/sim.hpp"
#include "switchkit/stability.hpp"
#include "switchkit/symbolic.hpp"

#include <benchmark/benchmark.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace switchkit;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& name)
{
    std::ifstream in(fs::path(SWITCHKIT_CORPUS_DIR) / name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template <class Fn>
void falsifier(benchmark::State& state, Fn fn)
{
    auto vars = make_vars({"x1", "x2"});
    Formula f = parse_formula("x1^4 + x2^4 + 1 > x1*x2", vars);
    DecideConfig cfg;
    cfg.samples = static_cast<std::size_t>(state.range(0));
    cfg.exact_layer = false;
    for (auto _ : state)
        benchmark::DoNotOptimize(fn(f, *vars, cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <class Fn>
void adequacy(benchmark::State& state, Fn fn)
{
    SwitchedSystem sys = parse_model(slurp("ex2_state.model"));
    std::vector<double> x0{1.0, 0.5};
    ExecConfig cfg;
    cfg.horizon = 3;
    for (auto _ : state)
        benchmark::DoNotOptimize(fn(sys, x0, cfg, static_cast<std::size_t>(state.range(0))));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <class Fn>
void witness(benchmark::State& state, Fn fn)
{
    SwitchedSystem sys = parse_model(slurp("ex1_arbitrary.model"));
    LyapunovCertificate cert = parse_certificate(slurp("ex1_common.cert"), sys.state);
    WitnessConfig cfg;
    cfg.trajectories = static_cast<std::size_t>(state.range(0));
    cfg.exec.horizon = 2;
    for (auto _ : state)
        benchmark::DoNotOptimize(fn(sys, cert, 1.0, cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_FalsifierParallel(benchmark::State& s) { falsifier(s, falsify); }
void BM_FalsifierSerial(benchmark::State& s) { falsifier(s, falsify_serial); }
void BM_AdequacyParallel(benchmark::State& s) { adequacy(s, crosscheck_adequacy); }
void BM_AdequacySerial(benchmark::State& s) { adequacy(s, crosscheck_adequacy_serial); }
void BM_WitnessParallel(benchmark::State& s) { witness(s, delta_witness); }
void BM_WitnessSerial(benchmark::State& s) { witness(s, delta_witness_serial); }

} // namespace

BENCHMARK(BM_FalsifierParallel)->Arg(20000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FalsifierSerial)->Arg(20000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AdequacyParallel)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AdequacySerial)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WitnessParallel)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WitnessSerial)->Arg(100)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
