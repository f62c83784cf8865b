#include "flow.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace switchkit {

using namespace program_node;

std::string Decision::to_string() const
{
    switch (kind) {
    case Kind::Iterate:
        return "iterate";
    case Kind::Stop:
        return "stop";
    case Kind::Branch:
        return fmt::format("branch {}", branch);
    case Kind::Evolve:
        return fmt::format("evolve {} {:.17g}", ode, duration);
    }
    return "?";
}

std::vector<Decision> parse_decisions(std::string_view text)
{
    std::vector<Decision> out;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream words(line);
        std::string kind, extra;
        if (!(words >> kind))
            continue;
        Decision d;
        bool ok = true;
        if (kind == "iterate") {
            d = Decision::iterate();
        } else if (kind == "stop") {
            d = Decision::stop();
        } else if (kind == "branch") {
            ok = static_cast<bool>(words >> d.branch) && d.branch <= 1;
            d.kind = Decision::Kind::Branch;
        } else if (kind == "evolve") {
            ok = static_cast<bool>(words >> d.ode >> d.duration) && d.duration >= 0;
            d.kind = Decision::Kind::Evolve;
        } else {
            ok = false;
        }
        if (!ok || (words >> extra))
            throw std::invalid_argument(fmt::format("run log line {}: cannot read '{}'", line_no, line));
        out.push_back(d);
    }
    return out;
}

const char* to_string(RunStatus s)
{
    switch (s) {
    case RunStatus::Completed:
        return "completed";
    case RunStatus::Aborted:
        return "aborted";
    case RunStatus::Budget:
        return "budget";
    }
    return "?";
}

std::string Run::log() const
{
    std::string out = fmt::format("# {} time={:.17g}{} steps={}\n", switchkit::to_string(status), time,
                                  blowup ? " blowup" : "", steps);
    for (const auto& d : decisions)
        out += d.to_string() + "\n";
    return out;
}

std::vector<std::vector<double>> ExecResult::reachable() const
{
    std::vector<std::vector<double>> out;
    for (const auto& r : runs)
        if (r.status == RunStatus::Completed)
            out.push_back(r.state);
    return out;
}

struct Executor::Impl {
    struct Node {
        std::size_t var = 0;
        CompiledTerm value;
        CompiledFormula test;
        CompiledField field;
        CompiledFormula domain;
        std::size_t ode = 0;
        /// Choice nodes: alternatives along the right spine.
        std::vector<const HybridProgram*> alternatives;
    };
    std::unordered_map<const HybridProgram*, Node> nodes;

    void compile(const HybridProgram& p, const VarList& order, const std::vector<const Ode*>& odes)
    {
        if (nodes.count(&p))
            return;
        Node& n = nodes[&p];
        auto index_of = [&](const std::string& v) {
            return static_cast<std::size_t>(std::find(order.begin(), order.end(), v) - order.begin());
        };
        if (const auto* a = p.as<Assign>()) {
            n.var = index_of(a->var);
            n.value = CompiledTerm(a->value, order);
        } else if (const auto* t = p.as<Test>()) {
            if (!t->condition.is_quantifier_free())
                throw std::invalid_argument("cannot execute quantified test " + t->condition.to_string());
            n.test = CompiledFormula(normalize(t->condition), order);
        } else if (const auto* o = p.as<Ode>()) {
            n.field = CompiledField(o->field, order);
            n.domain = CompiledFormula(normalize(o->domain), order);
            n.ode = static_cast<std::size_t>(std::find(odes.begin(), odes.end(), o) - odes.begin());
        } else if (const auto* s = p.as<Seq>()) {
            compile(*s->first, order, odes);
            compile(*s->second, order, odes);
        } else if (const auto* l = p.as<Loop>()) {
            compile(*l->body, order, odes);
        } else if (p.as<Choice>()) {
            const HybridProgram* spine = &p;
            while (const auto* cc = spine->as<Choice>()) {
                n.alternatives.push_back(cc->left.get());
                spine = cc->right.get();
            }
            n.alternatives.push_back(spine);
            for (const auto* alt : n.alternatives)
                compile(*alt, order, odes);
        }
    }
};

namespace {

struct Frame {
    const HybridProgram* prog;
    std::size_t iteration;
};

constexpr double kSnap = 1e-9;

class Interpreter {
public:
    Interpreter(const Executor::Impl& impl, const ExecConfig& cfg, const Strategy& strategy, std::uint64_t seed)
        : impl_(impl), cfg_(cfg), strategy_(strategy), rng_(seed)
    {
        if (const auto* g = std::get_if<GuidedStrategy>(&strategy_))
            loop_limit_ = std::max(cfg_.max_iterations, 2 * g->signal.size() + 2);
        else if (const auto* s = std::get_if<ScriptedStrategy>(&strategy_))
            loop_limit_ = s->script.size() + 1;
        else
            loop_limit_ = cfg_.max_iterations;
    }

    Run execute(const HybridProgram& root, std::vector<double> x)
    {
        Run run;
        run.state = x;
        std::vector<Frame> stack{{&root, 0}};
        if (!step(std::move(x), 0.0, std::move(stack)))
            result_.status = budget_ ? RunStatus::Budget : RunStatus::Aborted;
        if (result_.status != RunStatus::Completed)
            result_.state = run.state;
        result_.steps = steps_;
        return std::move(result_);
    }

private:
    const Executor::Impl::Node& node(const HybridProgram* p) const { return impl_.nodes.at(p); }

    bool finish(const std::vector<double>& x, double t, bool blowup)
    {
        if (!blowup) {
            if (const auto* g = std::get_if<GuidedStrategy>(&strategy_); g && t < g->end_time - kSnap)
                return false;
            if (const auto* s = std::get_if<ScriptedStrategy>(&strategy_); s && cursor_ != s->script.size())
                return false;
        }
        result_.status = RunStatus::Completed;
        result_.state = x;
        result_.time = t;
        result_.blowup = blowup;
        result_.decisions = decisions_;
        result_.pieces = pieces_;
        return true;
    }

    std::optional<Decision> next_scripted()
    {
        const auto& script = std::get<ScriptedStrategy>(strategy_).script;
        if (cursor_ >= script.size())
            return std::nullopt;
        return script[cursor_];
    }

    // Tries alternatives in order; restores the decision log on failure.
    template <class Attempt>
    bool attempt(const std::vector<Decision>& made, Attempt&& go)
    {
        std::size_t mark = decisions_.size(), cursor = cursor_;
        decisions_.insert(decisions_.end(), made.begin(), made.end());
        if (std::holds_alternative<ScriptedStrategy>(strategy_))
            cursor_ += made.size();
        if (go())
            return true;
        decisions_.resize(mark);
        cursor_ = cursor;
        return false;
    }

    std::vector<std::size_t> branch_order(std::size_t count)
    {
        std::vector<std::size_t> order(count);
        for (std::size_t i = 0; i < count; ++i)
            order[i] = i;
        if (std::holds_alternative<RandomStrategy>(strategy_)) {
            std::shuffle(order.begin(), order.end(), rng_);
        } else if (std::holds_alternative<ScriptedStrategy>(strategy_)) {
            const auto& script = std::get<ScriptedStrategy>(strategy_).script;
            std::size_t k = 0, at = cursor_;
            while (k + 1 < count && at < script.size() && script[at].kind == Decision::Kind::Branch &&
                   script[at].branch == 1) {
                ++k;
                ++at;
            }
            bool closed = k + 1 == count || (at < script.size() && script[at].kind == Decision::Kind::Branch &&
                                             script[at].branch == 0);
            if (!closed)
                return {};
            order = {k};
        }
        return order;
    }

    static std::vector<Decision> spine_decisions(std::size_t k, std::size_t count)
    {
        std::vector<Decision> out(k, Decision::take(1));
        if (k + 1 < count)
            out.push_back(Decision::take(0));
        return out;
    }

    std::vector<bool> loop_order(std::size_t iteration, double t)
    {
        bool can_iterate = iteration < loop_limit_;
        if (const auto* g = std::get_if<GuidedStrategy>(&strategy_)) {
            if (t >= g->end_time - kSnap)
                return {false};
            return can_iterate ? std::vector<bool>{true, false} : std::vector<bool>{false};
        }
        if (std::holds_alternative<ScriptedStrategy>(strategy_)) {
            auto d = next_scripted();
            if (!d || (d->kind != Decision::Kind::Iterate && d->kind != Decision::Kind::Stop))
                return {};
            return {d->kind == Decision::Kind::Iterate};
        }
        if (!can_iterate)
            return {false};
        std::uniform_real_distribution<double> u(0.0, 1.0);
        if (t < cfg_.horizon && u(rng_) < cfg_.continue_probability)
            return {true, false};
        return {false, true};
    }

    // Requested duration for an ODE, or nullopt when the strategy rules it out.
    std::optional<double> duration_for(std::size_t ode, double t)
    {
        if (const auto* g = std::get_if<GuidedStrategy>(&strategy_)) {
            if (ode >= g->ode_modes.size())
                return std::nullopt;
            const auto& sig = g->signal;
            double probe = t + kSnap;
            if (sig.mode_at(probe) != g->ode_modes[ode])
                return std::nullopt;
            double end = g->end_time;
            auto it = std::upper_bound(sig.times.begin() + 1, sig.times.end() - 1, probe);
            if (it != sig.times.end() - 1)
                end = std::min(end, *it);
            if (end - t <= kSnap)
                return std::nullopt;
            target_ = end;
            return end - t;
        }
        if (std::holds_alternative<ScriptedStrategy>(strategy_)) {
            auto d = next_scripted();
            if (!d || d->kind != Decision::Kind::Evolve || d->ode != ode)
                return std::nullopt;
            return d->duration;
        }
        double remaining = std::max(0.0, cfg_.horizon - t);
        std::uniform_real_distribution<double> u(0.0, remaining);
        return remaining > 0 ? u(rng_) : 0.0;
    }

    bool step(std::vector<double> x, double t, std::vector<Frame> stack)
    {
        if (++steps_ > cfg_.max_steps) {
            budget_ = true;
            return false;
        }
        if (stack.empty())
            return finish(x, t, false);
        Frame frame = stack.back();
        stack.pop_back();
        const HybridProgram& p = *frame.prog;
        const auto& n = node(frame.prog);

        if (p.as<Assign>()) {
            x[n.var] = n.value.eval(x);
            return step(std::move(x), t, std::move(stack));
        }
        if (p.as<Test>()) {
            if (!n.test.holds(x, cfg_.domain_tol))
                return false;
            return step(std::move(x), t, std::move(stack));
        }
        if (const auto* s = p.as<Seq>()) {
            stack.push_back({s->second.get(), 0});
            stack.push_back({s->first.get(), 0});
            return step(std::move(x), t, std::move(stack));
        }
        if (p.as<Choice>()) {
            const std::size_t count = n.alternatives.size();
            for (std::size_t k : branch_order(count)) {
                auto next = stack;
                next.push_back({n.alternatives[k], 0});
                if (attempt(spine_decisions(k, count), [&] { return step(x, t, std::move(next)); }))
                    return true;
                if (budget_)
                    return false;
            }
            return false;
        }
        if (const auto* l = p.as<Loop>()) {
            for (bool again : loop_order(frame.iteration, t)) {
                auto next = stack;
                if (again) {
                    next.push_back({frame.prog, frame.iteration + 1});
                    next.push_back({l->body.get(), 0});
                }
                if (attempt({again ? Decision::iterate() : Decision::stop()},
                            [&] { return step(x, t, std::move(next)); }))
                    return true;
                if (budget_)
                    return false;
            }
            return false;
        }
        return evolve(n, std::move(x), t, std::move(stack));
    }

    bool evolve(const Executor::Impl::Node& n, std::vector<double> x, double t, std::vector<Frame> stack)
    {
        if (!n.domain.holds(x, cfg_.domain_tol))
            return false;
        auto requested = duration_for(n.ode, t);
        if (!requested)
            return false;
        // Truncation keeps half the tolerance in reserve so replays of the
        // same pieces still pass the full domain tolerance.
        auto res = detail::flow(n.field, x, *requested, cfg_, &n.domain, 0.5 * cfg_.domain_tol, nullptr,
                                [](double, const std::vector<double>&) {});
        bool exact = !std::holds_alternative<RandomStrategy>(strategy_);
        if (exact && res.truncated && *requested - res.elapsed > cfg_.event_tol)
            return false;
        double recorded = res.blowup ? *requested : res.elapsed;
        double t_next = t + res.elapsed;
        if (std::holds_alternative<GuidedStrategy>(strategy_) && !res.blowup)
            t_next = target_;
        pieces_.push_back({n.ode, t, recorded, res.elapsed});
        bool ok = attempt({Decision::evolve(n.ode, recorded)}, [&] {
            if (res.blowup)
                return finish(x, t_next, true);
            return step(x, t_next, std::move(stack));
        });
        if (!ok)
            pieces_.pop_back();
        return ok;
    }

    const Executor::Impl& impl_;
    const ExecConfig& cfg_;
    const Strategy& strategy_;
    std::mt19937_64 rng_;
    std::size_t loop_limit_ = 0;
    double target_ = 0;
    std::size_t steps_ = 0;
    std::size_t cursor_ = 0;
    bool budget_ = false;
    std::vector<Decision> decisions_;
    std::vector<OdePiece> pieces_;
    Run result_;
};

} // namespace

Executor::Executor(ProgramPtr program, const VarList& state, ExecConfig cfg)
    : program_(std::move(program)), order_(state), cfg_(cfg), impl_(std::make_unique<Impl>())
{
    cfg_.validate();
    for (const auto& v : program_->all_vars())
        if (std::find(order_.begin(), order_.end(), v) == order_.end())
            order_.push_back(v);
    impl_->compile(*program_, order_, program_->odes());
}

Executor::~Executor() = default;

Run Executor::run(std::span<const double> x0, const Strategy& strategy, std::uint64_t seed) const
{
    std::vector<double> x(order_.size(), 0.0);
    if (x0.size() > x.size())
        throw std::invalid_argument("initial state has too many values");
    std::copy(x0.begin(), x0.end(), x.begin());
    Interpreter interp(*impl_, cfg_, strategy, seed);
    return interp.execute(*program_, std::move(x));
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
{
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(seed) ^ stream) ^ index);
}

ExecResult execute_program(const ProgramPtr& program, const VarList& state, std::span<const double> x0,
                           const ExecConfig& cfg, const Strategy& strategy, std::size_t runs)
{
    Executor ex(program, state, cfg);
    ExecResult out;
    out.runs.resize(runs);
    const auto n = static_cast<long>(runs);
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i)
        out.runs[static_cast<std::size_t>(i)] =
            ex.run(x0, strategy, trial_seed(cfg.seed, 0, static_cast<std::uint64_t>(i)));
    return out;
}

ExecResult execute_program_serial(const ProgramPtr& program, const VarList& state, std::span<const double> x0,
                                  const ExecConfig& cfg, const Strategy& strategy, std::size_t runs)
{
    Executor ex(program, state, cfg);
    ExecResult out;
    for (std::size_t i = 0; i < runs; ++i)
        out.runs.push_back(ex.run(x0, strategy, trial_seed(cfg.seed, 0, i)));
    return out;
}

SwitchingSignal extract_signal(const Run& run, const std::vector<std::size_t>& ode_modes)
{
    SwitchingSignal s;
    s.times.push_back(0);
    for (const auto& piece : run.pieces) {
        if (!(piece.elapsed > 0))
            continue;
        std::size_t mode = piece.ode < ode_modes.size() ? ode_modes[piece.ode] : piece.ode;
        s.choices.push_back(mode);
        s.times.push_back(s.times.back() + piece.elapsed);
    }
    return s.compacted();
}

} // namespace switchkit
