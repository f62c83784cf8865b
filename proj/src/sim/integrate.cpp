#include "flow.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <stdexcept>

namespace switchkit {

void ExecConfig::validate() const
{
    if (!(step > 0) || !(horizon > 0) || !(blowup_bound > 0) || !(event_tol > 0) || domain_tol < 0)
        throw std::invalid_argument("step, horizon, blowup bound and event tolerance must be positive");
}

CompiledField::CompiledField(const VectorField& field, const VarList& order) : n_(order.size())
{
    for (const auto& [var, rhs] : field.equations) {
        auto it = std::find(order.begin(), order.end(), var);
        if (it == order.end())
            throw std::invalid_argument("field variable '" + var + "' is not in the state order");
        eqs_.emplace_back(static_cast<std::size_t>(it - order.begin()), CompiledTerm(rhs, order));
    }
}

void CompiledField::eval(std::span<const double> x, std::span<double> dx) const
{
    std::fill(dx.begin(), dx.end(), 0.0);
    for (const auto& [i, term] : eqs_)
        dx[i] = term.eval(x);
}

void rk4_step(const CompiledField& f, std::span<const double> x, double h, std::span<double> out)
{
    detail::Stepper(f).step(x, h, out);
}

Segment integrate_mode(const VectorField& f, const VarList& order, std::span<const double> x0, double d,
                       const ExecConfig& cfg)
{
    cfg.validate();
    if (!(d >= 0))
        throw std::invalid_argument("duration must be nonnegative");
    if (x0.size() != order.size())
        throw std::invalid_argument("initial state has the wrong dimension");
    CompiledField field(f, order);
    Segment seg;
    std::vector<double> x(x0.begin(), x0.end());
    seg.times.push_back(0);
    seg.states.push_back(x);
    if (detail::escaped(x, cfg.blowup_bound)) {
        seg.blowup = true;
        return seg;
    }
    auto res = detail::flow(field, x, d, cfg, nullptr, 0, nullptr, [&](double t, const std::vector<double>& s) {
        seg.times.push_back(t);
        seg.states.push_back(s);
    });
    seg.blowup = res.blowup;
    return seg;
}

const char* to_string(EventKind k)
{
    switch (k) {
    case EventKind::Switch:
        return "switch";
    case EventKind::DomainExit:
        return "domain-exit";
    case EventKind::Blowup:
        return "blowup";
    case EventKind::Horizon:
        return "horizon";
    }
    return "?";
}

bool Trajectory::blew_up() const
{
    return std::any_of(events.begin(), events.end(), [](const Event& e) { return e.kind == EventKind::Blowup; });
}

std::string Trajectory::to_csv(const SwitchedSystem& sys) const
{
    std::string out = "time";
    for (const auto& v : *sys.state)
        out += "," + v;
    out += ",mode,event\n";
    // Events attach to the first sample at or after their time in their mode.
    std::vector<std::string> tags(samples.size());
    for (const auto& e : events) {
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (samples[i].time >= e.time && samples[i].mode == e.mode) {
                tags[i] += (tags[i].empty() ? "" : ";") + std::string(to_string(e.kind));
                break;
            }
        }
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        out += fmt::format("{:.12g}", samples[i].time);
        for (double v : samples[i].state)
            out += fmt::format(",{:.12g}", v);
        out += "," + sys.modes[samples[i].mode].id + "," + tags[i] + "\n";
    }
    return out;
}

Trajectory simulate_signal(const SwitchedSystem& sys, const SwitchingSignal& sigma, std::span<const double> x0,
                           const ExecConfig& cfg)
{
    cfg.validate();
    if (x0.size() != sys.dimension())
        throw std::invalid_argument(
            fmt::format("initial state has {} values for {} variables", x0.size(), sys.dimension()));
    if (Verdict v = validate_signal(sigma, sys.modes.size(), cfg.horizon); !v.is_valid())
        throw std::invalid_argument("invalid signal: " + v.reason);

    const VarList& order = *sys.state;
    std::vector<CompiledField> fields;
    std::vector<CompiledFormula> domains;
    for (const auto& m : sys.modes) {
        fields.emplace_back(m.field, order);
        domains.emplace_back(normalize(m.domain), order);
    }

    const double T = cfg.horizon;
    Trajectory traj;
    std::vector<double> x(x0.begin(), x0.end());
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        double start = sigma.times[i];
        if (start >= T)
            break;
        bool last = i + 1 == sigma.size();
        double end = last ? T : std::min(sigma.piece_end(i), T);
        std::size_t p = sigma.choices[i];
        if (i > 0)
            traj.events.push_back({start, EventKind::Switch, p});
        traj.samples.push_back({start, x, p});
        if (i == 0 && detail::escaped(x, cfg.blowup_bound)) {
            traj.events.push_back({start, EventKind::Blowup, p});
            return traj;
        }

        detail::Watch watch{&domains[p], cfg.domain_tol};
        if (!domains[p].holds(x, cfg.domain_tol))
            watch.first_violation = 0;
        auto res = detail::flow(fields[p], x, end - start, cfg, nullptr, 0, &watch,
                                [&](double t, const std::vector<double>& s) {
                                    traj.samples.push_back({start + t, s, p});
                                });
        if (watch.violated()) {
            traj.obeyed_domains = false;
            traj.events.push_back({start + watch.first_violation, EventKind::DomainExit, p});
        }
        if (res.blowup) {
            traj.events.push_back({traj.samples.back().time, EventKind::Blowup, p});
            return traj;
        }
        traj.samples.back().time = end;
        if (last || end >= T)
            break;
    }
    traj.events.push_back({traj.samples.back().time, EventKind::Horizon, traj.samples.back().mode});
    return traj;
}

SwitchingSignal extract_signal(const Trajectory& traj)
{
    SwitchingSignal s;
    s.times.push_back(0);
    s.choices.push_back(traj.samples.front().mode);
    for (const auto& e : traj.events) {
        if (e.kind != EventKind::Switch)
            continue;
        if (e.time > s.times.back()) {
            s.times.push_back(e.time);
            s.choices.push_back(e.mode);
        } else {
            s.choices.back() = e.mode;
        }
    }
    s.times.push_back(traj.end_time());
    return s.compacted();
}

} // namespace switchkit
