#pragma once

#include "switchkit/sim.hpp"

#include <cmath>
#include <limits>
#include <type_traits>
#include <utility>
#include <vector>

namespace switchkit::detail {

/// RK4 stepper owning its stage buffers.
class Stepper {
public:
    explicit Stepper(const CompiledField& f)
        : f_(f), k1_(f.size()), k2_(f.size()), k3_(f.size()), k4_(f.size()), tmp_(f.size())
    {
    }

    void step(std::span<const double> x, double h, std::span<double> out)
    {
        const std::size_t n = f_.size();
        f_.eval(x, k1_);
        for (std::size_t i = 0; i < n; ++i)
            tmp_[i] = x[i] + 0.5 * h * k1_[i];
        f_.eval(tmp_, k2_);
        for (std::size_t i = 0; i < n; ++i)
            tmp_[i] = x[i] + 0.5 * h * k2_[i];
        f_.eval(tmp_, k3_);
        for (std::size_t i = 0; i < n; ++i)
            tmp_[i] = x[i] + h * k3_[i];
        f_.eval(tmp_, k4_);
        for (std::size_t i = 0; i < n; ++i)
            out[i] = x[i] + h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    }

private:
    const CompiledField& f_;
    std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

inline bool escaped(std::span<const double> x, double bound)
{
    for (double v : x)
        if (!std::isfinite(v) || std::fabs(v) > bound)
            return true;
    return false;
}

/// Shrinks [0, s] to (lo, hi) with bad(lo) false, bad(hi) true.
template <class Bad>
std::pair<double, double> bisect(double s, double tol, Bad&& bad)
{
    double lo = 0, hi = s;
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (bad(mid))
            hi = mid;
        else
            lo = mid;
    }
    return {lo, hi};
}

/// Domain watched without stopping; records the first time it fails.
struct Watch {
    const CompiledFormula* domain = nullptr;
    double tol = 0;
    double first_violation = std::numeric_limits<double>::quiet_NaN();
    [[nodiscard]] bool violated() const { return !std::isnan(first_violation); }
};

struct FlowResult {
    double elapsed = 0;
    bool blowup = false;
    bool truncated = false;
};

/// A step changing some component by more than this fraction of
/// max(1, ‖x‖∞) is split in halves, so escapes to infinity are tracked up
/// to the event tolerance instead of lagging behind the fixed grid.
constexpr double kMaxRelativeChange = 0.1;

template <class OnSample>
class FlowRunner {
public:
    FlowRunner(const CompiledField& f, std::vector<double>& x, const ExecConfig& cfg, const CompiledFormula* stop,
               double stop_tol, Watch* watch, OnSample& on_sample)
        : stepper_(f), x_(x), cfg_(cfg), stop_(stop), stop_tol_(stop_tol), watch_(watch), on_sample_(on_sample),
          y_(x.size()), probe_(x.size())
    {
    }

    FlowResult run(double d)
    {
        if (d <= 0)
            return res_;
        const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(d / cfg_.step - 1e-9)));
        for (std::size_t k = 0; k < n; ++k) {
            double t0 = static_cast<double>(k) * cfg_.step;
            double t1 = k + 1 == n ? d : static_cast<double>(k + 1) * cfg_.step;
            if (!advance(t0, t1))
                break;
        }
        return res_;
    }

private:
    bool too_coarse(std::span<const double> y) const
    {
        double scale = 1.0, change = 0.0;
        for (std::size_t i = 0; i < x_.size(); ++i) {
            if (!std::isfinite(y[i]))
                return true;
            scale = std::max(scale, std::fabs(x_[i]));
            change = std::max(change, std::fabs(y[i] - x_[i]));
        }
        return change > kMaxRelativeChange * scale;
    }

    std::vector<double>& at(double s)
    {
        stepper_.step(x_, s, probe_);
        return probe_;
    }

    // Advances x from local time t0 to t1; false once the flow halts.
    bool advance(double t0, double t1)
    {
        double s = t1 - t0;
        stepper_.step(x_, s, y_);
        if (s > cfg_.event_tol && too_coarse(y_)) {
            double mid = t0 + 0.5 * s;
            return advance(t0, mid) && advance(mid, t1);
        }
        double s_end = s;
        bool blow = false;
        if (escaped(y_, cfg_.blowup_bound)) {
            s_end = bisect(s, cfg_.event_tol, [&](double m) { return escaped(at(m), cfg_.blowup_bound); }).second;
            stepper_.step(x_, s_end, y_);
            blow = true;
        }
        if (stop_ && !stop_->holds(y_, stop_tol_)) {
            s_end = bisect(s_end, cfg_.event_tol, [&](double m) { return !stop_->holds(at(m), stop_tol_); }).first;
            stepper_.step(x_, s_end, y_);
            blow = false;
            res_.truncated = true;
        }
        if (watch_ && watch_->domain && !watch_->violated() && !watch_->domain->holds(y_, watch_->tol)) {
            double hi =
                bisect(s_end, cfg_.event_tol, [&](double m) { return !watch_->domain->holds(at(m), watch_->tol); })
                    .second;
            watch_->first_violation = t0 + hi;
        }
        x_.swap(y_);
        res_.elapsed = res_.truncated || blow ? t0 + s_end : t1;
        on_sample_(res_.elapsed, x_);
        res_.blowup = blow;
        return !blow && !res_.truncated;
    }

    Stepper stepper_;
    std::vector<double>& x_;
    const ExecConfig& cfg_;
    const CompiledFormula* stop_;
    double stop_tol_;
    Watch* watch_;
    OnSample& on_sample_;
    std::vector<double> y_, probe_;
    FlowResult res_;
};

/// Integrates x in place over [0, d]. With `stop`, halts at the last time
/// the domain holds within stop_tol. on_sample(t, x) fires after every
/// accepted step.
template <class OnSample>
FlowResult flow(const CompiledField& f, std::vector<double>& x, double d, const ExecConfig& cfg,
                const CompiledFormula* stop, double stop_tol, Watch* watch, OnSample&& on_sample)
{
    FlowRunner<std::remove_reference_t<OnSample>> runner(f, x, cfg, stop, stop_tol, watch, on_sample);
    return runner.run(d);
}

} // namespace switchkit::detail
