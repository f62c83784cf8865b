#include "switchkit/cli.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace switchkit {

namespace {

struct Stroke {
    const char* color;
    const char* dash;
};

// Cycled per mode.
constexpr Stroke kStrokes[] = {
    {"#1f77b4", ""},      {"#d62728", "6 3"},     {"#9467bd", "2 2"},      {"#ff7f0e", "8 3 2 3"},
    {"#8c564b", "10 4"},  {"#17becf", "1 3"},     {"#7f7f7f", "4 2 1 2"},  {"#bcbd22", "12 2 2 2"},
};

constexpr double kSize = 480;
constexpr double kMargin = 48;

struct Axis {
    double lo = 0, hi = 1;

    void fit(double v)
    {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void pad()
    {
        if (hi - lo < 1e-12) {
            lo -= 1;
            hi += 1;
        }
        double p = 0.05 * (hi - lo);
        lo -= p;
        hi += p;
    }
    [[nodiscard]] double map(double v, bool flip) const
    {
        double u = (v - lo) / (hi - lo);
        if (flip)
            u = 1 - u;
        return kMargin + u * (kSize - 2 * kMargin);
    }
};

std::string coord(double v) { return fmt::format("{:.2f}", v); }

} // namespace

std::string render_svg(const SwitchedSystem& sys, const Trajectory& traj)
{
    const bool scalar = sys.dimension() == 1;
    auto px = [&](const Sample& s) { return scalar ? s.time : s.state[0]; };
    auto py = [&](const Sample& s) { return scalar ? s.state[0] : s.state[1]; };

    Axis ax, ay;
    if (!traj.samples.empty()) {
        ax.lo = ax.hi = px(traj.samples.front());
        ay.lo = ay.hi = py(traj.samples.front());
    }
    for (const auto& s : traj.samples)
        if (std::isfinite(px(s)) && std::isfinite(py(s))) {
            ax.fit(px(s));
            ay.fit(py(s));
        }
    ax.pad();
    ay.pad();

    std::string out = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">\n", kSize);
    out += fmt::format("  <rect class=\"frame\" x=\"0\" y=\"0\" width=\"{0}\" height=\"{0}\" fill=\"white\"/>\n", kSize);
    const std::string xl = scalar ? "time" : (*sys.state)[0];
    const std::string yl = scalar ? (*sys.state)[0] : (*sys.state)[1];
    out += fmt::format("  <line class=\"axis\" x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n",
                       coord(kMargin), coord(kSize - kMargin), coord(kSize - kMargin));
    out += fmt::format("  <line class=\"axis\" x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n",
                       coord(kMargin), coord(kSize - kMargin), coord(kMargin));
    out += fmt::format("  <text class=\"label\" x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                       coord(kSize / 2), coord(kSize - 12), xl);
    out += fmt::format("  <text class=\"label\" x=\"12\" y=\"{}\" text-anchor=\"middle\" "
                       "transform=\"rotate(-90 12 {})\">{}</text>\n",
                       coord(kSize / 2), coord(kSize / 2), yl);

    // One polyline per maximal run of samples in one mode; consecutive runs
    // share their boundary sample.
    std::size_t i = 0;
    while (i < traj.samples.size()) {
        std::size_t mode = traj.samples[i].mode;
        std::size_t j = i;
        std::string points;
        while (j < traj.samples.size() && traj.samples[j].mode == mode) {
            const auto& s = traj.samples[j];
            if (std::isfinite(px(s)) && std::isfinite(py(s)))
                points += (points.empty() ? "" : " ") + coord(ax.map(px(s), false)) + "," + coord(ay.map(py(s), true));
            ++j;
        }
        if (j < traj.samples.size()) {
            const auto& s = traj.samples[j];
            points += " " + coord(ax.map(px(s), false)) + "," + coord(ay.map(py(s), true));
        }
        const Stroke& st = kStrokes[mode % std::size(kStrokes)];
        out += fmt::format("  <polyline class=\"mode-{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"{} "
                           "points=\"{}\"/>\n",
                           sys.modes[mode].id, st.color,
                           *st.dash ? fmt::format(" stroke-dasharray=\"{}\"", st.dash) : std::string(), points);
        i = j;
    }

    // Every switch event is marked, including re-selection of the current mode.
    for (const auto& ev : traj.events) {
        if (ev.kind != EventKind::Switch)
            continue;
        auto it = std::lower_bound(traj.samples.begin(), traj.samples.end(), ev.time,
                                   [](const Sample& s, double t) { return s.time < t; });
        if (it == traj.samples.end() || !std::isfinite(px(*it)) || !std::isfinite(py(*it)))
            continue;
        out += fmt::format("  <circle class=\"switch\" cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"none\" stroke=\"green\" "
                           "stroke-width=\"1.5\"/>\n",
                           coord(ax.map(px(*it), false)), coord(ay.map(py(*it), true)));
    }

    for (std::size_t m = 0; m < sys.modes.size(); ++m) {
        const Stroke& st = kStrokes[m % std::size(kStrokes)];
        double y = 16 + 14 * static_cast<double>(m);
        out += fmt::format("  <line class=\"legend\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\"{}/>\n",
                           coord(kSize - 110), coord(y), coord(kSize - 80), coord(y), st.color,
                           *st.dash ? fmt::format(" stroke-dasharray=\"{}\"", st.dash) : std::string());
        out += fmt::format("  <text class=\"legend\" x=\"{}\" y=\"{}\">{}</text>\n", coord(kSize - 74),
                           coord(y + 4), sys.modes[m].id);
    }
    return out + "</svg>\n";
}

} // namespace switchkit
