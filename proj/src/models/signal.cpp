#include "switchkit/models.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace switchkit {

SwitchingSignal SwitchingSignal::from_pieces(const std::vector<std::pair<std::size_t, double>>& pieces)
{
    SwitchingSignal s;
    s.times.push_back(0.0);
    for (const auto& [mode, d] : pieces) {
        s.choices.push_back(mode);
        s.times.push_back(s.times.back() + d);
    }
    return s;
}

std::size_t SwitchingSignal::mode_at(double t) const
{
    auto it = std::upper_bound(times.begin() + 1, times.end() - 1, t);
    return choices[static_cast<std::size_t>(it - times.begin()) - 1];
}

SwitchingSignal SwitchingSignal::compacted() const
{
    SwitchingSignal out;
    if (choices.empty())
        return *this;
    out.times.push_back(times.front());
    for (std::size_t i = 0; i < choices.size(); ++i) {
        if (!out.choices.empty() && out.choices.back() == choices[i]) {
            out.times.back() = times[i + 1];
            continue;
        }
        out.choices.push_back(choices[i]);
        out.times.push_back(times[i + 1]);
    }
    return out;
}

Verdict validate_signal(const SwitchingSignal& sigma, std::size_t mode_count, double horizon)
{
    if (!std::isfinite(horizon) || horizon < 0)
        return Verdict::falsified("horizon must be finite and nonnegative");
    if (sigma.choices.empty())
        return Verdict::falsified("signal has no pieces");
    if (sigma.times.size() != sigma.choices.size() + 1)
        return Verdict::falsified("signal needs one more time than choices");
    if (sigma.times.front() != 0.0)
        return Verdict::falsified("first switching time must be 0");
    for (std::size_t i = 1; i < sigma.times.size(); ++i) {
        if (!std::isfinite(sigma.times[i]))
            return Verdict::falsified(fmt::format("switching time {} is not finite", i));
        if (!(sigma.times[i] > sigma.times[i - 1]))
            return Verdict::falsified(fmt::format("non-increasing switching times at index {} ({:.12g} after {:.12g})",
                                                  i, sigma.times[i], sigma.times[i - 1]));
    }
    for (std::size_t i = 0; i < sigma.choices.size(); ++i)
        if (sigma.choices[i] >= mode_count)
            return Verdict::falsified(fmt::format("choice {} names no mode", i));
    return Verdict::valid("well-defined signal", true);
}

Verdict check_dwell(const SwitchingSignal& sigma, double tau, double horizon, double tol)
{
    SwitchingSignal c = sigma.compacted();
    for (std::size_t i = 0; i + 1 < c.choices.size(); ++i) {
        if (c.piece_end(i) >= horizon)
            break;
        if (c.duration(i) < tau - tol)
            return Verdict::falsified(
                fmt::format("piece {} lasts {:.12g} < dwell time {:.12g}", i, c.duration(i), tau));
    }
    return Verdict::valid("dwell-compatible", true);
}

Verdict check_period(const SwitchingSignal& sigma, const std::vector<double>& zeta, double horizon, double tol)
{
    const std::size_t m = zeta.size();
    if (m == 0)
        return Verdict::falsified("no durations");
    SwitchingSignal c = sigma.compacted();
    for (std::size_t i = 0; i < c.choices.size(); ++i) {
        double start = c.times[i];
        if (start >= horizon && i > 0)
            break;
        std::size_t expected = i % m;
        if (m > 1 && c.choices[i] != expected)
            return Verdict::falsified(fmt::format("piece {} follows mode {} instead of {}", i, c.choices[i], expected));
        if (m == 1)
            break;
        bool last = i + 1 == c.choices.size();
        double end = last ? horizon : std::min(c.piece_end(i), horizon);
        double z = zeta[expected];
        if (!last && c.piece_end(i) < horizon) {
            if (std::fabs(c.duration(i) - z) > tol)
                return Verdict::falsified(
                    fmt::format("piece {} lasts {:.12g}, period requires {:.12g}", i, c.duration(i), z));
        } else if (end - start > z + tol) {
            return Verdict::falsified(
                fmt::format("piece {} runs {:.12g} past the period {:.12g}", i, end - start, z));
        }
    }
    return Verdict::valid("period-compatible", true);
}

SwitchingSignal parse_signal(std::string_view text, const SwitchedSystem& sys)
{
    std::vector<std::pair<std::size_t, double>> pieces;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream words(line);
        std::string id, duration, extra;
        if (!(words >> id))
            continue;
        if (!(words >> duration) || (words >> extra))
            throw std::invalid_argument(fmt::format("signal line {}: expected 'MODE duration'", line_no));
        std::size_t mode = sys.mode_index(id);
        if (mode == sys.modes.size())
            throw std::invalid_argument(fmt::format("signal line {}: unknown mode '{}'", line_no, id));
        double d;
        try {
            d = to_double(parse_rational(duration));
        } catch (const std::invalid_argument&) {
            throw std::invalid_argument(fmt::format("signal line {}: bad duration '{}'", line_no, duration));
        }
        pieces.emplace_back(mode, d);
    }
    return SwitchingSignal::from_pieces(pieces);
}

std::string print_signal(const SwitchingSignal& sigma, const SwitchedSystem& sys)
{
    std::string out;
    for (std::size_t i = 0; i < sigma.choices.size(); ++i)
        out += fmt::format("{} {:.12g}\n", sys.modes[sigma.choices[i]].id, sigma.duration(i));
    return out;
}

} // namespace switchkit
