#include "switchkit/verdict.hpp"

#include <algorithm>

namespace switchkit {

const char* to_string(Status s)
{
    switch (s) {
    case Status::Valid: return "valid";
    case Status::Falsified: return "falsified";
    case Status::Unknown: return "unknown";
    }
    return "?";
}

Verdict Verdict::valid(std::string reason, bool exact)
{
    Verdict v;
    v.status = Status::Valid;
    v.exact = exact;
    v.reason = std::move(reason);
    return v;
}

Verdict Verdict::falsified(std::string reason, std::map<std::string, Rational> witness)
{
    Verdict v;
    v.status = Status::Falsified;
    v.reason = std::move(reason);
    v.witness = std::move(witness);
    return v;
}

Verdict Verdict::unknown(std::string reason)
{
    Verdict v;
    v.status = Status::Unknown;
    v.reason = std::move(reason);
    return v;
}

std::string Verdict::label() const
{
    if (status == Status::Valid)
        return exact ? "valid-exact" : "valid";
    return to_string(status);
}

std::string Verdict::witness_text(const std::vector<std::string>& order) const
{
    std::string out;
    auto emit = [&](const std::string& name, const Rational& value) {
        if (!out.empty())
            out += " ";
        out += name + "=" + to_string(value);
    };
    for (const auto& name : order)
        if (auto it = witness.find(name); it != witness.end())
            emit(name, it->second);
    for (const auto& [name, value] : witness)
        if (std::find(order.begin(), order.end(), name) == order.end())
            emit(name, value);
    return out;
}

Verdict combine(const std::vector<Verdict>& parts, const std::string& reason)
{
    Verdict out = Verdict::valid(reason, true);
    for (const auto& p : parts) {
        out.samples += p.samples;
        if (p.status == Status::Falsified) {
            if (out.status != Status::Falsified) {
                out.status = Status::Falsified;
                out.witness = p.witness;
                out.reason = p.reason;
            }
        } else if (p.status == Status::Unknown && out.status == Status::Valid) {
            out.status = Status::Unknown;
            out.reason = p.reason;
        }
        out.exact = out.exact && p.exact;
        out.evidence.insert(out.evidence.end(), p.evidence.begin(), p.evidence.end());
    }
    if (out.status != Status::Valid)
        out.exact = false;
    return out;
}

} // namespace switchkit
