#pragma once

#include "switchkit/rational.hpp"

#include <map>
#include <string>
#include <vector>

namespace switchkit {

enum class Status { Valid, Falsified, Unknown };

const char* to_string(Status s);

/// Three-valued check result. A Valid verdict from the exact layer sets
/// `exact`; a Falsified verdict carries a witness that re-evaluates to a
/// violation under exact arithmetic when the check is arithmetic.
struct Verdict {
    Status status = Status::Unknown;
    bool exact = false;
    std::map<std::string, Rational> witness;
    std::string reason;
    std::vector<std::string> evidence;
    std::size_t samples = 0;

    static Verdict valid(std::string reason = {}, bool exact = true);
    static Verdict falsified(std::string reason, std::map<std::string, Rational> witness = {});
    static Verdict unknown(std::string reason);

    [[nodiscard]] bool is_valid() const { return status == Status::Valid; }
    [[nodiscard]] bool is_falsified() const { return status == Status::Falsified; }
    [[nodiscard]] bool is_unknown() const { return status == Status::Unknown; }

    /// "valid-exact", "valid", "falsified" or "unknown".
    [[nodiscard]] std::string label() const;
    /// "x1=1 x2=1", in the order of `order` (remaining names after).
    [[nodiscard]] std::string witness_text(const std::vector<std::string>& order = {}) const;
};

/// Falsified beats Unknown beats Valid; exactness is kept only if every
/// input was exact.
Verdict combine(const std::vector<Verdict>& parts, const std::string& reason = {});

} // namespace switchkit
