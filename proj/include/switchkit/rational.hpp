#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace switchkit {

using Rational = mpq_class;

/// Parses "3", "-7", "1/4", "0.125" or "2.5e-3" into an exact rational.
/// Throws std::invalid_argument on malformed input or a zero denominator.
Rational parse_rational(std::string_view text);

/// Canonical text: "3", "-1/4". Round-trips through parse_rational.
std::string to_string(const Rational& q);

double to_double(const Rational& q);

/// Exact rational value of a finite double.
Rational from_double(double x);

/// Best rational approximation of x with denominator at most max_den
/// (continued-fraction convergents and semiconvergents).
Rational snap(double x, long max_den);

} // namespace switchkit
