#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <boost/rational.hpp>

namespace shapeseq {

using Rational = boost::rational<std::int64_t>;

/// Accepts "p/q" or a plain integer, with an optional leading sign.
Rational parse_rational(std::string_view text);

/// "p/q" (or "p" for integers) when `exact`, otherwise the shortest decimal
/// that round-trips the nearest double.
std::string format_rational(const Rational& r, bool exact = true);

inline double to_double(const Rational& r) { return boost::rational_cast<double>(r); }

} // namespace shapeseq
