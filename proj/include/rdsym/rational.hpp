#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace rdsym {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& q) { return q.template convert_to<double>(); }

inline std::string to_string(const Rational& q)
{
    if (denominator(q) == 1) return numerator(q).str();
    return numerator(q).str() + "/" + denominator(q).str();
}

inline bool is_integer(const Rational& q) { return denominator(q) == 1; }

/// Best rational approximation of x with denominator <= max_den (continued fractions).
/// Returns nullopt when |x| is too large to snap meaningfully.
std::optional<Rational> rational_snap(double x, std::int64_t max_den, double tol);

}  // namespace rdsym
