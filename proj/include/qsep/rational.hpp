#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>

namespace qsep {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// C(n, k) as an exact integer; zero when k > n.
BigInt binomial(std::uint64_t n, std::uint64_t k);

/// "p/q" (or "p" when q == 1).
std::string to_string(const Rational& r);

/// Parses "p/q", "p" or a finite decimal such as "0.25" into an exact rational.
Rational parse_rational(const std::string& text);

/// Exact value of a double (every finite double is a dyadic rational).
Rational rational_from_double(double value);

double to_double(const Rational& r);

/// 2^exponent as an exact rational (negative exponents allowed).
Rational pow2(int exponent);

}  // namespace qsep
