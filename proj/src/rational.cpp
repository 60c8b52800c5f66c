#include "qsep/rational.hpp"

#include "qsep/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qsep {

BigInt binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  BigInt result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    result *= n - k + i;
    result /= i;
  }
  return result;
}

std::string to_string(const Rational& r) {
  const BigInt num = boost::multiprecision::numerator(r);
  const BigInt den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

namespace {

BigInt parse_integer(const std::string& text) {
  require(!text.empty(), "empty number");
  std::size_t start = (text[0] == '-' || text[0] == '+') ? 1 : 0;
  require(start < text.size(), "malformed number: " + text);
  for (std::size_t i = start; i < text.size(); ++i) {
    require(text[i] >= '0' && text[i] <= '9', "malformed number: " + text);
  }
  // cpp_int reads a leading 0 as octal
  const auto first = std::min(text.find_first_not_of('0', start), text.size() - 1);
  BigInt value(text.substr(first));
  return text[0] == '-' ? BigInt(-value) : value;
}

}  // namespace

Rational parse_rational(const std::string& text) {
  require(!text.empty(), "empty rational");
  if (auto slash = text.find('/'); slash != std::string::npos) {
    BigInt den = parse_integer(text.substr(slash + 1));
    require(den != 0, "zero denominator: " + text);
    return Rational(parse_integer(text.substr(0, slash)), den);
  }
  std::string mantissa = text;
  long exponent = 0;
  if (auto e = text.find_first_of("eE"); e != std::string::npos) {
    mantissa = text.substr(0, e);
    exponent = std::stol(text.substr(e + 1));
  }
  std::string digits = mantissa;
  if (auto dot = mantissa.find('.'); dot != std::string::npos) {
    digits = mantissa.substr(0, dot) + mantissa.substr(dot + 1);
    exponent -= static_cast<long>(mantissa.size() - dot - 1);
  }
  if (digits == "-" || digits == "+" || digits.empty()) digits += "0";
  Rational value(parse_integer(digits));
  BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(std::labs(exponent)));
  return exponent >= 0 ? Rational(value * scale) : Rational(value / scale);
}

Rational rational_from_double(double value) {
  require(std::isfinite(value), "non-finite value");
  int exponent = 0;
  double mantissa = std::frexp(value, &exponent);
  // 53 bits of mantissa as an integer.
  auto scaled = static_cast<std::int64_t>(std::ldexp(mantissa, 53));
  return Rational(BigInt(scaled)) * pow2(exponent - 53);
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

Rational pow2(int exponent) {
  BigInt p = BigInt(1) << static_cast<unsigned>(std::abs(exponent));
  return exponent >= 0 ? Rational(p) : Rational(BigInt(1), p);
}

}  // namespace qsep
