#pragma once

#include "qsep/rational.hpp"

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qsep::gf2 {

/// Element of GF(2)^m, m <= 63. Position 0 is the most significant bit, so
/// comparing the packed values is lexicographic comparison of the strings.
class BitString {
 public:
  static constexpr int kMaxLength = 63;

  BitString() = default;
  BitString(int length, std::uint64_t value);

  /// Parses a string of '0'/'1' characters.
  static BitString parse(const std::string& bits);
  static BitString zero(int length) { return BitString(length, 0); }

  int length() const noexcept { return length_; }
  std::uint64_t value() const noexcept { return value_; }
  bool is_zero() const noexcept { return value_ == 0; }
  int weight() const noexcept;

  /// Bit at `position` (0 = leftmost).
  int bit(int position) const;

  BitString operator^(const BitString& other) const;

  std::string to_string() const;

  friend bool operator==(const BitString&, const BitString&) = default;
  friend std::strong_ordering operator<=>(const BitString&, const BitString&) = default;

 private:
  int length_ = 0;
  std::uint64_t value_ = 0;
};

/// <u, v> = sum u_i v_i mod 2.
int inner_product(const BitString& u, const BitString& v);

/// Encoding of the ground set [N] (1-based) into GF(2)^m.
///
/// The plain form is sigma0: index j maps to the big-endian binary form of
/// j - 1, which preserves lexicographic order. The composed form first applies
/// a 1-based permutation of [N] and then sigma0, which is how derandomized
/// encodings are realized.
class SigmaEncoding {
 public:
  /// sigma0 on [2^bits].
  explicit SigmaEncoding(int bits);
  /// sigma0 after `permutation` (a permutation of [permutation.size()]).
  SigmaEncoding(int bits, std::vector<std::uint32_t> permutation);

  int bits() const noexcept { return bits_; }
  std::uint64_t domain_size() const noexcept;
  bool is_order_preserving() const noexcept { return permutation_.empty(); }
  const std::vector<std::uint32_t>& permutation() const noexcept { return permutation_; }

  BitString encode(std::uint64_t index) const;
  std::uint64_t decode(const BitString& bits) const;

 private:
  int bits_;
  std::vector<std::uint32_t> permutation_;
  std::vector<std::uint32_t> inverse_;
};

/// sigma0 on [2^bits]: j -> binary(j - 1).
BitString sigma0_encode(std::uint64_t index, int bits);
std::uint64_t sigma0_decode(const BitString& bits);

bool is_power_of_two(std::uint64_t value) noexcept;
int log2_exact(std::uint64_t value);

/// Normalized Walsh-Hadamard transform, in place:
/// out[j] = 2^{-m/2} sum_k (-1)^{<j,k>} in[k]. Length must be a power of two.
void walsh_hadamard(std::span<double> amplitudes);

/// Real amplitudes of the form coeff[i] * 2^{-half_exponent/2} with integer
/// coefficients. States of the protocol stay in this form under projection and
/// the Hadamard transform, so probabilities are exact dyadic rationals.
class DyadicVector {
 public:
  DyadicVector() = default;
  DyadicVector(std::vector<std::int64_t> coefficients, unsigned half_exponent);

  std::size_t size() const noexcept { return coeff_.size(); }
  const std::vector<std::int64_t>& coefficients() const noexcept { return coeff_; }
  unsigned half_exponent() const noexcept { return half_exponent_; }

  /// |amplitude_i|^2 as an exact rational.
  Rational probability(std::size_t index) const;
  Rational squared_norm() const;

  /// Sign of amplitude i: -1, 0 or 1.
  int sign(std::size_t index) const;

  /// Removes common factors of two so equal vectors compare equal.
  void normalize();

  friend bool operator==(const DyadicVector& a, const DyadicVector& b);

 private:
  friend void walsh_hadamard(DyadicVector& state);
  std::vector<std::int64_t> coeff_;
  unsigned half_exponent_ = 0;
};

/// Exact transform on a dyadic state (same normalization as the double version).
void walsh_hadamard(DyadicVector& state);

}  // namespace qsep::gf2
