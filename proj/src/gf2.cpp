#include "qsep/gf2.hpp"

#include "qsep/errors.hpp"

#include <bit>
#include <cmath>
#include <cstdlib>

namespace qsep::gf2 {

BitString::BitString(int length, std::uint64_t value) : length_(length), value_(value) {
  require(length >= 0 && length <= kMaxLength, "bit string length out of range");
  require(length == 64 || (value >> length) == 0, "value does not fit in bit string");
}

BitString BitString::parse(const std::string& bits) {
  std::uint64_t value = 0;
  for (char c : bits) {
    require(c == '0' || c == '1', "bit string must contain only 0 and 1");
    value = (value << 1) | static_cast<std::uint64_t>(c - '0');
  }
  return BitString(static_cast<int>(bits.size()), value);
}

int BitString::weight() const noexcept { return std::popcount(value_); }

int BitString::bit(int position) const {
  require(position >= 0 && position < length_, "bit position out of range");
  return static_cast<int>((value_ >> (length_ - 1 - position)) & 1U);
}

BitString BitString::operator^(const BitString& other) const {
  require(length_ == other.length_, "xor of bit strings with different lengths");
  return BitString(length_, value_ ^ other.value_);
}

std::string BitString::to_string() const {
  std::string out(static_cast<std::size_t>(length_), '0');
  for (int i = 0; i < length_; ++i) {
    if (bit(i)) out[static_cast<std::size_t>(i)] = '1';
  }
  return out;
}

int inner_product(const BitString& u, const BitString& v) {
  require(u.length() == v.length(), "inner product of bit strings with different lengths");
  return std::popcount(u.value() & v.value()) & 1;
}

bool is_power_of_two(std::uint64_t value) noexcept { return value != 0 && (value & (value - 1)) == 0; }

int log2_exact(std::uint64_t value) {
  require(is_power_of_two(value), "value is not a power of two");
  return std::countr_zero(value);
}

BitString sigma0_encode(std::uint64_t index, int bits) {
  require(bits >= 0 && bits <= BitString::kMaxLength, "encoding width out of range");
  require(index >= 1 && index <= (std::uint64_t{1} << bits), "index outside [2^m]");
  return BitString(bits, index - 1);
}

std::uint64_t sigma0_decode(const BitString& bits) { return bits.value() + 1; }

SigmaEncoding::SigmaEncoding(int bits) : bits_(bits) {
  require(bits >= 0 && bits <= BitString::kMaxLength, "encoding width out of range");
}

SigmaEncoding::SigmaEncoding(int bits, std::vector<std::uint32_t> permutation)
    : bits_(bits), permutation_(std::move(permutation)) {
  require(bits >= 0 && bits <= BitString::kMaxLength, "encoding width out of range");
  require(permutation_.size() <= (std::uint64_t{1} << bits), "permutation domain exceeds [2^m]");
  inverse_.assign(permutation_.size(), 0);
  for (std::size_t i = 0; i < permutation_.size(); ++i) {
    auto image = permutation_[i];
    require(image >= 1 && image <= permutation_.size() && inverse_[image - 1] == 0,
            "encoding permutation is not a permutation");
    inverse_[image - 1] = static_cast<std::uint32_t>(i + 1);
  }
}

std::uint64_t SigmaEncoding::domain_size() const noexcept {
  return permutation_.empty() ? (std::uint64_t{1} << bits_) : permutation_.size();
}

BitString SigmaEncoding::encode(std::uint64_t index) const {
  require(index >= 1 && index <= domain_size(), "index outside encoding domain");
  if (permutation_.empty()) return sigma0_encode(index, bits_);
  return sigma0_encode(permutation_[index - 1], bits_);
}

std::uint64_t SigmaEncoding::decode(const BitString& bits) const {
  require(bits.length() == bits_, "decoding a bit string of the wrong length");
  std::uint64_t image = sigma0_decode(bits);
  if (permutation_.empty()) return image;
  require(image <= inverse_.size(), "bit string outside encoding image");
  return inverse_[image - 1];
}

void walsh_hadamard(std::span<double> amplitudes) {
  const std::size_t size = amplitudes.size();
  const int m = log2_exact(size);
  for (std::size_t half = 1; half < size; half <<= 1) {
    for (std::size_t block = 0; block < size; block += 2 * half) {
      for (std::size_t i = block; i < block + half; ++i) {
        const double a = amplitudes[i];
        const double b = amplitudes[i + half];
        amplitudes[i] = a + b;
        amplitudes[i + half] = a - b;
      }
    }
  }
  // Scaling by 2^{-m/2} in one step keeps exact zeros exact.
  const double scale = std::ldexp(m % 2 ? std::sqrt(0.5) : 1.0, -(m / 2));
  for (double& a : amplitudes) a *= scale;
}

DyadicVector::DyadicVector(std::vector<std::int64_t> coefficients, unsigned half_exponent)
    : coeff_(std::move(coefficients)), half_exponent_(half_exponent) {}

Rational DyadicVector::probability(std::size_t index) const {
  require(index < coeff_.size(), "amplitude index out of range");
  BigInt c = coeff_[index];
  return Rational(c * c) * pow2(-static_cast<int>(half_exponent_));
}

Rational DyadicVector::squared_norm() const {
  BigInt total = 0;
  for (auto c : coeff_) total += BigInt(c) * c;
  return Rational(total) * pow2(-static_cast<int>(half_exponent_));
}

int DyadicVector::sign(std::size_t index) const {
  require(index < coeff_.size(), "amplitude index out of range");
  return (coeff_[index] > 0) - (coeff_[index] < 0);
}

void DyadicVector::normalize() {
  bool all_zero = true;
  for (auto c : coeff_) all_zero = all_zero && c == 0;
  if (all_zero) {
    half_exponent_ = 0;
    return;
  }
  while (half_exponent_ >= 2) {
    bool all_even = true;
    for (auto c : coeff_) all_even = all_even && (c % 2 == 0);
    if (!all_even) break;
    for (auto& c : coeff_) c /= 2;
    half_exponent_ -= 2;
  }
}

bool operator==(const DyadicVector& a, const DyadicVector& b) {
  DyadicVector x = a;
  DyadicVector y = b;
  x.normalize();
  y.normalize();
  return x.half_exponent_ == y.half_exponent_ && x.coeff_ == y.coeff_;
}

void walsh_hadamard(DyadicVector& state) {
  auto& c = state.coeff_;
  const std::size_t size = c.size();
  const int m = log2_exact(size);
  for (std::size_t half = 1; half < size; half <<= 1) {
    for (std::size_t block = 0; block < size; block += 2 * half) {
      for (std::size_t i = block; i < block + half; ++i) {
        const std::int64_t a = c[i];
        const std::int64_t b = c[i + half];
        require(std::llabs(a) < (std::int64_t{1} << 61) && std::llabs(b) < (std::int64_t{1} << 61),
                "dyadic coefficient overflow");
        c[i] = a + b;
        c[i + half] = a - b;
      }
    }
  }
  state.half_exponent_ += static_cast<unsigned>(m);
  state.normalize();
}

}  // namespace qsep::gf2
