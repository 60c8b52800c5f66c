#pragma once

#include <cstdint>
#include <vector>

namespace qsep::stats {

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double value) const { return lower <= value && value <= upper; }
};

/// Two-sided standard normal quantile for the given confidence (0.95 -> 1.96).
double normal_quantile(double confidence);

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double confidence = 0.95);

/// sqrt(p(1 - p) / trials).
double binomial_sigma(double p, std::uint64_t trials);

struct ChiSquare {
  double statistic = 0.0;
  std::uint64_t degrees_of_freedom = 0;
  double p_value = 1.0;
};

/// Pearson goodness of fit of observed counts against expected probabilities
/// (normalized internally). Cells with zero expected probability must be empty.
ChiSquare chi_square(const std::vector<std::uint64_t>& observed, const std::vector<double>& expected);

}  // namespace qsep::stats
