#include "qsep/stats.hpp"

#include "qsep/errors.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <numeric>

namespace qsep::stats {

double normal_quantile(double confidence) {
  require(confidence > 0.0 && confidence < 1.0, "confidence must lie in (0, 1)");
  boost::math::normal normal;
  return boost::math::quantile(normal, 0.5 + confidence / 2.0);
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double confidence) {
  require(trials >= 1, "Wilson interval needs at least one trial");
  require(successes <= trials, "more successes than trials");
  const double z = normal_quantile(confidence);
  const double nt = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / nt;
  const double z2 = z * z;
  const double center = (p + z2 / (2 * nt)) / (1 + z2 / nt);
  const double half = z * std::sqrt(p * (1 - p) / nt + z2 / (4 * nt * nt)) / (1 + z2 / nt);
  // Clamp so the point estimate always lies inside despite rounding.
  return {std::min(p, std::max(0.0, center - half)), std::max(p, std::min(1.0, center + half))};
}

double binomial_sigma(double p, std::uint64_t trials) {
  return std::sqrt(p * (1 - p) / static_cast<double>(trials));
}

ChiSquare chi_square(const std::vector<std::uint64_t>& observed, const std::vector<double>& expected) {
  require(observed.size() == expected.size(), "observed and expected differ in length");
  const double total = static_cast<double>(std::accumulate(observed.begin(), observed.end(), std::uint64_t{0}));
  const double mass = std::accumulate(expected.begin(), expected.end(), 0.0);
  require(total > 0 && mass > 0, "chi-square needs data and a nonzero expectation");
  ChiSquare result;
  std::uint64_t cells = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = expected[i] / mass * total;
    if (e == 0.0) {
      require(observed[i] == 0, "observation in a cell of zero expected probability");
      continue;
    }
    const double d = static_cast<double>(observed[i]) - e;
    result.statistic += d * d / e;
    ++cells;
  }
  require(cells >= 2, "chi-square needs at least two cells");
  result.degrees_of_freedom = cells - 1;
  boost::math::chi_squared dist(static_cast<double>(result.degrees_of_freedom));
  result.p_value = boost::math::cdf(boost::math::complement(dist, result.statistic));
  return result;
}

}  // namespace qsep::stats
