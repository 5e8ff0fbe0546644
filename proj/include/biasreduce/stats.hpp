#ifndef BIASREDUCE_STATS_HPP_
#define BIASREDUCE_STATS_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace biasreduce {

// Pairwise (fixed tree order) summation. Used for all reductions over
// replicates so that results are bit-identical no matter how the work was
// scheduled, and accurate for large sample counts.
double pairwise_sum(std::span<const double> values);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  // sample standard deviation / sqrt(count)
  std::size_t count = 0;
};

MeanSe mean_and_se(std::span<const double> values);

// Sample variance with the (n-1) divisor.
double sample_variance(std::span<const double> values);

// Two-sided Kolmogorov-Smirnov statistic of the sample against the standard
// normal distribution function.
double ks_against_normal(std::span<const double> samples);

// Standard normal CDF via erfc.
double normal_cdf(double x);

struct SlopeFit {
  double slope = 0.0;
  double se = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
};

// Ordinary least squares slope of y on x; the slope standard error comes
// from the residuals (needs at least 3 points to be defined).
SlopeFit ols_slope(std::span<const double> x, std::span<const double> y);

// Weighted least squares slope with known per-point standard errors on y;
// the slope standard error is propagated from those errors.
SlopeFit wls_slope(std::span<const double> x, std::span<const double> y,
                   std::span<const double> y_se);

}  // namespace biasreduce

#endif  // BIASREDUCE_STATS_HPP_
