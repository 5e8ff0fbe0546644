#include "biasreduce/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace biasreduce {

namespace {

double pairwise_sum_rec(const double* data, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += data[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_rec(data, half) + pairwise_sum_rec(data + half, n - half);
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  return pairwise_sum_rec(values.data(), values.size());
}

MeanSe mean_and_se(std::span<const double> values) {
  MeanSe out;
  out.count = values.size();
  if (values.empty()) return out;
  out.mean = pairwise_sum(values) / static_cast<double>(values.size());
  if (values.size() < 2) return out;
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - out.mean;
    sq[i] = d * d;
  }
  const double var =
      pairwise_sum(sq) / static_cast<double>(values.size() - 1);
  out.se = std::sqrt(var / static_cast<double>(values.size()));
  return out;
}

double sample_variance(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double mean = pairwise_sum(values) / static_cast<double>(values.size());
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - mean;
    sq[i] = d * d;
  }
  return pairwise_sum(sq) / static_cast<double>(values.size() - 1);
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double ks_against_normal(std::span<const double> samples) {
  if (samples.empty()) {
    throw std::invalid_argument("ks_against_normal: empty sample");
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double m = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double cdf = normal_cdf(sorted[i]);
    const double upper = static_cast<double>(i + 1) / m - cdf;
    const double lower = cdf - static_cast<double>(i) / m;
    d = std::max({d, upper, lower});
  }
  return d;
}

SlopeFit ols_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("ols_slope: need >= 2 matched points");
  }
  const double n = static_cast<double>(x.size());
  const double xbar = pairwise_sum(x) / n;
  const double ybar = pairwise_sum(y) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - xbar) * (x[i] - xbar);
    sxy += (x[i] - xbar) * (y[i] - ybar);
  }
  SlopeFit fit;
  fit.points = x.size();
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      rss += r * r;
    }
    fit.se = std::sqrt(rss / (n - 2.0) / sxx);
  }
  return fit;
}

SlopeFit wls_slope(std::span<const double> x, std::span<const double> y,
                   std::span<const double> y_se) {
  if (x.size() != y.size() || x.size() != y_se.size() || x.size() < 2) {
    throw std::invalid_argument("wls_slope: need >= 2 matched points");
  }
  double wsum = 0.0, wx = 0.0;
  std::vector<double> w(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double se = y_se[i];
    w[i] = se > 0.0 ? 1.0 / (se * se) : 1.0;
    wsum += w[i];
    wx += w[i] * x[i];
  }
  const double xbar = wx / wsum;
  double sxx = 0.0, sxy = 0.0, wy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w[i] * (x[i] - xbar) * (x[i] - xbar);
    wy += w[i] * y[i];
  }
  const double ybar = wy / wsum;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += w[i] * (x[i] - xbar) * (y[i] - ybar);
  }
  SlopeFit fit;
  fit.points = x.size();
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  // Var(slope) = sum_i (w_i (x_i - xbar) / sxx)^2 se_i^2 = 1 / sxx.
  double var = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = w[i] * (x[i] - xbar) / sxx;
    const double se = y_se[i] > 0.0 ? y_se[i] : 0.0;
    var += a * a * se * se;
  }
  fit.se = std::sqrt(var);
  return fit;
}

}  // namespace biasreduce
