#include "biasreduce/oracles.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "biasreduce/bias_reduction.hpp"

namespace biasreduce {

namespace {

void strip_trailing_zeros(std::vector<double>& coeffs) {
  while (!coeffs.empty() && coeffs.back() == 0.0) coeffs.pop_back();
}

// Stirling numbers of the second kind S(m, i), m rows up to max_degree.
std::vector<std::vector<double>> stirling2(int max_degree) {
  std::vector<std::vector<double>> s(static_cast<std::size_t>(max_degree) + 1);
  s[0] = {1.0};
  for (int m = 1; m <= max_degree; ++m) {
    s[static_cast<std::size_t>(m)].assign(static_cast<std::size_t>(m) + 1, 0.0);
    for (int i = 1; i <= m; ++i) {
      const auto& prev = s[static_cast<std::size_t>(m - 1)];
      const double same = i <= m - 1 ? prev[static_cast<std::size_t>(i)] : 0.0;
      s[static_cast<std::size_t>(m)][static_cast<std::size_t>(i)] =
          static_cast<double>(i) * same + prev[static_cast<std::size_t>(i - 1)];
    }
  }
  return s;
}

}  // namespace

Poly::Poly(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  strip_trailing_zeros(coeffs_);
}

Poly Poly::monomial(int degree, double coeff) {
  std::vector<double> c(static_cast<std::size_t>(degree) + 1, 0.0);
  c.back() = coeff;
  return Poly(std::move(c));
}

int Poly::degree() const { return static_cast<int>(coeffs_.size()) - 1; }

double Poly::coeff(int i) const {
  if (i < 0 || i >= static_cast<int>(coeffs_.size())) return 0.0;
  return coeffs_[static_cast<std::size_t>(i)];
}

double Poly::operator()(double x) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
    acc = acc * x + *it;
  }
  return acc;
}

Poly Poly::operator+(const Poly& other) const {
  std::vector<double> out(std::max(coeffs_.size(), other.coeffs_.size()), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = coeff(static_cast<int>(i)) + other.coeff(static_cast<int>(i));
  }
  return Poly(std::move(out));
}

Poly Poly::operator-(const Poly& other) const {
  return *this + other.scaled(-1.0);
}

Poly Poly::scaled(double factor) const {
  std::vector<double> out = coeffs_;
  for (double& c : out) c *= factor;
  return Poly(std::move(out));
}

Poly bernstein_transform(const Poly& p, int n) {
  if (n < 1) throw std::invalid_argument("bernstein_transform: n must be >= 1");
  if (p.degree() > n) {
    throw std::invalid_argument(
        "bernstein_transform: polynomial degree exceeds n");
  }
  if (p.is_zero()) return Poly();
  const int deg = p.degree();
  const auto s2 = stirling2(deg);

  // Falling-factorial ratios r(i) = n(n-1)...(n-i+1) / n^i, computed as a
  // product of terms <= 1.
  std::vector<double> ratio(static_cast<std::size_t>(deg) + 1, 1.0);
  for (int i = 1; i <= deg; ++i) {
    ratio[static_cast<std::size_t>(i)] =
        ratio[static_cast<std::size_t>(i - 1)] *
        (static_cast<double>(n - i + 1) / static_cast<double>(n));
  }

  // E (X/n)^m = sum_i S(m,i) * r(i) * n^{i-m} * theta^i.
  std::vector<double> out(static_cast<std::size_t>(deg) + 1, 0.0);
  for (int m = 0; m <= deg; ++m) {
    const double cm = p.coeff(m);
    if (cm == 0.0) continue;
    double npow = 1.0;  // n^{i-m} built from i = m downwards
    for (int i = m; i >= 0; --i) {
      const double s = s2[static_cast<std::size_t>(m)]
                         [static_cast<std::size_t>(i)];
      if (s != 0.0) {
        out[static_cast<std::size_t>(i)] +=
            cm * s * ratio[static_cast<std::size_t>(i)] * npow;
      }
      npow /= static_cast<double>(n);
    }
  }
  return Poly(std::move(out));
}

Poly binomial_bias_power(const Poly& p, int n, int k) {
  if (k < 0) throw std::invalid_argument("binomial_bias_power: k must be >= 0");
  Poly current = p;
  for (int j = 0; j < k; ++j) {
    current = bernstein_transform(current, n) - current;
  }
  return current;
}

Poly binomial_corrected_poly(const Poly& p, int n, int k) {
  Poly out;
  Poly power = p;  // (bias operator)^j p
  for (int j = 0; j <= k; ++j) {
    out = (j % 2 == 0) ? out + power : out - power;
    if (j < k) power = bernstein_transform(power, n) - power;
  }
  return out;
}

double binomial_corrected_bias(const Poly& p, int n, int k, double theta) {
  const Poly bias = binomial_bias_power(p, n, k + 1);
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  return sign * bias(theta);
}

double binomial_expect_enumerated(const Poly& p, int n, double theta) {
  double total = 0.0;
  for (int x = 0; x <= n; ++x) {
    const double pmf = binomial_coefficient(n, x) *
                       std::pow(theta, x) *
                       std::pow(1.0 - theta, n - x);
    total += pmf * p(static_cast<double>(x) / static_cast<double>(n));
  }
  return total;
}

double chisq_bias_power(double sigma2, int n, int j) {
  if (sigma2 <= 0.0) {
    throw std::invalid_argument("chisq_bias_power: sigma2 must be positive");
  }
  if (n < 2) throw std::invalid_argument("chisq_bias_power: n must be >= 2");
  if (j < 0) throw std::invalid_argument("chisq_bias_power: j must be >= 0");
  return std::pow(2.0 / static_cast<double>(n - 1), j) * sigma2 * sigma2;
}

GaussHermite::GaussHermite(int order) {
  if (order < 1) throw std::invalid_argument("GaussHermite: order must be >= 1");
  // Golub-Welsch on the Jacobi matrix of the (physicists') Hermite
  // recurrence; nodes rescaled so integrate() averages against the standard
  // normal density.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int i = 1; i < order; ++i) {
    const double beta = std::sqrt(static_cast<double>(i) / 2.0);
    jacobi(i, i - 1) = beta;
    jacobi(i - 1, i) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  nodes.resize(static_cast<std::size_t>(order));
  weights.resize(static_cast<std::size_t>(order));
  for (int i = 0; i < order; ++i) {
    nodes[static_cast<std::size_t>(i)] =
        std::sqrt(2.0) * solver.eigenvalues()(i);
    const double v0 = solver.eigenvectors()(0, i);
    weights[static_cast<std::size_t>(i)] = v0 * v0;  // already sum to 1
  }
}

double GaussHermite::integrate(const std::function<double(double)>& g) const {
  double total = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    total += weights[i] * g(nodes[i]);
  }
  return total;
}

double shift_model_bias_power(const std::function<double(double)>& f,
                              double theta, double noise_sd, int k, int m) {
  if (k < 0) throw std::invalid_argument("shift_model_bias_power: k >= 0");
  if (m < 20) {
    throw std::invalid_argument("shift_model_bias_power: quadrature order >= 20");
  }
  const GaussHermite quad(m);
  double total = 0.0;
  for (int j = 0; j <= k; ++j) {
    // After j steps the state is theta plus a N(0, j * noise_sd^2) shift.
    const double sd = noise_sd * std::sqrt(static_cast<double>(j));
    const double expect =
        j == 0 ? f(theta)
               : quad.integrate([&](double z) { return f(theta + sd * z); });
    const double sign = ((k - j) % 2 == 0) ? 1.0 : -1.0;
    total += sign * binomial_coefficient(k, j) * expect;
  }
  return total;
}

}  // namespace biasreduce
