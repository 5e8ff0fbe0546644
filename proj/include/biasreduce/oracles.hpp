#ifndef BIASREDUCE_ORACLES_HPP_
#define BIASREDUCE_ORACLES_HPP_

#include <functional>
#include <vector>

namespace biasreduce {

// Polynomial in one variable, monomial coefficients in ascending degree.
// Trailing zero coefficients are stripped; the zero polynomial has an empty
// coefficient vector.
class Poly {
 public:
  Poly() = default;
  explicit Poly(std::vector<double> coeffs);

  static Poly monomial(int degree, double coeff = 1.0);

  int degree() const;  // -1 for the zero polynomial
  bool is_zero() const { return coeffs_.empty(); }
  const std::vector<double>& coeffs() const { return coeffs_; }
  double coeff(int i) const;

  double operator()(double x) const;  // Horner evaluation

  Poly operator+(const Poly& other) const;
  Poly operator-(const Poly& other) const;
  Poly scaled(double factor) const;

 private:
  std::vector<double> coeffs_;
};

// Expectation operator of the binomial frequency model: maps p to the
// polynomial theta -> E p(X/n) with X ~ Binomial(n, theta), i.e. the degree-n
// Bernstein approximation of p. Computed through the factorial-moment
// (Stirling number) expansion, which keeps coefficients accurate in double
// precision through degree 12. Requires degree(p) <= n.
Poly bernstein_transform(const Poly& p, int n);

// k-fold application of (bernstein_transform - identity).
Poly binomial_bias_power(const Poly& p, int n, int k);

// Exact bias of the order-k corrected estimator in the binomial model:
// (-1)^k times the (k+1)-fold bias operator applied to p, evaluated at theta.
double binomial_corrected_bias(const Poly& p, int n, int k, double theta);

// Independent oracle: E p(X/n) by direct summation over all n+1 outcomes.
double binomial_expect_enumerated(const Poly& p, int n, double theta);

// Order-k corrected polynomial sum_{j=0..k} (-1)^j (bias operator)^j p.
Poly binomial_corrected_poly(const Poly& p, int n, int k);

// Exact j-fold bias operator value for f(theta) = sigma2^2 in the
// one-dimensional Gaussian model with the (n-1)-normalized sample variance:
// (2/(n-1))^j * sigma2^2. Derivation: (n-1) * sample variance / sigma2 is
// chi-squared with n-1 degrees of freedom, so the expectation operator acts
// on this functional as multiplication by 1 + 2/(n-1).
double chisq_bias_power(double sigma2, int n, int j);

// Gauss-Hermite nodes and weights (order m) for E g(Z), Z standard normal.
struct GaussHermite {
  std::vector<double> nodes;    // points where g is evaluated for E g(Z)
  std::vector<double> weights;  // sum to 1

  explicit GaussHermite(int order);

  double integrate(const std::function<double(double)>& g) const;
};

// k-fold bias operator for the one-dimensional additive-noise model
// theta_hat = theta + N(0, noise_sd^2): alternating sum over j of
// E f(theta + sqrt(j) * noise_sd * Z), each expectation via Gauss-Hermite
// quadrature of order m (m >= 20).
double shift_model_bias_power(const std::function<double(double)>& f,
                              double theta, double noise_sd, int k, int m = 40);

}  // namespace biasreduce

#endif  // BIASREDUCE_ORACLES_HPP_
