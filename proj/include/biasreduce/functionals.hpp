#ifndef BIASREDUCE_FUNCTIONALS_HPP_
#define BIASREDUCE_FUNCTIONALS_HPP_

#include <memory>
#include <string>
#include <vector>

#include "biasreduce/model.hpp"

namespace biasreduce {

// Partial derivatives of a functional with respect to mu and sigma; d_sigma
// is stored exactly symmetric.
struct Gradient {
  Vector d_mu;
  Matrix d_sigma;
};

// Scalar function of a real variable with an analytic derivative, used by
// spectral-trace functionals. Domain is an open interval.
struct ScalarFunction {
  std::string name;
  double (*value)(double);
  double (*deriv)(double);
  double domain_lo;  // exclusive
  double domain_hi;  // exclusive
  double smoothness;

  // Built-in catalog: identity, square, sqrt, log, exp, inverse.
  static const ScalarFunction& named(const std::string& name);
};

// Catalog of smooth functionals f(mu, sigma) -> R with analytic values and
// gradients:
//   linear_mean(u)      <u, mu>
//   quadratic_mean      |mu|^2
//   trace_linear(B)     tr(sigma B)
//   trace_quadratic(B)  tr(sigma B sigma B)
//   spectral_trace(phi, B)  tr(phi(sigma) B)
//   affine_combination  offset + sum_i w_i f_i
class Functional {
 public:
  enum class Kind {
    linear_mean,
    quadratic_mean,
    trace_linear,
    trace_quadratic,
    spectral_trace,
    affine_combination,
  };

  static Functional linear_mean(Vector u);
  static Functional quadratic_mean(int dim);
  static Functional trace_linear(Matrix b);
  static Functional trace_quadratic(Matrix b);
  static Functional spectral_trace(const ScalarFunction& phi, Matrix b);
  static Functional affine_combination(std::vector<double> weights,
                                       std::vector<Functional> terms,
                                       double offset = 0.0);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  double smoothness() const { return smoothness_; }
  void set_smoothness(double s) { smoothness_ = s; }
  const std::string& id() const { return id_; }

  double eval(const Theta& theta) const;
  Gradient grad(const Theta& theta) const;

  // Default correction depth from the declared smoothness s: zero for
  // s <= 2, ceil(s) - 2 otherwise.
  int default_correction_order() const;

 private:
  Functional() = default;

  void check_dim(const Theta& theta) const;
  void check_spectrum(const EigenDecomp& decomp) const;

  Kind kind_ = Kind::linear_mean;
  int dim_ = 0;
  double smoothness_ = 2.0;
  std::string id_;

  Vector u_;
  Matrix b_;
  const ScalarFunction* phi_ = nullptr;
  std::vector<double> weights_;
  std::shared_ptr<const std::vector<Functional>> terms_;
  double offset_ = 0.0;
};

// Efficiency standard deviation:
//   sigma_f^2 = |sigma^{1/2} f'_mu|^2 + 2 |sigma^{1/2} f'_sigma sigma^{1/2}|_HS^2.
double efficiency_sd(const Functional& f, const Theta& theta);

// Worst relative error of central finite differences of eval against grad,
// over a fixed set of random mu-directions and random symmetric
// sigma-directions. Deterministic given its inputs. h in [1e-7, 1e-3].
double fd_check(const Functional& f, const Theta& theta, double h,
                std::uint64_t direction_seed = 0xfdc0ffee);

}  // namespace biasreduce

#endif  // BIASREDUCE_FUNCTIONALS_HPP_
