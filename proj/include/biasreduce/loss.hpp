#ifndef BIASREDUCE_LOSS_HPP_
#define BIASREDUCE_LOSS_HPP_

#include <span>
#include <string>

namespace biasreduce {

// Convex symmetric loss with l(0) = 0, nondecreasing on [0, inf):
//   power(p):  |u|^p, p >= 1
//   psi1:      exp(|u|) - 1   (subexponential)
//   psi2:      exp(u^2) - 1   (subgaussian)
struct LossFunction {
  enum class Kind { power, psi1, psi2 };

  Kind kind = Kind::power;
  double p = 2.0;

  static LossFunction power(double p);
  static LossFunction psi1() { return LossFunction{Kind::psi1, 0.0}; }
  static LossFunction psi2() { return LossFunction{Kind::psi2, 0.0}; }

  double operator()(double u) const;
  std::string name() const;
};

// Empirical Orlicz norm: the smallest c > 0 with mean l(|x_i|/c) <= 1, found
// by monotone bisection to relative tolerance 1e-8. Returns 0 for an
// all-zero sample and +infinity if no c within 1e3 * max|x_i| satisfies the
// condition (the achieved mean at the cap is then logged).
double orlicz_norm(std::span<const double> samples, const LossFunction& loss);

}  // namespace biasreduce

#endif  // BIASREDUCE_LOSS_HPP_
