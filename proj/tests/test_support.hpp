#ifndef BIASREDUCE_TEST_SUPPORT_HPP_
#define BIASREDUCE_TEST_SUPPORT_HPP_

#include <cmath>

#include "biasreduce/model.hpp"
#include "biasreduce/rng.hpp"
#include "biasreduce/spectral.hpp"

namespace testsupport {

using biasreduce::Matrix;
using biasreduce::RngStream;
using biasreduce::Theta;
using biasreduce::Vector;

// Random orthogonal matrix from the QR of a Gaussian matrix.
inline Matrix random_orthogonal(int d, RngStream& rng) {
  Matrix g(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ();
}

// Random SPD matrix with eigenvalues log-uniform in [lo, hi].
inline Matrix random_spd(int d, double lo, double hi, RngStream& rng) {
  const Matrix q = random_orthogonal(d, rng);
  Vector lambda(d);
  for (int i = 0; i < d; ++i) {
    const double u = rng.uniform01();
    lambda(i) = std::exp(std::log(lo) + u * (std::log(hi) - std::log(lo)));
  }
  return biasreduce::symmetrize(q * lambda.asDiagonal() * q.transpose());
}

// Random theta with spectrum inside [1/a, a] (strictly, by a small margin).
inline Theta random_theta(int d, double a, RngStream& rng) {
  Theta theta;
  theta.mu = Vector(d);
  for (int i = 0; i < d; ++i) theta.mu(i) = rng.normal();
  theta.sigma = random_spd(d, 1.02 / a, a / 1.02, rng);
  return theta;
}

}  // namespace testsupport

#endif  // BIASREDUCE_TEST_SUPPORT_HPP_
