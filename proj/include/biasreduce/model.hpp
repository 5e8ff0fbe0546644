#ifndef BIASREDUCE_MODEL_HPP_
#define BIASREDUCE_MODEL_HPP_

#include <Eigen/Dense>

#include "biasreduce/rng.hpp"
#include "biasreduce/spectral.hpp"

namespace biasreduce {

// Gaussian model parameter (mu, sigma). A Theta produced by estimate_theta
// is a parameter-estimate record and may carry a singular (PSD) covariance;
// validate() enforces the strict model-parameter contract (symmetric and
// positive definite).
struct Theta {
  Vector mu;
  Matrix sigma;

  int dim() const { return static_cast<int>(mu.size()); }
  void validate() const;
};

// Parameter region with covariance spectrum confined to [1/a, a].
struct ParamDomain {
  double a = 1.0;
  int d = 1;

  ParamDomain(double a_in, int d_in);
  bool contains(const Theta& theta) const;
};

// One block of i.i.d. standard normal rows plus the derived summaries: the
// column mean, the (n-1)-normalized sample covariance of the rows, and the
// n-normalized uncentered second moment.
struct NoiseBlock {
  Matrix z;              // n x d
  Vector zbar;           // column mean
  Matrix sigma_hat_z;    // (n-1)-normalized, centered
  Matrix sigma_tilde_z;  // n-normalized, uncentered

  int rows() const { return static_cast<int>(z.rows()); }
  int cols() const { return static_cast<int>(z.cols()); }

  static NoiseBlock draw(int n, int d, RngStream& rng);
  static NoiseBlock from_rows(Matrix z);
};

// n x d matrix of i.i.d. standard normal entries, filled in a fixed order.
Matrix draw_standard_normal(int n, int d, RngStream& rng);

// i.i.d. rows mu + sigma^{1/2} Z_j. Requires n >= 2 and a valid (positive
// definite) theta.
Matrix sample_dataset(const Theta& theta, int n, RngStream& rng);

// Same sampling but accepting a PSD (possibly singular) covariance; used by
// bootstrap chains, which may visit singular states.
Matrix sample_dataset_psd(const Theta& theta, int n, RngStream& rng);

// Sample mean and (n-1)-normalized sample covariance. Requires n >= 2. The
// returned record is not validated (sigma_hat can be singular when d >= n).
Theta estimate_theta(const Matrix& data);

}  // namespace biasreduce

#endif  // BIASREDUCE_MODEL_HPP_
