#ifndef BIASREDUCE_SPECTRAL_HPP_
#define BIASREDUCE_SPECTRAL_HPP_

#include <Eigen/Dense>
#include <functional>

namespace biasreduce {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// (M + M^T)/2. Applied after floating-point accumulations, before any
// decomposition.
Matrix symmetrize(const Matrix& m);

// max_ij |m_ij - m_ji|, the symmetry defect.
double asymmetry(const Matrix& m);

// Operator norm (largest |eigenvalue|) of a symmetric matrix.
double sym_operator_norm(const Matrix& m);

// Norm on parameter increments (w, W): Euclidean norm of the vector part
// plus operator norm of the symmetric matrix part.
double param_norm(const Vector& w, const Matrix& big_w);

// Symmetric eigendecomposition with eigenvalues sorted in descending order.
struct EigenDecomp {
  Matrix q;       // orthogonal, eigenvectors in columns
  Vector lambda;  // descending

  static EigenDecomp compute(const Matrix& sigma);

  // Q diag(phi(lambda)) Q^T, symmetrized.
  Matrix apply(const std::function<double(double)>& phi) const;
};

// Continuous functional calculus: phi applied to a symmetric matrix through
// its eigendecomposition. Exactly diagonal inputs take a cheap elementwise
// path. Throws std::invalid_argument on non-symmetric input.
Matrix apply_spectral(const std::function<double(double)>& phi,
                      const Matrix& sigma);

// Symmetric PSD square root. Eigenvalues are clamped at zero first; a clamp
// larger than 1e-10 is logged.
Matrix sqrt_psd(const Matrix& sigma);

// C-infinity step: 0 for u <= 1/2, 1 for u >= 1, strictly monotone in
// between. Built as h(2u-1) / (h(2u-1) + h(2-2u)) with h(x) = exp(-1/x) on
// x > 0 and 0 elsewhere, so the plateaus are exact in floating point.
double smooth_step(double u);

// Smoothed square root: equals sqrt(u) on [1/(2a), 2a], vanishes outside
// [1/(4a), 4a], and satisfies 0 <= value <= sqrt(u) everywhere on u >= 0.
class SmoothSqrt {
 public:
  explicit SmoothSqrt(double a);

  double operator()(double u) const;
  double a() const { return a_; }

 private:
  double a_;
};

// SmoothSqrt applied spectrally (with eigenvalue clamping at zero).
Matrix smooth_sqrt_matrix(const Matrix& sigma, double a);

}  // namespace biasreduce

#endif  // BIASREDUCE_SPECTRAL_HPP_
