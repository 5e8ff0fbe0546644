#include "biasreduce/spectral.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "biasreduce/log.hpp"

namespace biasreduce {

namespace {

bool exactly_diagonal(const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (i != j && m(i, j) != 0.0) return false;
    }
  }
  return true;
}

void require_symmetric(const Matrix& m, const char* where) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument(std::string(where) + ": matrix not square");
  }
  const double scale = 1.0 + m.cwiseAbs().maxCoeff();
  if (asymmetry(m) > 1e-10 * scale) {
    throw std::invalid_argument(std::string(where) +
                                ": matrix is not symmetric");
  }
}

}  // namespace

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double asymmetry(const Matrix& m) {
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

double sym_operator_norm(const Matrix& m) {
  if (m.rows() == 0) return 0.0;
  if (m.rows() == 1) return std::abs(m(0, 0));
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(m),
                                               Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double param_norm(const Vector& w, const Matrix& big_w) {
  return w.norm() + sym_operator_norm(big_w);
}

EigenDecomp EigenDecomp::compute(const Matrix& sigma) {
  require_symmetric(sigma, "EigenDecomp");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(sigma));
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("EigenDecomp: eigensolver failed");
  }
  EigenDecomp out;
  const Eigen::Index d = sigma.rows();
  out.q.resize(d, d);
  out.lambda.resize(d);
  // Eigen returns ascending order; store descending.
  for (Eigen::Index i = 0; i < d; ++i) {
    out.lambda(i) = solver.eigenvalues()(d - 1 - i);
    out.q.col(i) = solver.eigenvectors().col(d - 1 - i);
  }
  return out;
}

Matrix EigenDecomp::apply(const std::function<double(double)>& phi) const {
  Vector mapped(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) mapped(i) = phi(lambda(i));
  return symmetrize(q * mapped.asDiagonal() * q.transpose());
}

Matrix apply_spectral(const std::function<double(double)>& phi,
                      const Matrix& sigma) {
  require_symmetric(sigma, "apply_spectral");
  if (exactly_diagonal(sigma)) {
    Matrix out = Matrix::Zero(sigma.rows(), sigma.cols());
    for (Eigen::Index i = 0; i < sigma.rows(); ++i) {
      out(i, i) = phi(sigma(i, i));
    }
    return out;
  }
  return EigenDecomp::compute(sigma).apply(phi);
}

namespace {

double clamp_nonneg(double u, double* worst_clamp) {
  if (u >= 0.0) return u;
  if (worst_clamp != nullptr && -u > *worst_clamp) *worst_clamp = -u;
  return 0.0;
}

void report_clamp(double worst) {
  if (worst > 1e-10) {
    std::ostringstream oss;
    oss << "clamped negative eigenvalue of magnitude " << worst
        << " before spectral function";
    log::info(oss.str());
  }
}

}  // namespace

Matrix sqrt_psd(const Matrix& sigma) {
  double worst = 0.0;
  Matrix out = apply_spectral(
      [&worst](double u) { return std::sqrt(clamp_nonneg(u, &worst)); },
      sigma);
  report_clamp(worst);
  return out;
}

double smooth_step(double u) {
  auto h = [](double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; };
  const double rise = h(2.0 * u - 1.0);
  const double fall = h(2.0 - 2.0 * u);
  if (rise == 0.0) return 0.0;
  if (fall == 0.0) return 1.0;
  return rise / (rise + fall);
}

SmoothSqrt::SmoothSqrt(double a) : a_(a) {
  if (!(a >= 1.0)) {
    throw std::invalid_argument("SmoothSqrt: scale a must be >= 1");
  }
}

double SmoothSqrt::operator()(double u) const {
  if (u <= 1.0 / (4.0 * a_) || u >= 4.0 * a_) return 0.0;
  return smooth_step(2.0 * a_ * u) * std::sqrt(u) *
         (1.0 - smooth_step(u / (4.0 * a_)));
}

Matrix smooth_sqrt_matrix(const Matrix& sigma, double a) {
  const SmoothSqrt gamma(a);
  double worst = 0.0;
  Matrix out = apply_spectral(
      [&](double u) { return gamma(clamp_nonneg(u, &worst)); }, sigma);
  report_clamp(worst);
  return out;
}

}  // namespace biasreduce
