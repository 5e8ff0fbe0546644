#include "biasreduce/model.hpp"

#include <stdexcept>

namespace biasreduce {

void Theta::validate() const {
  if (mu.size() == 0 || sigma.rows() != mu.size() ||
      sigma.cols() != mu.size()) {
    throw std::invalid_argument("Theta: dimension mismatch");
  }
  const double scale = 1.0 + sigma.cwiseAbs().maxCoeff();
  if (asymmetry(sigma) > 1e-12 * scale) {
    throw std::invalid_argument("Theta: covariance is not symmetric");
  }
  const EigenDecomp decomp = EigenDecomp::compute(sigma);
  if (decomp.lambda.minCoeff() <= 0.0) {
    throw std::invalid_argument("Theta: covariance is not positive definite");
  }
}

ParamDomain::ParamDomain(double a_in, int d_in) : a(a_in), d(d_in) {
  if (!(a >= 1.0)) throw std::invalid_argument("ParamDomain: a must be >= 1");
  if (d < 1) throw std::invalid_argument("ParamDomain: d must be positive");
}

bool ParamDomain::contains(const Theta& theta) const {
  if (theta.dim() != d) return false;
  if (asymmetry(theta.sigma) > 1e-12 * (1.0 + theta.sigma.cwiseAbs().maxCoeff()))
    return false;
  const EigenDecomp decomp = EigenDecomp::compute(theta.sigma);
  const double slack = 1e-10 * a;
  return decomp.lambda.minCoeff() >= 1.0 / a - slack &&
         decomp.lambda.maxCoeff() <= a + slack;
}

Matrix draw_standard_normal(int n, int d, RngStream& rng) {
  Matrix z(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) z(i, j) = rng.normal();
  }
  return z;
}

NoiseBlock NoiseBlock::draw(int n, int d, RngStream& rng) {
  if (n < 2) throw std::invalid_argument("NoiseBlock: need n >= 2 rows");
  return from_rows(draw_standard_normal(n, d, rng));
}

NoiseBlock NoiseBlock::from_rows(Matrix z) {
  NoiseBlock block;
  const double n = static_cast<double>(z.rows());
  block.zbar = z.colwise().mean();
  Matrix centered = z.rowwise() - block.zbar.transpose();
  block.sigma_hat_z =
      symmetrize(centered.transpose() * centered / (n - 1.0));
  block.sigma_tilde_z = symmetrize(z.transpose() * z / n);
  block.z = std::move(z);
  return block;
}

namespace {

Matrix sample_rows(const Theta& theta, int n, RngStream& rng) {
  const int d = theta.dim();
  Matrix z = draw_standard_normal(n, d, rng);
  Matrix x;
  bool diagonal = true;
  for (int i = 0; i < d && diagonal; ++i) {
    for (int j = 0; j < d; ++j) {
      if (i != j && theta.sigma(i, j) != 0.0) {
        diagonal = false;
        break;
      }
    }
  }
  if (diagonal) {
    x = std::move(z);
    for (int j = 0; j < d; ++j) {
      const double sd = std::sqrt(std::max(theta.sigma(j, j), 0.0));
      if (sd != 1.0) x.col(j) *= sd;
    }
  } else {
    x = z * sqrt_psd(theta.sigma);
  }
  x.rowwise() += theta.mu.transpose();
  return x;
}

}  // namespace

Matrix sample_dataset(const Theta& theta, int n, RngStream& rng) {
  if (n < 2) throw std::invalid_argument("sample_dataset: need n >= 2");
  theta.validate();
  return sample_rows(theta, n, rng);
}

Matrix sample_dataset_psd(const Theta& theta, int n, RngStream& rng) {
  if (n < 2) throw std::invalid_argument("sample_dataset_psd: need n >= 2");
  return sample_rows(theta, n, rng);
}

Theta estimate_theta(const Matrix& data) {
  const int n = static_cast<int>(data.rows());
  if (n < 2) {
    throw std::invalid_argument(
        "estimate_theta: sample covariance needs n >= 2");
  }
  Theta out;
  out.mu = data.colwise().mean();
  Matrix centered = data.rowwise() - out.mu.transpose();
  out.sigma = symmetrize(centered.transpose() * centered /
                         static_cast<double>(n - 1));
  return out;
}

}  // namespace biasreduce
