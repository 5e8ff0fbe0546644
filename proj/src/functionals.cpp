#include "biasreduce/functionals.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace biasreduce {

namespace {

double id_value(double u) { return u; }
double id_deriv(double) { return 1.0; }
double sq_value(double u) { return u * u; }
double sq_deriv(double u) { return 2.0 * u; }
double sqrt_deriv(double u) { return 0.5 / std::sqrt(u); }
double inv_value(double u) { return 1.0 / u; }
double inv_deriv(double u) { return -1.0 / (u * u); }

const ScalarFunction kScalarCatalog[] = {
    {"identity", id_value, id_deriv, -1e308, 1e308, 1e9},
    {"square", sq_value, sq_deriv, -1e308, 1e308, 1e9},
    {"sqrt", std::sqrt, sqrt_deriv, 0.0, 1e308, 4.0},
    {"log", std::log, inv_value, 0.0, 1e308, 4.0},
    {"exp", std::exp, std::exp, -1e308, 1e308, 1e9},
    {"inverse", inv_value, inv_deriv, 0.0, 1e308, 4.0},
};

std::string matrix_tag(const Matrix& b) {
  if (b.isIdentity(0.0)) return "I";
  bool diagonal = true;
  for (Eigen::Index i = 0; i < b.rows() && diagonal; ++i) {
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      if (i != j && b(i, j) != 0.0) {
        diagonal = false;
        break;
      }
    }
  }
  return diagonal ? "diag" : "full";
}

}  // namespace

const ScalarFunction& ScalarFunction::named(const std::string& name) {
  for (const auto& fn : kScalarCatalog) {
    if (fn.name == name) return fn;
  }
  throw std::invalid_argument("unknown scalar function: " + name);
}

Functional Functional::linear_mean(Vector u) {
  Functional f;
  f.kind_ = Kind::linear_mean;
  f.dim_ = static_cast<int>(u.size());
  f.u_ = std::move(u);
  f.smoothness_ = 2.0;
  f.id_ = "linear_mean(d=" + std::to_string(f.dim_) + ")";
  return f;
}

Functional Functional::quadratic_mean(int dim) {
  Functional f;
  f.kind_ = Kind::quadratic_mean;
  f.dim_ = dim;
  f.smoothness_ = 3.0;
  f.id_ = "quadratic_mean(d=" + std::to_string(dim) + ")";
  return f;
}

Functional Functional::trace_linear(Matrix b) {
  Functional f;
  f.kind_ = Kind::trace_linear;
  f.dim_ = static_cast<int>(b.rows());
  f.b_ = symmetrize(b);
  f.smoothness_ = 2.0;
  f.id_ = "trace_linear(" + matrix_tag(f.b_) + ",d=" +
          std::to_string(f.dim_) + ")";
  return f;
}

Functional Functional::trace_quadratic(Matrix b) {
  Functional f;
  f.kind_ = Kind::trace_quadratic;
  f.dim_ = static_cast<int>(b.rows());
  f.b_ = symmetrize(b);
  f.smoothness_ = 4.0;
  f.id_ = "trace_quadratic(" + matrix_tag(f.b_) + ",d=" +
          std::to_string(f.dim_) + ")";
  return f;
}

Functional Functional::spectral_trace(const ScalarFunction& phi, Matrix b) {
  Functional f;
  f.kind_ = Kind::spectral_trace;
  f.dim_ = static_cast<int>(b.rows());
  f.b_ = symmetrize(b);
  f.phi_ = &phi;
  f.smoothness_ = phi.smoothness;
  f.id_ = "spectral_trace(" + phi.name + "," + matrix_tag(f.b_) + ",d=" +
          std::to_string(f.dim_) + ")";
  return f;
}

Functional Functional::affine_combination(std::vector<double> weights,
                                          std::vector<Functional> terms,
                                          double offset) {
  if (weights.size() != terms.size() || terms.empty()) {
    throw std::invalid_argument(
        "affine_combination: weights and terms must match and be nonempty");
  }
  Functional f;
  f.kind_ = Kind::affine_combination;
  f.dim_ = terms.front().dim();
  f.smoothness_ = terms.front().smoothness();
  for (const auto& term : terms) {
    if (term.dim() != f.dim_) {
      throw std::invalid_argument("affine_combination: dimension mismatch");
    }
    f.smoothness_ = std::min(f.smoothness_, term.smoothness());
  }
  f.weights_ = std::move(weights);
  f.terms_ = std::make_shared<const std::vector<Functional>>(std::move(terms));
  f.offset_ = offset;
  f.id_ = "affine_combination(" + std::to_string(f.terms_->size()) +
          " terms,d=" + std::to_string(f.dim_) + ")";
  return f;
}

void Functional::check_dim(const Theta& theta) const {
  if (theta.dim() != dim_) {
    std::ostringstream oss;
    oss << id_ << ": parameter dimension " << theta.dim() << " != " << dim_;
    throw std::invalid_argument(oss.str());
  }
}

void Functional::check_spectrum(const EigenDecomp& decomp) const {
  const double lo = decomp.lambda.minCoeff();
  const double hi = decomp.lambda.maxCoeff();
  if (lo <= phi_->domain_lo || hi >= phi_->domain_hi) {
    std::ostringstream oss;
    oss << id_ << ": spectrum [" << lo << ", " << hi
        << "] outside the domain of " << phi_->name;
    throw std::domain_error(oss.str());
  }
}

double Functional::eval(const Theta& theta) const {
  check_dim(theta);
  switch (kind_) {
    case Kind::linear_mean:
      return u_.dot(theta.mu);
    case Kind::quadratic_mean:
      return theta.mu.squaredNorm();
    case Kind::trace_linear:
      return (theta.sigma * b_).trace();
    case Kind::trace_quadratic: {
      Matrix sb = theta.sigma * b_;
      return (sb * sb).trace();
    }
    case Kind::spectral_trace: {
      const EigenDecomp decomp = EigenDecomp::compute(theta.sigma);
      check_spectrum(decomp);
      double total = 0.0;
      // tr(phi(Sigma) B) = sum_i phi(lambda_i) q_i^T B q_i.
      for (Eigen::Index i = 0; i < decomp.lambda.size(); ++i) {
        const Vector qi = decomp.q.col(i);
        total += phi_->value(decomp.lambda(i)) * qi.dot(b_ * qi);
      }
      return total;
    }
    case Kind::affine_combination: {
      double total = offset_;
      for (std::size_t i = 0; i < weights_.size(); ++i) {
        total += weights_[i] * (*terms_)[i].eval(theta);
      }
      return total;
    }
  }
  throw std::logic_error("Functional::eval: unreachable");
}

Gradient Functional::grad(const Theta& theta) const {
  check_dim(theta);
  Gradient g;
  g.d_mu = Vector::Zero(dim_);
  g.d_sigma = Matrix::Zero(dim_, dim_);
  switch (kind_) {
    case Kind::linear_mean:
      g.d_mu = u_;
      return g;
    case Kind::quadratic_mean:
      g.d_mu = 2.0 * theta.mu;
      return g;
    case Kind::trace_linear:
      g.d_sigma = b_;
      return g;
    case Kind::trace_quadratic:
      g.d_sigma = symmetrize(2.0 * b_ * theta.sigma * b_);
      return g;
    case Kind::spectral_trace: {
      const EigenDecomp decomp = EigenDecomp::compute(theta.sigma);
      check_spectrum(decomp);
      // Divided-difference matrix on the eigenbasis, with the derivative on
      // near-ties.
      const Eigen::Index d = decomp.lambda.size();
      Matrix b_eig = decomp.q.transpose() * b_ * decomp.q;
      Matrix scaled(d, d);
      for (Eigen::Index i = 0; i < d; ++i) {
        const double li = decomp.lambda(i);
        for (Eigen::Index j = 0; j < d; ++j) {
          const double lj = decomp.lambda(j);
          double dd;
          if (std::abs(li - lj) <= 1e-8 * (1.0 + std::abs(li))) {
            dd = phi_->deriv(li);
          } else {
            dd = (phi_->value(li) - phi_->value(lj)) / (li - lj);
          }
          scaled(i, j) = dd * b_eig(i, j);
        }
      }
      g.d_sigma = symmetrize(decomp.q * scaled * decomp.q.transpose());
      return g;
    }
    case Kind::affine_combination: {
      for (std::size_t i = 0; i < weights_.size(); ++i) {
        const Gradient gi = (*terms_)[i].grad(theta);
        g.d_mu += weights_[i] * gi.d_mu;
        g.d_sigma += weights_[i] * gi.d_sigma;
      }
      g.d_sigma = symmetrize(g.d_sigma);
      return g;
    }
  }
  throw std::logic_error("Functional::grad: unreachable");
}

int Functional::default_correction_order() const {
  if (smoothness_ <= 2.0) return 0;
  return static_cast<int>(std::ceil(smoothness_)) - 2;
}

double efficiency_sd(const Functional& f, const Theta& theta) {
  const Gradient g = f.grad(theta);
  const Matrix root = sqrt_psd(theta.sigma);
  const double mu_part = (root * g.d_mu).squaredNorm();
  const double sigma_part = (root * g.d_sigma * root).squaredNorm();
  return std::sqrt(mu_part + 2.0 * sigma_part);
}

double fd_check(const Functional& f, const Theta& theta, double h,
                std::uint64_t direction_seed) {
  if (h < 1e-7 || h > 1e-3) {
    throw std::invalid_argument("fd_check: h must lie in [1e-7, 1e-3]");
  }
  const int d = theta.dim();
  const Gradient g = f.grad(theta);
  RngStream rng(derive_key(direction_seed, 0));

  double worst = 0.0;
  auto record = [&](double fd, double analytic) {
    const double err = std::abs(fd - analytic) / std::max(1.0, std::abs(analytic));
    worst = std::max(worst, err);
  };

  constexpr int kDirections = 5;
  for (int rep = 0; rep < kDirections; ++rep) {
    Vector dir(d);
    for (int i = 0; i < d; ++i) dir(i) = rng.normal();
    dir.normalize();
    Theta plus = theta, minus = theta;
    plus.mu += h * dir;
    minus.mu -= h * dir;
    const double fd = (f.eval(plus) - f.eval(minus)) / (2.0 * h);
    record(fd, g.d_mu.dot(dir));
  }
  for (int rep = 0; rep < kDirections; ++rep) {
    Matrix raw(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) raw(i, j) = rng.normal();
    }
    Matrix dir = symmetrize(raw);
    dir /= dir.norm();
    Theta plus = theta, minus = theta;
    plus.sigma += h * dir;
    minus.sigma -= h * dir;
    const double fd = (f.eval(plus) - f.eval(minus)) / (2.0 * h);
    record(fd, (g.d_sigma.array() * dir.array()).sum());
  }
  return worst;
}

}  // namespace biasreduce
