#include <doctest.h>

#include <cmath>

#include "biasreduce/functionals.hpp"
#include "biasreduce/stats.hpp"
#include "test_support.hpp"

using namespace biasreduce;

namespace {

Theta diag_theta(std::initializer_list<double> mu,
                 std::initializer_list<double> diag) {
  Theta theta;
  theta.mu = Vector(static_cast<Eigen::Index>(mu.size()));
  int i = 0;
  for (double m : mu) theta.mu(i++) = m;
  theta.sigma = Matrix::Zero(static_cast<Eigen::Index>(diag.size()),
                             static_cast<Eigen::Index>(diag.size()));
  i = 0;
  for (double v : diag) {
    theta.sigma(i, i) = v;
    ++i;
  }
  return theta;
}

std::vector<Functional> catalog(int d) {
  Vector u = Vector::Zero(d);
  u(0) = 1.0;
  Matrix b = Matrix::Identity(d, d);
  b(0, 0) = 2.0;
  std::vector<Functional> fs;
  fs.push_back(Functional::linear_mean(u));
  fs.push_back(Functional::quadratic_mean(d));
  fs.push_back(Functional::trace_linear(b));
  fs.push_back(Functional::trace_quadratic(b));
  fs.push_back(Functional::spectral_trace(ScalarFunction::named("log"),
                                          Matrix::Identity(d, d)));
  fs.push_back(Functional::spectral_trace(ScalarFunction::named("square"),
                                          b));
  fs.push_back(Functional::affine_combination(
      {0.5, -2.0}, {fs[0], fs[2]}, 1.0));
  return fs;
}

}  // namespace

TEST_CASE("catalog values at hand-checked points") {
  const Theta theta = diag_theta({3.0, 0.0}, {1.0, 2.0});
  Vector e1 = Vector::Zero(2);
  e1(0) = 1.0;
  CHECK(Functional::linear_mean(e1).eval(theta) == doctest::Approx(3.0));
  CHECK(Functional::quadratic_mean(2).eval(theta) == doctest::Approx(9.0));
  CHECK(Functional::trace_linear(Matrix::Identity(2, 2)).eval(theta) ==
        doctest::Approx(3.0));
  // tr(sigma^2) on diag(1,2)
  CHECK(Functional::trace_quadratic(Matrix::Identity(2, 2)).eval(theta) ==
        doctest::Approx(5.0));
  CHECK(Functional::spectral_trace(ScalarFunction::named("square"),
                                   Matrix::Identity(2, 2))
            .eval(theta) == doctest::Approx(5.0));
}

TEST_CASE("gradients at hand-checked points") {
  const Theta theta = diag_theta({0.5, -1.0}, {1.0, 2.0});
  Vector u(2);
  u << 2.0, -1.0;

  const Gradient g1 = Functional::linear_mean(u).grad(theta);
  CHECK((g1.d_mu - u).norm() == 0.0);
  CHECK(g1.d_sigma.cwiseAbs().maxCoeff() == 0.0);

  Matrix b(2, 2);
  b << 1.0, 3.0, 0.0, 2.0;  // asymmetric input, symmetrized inside
  const Gradient g2 = Functional::trace_linear(b).grad(theta);
  CHECK((g2.d_sigma - symmetrize(b)).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(g2.d_mu.norm() == 0.0);

  const Gradient g3 =
      Functional::trace_quadratic(Matrix::Identity(2, 2)).grad(theta);
  CHECK(g3.d_sigma(0, 0) == doctest::Approx(2.0));
  CHECK(g3.d_sigma(1, 1) == doctest::Approx(4.0));

  const Gradient g4 = Functional::quadratic_mean(2).grad(theta);
  CHECK((g4.d_mu - 2.0 * theta.mu).norm() <= 1e-15);
}

TEST_CASE("spectral_trace rejects spectra outside the scalar domain") {
  Theta theta = diag_theta({0.0}, {1.0});
  theta.sigma(0, 0) = -0.5;
  const Functional f = Functional::spectral_trace(ScalarFunction::named("log"),
                                                  Matrix::Identity(1, 1));
  CHECK_THROWS_AS(f.eval(theta), std::domain_error);
}

TEST_CASE("finite differences confirm every catalog gradient") {
  RngStream rng(2027);
  const double a = 2.0;
  const auto fs = catalog(5);
  for (int rep = 0; rep < 100; ++rep) {
    const Theta theta = testsupport::random_theta(5, a, rng);
    for (const auto& f : fs) {
      CHECK(fd_check(f, theta, 1e-5) <= 1e-5);
    }
  }
}

TEST_CASE("finite differences are exact for linear functionals") {
  RngStream rng(3);
  const Theta theta = testsupport::random_theta(3, 2.0, rng);
  Vector u(3);
  u << 1.0, -2.0, 0.5;
  CHECK(fd_check(Functional::linear_mean(u), theta, 1e-5) <= 1e-10);
}

TEST_CASE("spectral log gradient near the identity") {
  Theta theta = diag_theta({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0});
  theta.sigma(0, 1) = theta.sigma(1, 0) = 0.05;
  const Functional f = Functional::spectral_trace(ScalarFunction::named("log"),
                                                  Matrix::Identity(3, 3));
  CHECK(fd_check(f, theta, 1e-5) <= 1e-5);
}

TEST_CASE("efficiency sd: hand values") {
  // Linear functional of the mean with identity covariance.
  Vector e1 = Vector::Zero(2);
  e1(0) = 1.0;
  const Theta theta = diag_theta({0.0, 0.0}, {1.0, 1.0});
  CHECK(efficiency_sd(Functional::linear_mean(e1), theta) ==
        doctest::Approx(1.0));

  // Trace functional with B = I in d = 2: sigma_f^2 = 2 |I|_HS^2 = 4.
  CHECK(efficiency_sd(Functional::trace_linear(Matrix::Identity(2, 2)), theta) ==
        doctest::Approx(2.0));

  // d = 1 variance functional: sigma_f^2 = 2 sigma^4.
  const Theta one = diag_theta({0.0}, {1.0});
  CHECK(efficiency_sd(Functional::trace_linear(Matrix::Identity(1, 1)), one) ==
        doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("efficiency sd is invariant under orthogonal conjugation") {
  RngStream rng(404);
  for (int rep = 0; rep < 20; ++rep) {
    const Theta theta = testsupport::random_theta(4, 2.0, rng);
    const Matrix q = testsupport::random_orthogonal(4, rng);
    Vector u(4);
    for (int i = 0; i < 4; ++i) u(i) = rng.normal();
    Matrix b = symmetrize(testsupport::random_spd(4, 0.3, 3.0, rng));

    Theta rotated;
    rotated.mu = q * theta.mu;
    rotated.sigma = symmetrize(q * theta.sigma * q.transpose());

    for (int which = 0; which < 3; ++which) {
      Functional f = which == 0   ? Functional::linear_mean(u)
                     : which == 1 ? Functional::trace_linear(b)
                                  : Functional::spectral_trace(
                                        ScalarFunction::named("log"), b);
      Functional f_rot =
          which == 0   ? Functional::linear_mean(q * u)
          : which == 1 ? Functional::trace_linear(symmetrize(q * b * q.transpose()))
                       : Functional::spectral_trace(
                             ScalarFunction::named("log"),
                             symmetrize(q * b * q.transpose()));
      const double base = efficiency_sd(f, theta);
      const double rot = efficiency_sd(f_rot, rotated);
      CHECK(std::abs(base - rot) <= 1e-10 * (1.0 + base));
    }
  }
}

TEST_CASE("one-dimensional variance functional matches the chi-square variance") {
  // n Var(sample variance) = 2 sigma^4 n/(n-1) -> sigma_f^2 = 2 sigma^4.
  const Theta one = diag_theta({0.0}, {1.0});
  const Functional f = Functional::trace_linear(Matrix::Identity(1, 1));
  const double sf = efficiency_sd(f, one);
  RngStream rng(811);
  const int n = 200, reps = 60000;
  Theta model = one;
  std::vector<double> vals(reps);
  for (int r = 0; r < reps; ++r) {
    const Matrix x = sample_dataset(model, n, rng);
    vals[static_cast<std::size_t>(r)] = estimate_theta(x).sigma(0, 0);
  }
  const double var = sample_variance(vals);
  const double expect = sf * sf / n * n / (n - 1.0);  // 2 sigma^4 / (n-1)
  CHECK(var * n == doctest::Approx(expect * n).epsilon(0.05));
}

TEST_CASE("affine combinations are exactly linear in the weights") {
  RngStream rng(5);
  const Theta theta = testsupport::random_theta(3, 2.0, rng);
  Vector u(3);
  u << 1.0, 0.0, -1.0;
  const Functional f1 = Functional::linear_mean(u);
  const Functional f2 = Functional::trace_quadratic(Matrix::Identity(3, 3));
  const double w1 = 0.75, w2 = -1.25, off = 2.0;
  const Functional combo =
      Functional::affine_combination({w1, w2}, {f1, f2}, off);
  CHECK(combo.eval(theta) ==
        doctest::Approx(off + w1 * f1.eval(theta) + w2 * f2.eval(theta))
            .epsilon(1e-14));
  const Gradient g = combo.grad(theta);
  const Gradient g1 = f1.grad(theta);
  const Gradient g2 = f2.grad(theta);
  CHECK((g.d_mu - (w1 * g1.d_mu + w2 * g2.d_mu)).norm() <= 1e-14);
  CHECK((g.d_sigma - (w1 * g1.d_sigma + w2 * g2.d_sigma)).cwiseAbs().maxCoeff() <=
        1e-14);
}

TEST_CASE("default correction order follows declared smoothness") {
  Vector u = Vector::Zero(2);
  u(0) = 1.0;
  Functional lin = Functional::linear_mean(u);
  CHECK(lin.default_correction_order() == 0);
  Functional quad = Functional::trace_quadratic(Matrix::Identity(2, 2));
  CHECK(quad.default_correction_order() == 2);
  quad.set_smoothness(3.0);
  CHECK(quad.default_correction_order() == 1);
  quad.set_smoothness(3.5);
  CHECK(quad.default_correction_order() == 2);
}

TEST_CASE("gradient sigma part is stored symmetric") {
  RngStream rng(6);
  const Theta theta = testsupport::random_theta(4, 2.0, rng);
  for (const auto& f : catalog(4)) {
    const Gradient g = f.grad(theta);
    CHECK(asymmetry(g.d_sigma) <= 1e-12 * (1.0 + g.d_sigma.cwiseAbs().maxCoeff()));
  }
}
