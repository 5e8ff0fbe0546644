#include <doctest.h>

#include <cmath>

#include "biasreduce/spectral.hpp"
#include "test_support.hpp"

using namespace biasreduce;

TEST_CASE("apply_spectral identity returns the input") {
  RngStream rng(11);
  const Matrix sigma = testsupport::random_spd(4, 0.5, 3.0, rng);
  const Matrix out = apply_spectral([](double u) { return u; }, sigma);
  CHECK((out - sigma).cwiseAbs().maxCoeff() < 1e-12 * sigma.cwiseAbs().maxCoeff() + 1e-14);
}

TEST_CASE("apply_spectral sqrt on a diagonal matrix") {
  Matrix sigma = Matrix::Zero(2, 2);
  sigma(0, 0) = 4.0;
  sigma(1, 1) = 9.0;
  const Matrix root = apply_spectral([](double u) { return std::sqrt(u); }, sigma);
  CHECK(root(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(root(1, 1) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(root(0, 1) == 0.0);
}

TEST_CASE("spectral square root squares back to sigma") {
  RngStream rng(12);
  for (int rep = 0; rep < 50; ++rep) {
    const int d = 2 + static_cast<int>(rng.next_u64() % 5);
    const Matrix sigma = testsupport::random_spd(d, 0.1, 10.0, rng);
    const Matrix root = sqrt_psd(sigma);
    const double defect = sym_operator_norm(root * root - sigma);
    CHECK(defect <= 1e-9 * (1.0 + sym_operator_norm(sigma)));
  }
}

TEST_CASE("apply_spectral rejects non-symmetric input") {
  Matrix m(2, 2);
  m << 1.0, 2.0, 0.0, 1.0;
  CHECK_THROWS_AS(apply_spectral([](double u) { return u; }, m),
                  std::invalid_argument);
}

TEST_CASE("eigendecomposition reconstructs over hard random inputs") {
  RngStream rng(13);
  for (int rep = 0; rep < 1000; ++rep) {
    const int d = 2 + static_cast<int>(rng.next_u64() % 6);
    // Condition numbers up to 1e6.
    const Matrix sigma = testsupport::random_spd(d, 1e-3, 1e3, rng);
    const EigenDecomp decomp = EigenDecomp::compute(sigma);
    const Matrix recon =
        decomp.q * decomp.lambda.asDiagonal() * decomp.q.transpose();
    const double scale = 1.0 + sym_operator_norm(sigma);
    CHECK(sym_operator_norm(recon - sigma) <= 1e-10 * scale);
    CHECK(sym_operator_norm(decomp.q.transpose() * decomp.q -
                            Matrix::Identity(d, d)) <= 1e-10);
    for (Eigen::Index i = 0; i + 1 < decomp.lambda.size(); ++i) {
      CHECK(decomp.lambda(i) >= decomp.lambda(i + 1));
    }
  }
}

TEST_CASE("smooth_step has exact plateaus and is monotone") {
  CHECK(smooth_step(0.5) == 0.0);
  CHECK(smooth_step(0.25) == 0.0);
  CHECK(smooth_step(1.0) == 1.0);
  CHECK(smooth_step(2.0) == 1.0);
  double prev = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double u = 0.4 + 0.7 * i / 1000.0;
    const double v = smooth_step(u);
    CHECK(v >= prev - 1e-15);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    prev = v;
  }
}

TEST_CASE("smoothed square root matches sqrt on the inner band and vanishes outside") {
  for (double a : {1.0, 2.0, 10.0}) {
    const SmoothSqrt gamma(a);
    for (int i = 0; i <= 10000; ++i) {
      const double u = 5.0 * a * i / 10000.0;
      const double g = gamma(u);
      CHECK(g >= 0.0);
      CHECK(g <= std::sqrt(u) + 1e-15);
      if (u >= 1.0 / (2.0 * a) && u <= 2.0 * a) {
        CHECK(std::abs(g - std::sqrt(u)) <= 1e-12);
      }
      if (u <= 1.0 / (4.0 * a) || u >= 4.0 * a) {
        CHECK(g == 0.0);
      }
    }
  }
}

TEST_CASE("smoothed square root is smooth in the transition bands") {
  const SmoothSqrt gamma(2.0);
  // Bounded second finite difference across the whole support; the sharpest
  // curvature sits in the lower transition band near 1/(4a).
  const double h = 1e-4;
  for (int i = 1; i < 2000; ++i) {
    const double u = 9.0 * i / 2000.0 + h;
    const double second =
        (gamma(u + h) - 2.0 * gamma(u) + gamma(u - h)) / (h * h);
    CHECK(std::abs(second) < 1000.0);
  }
}

TEST_CASE("smoothed square root of matrices: catalog cases") {
  // a=2, sigma=I: 1 is inside [1/4, 4], so the result is the identity.
  const Matrix id = Matrix::Identity(2, 2);
  CHECK(sym_operator_norm(smooth_sqrt_matrix(id, 2.0) - id) <= 1e-12);

  // a=2, sigma=diag(16, 1): 16 >= 4a = 8, so that direction is annihilated.
  Matrix sigma = Matrix::Zero(2, 2);
  sigma(0, 0) = 16.0;
  sigma(1, 1) = 1.0;
  const Matrix g = smooth_sqrt_matrix(sigma, 2.0);
  CHECK(g(0, 0) == 0.0);
  CHECK(g(1, 1) == doctest::Approx(1.0).epsilon(1e-12));

  // a=2, sigma=diag(6, 1): 6 is in the upper transition band.
  sigma(0, 0) = 6.0;
  const Matrix g2 = smooth_sqrt_matrix(sigma, 2.0);
  CHECK(g2(0, 0) >= 0.0);
  CHECK(g2(0, 0) <= std::sqrt(6.0));
}

TEST_CASE("operator norm bound of the smoothed root") {
  RngStream rng(14);
  for (int rep = 0; rep < 30; ++rep) {
    const Matrix sigma = testsupport::random_spd(3, 0.05, 30.0, rng);
    const Matrix g = smooth_sqrt_matrix(sigma, 2.0);
    CHECK(sym_operator_norm(g) <=
          std::sqrt(sym_operator_norm(sigma)) + 1e-12);
  }
}

TEST_CASE("smoothed root squares back to sigma when the spectrum is inside the band") {
  RngStream rng(15);
  const double a = 2.0;
  for (int rep = 0; rep < 100; ++rep) {
    const Matrix sigma = testsupport::random_spd(3, 1.0 / (2.0 * a) + 0.01,
                                                 2.0 * a - 0.01, rng);
    const Matrix g = smooth_sqrt_matrix(sigma, a);
    CHECK(sym_operator_norm(g * g - sigma) <= 1e-9);
  }
}

TEST_CASE("param_norm catalog values") {
  CHECK(param_norm(Vector::Zero(2), Matrix::Zero(2, 2)) == 0.0);
  Vector e1 = Vector::Zero(2);
  e1(0) = 1.0;
  CHECK(param_norm(e1, Matrix::Identity(2, 2)) == doctest::Approx(2.0));
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 3.0;
  m(1, 1) = -1.0;
  CHECK(param_norm(Vector::Zero(2), m) == doctest::Approx(3.0));
}
