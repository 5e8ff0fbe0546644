#include <doctest.h>

#include <cmath>

#include "biasreduce/model.hpp"
#include "biasreduce/stats.hpp"
#include "test_support.hpp"

using namespace biasreduce;

TEST_CASE("Theta validation") {
  Theta theta;
  theta.mu = Vector::Zero(2);
  theta.sigma = Matrix::Identity(2, 2);
  CHECK_NOTHROW(theta.validate());

  theta.sigma(0, 1) = 0.5;
  CHECK_THROWS_AS(theta.validate(), std::invalid_argument);

  theta.sigma(0, 1) = 0.0;
  theta.sigma(0, 0) = 0.0;  // singular: zero-variance limit rejected
  CHECK_THROWS_AS(theta.validate(), std::invalid_argument);
}

TEST_CASE("ParamDomain membership follows the spectrum") {
  ParamDomain domain(2.0, 2);
  Theta theta;
  theta.mu = Vector::Zero(2);
  theta.sigma = Matrix::Identity(2, 2);
  CHECK(domain.contains(theta));
  theta.sigma(0, 0) = 0.4;  // below 1/a = 0.5
  CHECK_FALSE(domain.contains(theta));
  theta.sigma(0, 0) = 2.5;  // above a = 2
  CHECK_FALSE(domain.contains(theta));
  CHECK_THROWS(ParamDomain(0.5, 2));
}

TEST_CASE("sampling with identity covariance returns the raw draws") {
  Theta theta;
  theta.mu = Vector::Zero(3);
  theta.sigma = Matrix::Identity(3, 3);
  RngStream rng_a(2024), rng_b(2024);
  const Matrix x = sample_dataset(theta, 5, rng_a);
  const Matrix z = draw_standard_normal(5, 3, rng_b);
  CHECK((x - z).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sample_dataset rejects tiny n and invalid theta") {
  Theta theta;
  theta.mu = Vector::Zero(2);
  theta.sigma = Matrix::Identity(2, 2);
  RngStream rng(1);
  CHECK_THROWS_AS(sample_dataset(theta, 1, rng), std::invalid_argument);
  theta.sigma(1, 1) = 0.0;
  CHECK_THROWS_AS(sample_dataset(theta, 10, rng), std::invalid_argument);
}

TEST_CASE("sample mean concentrates around mu") {
  Theta theta;
  theta.mu = Vector::Constant(2, 5.0);
  theta.sigma = Matrix::Identity(2, 2);
  RngStream rng(77);
  const int n = 4000;
  const Matrix x = sample_dataset(theta, n, rng);
  const Theta est = estimate_theta(x);
  const double d_over_n = 2.0 / static_cast<double>(n);
  CHECK((est.mu - theta.mu).norm() <= 4.0 * std::sqrt(d_over_n));
}

TEST_CASE("one-dimensional sample variance matches sigma2") {
  Theta theta;
  theta.mu = Vector::Zero(1);
  theta.sigma = Matrix::Constant(1, 1, 4.0);
  RngStream rng(5150);
  const int n = 100000;
  const Matrix x = sample_dataset(theta, n, rng);
  const Theta est = estimate_theta(x);
  CHECK(est.sigma(0, 0) > 3.8);
  CHECK(est.sigma(0, 0) < 4.2);
}

TEST_CASE("estimate_theta hand cases") {
  Matrix data(2, 2);
  data << 1.0, 2.0, 1.0, 2.0;  // two identical rows
  const Theta est = estimate_theta(data);
  CHECK(est.mu(0) == 1.0);
  CHECK(est.mu(1) == 2.0);
  CHECK(est.sigma.cwiseAbs().maxCoeff() == 0.0);

  Matrix one_d(2, 1);
  one_d << 0.0, 2.0;
  const Theta est1 = estimate_theta(one_d);
  CHECK(est1.mu(0) == doctest::Approx(1.0));
  CHECK(est1.sigma(0, 0) == doctest::Approx(2.0));

  CHECK_THROWS_AS(estimate_theta(Matrix::Zero(1, 2)), std::invalid_argument);
}

TEST_CASE("sample covariance is unbiased over replicates") {
  Theta theta;
  theta.mu = Vector::Zero(2);
  theta.sigma = Matrix::Zero(2, 2);
  theta.sigma << 2.0, 0.7, 0.7, 1.0;
  RngStream rng(31);
  const int reps = 100000;
  const int n = 6;
  Matrix total = Matrix::Zero(2, 2);
  std::vector<double> entry00(reps);
  for (int r = 0; r < reps; ++r) {
    const Matrix x = sample_dataset(theta, n, rng);
    const Theta est = estimate_theta(x);
    total += est.sigma;
    entry00[static_cast<std::size_t>(r)] = est.sigma(0, 0);
  }
  const Matrix mean = total / static_cast<double>(reps);
  const MeanSe ms = mean_and_se(entry00);
  CHECK(std::abs(ms.mean - 2.0) <= 4.0 * ms.se);
  CHECK((mean - theta.sigma).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("estimate_theta is affine equivariant") {
  RngStream rng(41);
  const Matrix x = draw_standard_normal(20, 3, rng);
  Matrix a(3, 3);
  a << 2.0, 0.3, 0.0, -0.5, 1.0, 0.2, 0.1, 0.0, 0.7;
  Vector b(3);
  b << 1.0, -2.0, 0.5;
  Matrix transformed(20, 3);
  for (int i = 0; i < 20; ++i) {
    transformed.row(i) = (a * x.row(i).transpose() + b).transpose();
  }
  const Theta base = estimate_theta(x);
  const Theta moved = estimate_theta(transformed);
  const Vector expect_mu = a * base.mu + b;
  const Matrix expect_sigma = a * base.sigma * a.transpose();
  CHECK((moved.mu - expect_mu).norm() <= 1e-10);
  CHECK((moved.sigma - expect_sigma).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("NoiseBlock summaries satisfy the centering identity") {
  RngStream rng(55);
  const NoiseBlock block = NoiseBlock::draw(17, 3, rng);
  CHECK(asymmetry(block.sigma_hat_z) == 0.0);
  CHECK(asymmetry(block.sigma_tilde_z) == 0.0);
  // (n-1) sigma_hat = n (sigma_tilde - zbar zbar^T)
  const Matrix lhs = 16.0 * block.sigma_hat_z;
  const Matrix rhs =
      17.0 * (block.sigma_tilde_z - block.zbar * block.zbar.transpose());
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-10);
  // Both summaries are PSD.
  CHECK(EigenDecomp::compute(block.sigma_hat_z).lambda.minCoeff() >= -1e-12);
  CHECK(EigenDecomp::compute(block.sigma_tilde_z).lambda.minCoeff() >= -1e-12);
}

TEST_CASE("centered vs uncentered second moments: exact L2 distance") {
  // <W, sigma_hat - sigma_tilde> has mean zero and variance
  // 2 |W|_HS^2 / (n (n-1)): sigma_hat - sigma_tilde =
  // (sigma_tilde - n zbar zbar^T) / (n-1), and the three (co)variance terms
  // are 2t/n, 2t, -4t/n with t = |W|_HS^2.
  RngStream rng(66);
  const int n = 12, d = 2;
  Matrix w(2, 2);
  w << 1.0, 0.3, 0.3, -0.5;
  const double exact_var =
      2.0 * w.squaredNorm() / (static_cast<double>(n) * (n - 1));
  const int reps = 40000;
  std::vector<double> sq(reps);
  for (int r = 0; r < reps; ++r) {
    const NoiseBlock block = NoiseBlock::draw(n, d, rng);
    const double diff = ((block.sigma_hat_z - block.sigma_tilde_z).array() *
                         w.array()).sum();
    sq[static_cast<std::size_t>(r)] = diff * diff;
  }
  const MeanSe ms = mean_and_se(sq);
  CHECK(std::abs(ms.mean - exact_var) <= 4.0 * ms.se);
  // The distance vanishes at the 1/n scale, an order below the n^{-1/2}
  // fluctuation of either matrix.
  CHECK(std::sqrt(ms.mean) * n <= 2.0 * w.norm());
}

TEST_CASE("sampling is bit-identical for identical seeds") {
  Theta theta;
  theta.mu = Vector::Constant(3, 0.5);
  RngStream spd_rng(8);
  theta.sigma = testsupport::random_spd(3, 0.5, 2.0, spd_rng);
  RngStream a(99), b(99);
  const Matrix x1 = sample_dataset(theta, 50, a);
  const Matrix x2 = sample_dataset(theta, 50, b);
  CHECK((x1 - x2).cwiseAbs().maxCoeff() == 0.0);
}
