#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "biasreduce/oracles.hpp"

using namespace biasreduce;

TEST_CASE("polynomials: evaluation, arithmetic, trailing zeros") {
  const Poly p({1.0, 0.0, 2.0});  // 1 + 2 x^2
  CHECK(p(0.5) == doctest::Approx(1.5));
  CHECK(p.degree() == 2);
  const Poly q = p - p;
  CHECK(q.is_zero());
  CHECK(q.degree() == -1);
  const Poly stripped(std::vector<double>{1.0, 2.0, 0.0, 0.0});
  CHECK(stripped.degree() == 1);
}

TEST_CASE("bernstein transform fixes linear polynomials") {
  const Poly line({0.25, 2.0});
  const Poly image = bernstein_transform(line, 10);
  CHECK(image.degree() == 1);
  CHECK(image.coeff(0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(image.coeff(1) == doctest::Approx(2.0).epsilon(1e-15));

  const Poly constant({3.0});
  const Poly cimage = bernstein_transform(constant, 7);
  CHECK(cimage.coeff(0) == doctest::Approx(3.0));
  CHECK(cimage.degree() == 0);
}

TEST_CASE("bernstein transform of theta^2 adds the binomial variance term") {
  const Poly sq = Poly::monomial(2);
  const Poly image = bernstein_transform(sq, 10);
  // theta^2 + theta(1-theta)/10
  CHECK(image(0.5) == doctest::Approx(0.275).epsilon(1e-14));
  CHECK(image.coeff(1) == doctest::Approx(0.1).epsilon(1e-13));
  CHECK(image.coeff(2) == doctest::Approx(0.9).epsilon(1e-13));
}

TEST_CASE("bernstein transform rejects degree above n") {
  CHECK_THROWS_AS(bernstein_transform(Poly::monomial(5), 4),
                  std::invalid_argument);
}

TEST_CASE("operator powers on theta^2 at n=10") {
  const Poly sq = Poly::monomial(2);
  const Poly b1 = binomial_bias_power(sq, 10, 1);
  CHECK(b1(0.5) == doctest::Approx(0.025).epsilon(1e-13));
  const Poly b2 = binomial_bias_power(sq, 10, 2);
  CHECK(b2(0.5) == doctest::Approx(-0.0025).epsilon(1e-12));
  // Linear polynomials are fixed points, so every positive power vanishes.
  const Poly line({0.5, -2.0});
  for (int k = 1; k <= 4; ++k) {
    CHECK(binomial_bias_power(line, 10, k).is_zero());
  }
}

TEST_CASE("corrected-estimator bias in the binomial model") {
  const Poly sq = Poly::monomial(2);
  CHECK(binomial_corrected_bias(sq, 10, 0, 0.5) ==
        doctest::Approx(0.025).epsilon(1e-13));
  CHECK(binomial_corrected_bias(sq, 10, 1, 0.5) ==
        doctest::Approx(0.0025).epsilon(1e-12));
  const Poly line({1.0, 1.0});
  for (int k = 0; k <= 4; ++k) {
    CHECK(binomial_corrected_bias(line, 10, k, 0.3) ==
          doctest::Approx(0.0).epsilon(1e-14));
  }
}

TEST_CASE("enumeration agrees with the closed-form bias on a grid") {
  const Poly p({0.0, -1.0, 2.0, 0.0, 0.0, 0.5});  // degree 5
  for (int n : {6, 12}) {
    for (int k = 0; k <= 3; ++k) {
      const Poly pk = binomial_corrected_poly(p, n, k);
      for (int i = 0; i <= 50; ++i) {
        const double theta = i / 50.0;
        const double enumerated =
            binomial_expect_enumerated(pk, n, theta) - p(theta);
        const double closed = binomial_corrected_bias(p, n, k, theta);
        CHECK(std::abs(enumerated - closed) <= 1e-12);
      }
    }
  }
}

TEST_CASE("chi-square oracle values") {
  CHECK(chisq_bias_power(1.0, 11, 0) == doctest::Approx(1.0));
  CHECK(chisq_bias_power(1.0, 11, 1) == doctest::Approx(0.2));
  CHECK(chisq_bias_power(1.0, 11, 3) == doctest::Approx(0.008));
  CHECK(chisq_bias_power(2.0, 21, 1) == doctest::Approx(0.4));
}

TEST_CASE("gauss-hermite: moments of the standard normal") {
  const GaussHermite quad(40);
  CHECK(quad.integrate([](double) { return 1.0; }) == doctest::Approx(1.0));
  CHECK(quad.integrate([](double z) { return z; }) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(quad.integrate([](double z) { return z * z; }) == doctest::Approx(1.0));
  CHECK(quad.integrate([](double z) { return z * z * z * z; }) ==
        doctest::Approx(3.0));
}

TEST_CASE("shift-model operator powers: polynomial hand cases") {
  auto linear = [](double x) { return 3.0 * x - 1.0; };
  CHECK(shift_model_bias_power(linear, 0.7, 0.3, 1) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(shift_model_bias_power(linear, 0.7, 0.3, 2) ==
        doctest::Approx(0.0).epsilon(1e-12));

  auto square = [](double x) { return x * x; };
  CHECK(shift_model_bias_power(square, 0.4, 0.5, 1) ==
        doctest::Approx(0.25).epsilon(1e-12));
  CHECK(shift_model_bias_power(square, 0.4, 0.5, 2) ==
        doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("quadrature order gate: doubling m changes nothing measurable") {
  auto f = [](double x) { return std::exp(-x) + std::sin(2.0 * x); };
  for (int k : {1, 2, 3}) {
    const double at40 = shift_model_bias_power(f, 0.2, 0.4, k, 40);
    const double at80 = shift_model_bias_power(f, 0.2, 0.4, k, 80);
    CHECK(std::abs(at40 - at80) < 1e-10);
  }
  CHECK_THROWS_AS(shift_model_bias_power(f, 0.0, 1.0, 1, 10),
                  std::invalid_argument);
}
