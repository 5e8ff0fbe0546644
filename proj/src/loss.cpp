#include "biasreduce/loss.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "biasreduce/log.hpp"

namespace biasreduce {

LossFunction LossFunction::power(double p) {
  if (!(p >= 1.0)) {
    throw std::invalid_argument("LossFunction::power: p must be >= 1");
  }
  return LossFunction{Kind::power, p};
}

double LossFunction::operator()(double u) const {
  const double a = std::abs(u);
  switch (kind) {
    case Kind::power:
      return std::pow(a, p);
    case Kind::psi1:
      return std::expm1(a);
    case Kind::psi2:
      return a * a > 700.0 ? std::numeric_limits<double>::infinity()
                           : std::expm1(a * a);
  }
  return 0.0;
}

std::string LossFunction::name() const {
  switch (kind) {
    case Kind::power: {
      std::ostringstream oss;
      oss << "power" << p;
      return oss.str();
    }
    case Kind::psi1:
      return "psi1";
    case Kind::psi2:
      return "psi2";
  }
  return "?";
}

double orlicz_norm(std::span<const double> samples, const LossFunction& loss) {
  if (samples.empty()) {
    throw std::invalid_argument("orlicz_norm: empty sample");
  }
  double max_abs = 0.0;
  for (double x : samples) max_abs = std::max(max_abs, std::abs(x));
  if (max_abs == 0.0) return 0.0;

  const double m = static_cast<double>(samples.size());
  auto mean_loss = [&](double c) {
    double total = 0.0;
    for (double x : samples) {
      total += loss(std::abs(x) / c);
      if (std::isinf(total)) return total;
    }
    return total / m;
  };

  // mean_loss is nonincreasing in c; bracket the root and bisect.
  const double cap = 1e3 * max_abs;
  double hi = max_abs;
  while (mean_loss(hi) > 1.0) {
    hi *= 2.0;
    if (hi > cap) {
      std::ostringstream oss;
      oss << "orlicz_norm(" << loss.name()
          << "): no finite norm within cap " << cap << ", mean loss at cap "
          << mean_loss(cap);
      log::info(oss.str());
      return std::numeric_limits<double>::infinity();
    }
  }
  double lo = hi;
  while (mean_loss(lo) <= 1.0) {
    lo /= 2.0;
    if (lo < max_abs * 1e-12) break;
  }
  for (int iter = 0; iter < 200 && (hi - lo) > 1e-9 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mean_loss(mid) <= 1.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace biasreduce
