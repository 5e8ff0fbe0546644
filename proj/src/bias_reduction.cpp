#include "biasreduce/bias_reduction.hpp"

#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "biasreduce/errors.hpp"
#include "biasreduce/parallel.hpp"
#include "biasreduce/stats.hpp"

namespace biasreduce {

KernelKind KernelKind::smoothed(double a) {
  if (!(a >= 1.0)) {
    throw std::invalid_argument("KernelKind::smoothed: a must be >= 1");
  }
  return KernelKind{Variant::smoothed, a};
}

Theta homotopy_exact(const Theta& theta, double t, const NoiseBlock& noise) {
  if (t == 0.0) return theta;
  const Matrix root = sqrt_psd(theta.sigma);
  Theta out;
  out.mu = theta.mu + t * (root * noise.zbar);
  const int d = theta.dim();
  Matrix mid = (1.0 - t) * Matrix::Identity(d, d) + t * noise.sigma_hat_z;
  out.sigma = symmetrize(root * mid * root);
  return out;
}

Theta homotopy_smoothed(const Theta& theta, double t, const NoiseBlock& noise,
                        double a) {
  if (t == 0.0) return theta;
  const int d = theta.dim();
  const Matrix g = smooth_sqrt_matrix(theta.sigma, a);
  Theta out;
  out.mu = theta.mu + t * (g * noise.zbar);
  out.sigma = symmetrize(
      theta.sigma +
      t * symmetrize(g * (noise.sigma_hat_z - Matrix::Identity(d, d)) * g));
  const double min_eig = EigenDecomp::compute(out.sigma).lambda.minCoeff();
  if (min_eig < -1e-10) {
    std::ostringstream oss;
    oss << "homotopy_smoothed: output covariance has eigenvalue " << min_eig;
    throw NumericError(oss.str());
  }
  return out;
}

namespace {

Theta kernel_step(const Theta& state, int n, KernelKind kernel,
                  RngStream&& stream) {
  if (kernel.variant == KernelKind::Variant::exact) {
    return estimate_theta(sample_dataset_psd(state, n, stream));
  }
  NoiseBlock noise = NoiseBlock::draw(n, state.dim(), stream);
  return homotopy_smoothed(state, 1.0, noise, kernel.a);
}

MCEstimate summarize(const std::vector<double>& values) {
  const MeanSe ms = mean_and_se(values);
  return MCEstimate{ms.mean, ms.se, values.size()};
}

}  // namespace

ChainPath sample_chain(const Theta& theta, int k, int n, KernelKind kernel,
                       const StreamFactory& rng) {
  if (k < 0) throw std::invalid_argument("sample_chain: k must be >= 0");
  if (n < 2) throw std::invalid_argument("sample_chain: need n >= 2");
  ChainPath path;
  path.kernel = kernel;
  path.n = n;
  path.states.reserve(static_cast<std::size_t>(k) + 1);
  path.states.push_back(theta);
  for (int j = 0; j < k; ++j) {
    path.states.push_back(
        kernel_step(path.states.back(), n, kernel,
                    rng.stream(static_cast<std::uint64_t>(j))));
  }
  return path;
}

double chain_difference(const Functional& f, const ChainPath& path, int k) {
  if (static_cast<int>(path.states.size()) < k + 1) {
    throw std::invalid_argument("chain_difference: path shorter than k+1");
  }
  double total = 0.0;
  for (int j = 0; j <= k; ++j) {
    const double sign = ((k - j) % 2 == 0) ? 1.0 : -1.0;
    total += sign * binomial_coefficient(k, j) *
             f.eval(path.states[static_cast<std::size_t>(j)]);
  }
  return total;
}

double binomial_coefficient(int n, int r) {
  if (r < 0 || r > n) return 0.0;
  r = std::min(r, n - r);
  double c = 1.0;
  for (int i = 1; i <= r; ++i) {
    c = c * static_cast<double>(n - r + i) / static_cast<double>(i);
  }
  return std::round(c);
}

std::vector<double> correction_weights_reference(int k) {
  // Literal expansion of sum_{j<=k} (-1)^j applied to the j-fold difference
  // operator: coefficient of the i-th chain state is
  // sum_{j=i..k} (-1)^j (-1)^{j-i} C(j,i).
  std::vector<double> w(static_cast<std::size_t>(k) + 1, 0.0);
  for (int j = 0; j <= k; ++j) {
    for (int i = 0; i <= j; ++i) {
      const double sign = ((j + j - i) % 2 == 0) ? 1.0 : -1.0;
      w[static_cast<std::size_t>(i)] += sign * binomial_coefficient(j, i);
    }
  }
  return w;
}

std::vector<double> correction_weights(int k) {
  if (k < 0) throw std::invalid_argument("correction_weights: k must be >= 0");
  static std::once_flag verified;
  std::call_once(verified, [] {
    for (int kk = 0; kk <= 12; ++kk) {
      const auto ref = correction_weights_reference(kk);
      for (int i = 0; i <= kk; ++i) {
        const double sign = (i % 2 == 0) ? 1.0 : -1.0;
        if (ref[static_cast<std::size_t>(i)] !=
            sign * binomial_coefficient(kk + 1, i + 1)) {
          throw std::logic_error(
              "correction_weights: closed form disagrees with expansion");
        }
      }
    }
  });
  std::vector<double> w(static_cast<std::size_t>(k) + 1);
  for (int i = 0; i <= k; ++i) {
    const double sign = (i % 2 == 0) ? 1.0 : -1.0;
    w[static_cast<std::size_t>(i)] = sign * binomial_coefficient(k + 1, i + 1);
  }
  return w;
}

MCEstimate bias_operator_mc(const Functional& f, const Theta& theta, int k,
                            int n, KernelKind kernel, std::uint64_t replicates,
                            const StreamFactory& rng, int workers) {
  if (replicates < 2) {
    throw std::invalid_argument("bias_operator_mc: need replicates >= 2");
  }
  std::vector<double> values(replicates);
  parallel_for(replicates, workers, [&](std::size_t r) {
    const ChainPath path = sample_chain(theta, k, n, kernel, rng.sub(r));
    values[r] = chain_difference(f, path, k);
  });
  return summarize(values);
}

namespace {

Theta coupled_step(const Theta& state, const NoiseBlock& noise,
                   KernelKind kernel) {
  return kernel.variant == KernelKind::Variant::exact
             ? homotopy_exact(state, 1.0, noise)
             : homotopy_smoothed(state, 1.0, noise, kernel.a);
}

// Alternating sum of f over the corners {0,1}^k of the homotopy
// superposition sharing one set of noise blocks. Branching on t_j = 0 keeps
// the state, so only the t_j = 1 children apply a homotopy.
double corner_sum(const Functional& f, const Theta& state,
                  const std::vector<NoiseBlock>& noises, KernelKind kernel,
                  int depth, int k, int ones) {
  if (depth == k) {
    const double sign = ((k - ones) % 2 == 0) ? 1.0 : -1.0;
    return sign * f.eval(state);
  }
  double total = corner_sum(f, state, noises, kernel, depth + 1, k, ones);
  const Theta moved =
      coupled_step(state, noises[static_cast<std::size_t>(depth)], kernel);
  total += corner_sum(f, moved, noises, kernel, depth + 1, k, ones + 1);
  return total;
}

}  // namespace

MCEstimate bias_operator_coupled_mc(const Functional& f, const Theta& theta,
                                    int k, int n, KernelKind kernel,
                                    std::uint64_t replicates,
                                    const StreamFactory& rng, int workers) {
  if (replicates < 2) {
    throw std::invalid_argument("bias_operator_coupled_mc: need replicates >= 2");
  }
  if (k > 20) {
    throw std::invalid_argument("bias_operator_coupled_mc: k too large");
  }
  const int d = theta.dim();
  std::vector<double> values(replicates);
  parallel_for(replicates, workers, [&](std::size_t r) {
    const StreamFactory draw_rng = rng.sub(r);
    std::vector<NoiseBlock> noises;
    noises.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
      RngStream stream = draw_rng.stream(static_cast<std::uint64_t>(j));
      noises.push_back(NoiseBlock::draw(n, d, stream));
    }
    values[r] = corner_sum(f, theta, noises, kernel, 0, k, 0);
  });
  return summarize(values);
}

MCEstimate corrected_functional_mc(const Functional& f, const Theta& at, int k,
                                   int n, KernelKind kernel,
                                   std::uint64_t replicates,
                                   const StreamFactory& rng, int workers) {
  if (k == 0) {
    return MCEstimate{f.eval(at), 0.0, replicates};
  }
  if (replicates < 2) {
    throw std::invalid_argument("corrected_functional_mc: need replicates >= 2");
  }
  const std::vector<double> weights = correction_weights(k);
  std::vector<double> values(replicates);
  parallel_for(replicates, workers, [&](std::size_t r) {
    const ChainPath path = sample_chain(at, k, n, kernel, rng.sub(r));
    double combo = 0.0;
    for (int i = 0; i <= k; ++i) {
      combo += weights[static_cast<std::size_t>(i)] *
               f.eval(path.states[static_cast<std::size_t>(i)]);
    }
    values[r] = combo;
  });
  return summarize(values);
}

MCEstimate corrected_estimator(const Functional& f, const Matrix& data, int k,
                               KernelKind kernel, std::uint64_t replicates,
                               const StreamFactory& rng, int workers) {
  const Theta at = estimate_theta(data);
  return corrected_functional_mc(f, at, k, static_cast<int>(data.rows()),
                                 kernel, replicates, rng, workers);
}

Theta superpose_homotopies(const Theta& theta, const std::vector<double>& ts,
                           const std::vector<NoiseBlock>& noises,
                           KernelKind kernel) {
  if (ts.size() != noises.size()) {
    throw std::invalid_argument(
        "superpose_homotopies: ts and noises must have equal length");
  }
  Theta state = theta;
  for (std::size_t j = 0; j < ts.size(); ++j) {
    state = kernel.variant == KernelKind::Variant::exact
                ? homotopy_exact(state, ts[j], noises[j])
                : homotopy_smoothed(state, ts[j], noises[j], kernel.a);
  }
  return state;
}

}  // namespace biasreduce
