#ifndef BIASREDUCE_BIAS_REDUCTION_HPP_
#define BIASREDUCE_BIAS_REDUCTION_HPP_

#include <cstdint>
#include <vector>

#include "biasreduce/functionals.hpp"
#include "biasreduce/model.hpp"
#include "biasreduce/rng.hpp"

namespace biasreduce {

// Bootstrap transition kernel. The exact kernel resamples a dataset from the
// current parameter and re-estimates; the smoothed kernel replaces the
// square root of the covariance with its smoothed compactly-supported
// version, which coincides with the exact kernel whenever the spectrum lies
// in [1/(2a), 2a].
struct KernelKind {
  enum class Variant { exact, smoothed };

  Variant variant = Variant::exact;
  double a = 1.0;  // smoothing scale, used by the smoothed variant

  static KernelKind exact() { return KernelKind{Variant::exact, 1.0}; }
  static KernelKind smoothed(double a);

  const char* name() const {
    return variant == Variant::exact ? "exact" : "smoothed";
  }
};

// One realized bootstrap-chain trajectory theta^(0..k).
struct ChainPath {
  std::vector<Theta> states;  // k+1 entries, states[0] is the start
  KernelKind kernel;
  int n = 0;  // sample size per step
};

// Monte Carlo estimate with its standard error.
struct MCEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t replicates = 0;
};

// Exact coupling homotopy for the mean-and-covariance model:
//   H((mu, sigma); t) = (mu + t sigma^{1/2} zbar,
//                        sigma^{1/2}((1-t) I + t sigma_hat_z) sigma^{1/2}).
// At t = 0 it returns theta itself; at t = 1 it reproduces, up to rounding,
// the sample estimates computed from the dataset mu + sigma^{1/2} Z built
// from the same noise.
Theta homotopy_exact(const Theta& theta, double t, const NoiseBlock& noise);

// Globally smooth homotopy theta + t E(theta) with
//   E(theta) = (g zbar, g (sigma_hat_z - I) g),  g = smooth_sqrt_matrix(sigma, a).
// The covariance part stays PSD up to rounding; an eigenvalue below -1e-10
// raises NumericError rather than being accepted silently.
Theta homotopy_smoothed(const Theta& theta, double t, const NoiseBlock& noise,
                        double a);

// Bootstrap chain: states[j+1] is drawn from the kernel at states[j] with a
// fresh noise block per step (streams keyed by step index). The exact kernel
// may visit singular covariance states; sampling then uses the PSD root.
ChainPath sample_chain(const Theta& theta, int k, int n, KernelKind kernel,
                       const StreamFactory& rng);

// k-th order difference of f along the path:
//   sum_{j=0..k} (-1)^{k-j} C(k,j) f(states[j]).
double chain_difference(const Functional& f, const ChainPath& path, int k);

// Exact binomial coefficient as a double (valid far beyond the k used here).
double binomial_coefficient(int n, int r);

// Weights w_i = (-1)^i C(k+1, i+1) of the bias-corrected functional:
// corrected(theta) = sum_{i=0..k} w_i E f(theta^(i)). Verified once at
// startup against the literal double sum for k <= 12.
std::vector<double> correction_weights(int k);

// Same weights from the literal double sum over operator powers; test and
// verification reference.
std::vector<double> correction_weights_reference(int k);

// Monte Carlo estimate of the k-fold bias operator applied to f at theta,
// using R independent chains (the k-th order difference along each chain).
MCEstimate bias_operator_mc(const Functional& f, const Theta& theta, int k,
                            int n, KernelKind kernel, std::uint64_t replicates,
                            const StreamFactory& rng, int workers = 1);

// Variance-reduced estimate of the same quantity: per draw, k noise blocks
// are shared across all 2^k corners of the homotopy superposition and the
// alternating corner sum is returned. Pathwise cancellation makes this far
// tighter than independent chains when k-fold differences are small.
MCEstimate bias_operator_coupled_mc(const Functional& f, const Theta& theta,
                                    int k, int n, KernelKind kernel,
                                    std::uint64_t replicates,
                                    const StreamFactory& rng, int workers = 1);

// Monte Carlo estimate of the bias-corrected functional at a parameter
// record, from R chains started there; all k+1 terms come from the same
// chains (common random numbers). k = 0 returns f(at) exactly with zero
// standard error.
MCEstimate corrected_functional_mc(const Functional& f, const Theta& at, int k,
                                   int n, KernelKind kernel,
                                   std::uint64_t replicates,
                                   const StreamFactory& rng, int workers = 1);

// The deliverable estimator: the bias-corrected functional evaluated at the
// sample estimates of a dataset.
MCEstimate corrected_estimator(const Functional& f, const Matrix& data, int k,
                               KernelKind kernel, std::uint64_t replicates,
                               const StreamFactory& rng, int workers = 1);

// Nested homotopy superposition G_k: applies one homotopy per (t_j, noise_j)
// pair in order. With all t_j = 1 the output has the law of the k-step
// chain; binary t with l ones has the law of the l-step chain.
Theta superpose_homotopies(const Theta& theta, const std::vector<double>& ts,
                           const std::vector<NoiseBlock>& noises,
                           KernelKind kernel);

}  // namespace biasreduce

#endif  // BIASREDUCE_BIAS_REDUCTION_HPP_
