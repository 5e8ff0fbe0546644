#ifndef BIASREDUCE_CONFIG_HPP_
#define BIASREDUCE_CONFIG_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "biasreduce/bias_reduction.hpp"
#include "biasreduce/functionals.hpp"
#include "biasreduce/loss.hpp"
#include "biasreduce/model.hpp"

namespace biasreduce {

// Vector parameter that can adapt to the model dimension (for sweeps):
//   zero, basis(index), ones(scale), values(explicit list).
struct VecSpec {
  enum class Kind { zero, basis, ones, values };
  Kind kind = Kind::zero;
  int index = 0;
  double scale = 1.0;
  std::vector<double> values;

  Vector materialize(int d) const;
  std::string describe() const;
};

// Symmetric matrix parameter: identity, diagonal(list), values(rows), or
// random_spd(seed, condition) with log-spaced eigenvalues in
// [1/sqrt(condition), sqrt(condition)] and a random orthogonal frame.
struct MatSpec {
  enum class Kind { identity, diagonal, values, random_spd };
  Kind kind = Kind::identity;
  std::vector<double> diagonal;
  std::vector<std::vector<double>> rows;
  std::uint64_t seed = 0;
  double condition = 1.0;

  Matrix materialize(int d) const;
  std::string describe() const;
};

struct FunctionalSpec {
  std::string kind;
  VecSpec u;
  MatSpec b;
  std::string phi;
  std::vector<double> weights;
  std::vector<FunctionalSpec> terms;
  double offset = 0.0;
  std::optional<double> smoothness;

  Functional materialize(int d) const;
};

struct ModelSpec {
  int d = 1;
  int n = 2;
  double a = 1.0;
  VecSpec mu;
  MatSpec sigma;
};

struct EstimatorSpec {
  std::optional<int> k;  // absent: derived from the declared smoothness
  KernelKind::Variant kernel = KernelKind::Variant::exact;
  std::uint64_t inner_replicates = 10000;
  // Draw count for the coupled-corner bias channel reported by sweeps;
  // 0 disables that channel.
  std::uint64_t bias_replicates = 0;
};

struct ExperimentSpec {
  std::uint64_t outer_replicates = 1000;
  std::optional<std::uint64_t> seed;
};

struct SweepSpec {
  std::vector<int> n;
  std::vector<int> d;  // empty: model dimension only
};

struct ExperimentConfig {
  ModelSpec model;
  FunctionalSpec functional;
  EstimatorSpec estimator;
  ExperimentSpec experiment;
  std::vector<LossFunction> losses;
  std::optional<SweepSpec> sweep;

  // Parsing throws ConfigParseError for malformed documents and
  // ConfigValidateError for valid documents with bad content (unknown keys
  // are content errors).
  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig from_json_text(const std::string& text);

  // Semantic validation; in particular the model-block theta must lie in
  // the declared parameter region (rejected, never projected).
  void validate() const;

  Theta build_theta() const;
  Functional build_functional() const;
  KernelKind kernel_kind() const;
  int correction_order() const;
  std::string theta_desc() const;

  ExperimentConfig at_grid_point(int n, int d) const;

  nlohmann::json to_json() const;
  // FNV-1a hash of the canonical serialization; stamped into every report.
  std::uint64_t hash() const;
};

}  // namespace biasreduce

#endif  // BIASREDUCE_CONFIG_HPP_
