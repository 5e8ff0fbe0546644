#ifndef BIASREDUCE_HARNESS_HPP_
#define BIASREDUCE_HARNESS_HPP_

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "biasreduce/config.hpp"
#include "biasreduce/stats.hpp"

namespace biasreduce {

enum class OutputFormat { csv, json };

// One experiment's risk summary. wall_time_s is diagnostic only and is never
// written into data files (outputs must be byte-identical across reruns;
// timing goes to the log).
struct RiskReport {
  std::string functional_id;
  int d = 0;
  int n = 0;
  double a = 1.0;
  std::string theta_desc;
  std::string kernel;
  int k = 0;
  std::uint64_t inner_replicates = 0;
  std::uint64_t outer_replicates = 0;
  double bias_hat = 0.0;
  double bias_se = 0.0;
  double rmse_hat = 0.0;
  double rmse_se = 0.0;
  double sigma_f_true = 0.0;
  std::optional<double> ks_statistic;
  // Direct estimate of the estimator's bias through the coupled-corner
  // chain identity; filled by sweeps when bias_replicates > 0.
  std::optional<double> bias_chain;
  std::optional<double> bias_chain_se;
  std::vector<std::pair<std::string, double>> orlicz;
  std::uint64_t master_seed = 0;
  std::uint64_t config_hash = 0;
  double wall_time_s = 0.0;

  nlohmann::json to_json() const;
  static RiskReport from_json(const nlohmann::json& doc);
  bool same_data(const RiskReport& other) const;  // persisted fields only
};

// M outer replicates of (draw dataset, run the corrected estimator, record
// the error); deterministic given (config, seed) and independent of the
// worker count.
RiskReport evaluate_risk(const ExperimentConfig& cfg, std::uint64_t master_seed,
                         int workers = 1);

// Standardized-error experiment: sqrt(n) (estimate - truth) / sigma_f(theta)
// over M replicates, with the Kolmogorov-Smirnov statistic of that sample
// against the standard normal. Requires sigma_f >= 1e-8.
std::pair<RiskReport, std::vector<double>> normality_experiment(
    const ExperimentConfig& cfg, std::uint64_t master_seed, int workers = 1);

struct SlopeSummary {
  int d = 0;
  SlopeFit rmse_vs_log_n;
  SlopeFit bias_outer_vs_log_n;   // on points where |bias| >= 4 se
  SlopeFit bias_chain_vs_log_n;   // coupled-corner channel, when present
};

struct SweepResult {
  std::vector<RiskReport> reports;  // one per (d, n) grid point
  std::vector<SlopeSummary> slopes;
};

// One report per grid point plus fitted log-log slopes per dimension.
SweepResult run_sweep(const ExperimentConfig& cfg, std::uint64_t master_seed,
                      int workers = 1);

// Rows produced by direct chain estimates of operator powers (the `bias`
// command): one row per order j plus one row for the corrected functional.
struct BiasReport {
  std::string functional_id;
  int d = 0;
  int n = 0;
  double a = 1.0;
  std::string kernel;
  std::string quantity;  // "bias_power" or "corrected"
  int order = 0;
  std::string estimator;  // "chain" or "coupled"
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t replicates = 0;
  std::uint64_t master_seed = 0;
  std::uint64_t config_hash = 0;

  nlohmann::json to_json() const;
};

std::vector<BiasReport> evaluate_bias_powers(const ExperimentConfig& cfg,
                                             std::uint64_t master_seed,
                                             int workers = 1);

// Serialization. CSV is RFC-4180 style (quoted only where needed, '.'
// decimal separator, fixed column order); JSON is an object per report.
// Optional fields are empty CSV cells / null JSON values.
void write_risk_reports(std::ostream& out, const std::vector<RiskReport>& reports,
                        OutputFormat format);
void write_sweep_result(std::ostream& out, const SweepResult& result,
                        OutputFormat format);
void write_bias_reports(std::ostream& out, const std::vector<BiasReport>& reports,
                        OutputFormat format);

// Writes with IoError (with path context) on failure. Empty path: stdout.
void persist_to_path(const std::string& path,
                     const std::function<void(std::ostream&)>& writer);

}  // namespace biasreduce

#endif  // BIASREDUCE_HARNESS_HPP_
