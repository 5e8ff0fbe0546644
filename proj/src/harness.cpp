#include "biasreduce/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "biasreduce/errors.hpp"
#include "biasreduce/log.hpp"
#include "biasreduce/parallel.hpp"

namespace biasreduce {

using nlohmann::json;

namespace {

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

json double_to_json(double v) {
  if (std::isinf(v)) return json(v > 0 ? "inf" : "-inf");
  if (std::isnan(v)) return json("nan");
  return json(v);
}

double double_from_json(const json& v) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
  }
  return v.get<double>();
}

struct OuterErrors {
  std::vector<double> errors;
  double f_true = 0.0;
  double sigma_f = 0.0;
  double mean_inner_var = 0.0;
};

// Shared outer loop: replicate i draws a dataset from theta and applies the
// corrected estimator, all randomness keyed by (seed, i, lane).
OuterErrors run_outer(const ExperimentConfig& cfg, const StreamFactory& top,
                      int workers) {
  const Theta theta = cfg.build_theta();
  const Functional f = cfg.build_functional();
  const KernelKind kernel = cfg.kernel_kind();
  const int k = cfg.correction_order();
  const int n = cfg.model.n;
  const std::uint64_t inner = cfg.estimator.inner_replicates;
  const std::uint64_t outer = cfg.experiment.outer_replicates;

  OuterErrors out;
  out.f_true = f.eval(theta);
  out.sigma_f = efficiency_sd(f, theta);
  out.errors.resize(outer);
  std::vector<double> inner_var(outer);
  parallel_for(outer, workers, [&](std::size_t i) {
    const StreamFactory fac = top.sub(i);
    RngStream data_stream = fac.stream(0);
    const Matrix data = sample_dataset(theta, n, data_stream);
    const MCEstimate est =
        corrected_estimator(f, data, k, kernel, inner, fac.sub(1));
    out.errors[i] = est.value - out.f_true;
    inner_var[i] = est.std_error * est.std_error;
  });
  out.mean_inner_var =
      pairwise_sum(inner_var) / static_cast<double>(inner_var.size());
  return out;
}

RiskReport report_from_errors(const ExperimentConfig& cfg,
                              const OuterErrors& run,
                              std::uint64_t master_seed) {
  RiskReport report;
  const Functional f = cfg.build_functional();
  report.functional_id = f.id();
  report.d = cfg.model.d;
  report.n = cfg.model.n;
  report.a = cfg.model.a;
  report.theta_desc = cfg.theta_desc();
  report.kernel = cfg.kernel_kind().name();
  report.k = cfg.correction_order();
  report.inner_replicates = cfg.estimator.inner_replicates;
  report.outer_replicates = cfg.experiment.outer_replicates;
  report.sigma_f_true = run.sigma_f;
  report.master_seed = master_seed;
  report.config_hash = cfg.hash();

  const MeanSe bias = mean_and_se(run.errors);
  report.bias_hat = bias.mean;
  report.bias_se = bias.se;

  std::vector<double> squares(run.errors.size());
  for (std::size_t i = 0; i < run.errors.size(); ++i) {
    squares[i] = run.errors[i] * run.errors[i];
  }
  const MeanSe mse = mean_and_se(squares);
  report.rmse_hat = std::sqrt(mse.mean);
  report.rmse_se =
      report.rmse_hat > 0.0 ? mse.se / (2.0 * report.rmse_hat) : 0.0;

  for (const auto& loss : cfg.losses) {
    report.orlicz.emplace_back(loss.name(), orlicz_norm(run.errors, loss));
  }

  const double outer_var = sample_variance(run.errors);
  if (outer_var > 0.0) {
    const double fraction = run.mean_inner_var / outer_var;
    std::ostringstream oss;
    oss << report.functional_id << " n=" << report.n
        << ": inner-chain noise is " << fraction * 100.0
        << "% of the outer error variance";
    if (fraction > 0.2) {
      oss << "; consider raising estimator.inner_replicates";
    }
    log::info(oss.str());
  }
  return report;
}

}  // namespace

RiskReport evaluate_risk(const ExperimentConfig& cfg, std::uint64_t master_seed,
                         int workers) {
  const auto start = std::chrono::steady_clock::now();
  const StreamFactory top(master_seed);
  const OuterErrors run = run_outer(cfg, top, workers);
  RiskReport report = report_from_errors(cfg, run, master_seed);
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  {
    std::ostringstream oss;
    oss << "risk " << report.functional_id << " d=" << report.d
        << " n=" << report.n << " done in " << report.wall_time_s << " s";
    log::info(oss.str());
  }
  return report;
}

std::pair<RiskReport, std::vector<double>> normality_experiment(
    const ExperimentConfig& cfg, std::uint64_t master_seed, int workers) {
  const auto start = std::chrono::steady_clock::now();
  const StreamFactory top(master_seed);
  const OuterErrors run = run_outer(cfg, top, workers);
  if (run.sigma_f < 1e-8) {
    throw NumericError(
        "normality_experiment: sigma_f is degenerate for this functional");
  }
  std::vector<double> standardized(run.errors.size());
  const double scale = std::sqrt(static_cast<double>(cfg.model.n)) / run.sigma_f;
  for (std::size_t i = 0; i < run.errors.size(); ++i) {
    standardized[i] = scale * run.errors[i];
  }
  RiskReport report = report_from_errors(cfg, run, master_seed);
  report.ks_statistic = ks_against_normal(standardized);
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return {std::move(report), std::move(standardized)};
}

namespace {

SlopeFit fit_log_slope(const std::vector<double>& n_values,
                       const std::vector<double>& values,
                       const std::vector<double>& ses, bool dominated_only) {
  std::vector<double> x, y, y_se;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = std::abs(values[i]);
    if (v <= 0.0) continue;
    if (dominated_only && v < 4.0 * ses[i]) continue;
    x.push_back(std::log(n_values[i]));
    y.push_back(std::log(v));
    y_se.push_back(ses[i] / v);  // delta method for log|v|
  }
  if (x.size() < 2) return SlopeFit{};
  return wls_slope(x, y, y_se);
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& cfg, std::uint64_t master_seed,
                      int workers) {
  if (!cfg.sweep) {
    throw ConfigValidateError("run_sweep: config has no sweep block");
  }
  const std::vector<int> dims =
      cfg.sweep->d.empty() ? std::vector<int>{cfg.model.d} : cfg.sweep->d;
  const StreamFactory top(master_seed);

  SweepResult result;
  std::size_t point_index = 0;
  for (int d : dims) {
    for (int n : cfg.sweep->n) {
      const ExperimentConfig point = cfg.at_grid_point(n, d);
      const StreamFactory fac = top.sub(point_index++);
      const auto start = std::chrono::steady_clock::now();
      const OuterErrors run = run_outer(point, fac, workers);
      RiskReport report = report_from_errors(point, run, master_seed);
      if (point.estimator.bias_replicates > 0) {
        const Theta theta = point.build_theta();
        const Functional f = point.build_functional();
        const int k = point.correction_order();
        // The estimator's bias equals (-1)^k times the (k+1)-fold bias
        // operator at theta; the coupled corners resolve it far below the
        // outer Monte Carlo noise floor.
        const MCEstimate chain = bias_operator_coupled_mc(
            f, theta, k + 1, n, point.kernel_kind(),
            point.estimator.bias_replicates, fac.sub(1u << 20), workers);
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        report.bias_chain = sign * chain.value;
        report.bias_chain_se = chain.std_error;
      }
      report.wall_time_s = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - start)
                               .count();
      {
        std::ostringstream oss;
        oss << "sweep point d=" << d << " n=" << n << " done in "
            << report.wall_time_s << " s";
        log::info(oss.str());
      }
      result.reports.push_back(std::move(report));
    }
  }

  for (int d : dims) {
    SlopeSummary summary;
    summary.d = d;
    std::vector<double> n_values, rmse, rmse_se, bias, bias_se, chain, chain_se;
    for (const auto& report : result.reports) {
      if (report.d != d) continue;
      n_values.push_back(static_cast<double>(report.n));
      rmse.push_back(report.rmse_hat);
      rmse_se.push_back(report.rmse_se);
      bias.push_back(report.bias_hat);
      bias_se.push_back(report.bias_se);
      if (report.bias_chain) {
        chain.push_back(*report.bias_chain);
        chain_se.push_back(*report.bias_chain_se);
      }
    }
    summary.rmse_vs_log_n = fit_log_slope(n_values, rmse, rmse_se, false);
    summary.bias_outer_vs_log_n = fit_log_slope(n_values, bias, bias_se, true);
    if (chain.size() == n_values.size()) {
      summary.bias_chain_vs_log_n =
          fit_log_slope(n_values, chain, chain_se, true);
    }
    result.slopes.push_back(summary);
  }
  return result;
}

std::vector<BiasReport> evaluate_bias_powers(const ExperimentConfig& cfg,
                                             std::uint64_t master_seed,
                                             int workers) {
  const Theta theta = cfg.build_theta();
  const Functional f = cfg.build_functional();
  const KernelKind kernel = cfg.kernel_kind();
  const int k = cfg.correction_order();
  const std::uint64_t R = cfg.estimator.inner_replicates;
  const bool coupled = cfg.estimator.bias_replicates > 0;
  const std::uint64_t chain_reps = coupled ? cfg.estimator.bias_replicates : R;
  const StreamFactory top(master_seed);

  auto base_row = [&](const char* quantity, int order) {
    BiasReport row;
    row.functional_id = f.id();
    row.d = cfg.model.d;
    row.n = cfg.model.n;
    row.a = cfg.model.a;
    row.kernel = kernel.name();
    row.quantity = quantity;
    row.order = order;
    row.estimator = coupled ? "coupled" : "chain";
    row.master_seed = master_seed;
    row.config_hash = cfg.hash();
    return row;
  };

  std::vector<BiasReport> rows;
  for (int j = 0; j <= k; ++j) {
    BiasReport row = base_row("bias_power", j);
    if (j == 0) {
      row.value = f.eval(theta);
      row.std_error = 0.0;
      row.replicates = 0;
      row.estimator = "exact";
    } else {
      const MCEstimate est =
          coupled ? bias_operator_coupled_mc(f, theta, j, cfg.model.n, kernel,
                                             chain_reps, top.sub(j), workers)
                  : bias_operator_mc(f, theta, j, cfg.model.n, kernel,
                                     chain_reps, top.sub(j), workers);
      row.value = est.value;
      row.std_error = est.std_error;
      row.replicates = est.replicates;
    }
    rows.push_back(std::move(row));
  }

  BiasReport corrected = base_row("corrected", k);
  const MCEstimate est = corrected_functional_mc(
      f, theta, k, cfg.model.n, kernel, R, top.sub(1u << 16), workers);
  corrected.estimator = "chain";
  corrected.value = est.value;
  corrected.std_error = est.std_error;
  corrected.replicates = est.replicates;
  rows.push_back(std::move(corrected));
  return rows;
}

json RiskReport::to_json() const {
  json doc;
  doc["functional"] = functional_id;
  doc["d"] = d;
  doc["n"] = n;
  doc["a"] = a;
  doc["theta_desc"] = theta_desc;
  doc["kernel"] = kernel;
  doc["k"] = k;
  doc["inner_replicates"] = inner_replicates;
  doc["outer_replicates"] = outer_replicates;
  doc["bias_hat"] = bias_hat;
  doc["bias_se"] = bias_se;
  doc["rmse_hat"] = rmse_hat;
  doc["rmse_se"] = rmse_se;
  doc["sigma_f_true"] = sigma_f_true;
  doc["ks_statistic"] = ks_statistic ? json(*ks_statistic) : json(nullptr);
  doc["bias_chain"] = bias_chain ? json(*bias_chain) : json(nullptr);
  doc["bias_chain_se"] = bias_chain_se ? json(*bias_chain_se) : json(nullptr);
  json orl = json::object();
  for (const auto& [name, value] : orlicz) orl[name] = double_to_json(value);
  doc["orlicz"] = orl;
  doc["master_seed"] = master_seed;
  doc["config_hash"] = config_hash;
  return doc;
}

RiskReport RiskReport::from_json(const json& doc) {
  RiskReport report;
  report.functional_id = doc.at("functional").get<std::string>();
  report.d = doc.at("d").get<int>();
  report.n = doc.at("n").get<int>();
  report.a = doc.at("a").get<double>();
  report.theta_desc = doc.at("theta_desc").get<std::string>();
  report.kernel = doc.at("kernel").get<std::string>();
  report.k = doc.at("k").get<int>();
  report.inner_replicates = doc.at("inner_replicates").get<std::uint64_t>();
  report.outer_replicates = doc.at("outer_replicates").get<std::uint64_t>();
  report.bias_hat = doc.at("bias_hat").get<double>();
  report.bias_se = doc.at("bias_se").get<double>();
  report.rmse_hat = doc.at("rmse_hat").get<double>();
  report.rmse_se = doc.at("rmse_se").get<double>();
  report.sigma_f_true = doc.at("sigma_f_true").get<double>();
  if (!doc.at("ks_statistic").is_null()) {
    report.ks_statistic = doc.at("ks_statistic").get<double>();
  }
  if (!doc.at("bias_chain").is_null()) {
    report.bias_chain = doc.at("bias_chain").get<double>();
  }
  if (!doc.at("bias_chain_se").is_null()) {
    report.bias_chain_se = doc.at("bias_chain_se").get<double>();
  }
  for (const auto& item : doc.at("orlicz").items()) {
    report.orlicz.emplace_back(item.key(), double_from_json(item.value()));
  }
  report.master_seed = doc.at("master_seed").get<std::uint64_t>();
  report.config_hash = doc.at("config_hash").get<std::uint64_t>();
  return report;
}

bool RiskReport::same_data(const RiskReport& other) const {
  auto opt_eq = [](const std::optional<double>& a,
                   const std::optional<double>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a.has_value() || *a == *b;
  };
  return functional_id == other.functional_id && d == other.d && n == other.n &&
         a == other.a && theta_desc == other.theta_desc &&
         kernel == other.kernel && k == other.k &&
         inner_replicates == other.inner_replicates &&
         outer_replicates == other.outer_replicates &&
         bias_hat == other.bias_hat && bias_se == other.bias_se &&
         rmse_hat == other.rmse_hat && rmse_se == other.rmse_se &&
         sigma_f_true == other.sigma_f_true &&
         opt_eq(ks_statistic, other.ks_statistic) &&
         opt_eq(bias_chain, other.bias_chain) &&
         opt_eq(bias_chain_se, other.bias_chain_se) && orlicz == other.orlicz &&
         master_seed == other.master_seed && config_hash == other.config_hash;
}

json BiasReport::to_json() const {
  json doc;
  doc["functional"] = functional_id;
  doc["d"] = d;
  doc["n"] = n;
  doc["a"] = a;
  doc["kernel"] = kernel;
  doc["quantity"] = quantity;
  doc["order"] = order;
  doc["estimator"] = estimator;
  doc["value"] = value;
  doc["std_error"] = std_error;
  doc["replicates"] = replicates;
  doc["master_seed"] = master_seed;
  doc["config_hash"] = config_hash;
  return doc;
}

namespace {

const char* kRiskHeader =
    "functional,d,n,a,theta_desc,kernel,k,inner_replicates,outer_replicates,"
    "bias_hat,bias_se,rmse_hat,rmse_se,sigma_f_true,ks_statistic,bias_chain,"
    "bias_chain_se";

void write_risk_csv(std::ostream& out, const std::vector<RiskReport>& reports) {
  out << kRiskHeader;
  if (!reports.empty()) {
    for (const auto& [name, value] : reports.front().orlicz) {
      out << ",orlicz_" << name;
    }
  }
  out << ",master_seed,config_hash\n";
  for (const auto& r : reports) {
    out << csv_quote(r.functional_id) << ',' << r.d << ',' << r.n << ','
        << fmt_double(r.a) << ',' << csv_quote(r.theta_desc) << ',' << r.kernel
        << ',' << r.k << ',' << r.inner_replicates << ',' << r.outer_replicates
        << ',' << fmt_double(r.bias_hat) << ',' << fmt_double(r.bias_se) << ','
        << fmt_double(r.rmse_hat) << ',' << fmt_double(r.rmse_se) << ','
        << fmt_double(r.sigma_f_true) << ','
        << (r.ks_statistic ? fmt_double(*r.ks_statistic) : "") << ','
        << (r.bias_chain ? fmt_double(*r.bias_chain) : "") << ','
        << (r.bias_chain_se ? fmt_double(*r.bias_chain_se) : "");
    for (const auto& [name, value] : r.orlicz) {
      out << ',' << fmt_double(value);
    }
    out << ',' << r.master_seed << ',' << r.config_hash << '\n';
  }
}

json slope_to_json(const SlopeSummary& s) {
  auto fit = [](const SlopeFit& f) {
    json v;
    v["slope"] = double_to_json(f.slope);
    v["se"] = double_to_json(f.se);
    v["points"] = f.points;
    return v;
  };
  json doc;
  doc["d"] = s.d;
  doc["rmse_vs_log_n"] = fit(s.rmse_vs_log_n);
  doc["bias_outer_vs_log_n"] = fit(s.bias_outer_vs_log_n);
  doc["bias_chain_vs_log_n"] = fit(s.bias_chain_vs_log_n);
  return doc;
}

}  // namespace

void write_risk_reports(std::ostream& out, const std::vector<RiskReport>& reports,
                        OutputFormat format) {
  if (format == OutputFormat::csv) {
    write_risk_csv(out, reports);
    return;
  }
  json doc = json::array();
  for (const auto& r : reports) doc.push_back(r.to_json());
  out << doc.dump(2) << '\n';
}

void write_sweep_result(std::ostream& out, const SweepResult& result,
                        OutputFormat format) {
  if (format == OutputFormat::csv) {
    // Plot-ready table: one row per grid point; slope fits live in the JSON
    // format and the log.
    write_risk_csv(out, result.reports);
    return;
  }
  json doc;
  json reports = json::array();
  for (const auto& r : result.reports) reports.push_back(r.to_json());
  doc["reports"] = reports;
  json slopes = json::array();
  for (const auto& s : result.slopes) slopes.push_back(slope_to_json(s));
  doc["slopes"] = slopes;
  out << doc.dump(2) << '\n';
}

void write_bias_reports(std::ostream& out, const std::vector<BiasReport>& reports,
                        OutputFormat format) {
  if (format == OutputFormat::csv) {
    out << "functional,d,n,a,kernel,quantity,order,estimator,value,std_error,"
           "replicates,master_seed,config_hash\n";
    for (const auto& r : reports) {
      out << csv_quote(r.functional_id) << ',' << r.d << ',' << r.n << ','
          << fmt_double(r.a) << ',' << r.kernel << ',' << r.quantity << ','
          << r.order << ',' << r.estimator << ',' << fmt_double(r.value) << ','
          << fmt_double(r.std_error) << ',' << r.replicates << ','
          << r.master_seed << ',' << r.config_hash << '\n';
    }
    return;
  }
  json doc = json::array();
  for (const auto& r : reports) doc.push_back(r.to_json());
  out << doc.dump(2) << '\n';
}

void persist_to_path(const std::string& path,
                     const std::function<void(std::ostream&)>& writer) {
  if (path.empty()) {
    writer(std::cout);
    if (!std::cout) throw IoError("failed writing to stdout");
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path);
  writer(out);
  out.flush();
  if (!out) throw IoError("failed writing output file: " + path);
}

}  // namespace biasreduce
