#include "biasreduce/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "biasreduce/errors.hpp"

namespace biasreduce {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw ConfigValidateError(where + ": " + what);
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) bad(where, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : obj.items()) {
    if (ok.find(item.key()) == ok.end()) {
      bad(where, "unknown key \"" + item.key() + "\"");
    }
  }
}

const json& require(const json& obj, const std::string& where,
                    const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) bad(where, std::string("missing key \"") + key + "\"");
  return *it;
}

double get_number(const json& v, const std::string& where) {
  if (!v.is_number()) bad(where, "expected a number");
  return v.get<double>();
}

int get_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) bad(where, "expected an integer");
  return v.get<int>();
}

std::uint64_t get_u64(const json& v, const std::string& where) {
  if (!v.is_number_unsigned() && !v.is_number_integer()) {
    bad(where, "expected a nonnegative integer");
  }
  if (v.is_number_integer() && v.get<std::int64_t>() < 0) {
    bad(where, "expected a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

std::string get_string(const json& v, const std::string& where) {
  if (!v.is_string()) bad(where, "expected a string");
  return v.get<std::string>();
}

std::vector<double> get_double_list(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) bad(where, "expected a nonempty array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& item : v) out.push_back(get_number(item, where));
  return out;
}

VecSpec parse_vec(const json& v, const std::string& where) {
  VecSpec spec;
  check_keys(v, where, {"kind", "index", "value", "values", "scale"});
  const std::string kind = get_string(require(v, where, "kind"), where);
  if (kind == "zero") {
    spec.kind = VecSpec::Kind::zero;
  } else if (kind == "basis") {
    spec.kind = VecSpec::Kind::basis;
    if (v.contains("index")) spec.index = get_int(v["index"], where);
    if (v.contains("scale")) spec.scale = get_number(v["scale"], where);
  } else if (kind == "constant") {
    spec.kind = VecSpec::Kind::ones;
    spec.scale = get_number(require(v, where, "value"), where);
  } else if (kind == "values") {
    spec.kind = VecSpec::Kind::values;
    spec.values = get_double_list(require(v, where, "values"), where);
  } else {
    bad(where, "unknown kind \"" + kind + "\"");
  }
  return spec;
}

MatSpec parse_mat(const json& v, const std::string& where) {
  MatSpec spec;
  check_keys(v, where, {"kind", "values", "rows", "seed", "condition"});
  const std::string kind = get_string(require(v, where, "kind"), where);
  if (kind == "identity") {
    spec.kind = MatSpec::Kind::identity;
  } else if (kind == "diagonal") {
    spec.kind = MatSpec::Kind::diagonal;
    spec.diagonal = get_double_list(require(v, where, "values"), where);
  } else if (kind == "values") {
    spec.kind = MatSpec::Kind::values;
    const json& rows = require(v, where, "rows");
    if (!rows.is_array() || rows.empty()) bad(where, "rows must be a nonempty array");
    for (const auto& row : rows) {
      spec.rows.push_back(get_double_list(row, where));
    }
  } else if (kind == "random_spd") {
    spec.kind = MatSpec::Kind::random_spd;
    spec.seed = get_u64(require(v, where, "seed"), where);
    spec.condition = get_number(require(v, where, "condition"), where);
    if (!(spec.condition >= 1.0)) bad(where, "condition must be >= 1");
  } else {
    bad(where, "unknown kind \"" + kind + "\"");
  }
  return spec;
}

FunctionalSpec parse_functional(const json& v, const std::string& where) {
  FunctionalSpec spec;
  check_keys(v, where,
             {"kind", "u", "b", "phi", "weights", "terms", "offset",
              "smoothness"});
  spec.kind = get_string(require(v, where, "kind"), where);
  if (spec.kind == "linear_mean") {
    spec.u = v.contains("u") ? parse_vec(v["u"], where + ".u")
                             : VecSpec{VecSpec::Kind::basis, 0, 1.0, {}};
  } else if (spec.kind == "quadratic_mean") {
    // no parameters
  } else if (spec.kind == "trace_linear" || spec.kind == "trace_quadratic") {
    if (v.contains("b")) spec.b = parse_mat(v["b"], where + ".b");
  } else if (spec.kind == "spectral_trace") {
    spec.phi = get_string(require(v, where, "phi"), where);
    if (v.contains("b")) spec.b = parse_mat(v["b"], where + ".b");
  } else if (spec.kind == "affine_combination") {
    spec.weights = get_double_list(require(v, where, "weights"), where);
    const json& terms = require(v, where, "terms");
    if (!terms.is_array() || terms.empty()) bad(where, "terms must be nonempty");
    int idx = 0;
    for (const auto& term : terms) {
      spec.terms.push_back(parse_functional(
          term, where + ".terms[" + std::to_string(idx++) + "]"));
    }
    if (v.contains("offset")) spec.offset = get_number(v["offset"], where);
  } else {
    bad(where, "unknown functional kind \"" + spec.kind + "\"");
  }
  if (v.contains("smoothness")) {
    spec.smoothness = get_number(v["smoothness"], where);
  }
  return spec;
}

LossFunction parse_loss(const json& v, const std::string& where) {
  check_keys(v, where, {"kind", "p"});
  const std::string kind = get_string(require(v, where, "kind"), where);
  if (kind == "power") {
    return LossFunction::power(get_number(require(v, where, "p"), where));
  }
  if (kind == "psi1") return LossFunction::psi1();
  if (kind == "psi2") return LossFunction::psi2();
  bad(where, "unknown loss kind \"" + kind + "\"");
}

json vec_to_json(const VecSpec& spec) {
  json v;
  switch (spec.kind) {
    case VecSpec::Kind::zero:
      v["kind"] = "zero";
      break;
    case VecSpec::Kind::basis:
      v["kind"] = "basis";
      v["index"] = spec.index;
      v["scale"] = spec.scale;
      break;
    case VecSpec::Kind::ones:
      v["kind"] = "constant";
      v["value"] = spec.scale;
      break;
    case VecSpec::Kind::values:
      v["kind"] = "values";
      v["values"] = spec.values;
      break;
  }
  return v;
}

json mat_to_json(const MatSpec& spec) {
  json v;
  switch (spec.kind) {
    case MatSpec::Kind::identity:
      v["kind"] = "identity";
      break;
    case MatSpec::Kind::diagonal:
      v["kind"] = "diagonal";
      v["values"] = spec.diagonal;
      break;
    case MatSpec::Kind::values:
      v["kind"] = "values";
      v["rows"] = spec.rows;
      break;
    case MatSpec::Kind::random_spd:
      v["kind"] = "random_spd";
      v["seed"] = spec.seed;
      v["condition"] = spec.condition;
      break;
  }
  return v;
}

json functional_to_json(const FunctionalSpec& spec) {
  json v;
  v["kind"] = spec.kind;
  if (spec.kind == "linear_mean") v["u"] = vec_to_json(spec.u);
  if (spec.kind == "trace_linear" || spec.kind == "trace_quadratic" ||
      spec.kind == "spectral_trace") {
    v["b"] = mat_to_json(spec.b);
  }
  if (spec.kind == "spectral_trace") v["phi"] = spec.phi;
  if (spec.kind == "affine_combination") {
    v["weights"] = spec.weights;
    v["offset"] = spec.offset;
    json terms = json::array();
    for (const auto& term : spec.terms) terms.push_back(functional_to_json(term));
    v["terms"] = terms;
  }
  if (spec.smoothness) v["smoothness"] = *spec.smoothness;
  return v;
}

}  // namespace

Vector VecSpec::materialize(int d) const {
  switch (kind) {
    case Kind::zero:
      return Vector::Zero(d);
    case Kind::basis: {
      if (index < 0 || index >= d) {
        bad("vector spec", "basis index out of range for d=" + std::to_string(d));
      }
      Vector v = Vector::Zero(d);
      v(index) = scale;
      return v;
    }
    case Kind::ones:
      return Vector::Constant(d, scale);
    case Kind::values: {
      if (static_cast<int>(values.size()) != d) {
        bad("vector spec", "explicit vector has length " +
                               std::to_string(values.size()) + ", expected " +
                               std::to_string(d));
      }
      return Eigen::Map<const Vector>(values.data(),
                                      static_cast<Eigen::Index>(values.size()));
    }
  }
  throw std::logic_error("VecSpec: unreachable");
}

std::string VecSpec::describe() const {
  switch (kind) {
    case Kind::zero:
      return "zero";
    case Kind::basis:
      return "basis" + std::to_string(index);
    case Kind::ones: {
      std::ostringstream oss;
      oss << "constant(" << scale << ")";
      return oss.str();
    }
    case Kind::values:
      return "explicit";
  }
  return "?";
}

Matrix MatSpec::materialize(int d) const {
  switch (kind) {
    case Kind::identity:
      return Matrix::Identity(d, d);
    case Kind::diagonal: {
      if (static_cast<int>(diagonal.size()) != d) {
        bad("matrix spec", "diagonal has length " +
                               std::to_string(diagonal.size()) + ", expected " +
                               std::to_string(d));
      }
      Matrix m = Matrix::Zero(d, d);
      for (int i = 0; i < d; ++i) m(i, i) = diagonal[static_cast<std::size_t>(i)];
      return m;
    }
    case Kind::values: {
      if (static_cast<int>(rows.size()) != d) {
        bad("matrix spec", "row count mismatch");
      }
      Matrix m(d, d);
      for (int i = 0; i < d; ++i) {
        if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != d) {
          bad("matrix spec", "column count mismatch");
        }
        for (int j = 0; j < d; ++j) {
          m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
      }
      if (asymmetry(m) > 1e-12 * (1.0 + m.cwiseAbs().maxCoeff())) {
        bad("matrix spec", "explicit matrix is not symmetric");
      }
      return symmetrize(m);
    }
    case Kind::random_spd: {
      if (d == 1) return Matrix::Identity(1, 1);
      RngStream rng(derive_key(seed, 0x5bd));
      Matrix g(d, d);
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
      }
      Eigen::HouseholderQR<Matrix> qr(g);
      Matrix q = qr.householderQ();
      const double hi = std::sqrt(condition);
      Vector lambda(d);
      for (int i = 0; i < d; ++i) {
        const double frac = static_cast<double>(i) / static_cast<double>(d - 1);
        lambda(i) = hi * std::pow(1.0 / condition, frac);
      }
      return symmetrize(q * lambda.asDiagonal() * q.transpose());
    }
  }
  throw std::logic_error("MatSpec: unreachable");
}

std::string MatSpec::describe() const {
  switch (kind) {
    case Kind::identity:
      return "identity";
    case Kind::diagonal:
      return "diagonal";
    case Kind::values:
      return "explicit";
    case Kind::random_spd: {
      std::ostringstream oss;
      oss << "random_spd(seed=" << seed << ",cond=" << condition << ")";
      return oss.str();
    }
  }
  return "?";
}

Functional FunctionalSpec::materialize(int d) const {
  Functional f = [&] {
    if (kind == "linear_mean") return Functional::linear_mean(u.materialize(d));
    if (kind == "quadratic_mean") return Functional::quadratic_mean(d);
    if (kind == "trace_linear") return Functional::trace_linear(b.materialize(d));
    if (kind == "trace_quadratic")
      return Functional::trace_quadratic(b.materialize(d));
    if (kind == "spectral_trace") {
      return Functional::spectral_trace(ScalarFunction::named(phi),
                                        b.materialize(d));
    }
    if (kind == "affine_combination") {
      std::vector<Functional> parts;
      parts.reserve(terms.size());
      for (const auto& term : terms) parts.push_back(term.materialize(d));
      return Functional::affine_combination(weights, std::move(parts), offset);
    }
    throw ConfigValidateError("functional: unknown kind \"" + kind + "\"");
  }();
  if (smoothness) f.set_smoothness(*smoothness);
  return f;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigParseError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str());
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigParseError(std::string("config is not valid JSON: ") + e.what());
  }

  ExperimentConfig cfg;
  check_keys(doc, "config",
             {"model", "functional", "estimator", "experiment", "losses",
              "sweep"});

  const json& model = require(doc, "config", "model");
  check_keys(model, "model", {"d", "n", "a", "mu", "sigma"});
  cfg.model.d = get_int(require(model, "model", "d"), "model.d");
  cfg.model.n = get_int(require(model, "model", "n"), "model.n");
  cfg.model.a = get_number(require(model, "model", "a"), "model.a");
  if (model.contains("mu")) cfg.model.mu = parse_vec(model["mu"], "model.mu");
  if (model.contains("sigma")) {
    cfg.model.sigma = parse_mat(model["sigma"], "model.sigma");
  }

  cfg.functional =
      parse_functional(require(doc, "config", "functional"), "functional");

  const json& est = require(doc, "config", "estimator");
  check_keys(est, "estimator",
             {"k", "kernel", "inner_replicates", "bias_replicates"});
  if (est.contains("k")) {
    const json& k = est["k"];
    if (k.is_string()) {
      if (k.get<std::string>() != "auto") bad("estimator.k", "expected int or \"auto\"");
    } else {
      cfg.estimator.k = get_int(k, "estimator.k");
    }
  }
  if (est.contains("kernel")) {
    const std::string kernel = get_string(est["kernel"], "estimator.kernel");
    if (kernel == "exact") {
      cfg.estimator.kernel = KernelKind::Variant::exact;
    } else if (kernel == "smoothed") {
      cfg.estimator.kernel = KernelKind::Variant::smoothed;
    } else {
      bad("estimator.kernel", "expected \"exact\" or \"smoothed\"");
    }
  }
  if (est.contains("inner_replicates")) {
    cfg.estimator.inner_replicates =
        get_u64(est["inner_replicates"], "estimator.inner_replicates");
  }
  if (est.contains("bias_replicates")) {
    cfg.estimator.bias_replicates =
        get_u64(est["bias_replicates"], "estimator.bias_replicates");
  }

  const json& exp = require(doc, "config", "experiment");
  check_keys(exp, "experiment", {"replicates", "seed"});
  cfg.experiment.outer_replicates =
      get_u64(require(exp, "experiment", "replicates"), "experiment.replicates");
  if (exp.contains("seed")) {
    cfg.experiment.seed = get_u64(exp["seed"], "experiment.seed");
  }

  if (doc.contains("losses")) {
    const json& losses = doc["losses"];
    if (!losses.is_array()) bad("losses", "expected an array");
    int idx = 0;
    for (const auto& loss : losses) {
      cfg.losses.push_back(
          parse_loss(loss, "losses[" + std::to_string(idx++) + "]"));
    }
  } else {
    cfg.losses.push_back(LossFunction::power(2.0));
  }

  if (doc.contains("sweep")) {
    const json& sweep = doc["sweep"];
    check_keys(sweep, "sweep", {"n", "d"});
    SweepSpec spec;
    for (const auto& n : require(sweep, "sweep", "n")) {
      spec.n.push_back(get_int(n, "sweep.n"));
    }
    if (sweep.contains("d")) {
      for (const auto& d : sweep["d"]) spec.d.push_back(get_int(d, "sweep.d"));
    }
    cfg.sweep = std::move(spec);
  }

  cfg.validate();
  return cfg;
}

void ExperimentConfig::validate() const {
  if (model.d < 1) bad("model.d", "must be >= 1");
  if (model.n < 2) bad("model.n", "must be >= 2");
  if (!(model.a >= 1.0)) bad("model.a", "must be >= 1");
  if (estimator.k && *estimator.k < 0) bad("estimator.k", "must be >= 0");
  if (estimator.inner_replicates < 1) {
    bad("estimator.inner_replicates", "must be >= 1");
  }
  if (experiment.outer_replicates < 2) {
    bad("experiment.replicates", "must be >= 2");
  }

  auto check_point = [&](int n, int d) {
    ExperimentConfig point = at_grid_point(n, d);
    Theta theta = point.build_theta();
    try {
      theta.validate();
    } catch (const std::invalid_argument& e) {
      bad("model", e.what());
    }
    if (!ParamDomain(model.a, d).contains(theta)) {
      bad("model",
          "theta lies outside the declared parameter region (a=" +
              std::to_string(model.a) + ")");
    }
    Functional f = point.build_functional();
    if (f.kind() == Functional::Kind::spectral_trace) {
      // Spectral functionals must be usable over the whole support of the
      // smoothed square root for the configured scale.
      const double lo = 1.0 / (4.0 * model.a);
      const double hi = 4.0 * model.a;
      Theta probe;
      probe.mu = Vector::Zero(d);
      probe.sigma = Matrix::Identity(d, d) * lo;
      f.eval(probe);
      probe.sigma = Matrix::Identity(d, d) * hi;
      f.eval(probe);
    }
  };

  if (sweep) {
    if (sweep->n.empty()) bad("sweep.n", "must be nonempty");
    for (int n : sweep->n) {
      if (n < 2) bad("sweep.n", "all entries must be >= 2");
    }
    const std::vector<int> dims = sweep->d.empty() ? std::vector<int>{model.d}
                                                   : sweep->d;
    for (int d : dims) {
      if (d < 1) bad("sweep.d", "all entries must be >= 1");
      for (int n : sweep->n) check_point(n, d);
    }
  } else {
    check_point(model.n, model.d);
  }
}

Theta ExperimentConfig::build_theta() const {
  Theta theta;
  theta.mu = model.mu.materialize(model.d);
  theta.sigma = model.sigma.materialize(model.d);
  return theta;
}

Functional ExperimentConfig::build_functional() const {
  return functional.materialize(model.d);
}

KernelKind ExperimentConfig::kernel_kind() const {
  return estimator.kernel == KernelKind::Variant::exact
             ? KernelKind::exact()
             : KernelKind::smoothed(model.a);
}

int ExperimentConfig::correction_order() const {
  if (estimator.k) return *estimator.k;
  return build_functional().default_correction_order();
}

std::string ExperimentConfig::theta_desc() const {
  return "mu=" + model.mu.describe() + ";sigma=" + model.sigma.describe();
}

ExperimentConfig ExperimentConfig::at_grid_point(int n, int d) const {
  ExperimentConfig point = *this;
  point.model.n = n;
  point.model.d = d;
  point.sweep.reset();
  return point;
}

json ExperimentConfig::to_json() const {
  json doc;
  doc["model"]["d"] = model.d;
  doc["model"]["n"] = model.n;
  doc["model"]["a"] = model.a;
  doc["model"]["mu"] = vec_to_json(model.mu);
  doc["model"]["sigma"] = mat_to_json(model.sigma);
  doc["functional"] = functional_to_json(functional);
  if (estimator.k) {
    doc["estimator"]["k"] = *estimator.k;
  } else {
    doc["estimator"]["k"] = "auto";
  }
  doc["estimator"]["kernel"] =
      estimator.kernel == KernelKind::Variant::exact ? "exact" : "smoothed";
  doc["estimator"]["inner_replicates"] = estimator.inner_replicates;
  doc["estimator"]["bias_replicates"] = estimator.bias_replicates;
  doc["experiment"]["replicates"] = experiment.outer_replicates;
  if (experiment.seed) doc["experiment"]["seed"] = *experiment.seed;
  json losses_json = json::array();
  for (const auto& loss : losses) {
    json entry;
    if (loss.kind == LossFunction::Kind::power) {
      entry["kind"] = "power";
      entry["p"] = loss.p;
    } else {
      entry["kind"] = loss.kind == LossFunction::Kind::psi1 ? "psi1" : "psi2";
    }
    losses_json.push_back(entry);
  }
  doc["losses"] = losses_json;
  if (sweep) {
    doc["sweep"]["n"] = sweep->n;
    if (!sweep->d.empty()) doc["sweep"]["d"] = sweep->d;
  }
  return doc;
}

std::uint64_t ExperimentConfig::hash() const {
  const std::string text = to_json().dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace biasreduce
