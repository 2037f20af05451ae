#include "probedesign/config.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "probedesign/errors.hpp"
#include "probedesign/rng.hpp"

namespace probedesign {

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
}

const json& require(const json& obj, const std::string& key,
                    const std::string& where) {
  if (!obj.contains(key)) {
    throw ConfigError(where + ": missing required key '" + key + "'");
  }
  return obj.at(key);
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + ": expected a number");
  return v.get<double>();
}

long long integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return v.get<long long>();
}

std::string text(const json& v, const std::string& where) {
  if (!v.is_string()) throw ConfigError(where + ": expected a string");
  return v.get<std::string>();
}

VectorXd vector_of(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + ": expected an array");
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) =
        number(v[i], where + "[" + std::to_string(i) + "]");
  }
  return out;
}

// Row-major nested array [[...], [...]].
MatrixXd matrix_of(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + ": expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(v.size());
  if (rows == 0) return MatrixXd(0, 0);
  if (!v[0].is_array()) throw ConfigError(where + ": expected an array of rows");
  const auto cols = static_cast<Eigen::Index>(v[0].size());
  MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    const VectorXd row = vector_of(v[static_cast<std::size_t>(i)], w);
    if (row.size() != cols) throw ConfigError(w + ": ragged matrix row");
    out.row(i) = row.transpose();
  }
  return out;
}

NoiseModel parse_noise(const json& doc, const std::string& where) {
  if (doc.contains("impulse_response")) {
    reject_unknown(doc, {"impulse_response"}, where);
    return NoiseModel::from_impulse_response(
        vector_of(doc.at("impulse_response"), where + ".impulse_response"));
  }
  reject_unknown(doc, {"A", "B", "C", "D", "length"}, where);
  const MatrixXd A = matrix_of(require(doc, "A", where), where + ".A");
  const VectorXd B = vector_of(require(doc, "B", where), where + ".B");
  const VectorXd C = vector_of(require(doc, "C", where), where + ".C");
  const double D = doc.contains("D") ? number(doc.at("D"), where + ".D") : 1.0;
  const auto length =
      static_cast<int>(integer(require(doc, "length", where), where + ".length"));
  return NoiseModel::from_state_space(A, B, C.transpose(), D, length);
}

}  // namespace

StateSpaceModel parse_model(const json& doc, const std::string& where) {
  reject_unknown(doc,
                 {"continuous_second_order", "A", "B", "C", "D", "x_bar", "Q",
                  "noise", "label"},
                 where);
  StateSpaceModel m;
  if (doc.contains("continuous_second_order")) {
    for (const char* k : {"A", "B", "C", "D"}) {
      if (doc.contains(k)) {
        throw ConfigError(where + ": give either continuous_second_order or " +
                          "explicit A/B/C/D, not both");
      }
    }
    const json& c = doc.at("continuous_second_order");
    const std::string w = where + ".continuous_second_order";
    reject_unknown(c, {"zeta", "omega", "dt"}, w);
    m = zoh_discretize(number(require(c, "zeta", w), w + ".zeta"),
                       number(require(c, "omega", w), w + ".omega"),
                       number(require(c, "dt", w), w + ".dt"));
  } else {
    m.A = matrix_of(require(doc, "A", where), where + ".A");
    m.B = vector_of(require(doc, "B", where), where + ".B");
    m.C = vector_of(require(doc, "C", where), where + ".C").transpose();
    m.D = doc.contains("D") ? number(doc.at("D"), where + ".D") : 0.0;
    m.x_bar = VectorXd::Zero(m.A.rows());
    m.Q = MatrixXd::Identity(m.A.rows(), m.A.rows());
  }
  if (doc.contains("x_bar")) m.x_bar = vector_of(doc.at("x_bar"), where + ".x_bar");
  if (doc.contains("Q")) m.Q = matrix_of(doc.at("Q"), where + ".Q");
  if (doc.contains("noise")) m.noise = parse_noise(doc.at("noise"), where + ".noise");
  if (doc.contains("label")) m.label = text(doc.at("label"), where + ".label");
  try {
    m.validate();
  } catch (const DimensionMismatch& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return m;
}

RunConfig parse_config(const json& doc) {
  reject_unknown(doc, {"models", "design", "solver", "experiment", "output_dir"},
                 "config");
  RunConfig cfg;
  const json& models = require(doc, "models", "config");
  if (!models.is_array() || models.size() < 2) {
    throw ConfigError("config.models: expected an array of at least 2 models");
  }
  for (std::size_t i = 0; i < models.size(); ++i) {
    cfg.models.push_back(
        parse_model(models[i], "config.models[" + std::to_string(i) + "]"));
    if (cfg.models.back().label.empty()) {
      cfg.models.back().label = "model" + std::to_string(i);
    }
  }

  const json& d = require(doc, "design", "config");
  const std::string w = "config.design";
  reject_unknown(d,
                 {"z", "v", "direction", "u_bar", "y_bar", "weights", "T",
                  "alpha", "sigma_bar"},
                 w);
  try {
    if (d.contains("z")) cfg.spec.z_kind = parse_z_kind(text(d.at("z"), w + ".z"));
    if (d.contains("v")) cfg.spec.v_kind = parse_v_kind(text(d.at("v"), w + ".v"));
    if (d.contains("direction")) {
      cfg.spec.direction =
          parse_direction(text(d.at("direction"), w + ".direction"));
    }
  } catch (const InvalidParameter& e) {
    throw ConfigError(w + ": " + e.what());
  }
  if (d.contains("u_bar")) cfg.spec.u_bar = number(d.at("u_bar"), w + ".u_bar");
  if (d.contains("y_bar")) cfg.spec.y_bar = number(d.at("y_bar"), w + ".y_bar");
  if (d.contains("weights")) {
    const VectorXd wv = vector_of(d.at("weights"), w + ".weights");
    cfg.spec.weights.assign(wv.data(), wv.data() + wv.size());
  }
  cfg.spec.T = static_cast<int>(integer(require(d, "T", w), w + ".T"));
  cfg.sigma_bar = number(require(d, "sigma_bar", w), w + ".sigma_bar");
  if (d.contains("alpha")) cfg.alpha = number(d.at("alpha"), w + ".alpha");
  if (cfg.spec.T < 1) throw ConfigError(w + ".T: must be >= 1");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw ConfigError(w + ".alpha: must lie in (0, 1)");
  }
  if (!(cfg.sigma_bar >= 0.0)) throw ConfigError(w + ".sigma_bar: must be >= 0");
  const std::size_t N = cfg.models.size();
  try {
    cfg.spec.validate(N * (N - 1) / 2);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(w + ": " + e.what());
  }

  if (doc.contains("solver")) {
    const json& s = doc.at("solver");
    const std::string ws = "config.solver";
    reject_unknown(s, {"tol", "n_samples", "seed", "threads"}, ws);
    if (s.contains("tol")) cfg.solver.tol = number(s.at("tol"), ws + ".tol");
    if (s.contains("n_samples")) {
      cfg.solver.n_samples =
          static_cast<int>(integer(s.at("n_samples"), ws + ".n_samples"));
    }
    if (s.contains("seed")) {
      if (!s.at("seed").is_number_unsigned() && !s.at("seed").is_number_integer()) {
        throw ConfigError(ws + ".seed: expected a non-negative integer");
      }
      cfg.solver.seed = s.at("seed").get<std::uint64_t>();
    }
    if (s.contains("threads")) {
      cfg.solver.threads =
          static_cast<int>(integer(s.at("threads"), ws + ".threads"));
    }
    if (!(cfg.solver.tol > 0.0)) throw ConfigError(ws + ".tol: must be positive");
    if (cfg.solver.n_samples < 1) throw ConfigError(ws + ".n_samples: must be >= 1");
    if (cfg.solver.threads < 1) throw ConfigError(ws + ".threads: must be >= 1");
  }

  if (doc.contains("experiment")) {
    const json& e = doc.at("experiment");
    const std::string we = "config.experiment";
    reject_unknown(e, {"n_runs", "sigma_true", "true_model"}, we);
    if (e.contains("n_runs")) {
      cfg.experiment.n_runs = static_cast<int>(integer(e.at("n_runs"), we + ".n_runs"));
    }
    if (e.contains("sigma_true")) {
      cfg.experiment.sigma_true = number(e.at("sigma_true"), we + ".sigma_true");
    }
    if (e.contains("true_model")) {
      const long long t = integer(e.at("true_model"), we + ".true_model");
      if (t < 0 || static_cast<std::size_t>(t) >= N) {
        throw ConfigError(we + ".true_model: index out of range");
      }
      cfg.experiment.true_model = static_cast<std::size_t>(t);
    }
    if (cfg.experiment.n_runs < 1) throw ConfigError(we + ".n_runs: must be >= 1");
    if (!(cfg.experiment.sigma_true >= 0.0)) {
      throw ConfigError(we + ".sigma_true: must be >= 0");
    }
  }

  if (doc.contains("output_dir")) {
    cfg.output_dir = text(doc.at("output_dir"), "config.output_dir");
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read config " + path);
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": invalid JSON: " + e.what());
  }
  return parse_config(doc);
}

ModelSet RunConfig::model_set() const {
  std::vector<LiftedModel> lifted;
  lifted.reserve(models.size());
  for (const auto& m : models) lifted.push_back(build_lifted(m, spec.T));
  return ModelSet(std::move(lifted), sigma_bar, alpha);
}

DesignOptions RunConfig::design_options() const {
  DesignOptions o;
  o.sdp.gap_tol = solver.tol;
  o.randomize.n_samples = solver.n_samples;
  o.randomize.seed = derive_seed(solver.seed, "randomize");
  o.randomize.threads = solver.threads;
  return o;
}

namespace {

json vec_json(const VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

json interval_json(const std::optional<std::pair<double, double>>& iv) {
  if (!iv) return nullptr;
  return json{{"lower", iv->first}, {"upper", iv->second}};
}

}  // namespace

json to_json(const DesignResult& r) {
  return json{{"u", vec_json(r.u)},
              {"z_achieved", r.z_achieved},
              {"v_achieved", r.v_achieved},
              {"sdp_optimum", r.sdp_optimum},
              {"rho", r.rho},
              {"rho_lower_bound", r.rho_lower_bound},
              {"approximation_interval", interval_json(r.approximation_interval)},
              {"eta_zero_interval", interval_json(r.eta_zero_interval)},
              {"samples_used", r.samples_used},
              {"draws", r.draws},
              {"method", r.method},
              {"seed", r.seed}};
}

json sdp_diagnostics(const DesignOutcome& o) {
  const SdpProblem& p = o.assembled.problem;
  return json{
      {"sense", p.minimize() ? "minimize_max" : "maximize_min"},
      {"dimension", p.dim()},
      {"objective_pieces", p.objective.size()},
      {"constraint_pieces", p.constraints.size()},
      {"objective", o.relaxed.objective},
      {"dual_objective", o.relaxed.dual_objective},
      {"duality_gap", o.relaxed.duality_gap},
      {"primal_infeasibility", o.relaxed.primal_infeasibility},
      {"dual_infeasibility", o.relaxed.dual_infeasibility},
      {"iterations", o.relaxed.iterations},
      {"rank_after_solve", o.relaxed.rank},
      {"rank_after_reduction", o.reduced.rank},
      {"reduced_objective", o.reduced.objective},
      {"rank_trajectory", o.reduced.rank_history},
      {"pair_gamma", [&] {
         json g = json::array();
         for (const auto& pr : o.pairs) g.push_back(pr.gamma);
         return g;
       }()}};
}

json to_json(const DiscriminationReport& r,
             const std::vector<std::string>& labels) {
  return json{{"labels", labels},
              {"sigma_hat_sq", r.sigma_hat_sq},
              {"thresholds", r.thresholds},
              {"candidates", r.candidates},
              {"selected", r.selected}};
}

json summary_json(const EmpiricalReport& r,
                  const std::vector<std::string>& labels) {
  json means = json::array();
  for (const auto& s : r.sigma_hat_samples) {
    double m = 0.0;
    for (double v : s) m += v;
    means.push_back(s.empty() ? 0.0 : m / static_cast<double>(s.size()));
  }
  return json{{"labels", labels},
              {"n_runs", r.n_runs},
              {"true_model", r.true_model},
              {"selection_counts", r.selection_counts},
              {"selection_accuracy", r.selection_accuracy()},
              {"candidate_frequencies", r.candidate_frequencies},
              {"unique_true_frequency", r.unique_true_frequency},
              {"mean_sigma_hat_sq", means}};
}

VectorXd read_signal_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read " + path);
  std::vector<double> vals;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    std::istringstream is(line.substr(b));
    is.imbue(std::locale::classic());
    double v;
    if (!(is >> v)) {
      throw IoError(path + ":" + std::to_string(lineno) + ": not a number");
    }
    vals.push_back(v);
  }
  return Eigen::Map<VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

void write_signal_csv(const VectorXd& x, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  f.imbue(std::locale::classic());
  f << std::setprecision(17);
  for (Eigen::Index i = 0; i < x.size(); ++i) f << x(i) << '\n';
}

void write_json(const json& doc, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  f << doc.dump(2) << '\n';
}

}  // namespace probedesign
