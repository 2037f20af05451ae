#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "probedesign/discrim.hpp"
#include "probedesign/experiment.hpp"
#include "probedesign/lti_lift.hpp"
#include "probedesign/quadprog.hpp"
#include "probedesign/sdr.hpp"

namespace probedesign {

using nlohmann::json;

struct SolverConfig {
  double tol = 1e-9;
  int n_samples = 1000;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct ExperimentConfig {
  int n_runs = 1000;
  double sigma_true = 1.0;
  std::size_t true_model = 0;
};

/// Everything a CLI run needs. Parsing rejects unknown keys.
struct RunConfig {
  std::vector<StateSpaceModel> models;
  DesignSpec spec;
  double alpha = 0.05;
  double sigma_bar = 1.0;
  SolverConfig solver;
  ExperimentConfig experiment;
  std::string output_dir = ".";

  ModelSet model_set() const;
  DesignOptions design_options() const;
};

/// Throws ConfigError with a path-qualified message on schema violations.
RunConfig parse_config(const json& doc);
RunConfig load_config(const std::string& path);
StateSpaceModel parse_model(const json& doc, const std::string& where);

json to_json(const DesignResult& r);
json sdp_diagnostics(const DesignOutcome& outcome);
json to_json(const DiscriminationReport& r,
             const std::vector<std::string>& labels);
json summary_json(const EmpiricalReport& r,
                  const std::vector<std::string>& labels);

/// One value per line, no header.
VectorXd read_signal_csv(const std::string& path);
void write_signal_csv(const VectorXd& x, const std::string& path);
void write_json(const json& doc, const std::string& path);

}  // namespace probedesign
