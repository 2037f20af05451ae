#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "probedesign/lti_lift.hpp"
#include "probedesign/quadprog.hpp"

namespace probedesign {

/// Repeated-experiment setup: apply `input` to `true_model` with
/// v, s ~ N(0, sigma_true^2 I) and run the discriminator on each record.
struct Scenario {
  ModelSet model_set;
  std::size_t true_model = 0;
  double sigma_true = 1.0;
  VectorXd input;
  int n_runs = 1000;
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;
};

struct Histogram {
  double lo = 0.0;
  double width = 1.0;
  std::vector<std::size_t> counts;
  std::vector<double> density;  // counts / (n width)

  double edge(std::size_t i) const { return lo + width * static_cast<double>(i); }
};

/// Freedman-Diaconis binning; falls back to Sturges' rule when the
/// interquartile range is zero.
Histogram freedman_diaconis(const std::vector<double>& values);

struct EmpiricalReport {
  // sigma_hat_samples[n][run] = sigma_hat_n^2 for that run.
  std::vector<std::vector<double>> sigma_hat_samples;
  std::vector<std::size_t> winners;
  std::vector<std::size_t> selection_counts;
  std::vector<double> candidate_frequencies;
  // Fraction of runs whose candidate set is exactly {true_model}.
  double unique_true_frequency = 0.0;
  std::vector<Histogram> histograms;
  std::size_t true_model = 0;
  int n_runs = 0;

  double selection_accuracy() const;
};

EmpiricalReport run_scenario(const Scenario& s);

/// Constant input of the given amplitude.
VectorXd step_input(double amplitude, int T);

// Input bound of the turbine case study, read as a per-sample RMS level: the
// energy budget is |u|^2 <= (1.5^2) T, the energy of a step of height 1.5.
inline constexpr double kWindTurbineRmsBound = 1.5;

struct WindTurbineSetup {
  ModelSet models;
  DesignSpec spec;
};

/// Normal and faulty pitch-actuator models (zeta, omega) = (0.6, 11.11) and
/// (0.45, 5.73) at dt = 0.01, x_bar = [0.5, 0], Q = I, identity noise,
/// sigma_bar = sqrt(2), alpha = 0.05, traditional worst-case design with an
/// input power budget.
WindTurbineSetup wind_turbine_scenario(int T = 100);

/// One row per run: run, sigma_hat^2 per model, winner.
void write_report_csv(const EmpiricalReport& r,
                      const std::vector<std::string>& labels,
                      const std::string& path);
void write_histogram_csv(const EmpiricalReport& r,
                         const std::vector<std::string>& labels,
                         const std::string& path);
void write_histogram_svg(const EmpiricalReport& r,
                         const std::vector<std::string>& labels,
                         const std::string& title, const std::string& path);

}  // namespace probedesign
