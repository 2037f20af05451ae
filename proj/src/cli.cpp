#include "probedesign/cli.hpp"

#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "probedesign/config.hpp"
#include "probedesign/errors.hpp"
#include "probedesign/rng.hpp"

namespace probedesign {

namespace fs = std::filesystem;

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::optional<int> samples;
  std::optional<double> tol;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool needs_config) {
  auto* c = cmd->add_option("--config", f.config, "JSON run configuration");
  if (needs_config) c->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "output directory (overrides output_dir)");
  cmd->add_option("--seed", f.seed, "master random seed");
  cmd->add_option("--runs", f.runs, "Monte Carlo runs")->check(CLI::PositiveNumber);
  cmd->add_option("--samples", f.samples, "randomization samples")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--tol", f.tol, "relative duality-gap tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--threads", f.threads, "worker threads")
      ->check(CLI::PositiveNumber);
}

void apply_overrides(RunConfig& cfg, const CommonFlags& f) {
  if (!f.out.empty()) cfg.output_dir = f.out;
  if (f.seed) cfg.solver.seed = *f.seed;
  if (f.runs) cfg.experiment.n_runs = *f.runs;
  if (f.samples) cfg.solver.n_samples = *f.samples;
  if (f.tol) cfg.solver.tol = *f.tol;
  if (f.threads) cfg.solver.threads = *f.threads;
}

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
  return fs::path(dir);
}

std::vector<std::string> labels_of(const RunConfig& cfg) {
  std::vector<std::string> out;
  for (const auto& m : cfg.models) out.push_back(m.label);
  return out;
}

int cmd_design(const CommonFlags& f, std::ostream& out) {
  RunConfig cfg = load_config(f.config);
  apply_overrides(cfg, f);
  const ModelSet set = cfg.model_set();
  const DesignOutcome o = design_input(set, cfg.spec, cfg.design_options());
  const fs::path dir = prepare_dir(cfg.output_dir);

  json result = to_json(o.result);
  result["direction"] = to_string(cfg.spec.direction);
  result["z_kind"] = to_string(cfg.spec.z_kind);
  result["v_kind"] = to_string(cfg.spec.v_kind);
  result["master_seed"] = cfg.solver.seed;
  write_signal_csv(o.result.u, (dir / "u.csv").string());
  write_json(result, (dir / "result.json").string());
  write_json(sdp_diagnostics(o), (dir / "sdp_diagnostics.json").string());
  out << "design: " << o.result.method << " input, Z = " << o.result.z_achieved
      << ", V = " << o.result.v_achieved << ", relaxation = "
      << o.result.sdp_optimum << " -> " << dir.string() << '\n';
  return kExitOk;
}

int cmd_discriminate(const CommonFlags& f, const std::string& u_path,
                     const std::string& y_path, std::ostream& out) {
  RunConfig cfg = load_config(f.config);
  apply_overrides(cfg, f);
  const ModelSet set = cfg.model_set();
  const VectorXd u = read_signal_csv(u_path);
  const VectorXd y = read_signal_csv(y_path);
  if (u.size() != set.horizon() || y.size() != set.horizon()) {
    throw DimensionMismatch("u and y must both have T = " +
                            std::to_string(set.horizon()) + " samples");
  }
  const DiscriminationReport r = discriminate(set, u, y);
  const fs::path dir = prepare_dir(cfg.output_dir);
  write_json(to_json(r, labels_of(cfg)), (dir / "report.json").string());
  out << "discriminate: selected " << cfg.models[r.selected].label << ", "
      << r.candidates.size() << " candidate(s) -> " << dir.string() << '\n';
  return kExitOk;
}

int cmd_simulate(const CommonFlags& f, const std::string& u_path,
                 std::ostream& out) {
  RunConfig cfg = load_config(f.config);
  apply_overrides(cfg, f);
  const ModelSet set = cfg.model_set();
  const VectorXd u = read_signal_csv(u_path);
  if (u.size() != set.horizon()) {
    throw DimensionMismatch("u must have T = " + std::to_string(set.horizon()) +
                            " samples");
  }
  const fs::path dir = prepare_dir(cfg.output_dir);
  const auto labels = labels_of(cfg);
  const LiftedModel& truth = set[cfg.experiment.true_model];

  Philox rng(derive_seed(cfg.solver.seed, "simulate/record"), 0);
  const double s = cfg.experiment.sigma_true;
  const VectorXd v = s * rng.gaussian_vector(truth.ic_dim());
  const VectorXd e = s * rng.gaussian_vector(truth.horizon());
  write_signal_csv(simulate(truth, u, v, e), (dir / "y.csv").string());

  Scenario sc{set,
              cfg.experiment.true_model,
              s,
              u,
              cfg.experiment.n_runs,
              derive_seed(cfg.solver.seed, "simulate/runs"),
              cfg.solver.threads};
  const EmpiricalReport r = run_scenario(sc);
  write_report_csv(r, labels, (dir / "runs.csv").string());
  write_histogram_csv(r, labels, (dir / "histograms.csv").string());
  write_histogram_svg(r, labels, "sigma_hat^2 (true model: " + truth.label() + ")",
                      (dir / "histograms.svg").string());
  write_json(summary_json(r, labels), (dir / "summary.json").string());
  out << "simulate: selection accuracy " << r.selection_accuracy() << " over "
      << r.n_runs << " runs -> " << dir.string() << '\n';
  return kExitOk;
}

int cmd_reproduce(const CommonFlags& f, std::ostream& out) {
  const std::uint64_t seed = f.seed.value_or(0);
  const int runs = f.runs.value_or(1000);
  const fs::path dir = prepare_dir(f.out.empty() ? "windturbine_out" : f.out);

  WindTurbineSetup wt = wind_turbine_scenario(100);
  DesignOptions opt;
  opt.sdp.gap_tol = f.tol.value_or(opt.sdp.gap_tol);
  opt.randomize.n_samples = f.samples.value_or(opt.randomize.n_samples);
  opt.randomize.seed = derive_seed(seed, "randomize");
  opt.randomize.threads = f.threads.value_or(1);
  const DesignOutcome o = design_input(wt.models, wt.spec, opt);
  const VectorXd step = step_input(kWindTurbineRmsBound, wt.spec.T);
  write_signal_csv(o.result.u, (dir / "designed_u.csv").string());
  write_signal_csv(step, (dir / "step_u.csv").string());

  const std::vector<std::string> labels{wt.models[0].label(),
                                        wt.models[1].label()};
  json summary;
  summary["seed"] = seed;
  summary["n_runs"] = runs;
  summary["sigma_true"] = 1.0;
  summary["design"] = to_json(o.result);
  summary["design"].erase("u");
  summary["design"]["rank_after_reduction"] = o.reduced.rank;
  summary["design"]["input_norm"] = o.result.u.norm();
  summary["step_input_norm"] = step.norm();
  const MarginCheck mc = discrimination_margin(o.pairs.front(), o.result.u);
  summary["design"]["margin"] = {{"lhs_forward", mc.lhs_ab},
                                 {"lhs_backward", mc.lhs_ba},
                                 {"gamma", o.pairs.front().gamma},
                                 {"satisfied", mc.satisfied}};

  const std::pair<const char*, const VectorXd*> inputs[] = {
      {"designed", &o.result.u}, {"step", &step}};
  for (const auto& [name, input] : inputs) {
    for (std::size_t cond = 0; cond < 2; ++cond) {
      const std::string tag = std::string(name) + "_" + labels[cond];
      Scenario sc{wt.models, cond,  1.0, *input, runs,
                  derive_seed(seed, "windturbine/" + tag), opt.randomize.threads};
      const EmpiricalReport r = run_scenario(sc);
      write_report_csv(r, labels, (dir / ("runs_" + tag + ".csv")).string());
      write_histogram_csv(r, labels, (dir / ("hist_" + tag + ".csv")).string());
      write_histogram_svg(r, labels,
                          std::string(name) + " input, " + labels[cond] +
                              " condition",
                          (dir / ("hist_" + tag + ".svg")).string());
      summary["cases"][tag] = summary_json(r, labels);
      out << tag << ": selection accuracy " << r.selection_accuracy() << '\n';
    }
  }
  for (const auto& cond : labels) {
    summary["accuracy_gap"][cond] =
        summary["cases"]["designed_" + cond]["selection_accuracy"].get<double>() -
        summary["cases"]["step_" + cond]["selection_accuracy"].get<double>();
  }
  write_json(summary, (dir / "summary.json").string());
  out << "reproduce-windturbine -> " << dir.string() << '\n';
  return kExitOk;
}

int fail(std::ostream& err, int code, const char* kind, const std::string& why) {
  err << json{{"error", kind}, {"reason", why}}.dump() << '\n';
  return code;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Input design for discriminating between candidate LTI models",
               "probedesign"};
  app.require_subcommand(1);

  CommonFlags design_f, disc_f, sim_f, repro_f;
  std::string u_path, y_path, sim_u_path;

  auto* design = app.add_subcommand("design", "design an input signal");
  add_common(design, design_f, true);
  auto* disc = app.add_subcommand("discriminate",
                                  "select a model for recorded data");
  add_common(disc, disc_f, true);
  disc->add_option("--u", u_path, "input CSV")->required()->check(CLI::ExistingFile);
  disc->add_option("--y", y_path, "output CSV")->required()->check(CLI::ExistingFile);
  auto* sim = app.add_subcommand("simulate",
                                 "Monte Carlo evaluation of an input signal");
  add_common(sim, sim_f, true);
  sim->add_option("--u", sim_u_path, "input CSV")->required()->check(CLI::ExistingFile);
  auto* repro = app.add_subcommand("reproduce-windturbine",
                                   "pitch-actuator fault case study");
  add_common(repro, repro_f, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    return fail(err, kExitConfig, "config", e.what());
  }

  try {
    if (*design) return cmd_design(design_f, out);
    if (*disc) return cmd_discriminate(disc_f, u_path, y_path, out);
    if (*sim) return cmd_simulate(sim_f, sim_u_path, out);
    if (*repro) return cmd_reproduce(repro_f, out);
  } catch (const ConfigError& e) {
    return fail(err, kExitConfig, "config", e.what());
  } catch (const IoError& e) {
    return fail(err, kExitIo, "io", e.what());
  } catch (const SolverError& e) {
    if (e.status() == SolverStatus::kInfeasible) {
      return fail(err, kExitInfeasible, "infeasible", e.what());
    }
    return fail(err, kExitSolver, "solver", std::string(to_string(e.status())) +
                                                ": " + e.what());
  } catch (const NoFeasibleSample& e) {
    return fail(err, kExitSolver, "solver", e.what());
  } catch (const std::invalid_argument& e) {
    return fail(err, kExitConfig, "config", e.what());
  } catch (const std::exception& e) {
    return fail(err, kExitSolver, "solver", e.what());
  }
  return kExitConfig;
}

}  // namespace probedesign
