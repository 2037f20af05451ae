#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "probedesign/chi2.hpp"
#include "probedesign/config.hpp"
#include "probedesign/discrim.hpp"
#include "probedesign/errors.hpp"
#include "probedesign/experiment.hpp"
#include "probedesign/lti_lift.hpp"
#include "probedesign/sdr.hpp"

namespace py = pybind11;
namespace pd = probedesign;

namespace {

// Accepts a JSON string or any object the json module can serialize.
pd::RunConfig config_of(const py::object& cfg) {
  std::string text;
  if (py::isinstance<py::str>(cfg)) {
    text = cfg.cast<std::string>();
  } else {
    text = py::module_::import("json").attr("dumps")(cfg).cast<std::string>();
  }
  return pd::parse_config(pd::json::parse(text));
}

py::dict design_dict(const pd::DesignOutcome& o) {
  const pd::DesignResult& r = o.result;
  py::dict d;
  d["u"] = r.u;
  d["z_achieved"] = r.z_achieved;
  d["v_achieved"] = r.v_achieved;
  d["sdp_optimum"] = r.sdp_optimum;
  d["method"] = r.method;
  d["rho"] = r.rho;
  d["rho_lower_bound"] = r.rho_lower_bound;
  d["approximation_interval"] = r.approximation_interval;
  d["eta_zero_interval"] = r.eta_zero_interval;
  d["samples_used"] = r.samples_used;
  d["rank_after_solve"] = o.relaxed.rank;
  d["rank_after_reduction"] = o.reduced.rank;
  d["rank_trajectory"] = o.reduced.rank_history;
  d["duality_gap"] = o.relaxed.duality_gap;
  std::vector<double> gammas;
  for (const auto& p : o.pairs) gammas.push_back(p.gamma);
  d["pair_gamma"] = gammas;
  return d;
}

}  // namespace

PYBIND11_MODULE(probedesign, m) {
  m.doc() = "Input design for discriminating between candidate LTI models";

  py::register_exception<pd::InvalidParameter>(m, "InvalidParameter", PyExc_ValueError);
  py::register_exception<pd::DimensionMismatch>(m, "DimensionMismatch", PyExc_ValueError);
  py::register_exception<pd::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<pd::SolverError>(m, "SolverError", PyExc_RuntimeError);
  py::register_exception<pd::NoFeasibleSample>(m, "NoFeasibleSample", PyExc_RuntimeError);

  m.def("chi2_critical", &pd::chi2_critical, py::arg("alpha"), py::arg("d"),
        "Upper alpha quantile of the chi-squared distribution with d degrees of freedom.");

  m.def(
      "zoh_second_order",
      [](double zeta, double omega, double dt) {
        const pd::StateSpaceModel s = pd::zoh_discretize(zeta, omega, dt);
        return py::make_tuple(s.A, s.B, s.C, s.D);
      },
      py::arg("zeta"), py::arg("omega"), py::arg("dt"),
      "Zero-order-hold discretization of w^2 / (s^2 + 2 zeta w s + w^2); returns (A, B, C, D).");

  m.def(
      "lift",
      [](const pd::MatrixXd& A, const pd::VectorXd& B, const pd::RowVectorXd& C,
         double D, int T) {
        pd::StateSpaceModel s;
        s.A = A;
        s.B = B;
        s.C = C;
        s.D = D;
        s.x_bar = pd::VectorXd::Zero(A.rows());
        s.Q = pd::MatrixXd::Identity(A.rows(), A.rows());
        const pd::LiftedModel l = pd::build_lifted(s, T);
        py::dict d;
        d["G"] = l.G();
        d["Psi"] = l.Psi();
        d["H"] = l.H();
        return d;
      },
      py::arg("A"), py::arg("B"), py::arg("C"), py::arg("D"), py::arg("T"),
      "Lifted Toeplitz matrices G, Psi and H of a single-input model.");

  m.def(
      "design",
      [](const py::object& cfg) {
        const pd::RunConfig c = config_of(cfg);
        pd::DesignOutcome o;
        {
          py::gil_scoped_release release;
          o = pd::design_input(c.model_set(), c.spec, c.design_options());
        }
        return design_dict(o);
      },
      py::arg("config"), "Design an input from a run configuration (dict or JSON string).");

  m.def(
      "discriminate",
      [](const py::object& cfg, const pd::VectorXd& u, const pd::VectorXd& y) {
        const pd::RunConfig c = config_of(cfg);
        const pd::ModelSet set = c.model_set();
        const pd::DiscriminationReport r = pd::discriminate(set, u, y);
        py::dict d;
        d["sigma_hat_sq"] = r.sigma_hat_sq;
        d["thresholds"] = r.thresholds;
        d["candidates"] = r.candidates;
        d["selected"] = r.selected;
        return d;
      },
      py::arg("config"), py::arg("u"), py::arg("y"),
      "Per-model sigma_hat^2, the selected model and the candidate set for data (u, y).");

  m.def(
      "simulate",
      [](const py::object& cfg, const pd::VectorXd& u, int n_runs, std::uint64_t seed,
         int threads) {
        const pd::RunConfig c = config_of(cfg);
        const pd::Scenario sc{c.model_set(), c.experiment.true_model,
                              c.experiment.sigma_true, u, n_runs, seed, threads};
        pd::EmpiricalReport r;
        {
          py::gil_scoped_release release;
          r = pd::run_scenario(sc);
        }
        py::dict d;
        d["selection_accuracy"] = r.selection_accuracy();
        d["selection_counts"] = r.selection_counts;
        d["candidate_frequencies"] = r.candidate_frequencies;
        d["unique_true_frequency"] = r.unique_true_frequency;
        d["winners"] = r.winners;
        d["sigma_hat_samples"] = r.sigma_hat_samples;
        return d;
      },
      py::arg("config"), py::arg("u"), py::arg("n_runs") = 1000, py::arg("seed") = 0,
      py::arg("threads") = 1, "Monte Carlo evaluation of an input on the configured true model.");

  m.def(
      "wind_turbine_design",
      [](int T) {
        const pd::WindTurbineSetup wt = pd::wind_turbine_scenario(T);
        pd::DesignOutcome o;
        {
          py::gil_scoped_release release;
          o = pd::design_input(wt.models, wt.spec);
        }
        py::dict d = design_dict(o);
        d["step_input"] = pd::step_input(pd::kWindTurbineRmsBound, T);
        return d;
      },
      py::arg("T") = 100, "Designed input of the pitch-actuator case study and its step baseline.");
}
