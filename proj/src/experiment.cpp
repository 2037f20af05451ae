#include "probedesign/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "probedesign/discrim.hpp"
#include "probedesign/errors.hpp"
#include "probedesign/rng.hpp"

namespace probedesign {

void Scenario::validate() const {
  if (n_runs < 1) throw InvalidParameter("scenario needs n_runs >= 1");
  if (true_model >= model_set.size()) {
    throw InvalidParameter("true_model index out of range");
  }
  if (!(sigma_true >= 0.0)) throw InvalidParameter("sigma_true must be >= 0");
  if (input.size() != model_set.horizon()) {
    throw DimensionMismatch("scenario input length must equal T");
  }
}

double EmpiricalReport::selection_accuracy() const {
  if (n_runs == 0) return 0.0;
  return static_cast<double>(selection_counts[true_model]) / n_runs;
}

namespace {

double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const std::size_t j = std::min(i + 1, v.size() - 1);
  return v[i] + (pos - static_cast<double>(i)) * (v[j] - v[i]);
}

}  // namespace

Histogram freedman_diaconis(const std::vector<double>& values) {
  Histogram h;
  if (values.empty()) return h;
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  const double lo = *mn, hi = *mx;
  const double n = static_cast<double>(values.size());
  const double iqr = quantile(values, 0.75) - quantile(values, 0.25);
  std::size_t bins = 1;
  if (hi > lo) {
    if (iqr > 0.0) {
      const double w = 2.0 * iqr / std::cbrt(n);
      bins = static_cast<std::size_t>(std::ceil((hi - lo) / w));
    } else {
      bins = static_cast<std::size_t>(std::ceil(std::log2(n))) + 1;
    }
    bins = std::clamp<std::size_t>(bins, 1, 1000);
  }
  h.lo = lo;
  h.width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
  h.counts.assign(bins, 0);
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / h.width);
    h.counts[std::min(b, bins - 1)]++;
  }
  h.density.resize(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    h.density[i] = static_cast<double>(h.counts[i]) / (n * h.width);
  }
  return h;
}

EmpiricalReport run_scenario(const Scenario& s) {
  s.validate();
  const ModelSet& set = s.model_set;
  const std::size_t N = set.size();
  const auto runs = static_cast<std::size_t>(s.n_runs);
  const LiftedModel& truth = set[s.true_model];
  const std::uint64_t key = derive_seed(s.seed, "run_scenario");

  EmpiricalReport r;
  r.true_model = s.true_model;
  r.n_runs = s.n_runs;
  r.sigma_hat_samples.assign(N, std::vector<double>(runs, 0.0));
  r.winners.assign(runs, 0);
  std::vector<std::vector<std::size_t>> candidates(runs);

  auto one_run = [&](std::size_t run) {
    Philox rng(key, run);
    const VectorXd v = s.sigma_true * rng.gaussian_vector(truth.ic_dim());
    const VectorXd e = s.sigma_true * rng.gaussian_vector(truth.horizon());
    const VectorXd y = simulate(truth, s.input, v, e);
    const std::vector<double> sh = sigma_hat_squared(set, s.input, y);
    for (std::size_t n = 0; n < N; ++n) r.sigma_hat_samples[n][run] = sh[n];
    r.winners[run] = select_model(sh);
    candidates[run] = candidate_set(set, sh);
  };

  const int threads = std::max(1, s.threads);
  if (threads == 1) {
    for (std::size_t run = 0; run < runs; ++run) one_run(run);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t run = static_cast<std::size_t>(t); run < runs;
             run += static_cast<std::size_t>(threads)) {
          one_run(run);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  r.selection_counts.assign(N, 0);
  r.candidate_frequencies.assign(N, 0.0);
  std::size_t unique = 0;
  for (std::size_t run = 0; run < runs; ++run) {
    r.selection_counts[r.winners[run]]++;
    for (std::size_t n : candidates[run]) r.candidate_frequencies[n] += 1.0;
    if (candidates[run].size() == 1 && candidates[run][0] == s.true_model) {
      ++unique;
    }
  }
  for (auto& f : r.candidate_frequencies) f /= static_cast<double>(runs);
  r.unique_true_frequency =
      static_cast<double>(unique) / static_cast<double>(runs);
  for (std::size_t n = 0; n < N; ++n) {
    r.histograms.push_back(freedman_diaconis(r.sigma_hat_samples[n]));
  }
  return r;
}

VectorXd step_input(double amplitude, int T) {
  if (T < 1) throw InvalidParameter("step_input: T must be >= 1");
  return VectorXd::Constant(T, amplitude);
}

WindTurbineSetup wind_turbine_scenario(int T) {
  const double dt = 0.01;
  StateSpaceModel normal = zoh_discretize(0.6, 11.11, dt);
  StateSpaceModel faulty = zoh_discretize(0.45, 5.73, dt);
  for (auto* m : {&normal, &faulty}) {
    m->x_bar = VectorXd(2);
    m->x_bar << 0.5, 0.0;
    m->Q = MatrixXd::Identity(2, 2);
  }
  normal.label = "normal";
  faulty.label = "faulty";

  std::vector<LiftedModel> lifted{build_lifted(normal, T),
                                  build_lifted(faulty, T)};
  DesignSpec spec;
  spec.z_kind = ZKind::kInputPower;
  spec.v_kind = VKind::kWorstCase;
  spec.direction = Direction::kTraditional;
  spec.u_bar = kWindTurbineRmsBound * std::sqrt(static_cast<double>(T));
  spec.y_bar = 1.0;
  spec.T = T;
  return WindTurbineSetup{ModelSet(std::move(lifted), std::sqrt(2.0), 0.05),
                          spec};
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  f << std::setprecision(17);
  return f;
}

std::string label_of(const std::vector<std::string>& labels, std::size_t n) {
  if (n < labels.size() && !labels[n].empty()) return labels[n];
  return "model" + std::to_string(n);
}

}  // namespace

void write_report_csv(const EmpiricalReport& r,
                      const std::vector<std::string>& labels,
                      const std::string& path) {
  std::ofstream f = open_out(path);
  const std::size_t N = r.sigma_hat_samples.size();
  f << "run";
  for (std::size_t n = 0; n < N; ++n) f << ",sigma_hat_sq_" << label_of(labels, n);
  f << ",winner\n";
  for (std::size_t run = 0; run < r.winners.size(); ++run) {
    f << run;
    for (std::size_t n = 0; n < N; ++n) f << ',' << r.sigma_hat_samples[n][run];
    f << ',' << r.winners[run] << '\n';
  }
}

void write_histogram_csv(const EmpiricalReport& r,
                         const std::vector<std::string>& labels,
                         const std::string& path) {
  std::ofstream f = open_out(path);
  f << "model,bin_lo,bin_hi,count,density\n";
  for (std::size_t n = 0; n < r.histograms.size(); ++n) {
    const Histogram& h = r.histograms[n];
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      f << label_of(labels, n) << ',' << h.edge(i) << ',' << h.edge(i + 1)
        << ',' << h.counts[i] << ',' << h.density[i] << '\n';
    }
  }
}

void write_histogram_svg(const EmpiricalReport& r,
                         const std::vector<std::string>& labels,
                         const std::string& title, const std::string& path) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b"};
  const double W = 640, H = 400, ml = 60, mr = 20, mt = 40, mb = 50;
  double xlo = 1e300, xhi = -1e300, ymax = 0.0;
  for (const auto& h : r.histograms) {
    if (h.counts.empty()) continue;
    xlo = std::min(xlo, h.lo);
    xhi = std::max(xhi, h.edge(h.counts.size()));
    for (double d : h.density) ymax = std::max(ymax, d);
  }
  if (!(xhi > xlo)) {
    xlo -= 0.5;
    xhi = xlo + 1.0;
  }
  if (!(ymax > 0.0)) ymax = 1.0;
  auto X = [&](double x) { return ml + (x - xlo) / (xhi - xlo) * (W - ml - mr); };
  auto Y = [&](double y) { return H - mb - y / ymax * (H - mt - mb); };

  std::ofstream f = open_out(path);
  f << std::setprecision(6);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
    << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  f << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\">" << title
    << "</text>\n";
  f << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr
    << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
  f << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
    << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = xlo + (xhi - xlo) * k / 4.0;
    f << "<text x=\"" << X(xv) << "\" y=\"" << H - mb + 16
      << "\" text-anchor=\"middle\">" << xv << "</text>\n";
    const double yv = ymax * k / 4.0;
    f << "<text x=\"" << ml - 6 << "\" y=\"" << Y(yv) + 4
      << "\" text-anchor=\"end\">" << yv << "</text>\n";
  }
  f << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12
    << "\" text-anchor=\"middle\">sigma_hat^2</text>\n";
  for (std::size_t n = 0; n < r.histograms.size(); ++n) {
    const Histogram& h = r.histograms[n];
    if (h.counts.empty()) continue;
    const char* color = kColors[n % 6];
    f << "<polyline fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"1.5\" points=\"";
    f << X(h.lo) << ',' << Y(0) << ' ';
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      f << X(h.edge(i)) << ',' << Y(h.density[i]) << ' ' << X(h.edge(i + 1))
        << ',' << Y(h.density[i]) << ' ';
    }
    f << X(h.edge(h.counts.size())) << ',' << Y(0) << "\"/>\n";
    f << "<text x=\"" << W - mr - 4 << "\" y=\"" << mt + 16 * (n + 1)
      << "\" text-anchor=\"end\" fill=\"" << color << "\">"
      << label_of(labels, n) << "</text>\n";
  }
  f << "</svg>\n";
}

}  // namespace probedesign
