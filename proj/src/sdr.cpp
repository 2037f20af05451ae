#include "probedesign/sdr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include <Eigen/Dense>

#include "probedesign/errors.hpp"
#include "probedesign/rng.hpp"

namespace probedesign {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Coefficients of [a d + q; 1]' M [a d + q; 1] = c2 a^2 + 2 c1 a + c0.
struct LineQuad {
  double c2 = 0.0;
  double c1 = 0.0;
  double c0 = 0.0;

  double at(double a) const { return (c2 * a + 2.0 * c1) * a + c0; }
};

LineQuad restrict_to_line(const QuadForm& form, const VectorXd& d,
                          const VectorXd& q) {
  const Eigen::Index T = d.size();
  const auto M11 = form.M.topLeftCorner(T, T);
  const auto m = form.M.col(T).head(T);
  const VectorXd Md = M11 * d;
  LineQuad l;
  l.c2 = d.dot(Md);
  l.c1 = q.dot(Md) + d.dot(m);
  l.c0 = q.dot(M11 * q) + 2.0 * q.dot(m) + form.M(T, T);
  return l;
}

using Interval = std::pair<double, double>;
using IntervalSet = std::vector<Interval>;

// {a : g(a) >= 0} (want_nonneg) or {a : g(a) <= 0} with
// g(a) = c2 a^2 + 2 c1 a + e, c2 >= 0.
IntervalSet solve_quadratic_sign(double c2, double c1, double e,
                                 bool want_nonneg) {
  if (c2 > 0.0) {
    const double disc = c1 * c1 - c2 * e;
    if (disc < 0.0) {
      return want_nonneg ? IntervalSet{{-kInf, kInf}} : IntervalSet{};
    }
    const double s = std::sqrt(disc);
    const double k = -(c1 + std::copysign(s, c1));
    double r1 = k / c2;
    double r2 = k != 0.0 ? e / k : r1;
    if (r1 > r2) std::swap(r1, r2);
    if (want_nonneg) return {{-kInf, r1}, {r2, kInf}};
    return {{r1, r2}};
  }
  if (c1 == 0.0) {
    const bool ok = want_nonneg ? e >= 0.0 : e <= 0.0;
    return ok ? IntervalSet{{-kInf, kInf}} : IntervalSet{};
  }
  const double root = -e / (2.0 * c1);
  const bool rising = c1 > 0.0;
  if (rising == want_nonneg) return {{root, kInf}};
  return {{-kInf, root}};
}

IntervalSet intersect(const IntervalSet& a, const IntervalSet& b) {
  IntervalSet out;
  for (const auto& x : a) {
    for (const auto& y : b) {
      const double lo = std::max(x.first, y.first);
      const double hi = std::min(x.second, y.second);
      if (lo <= hi) out.emplace_back(lo, hi);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

double max_of(const std::vector<LineQuad>& f, double a) {
  double v = -kInf;
  for (const auto& l : f) v = std::max(v, l.at(a));
  return v;
}

double min_of(const std::vector<LineQuad>& f, double a) {
  double v = kInf;
  for (const auto& l : f) v = std::min(v, l.at(a));
  return v;
}

// Unconstrained minimizer of the convex envelope max_l f_l.
double argmin_envelope(const std::vector<LineQuad>& f) {
  double lo = kInf, hi = -kInf;
  for (const auto& l : f) {
    if (l.c2 > 0.0) {
      const double m = -l.c1 / l.c2;
      lo = std::min(lo, m);
      hi = std::max(hi, m);
    }
  }
  if (lo > hi) return 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    std::size_t arg = 0;
    double best = -kInf;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double v = f[i].at(mid);
      if (v > best) {
        best = v;
        arg = i;
      }
    }
    const double slope = f[arg].c2 * mid + f[arg].c1;
    if (slope > 0.0) {
      hi = mid;
    } else if (slope < 0.0) {
      lo = mid;
    } else {
      return mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

LineResult line_search(const SdpProblem& problem, const VectorXd& d,
                       const VectorXd& q) {
  IntervalSet feasible{{-kInf, kInf}};
  for (const auto& r : problem.constraints) {
    const LineQuad l = restrict_to_line(r, d, q);
    feasible = intersect(feasible, solve_quadratic_sign(l.c2, l.c1,
                                                        l.c0 - problem.bound,
                                                        problem.minimize()));
    if (feasible.empty()) return {};
  }
  std::vector<LineQuad> obj;
  obj.reserve(problem.objective.size());
  for (const auto& p : problem.objective) {
    obj.push_back(restrict_to_line(p, d, q));
  }

  LineResult best;
  auto consider = [&](double a) {
    if (!std::isfinite(a)) return;
    const double v = problem.minimize() ? max_of(obj, a) : min_of(obj, a);
    if (!best.feasible || (problem.minimize() ? v < best.objective
                                              : v > best.objective)) {
      best.feasible = true;
      best.a = a;
      best.objective = v;
    }
  };

  if (problem.minimize()) {
    const double a_star = argmin_envelope(obj);
    for (const auto& [lo, hi] : feasible) consider(std::clamp(a_star, lo, hi));
  } else {
    // The lower envelope of convex pieces peaks at an interval end or where
    // two pieces cross.
    std::vector<double> cand;
    for (std::size_t i = 0; i < obj.size(); ++i) {
      for (std::size_t j = i + 1; j < obj.size(); ++j) {
        const double A = obj[i].c2 - obj[j].c2;
        const double B = obj[i].c1 - obj[j].c1;
        const double C = obj[i].c0 - obj[j].c0;
        if (A != 0.0) {
          const double disc = B * B - A * C;
          if (disc >= 0.0) {
            const double s = std::sqrt(disc);
            const double k = -(B + std::copysign(s, B));
            if (k != 0.0) {
              cand.push_back(k / A);
              cand.push_back(C / k);
            } else {
              cand.push_back(0.0);
            }
          }
        } else if (B != 0.0) {
          cand.push_back(-C / (2.0 * B));
        }
      }
    }
    for (const auto& [lo, hi] : feasible) {
      // Unbounded ends only occur along directions every piece ignores.
      if (std::isfinite(lo)) consider(lo);
      if (std::isfinite(hi)) consider(hi);
      if (!std::isfinite(lo) && !std::isfinite(hi)) consider(0.0);
      for (double c : cand) {
        if (c >= lo && c <= hi) consider(c);
      }
    }
  }
  return best;
}

SdpSolution rank_reduce(const SdpSolution& sol, const SdpProblem& problem) {
  SdpSolution out = sol;
  if (out.rank_history.empty()) out.rank_history.push_back(numerical_rank(sol.U));
  MatrixXd U = sol.U;
  const Eigen::Index n = U.rows();

  const double t = problem.objective_value(U);
  const double active_tol = 1e-7 * std::max(1.0, std::abs(t));
  std::vector<bool> active(problem.objective.size(), false);
  for (std::size_t l = 0; l < problem.objective.size(); ++l) {
    active[l] = std::abs(problem.objective[l].trace_with(U) - t) <= active_tol;
  }

  MatrixXd Enn = MatrixXd::Zero(n, n);
  Enn(n - 1, n - 1) = 1.0;

  const int max_steps = static_cast<int>(n + problem.objective.size()) + 8;
  for (int step = 0; step < max_steps; ++step) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(U);
    const VectorXd& ev = es.eigenvalues();
    const double top = ev.maxCoeff();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (ev(i) > 1e-7 * top) keep.push_back(i);
    }
    const auto r = static_cast<Eigen::Index>(keep.size());
    if (r <= 1) break;
    MatrixXd V(n, r);
    for (Eigen::Index c = 0; c < r; ++c) {
      V.col(c) = es.eigenvectors().col(keep[c]) * std::sqrt(ev(keep[c]));
    }

    // Linear conditions Tr(V' A V X) = 0 on symmetric X, in the basis
    // E_ii, E_ij + E_ji.
    std::vector<const MatrixXd*> held;
    for (const auto& c : problem.constraints) held.push_back(&c.M);
    for (std::size_t l = 0; l < problem.objective.size(); ++l) {
      if (active[l]) held.push_back(&problem.objective[l].M);
    }
    held.push_back(&Enn);
    const Eigen::Index dim = r * (r + 1) / 2;
    MatrixXd C(static_cast<Eigen::Index>(held.size()), dim);
    for (std::size_t k = 0; k < held.size(); ++k) {
      const MatrixXd B = V.transpose() * (*held[k]) * V;
      Eigen::Index idx = 0;
      for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = i; j < r; ++j) {
          C(static_cast<Eigen::Index>(k), idx++) = i == j ? B(i, i) : 2.0 * B(i, j);
        }
      }
      const double nrm = C.row(static_cast<Eigen::Index>(k)).norm();
      if (nrm > 0.0) C.row(static_cast<Eigen::Index>(k)) /= nrm;
    }
    Eigen::JacobiSVD<MatrixXd> svd(C, Eigen::ComputeFullV);
    const VectorXd& sv = svd.singularValues();
    Eigen::Index crank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > 1e-9 * std::max(1.0, sv(0))) ++crank;
    }
    if (crank >= dim) break;
    const VectorXd x = svd.matrixV().col(dim - 1);
    MatrixXd X(r, r);
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < r; ++i) {
      for (Eigen::Index j = i; j < r; ++j) {
        X(i, j) = x(idx);
        X(j, i) = x(idx);
        ++idx;
      }
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> xs(X, Eigen::EigenvaluesOnly);
    const double lmin = xs.eigenvalues()(0);
    const double lmax = xs.eigenvalues()(r - 1);

    // Pieces not held fixed move linearly in the step; they must not pass
    // the current max (min).
    std::vector<std::size_t> loose;
    std::vector<double> p0, p1;
    for (std::size_t l = 0; l < problem.objective.size(); ++l) {
      if (active[l]) continue;
      const MatrixXd B = V.transpose() * problem.objective[l].M * V;
      loose.push_back(l);
      p0.push_back(B.trace());
      p1.push_back(B.cwiseProduct(X).sum());
    }
    auto capped = [&](double a, std::size_t& binding) {
      double cap = a;
      binding = loose.size();
      for (std::size_t i = 0; i < loose.size(); ++i) {
        const double v = p0[i] + cap * p1[i];
        const bool bad = problem.minimize() ? v > t : v < t;
        if (bad && p1[i] != 0.0) {
          const double ai = (t - p0[i]) / p1[i];
          if (std::abs(ai) < std::abs(cap)) {
            cap = ai;
            binding = i;
          }
        }
      }
      return cap;
    };

    std::vector<double> steps;
    if (lmax > 0.0) steps.push_back(-1.0 / lmax);
    if (lmin < 0.0) steps.push_back(-1.0 / lmin);
    double chosen = 0.0;
    std::size_t chosen_binding = loose.size();
    bool full = false;
    for (double a : steps) {
      std::size_t b;
      const double cap = capped(a, b);
      if (b == loose.size()) {
        chosen = a;
        full = true;
        break;
      }
      if (chosen_binding == loose.size()) {
        chosen = cap;
        chosen_binding = b;
      }
    }
    if (!full) {
      if (chosen_binding == loose.size()) break;
      active[loose[chosen_binding]] = true;
    }
    MatrixXd Inner = MatrixXd::Identity(r, r) + chosen * X;
    U = V * Inner * V.transpose();
    U = (0.5 * (U + U.transpose())).eval();
    if (full) out.rank_history.push_back(numerical_rank(U));
  }

  out.U = U;
  out.objective = problem.objective_value(U);
  const auto history = out.rank_history;
  factor_solution(out);
  out.rank_history = history;
  return out;
}

std::optional<VectorXd> extract_rank1(const SdpSolution& sol, double tol) {
  const Eigen::Index n = sol.U.rows();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sol.U);
  const double l1 = es.eigenvalues()(n - 1);
  const double l2 = n > 1 ? std::max(0.0, es.eigenvalues()(n - 2)) : 0.0;
  if (!(l1 > 0.0) || l2 / l1 > tol) return std::nullopt;
  VectorXd v = es.eigenvectors().col(n - 1) * std::sqrt(l1);
  if (std::abs(v(n - 1)) < 1e-12) return std::nullopt;
  v /= v(n - 1);
  return VectorXd(v.head(n - 1));
}

QualityBounds quality_bounds(const SdpSolution& sol,
                             const AssembledSdp& assembled) {
  QualityBounds b;
  const DesignSpec& spec = assembled.spec;
  b.applicable = spec.direction == Direction::kLeastCostly &&
                 spec.v_kind == VKind::kWorstCase &&
                 (spec.z_kind == ZKind::kInputPower ||
                  spec.z_kind == ZKind::kInputAmplitude);
  if (!b.applicable) return b;

  const Eigen::Index T = sol.q_star.size();
  const MatrixXd& Q = sol.Q_star;
  const VectorXd& q = sol.q_star;
  const double M = static_cast<double>(assembled.v_pieces.size());

  b.rho = kInf;
  double worst_at_q = -kInf;
  bool eta_zero = true;
  for (const auto& piece : assembled.v_pieces) {
    const auto R11 = piece.M.topLeftCorner(T, T);
    const double tr = Q.cols() == 0 ? 0.0 : (Q.transpose() * R11 * Q).trace();
    b.rho = std::min(b.rho, tr);
    worst_at_q = std::max(worst_at_q, piece.evaluate(q));
    const double scale = std::max(1e-300, piece.M.norm());
    eta_zero &= piece.M.col(T).norm() <= 1e-12 * scale;
  }
  b.rho = std::max(0.0, b.rho);
  b.rho_lower = 1.0 - worst_at_q;

  const double sdp = std::max(0.0, sol.objective);
  if (b.rho > 0.0) {
    const double spread = std::sqrt(Q.cols() == 0 ? 0.0 : Q.squaredNorm());
    const double offset = spec.z_kind == ZKind::kInputPower
                              ? q.norm()
                              : (T == 0 ? 0.0 : q.cwiseAbs().maxCoeff());
    const double upper =
        std::sqrt(27.0 / (std::numbers::pi * b.rho)) * (M + 1.0) * spread /
            spec.u_bar +
        offset / spec.u_bar;
    b.approximation_interval = std::make_pair(std::sqrt(sdp), upper);
  }
  if (eta_zero) {
    b.eta_zero_interval =
        std::make_pair(sdp, 27.0 * M * M / std::numbers::pi * sdp);
  }
  return b;
}

namespace {

constexpr int kDrawsPerSample = 10;
constexpr int kBlock = 64;

struct Sample {
  bool feasible = false;
  VectorXd u;
  double objective = 0.0;
  int draws = 0;
};

// Square root of the full lifted solution, used for sign rounding.
MatrixXd psd_root(const MatrixXd& U) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(U);
  const VectorXd l = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * l.asDiagonal();
}

// Per-sample box budget |u_i| <= u_bar, when the design has one.
struct SignRounding {
  bool enabled = false;
  double u_bar = 1.0;
  MatrixXd root;
};

Sample draw_sample(const SdpSolution& sol, const SdpProblem& problem,
                   const SignRounding& sr, std::uint64_t seed,
                   std::uint64_t index) {
  Philox rng(seed, index);
  Sample s;
  for (int k = 0; k < kDrawsPerSample; ++k) {
    ++s.draws;
    const VectorXd xi = rng.gaussian_vector(sol.Q_star.cols());
    const VectorXd d = sol.Q_star * xi;
    const LineResult lr = line_search(problem, d, sol.q_star);
    if (lr.feasible) {
      s.feasible = true;
      s.u = lr.a * d + sol.q_star;
      s.objective = lr.objective;
      break;
    }
  }
  if (sr.enabled) {
    // Sign rounding of a draw from N(0, U) on the homogenized vector; the
    // last coordinate fixes the overall sign. Always on the box boundary.
    Philox box(seed ^ 0x5157A11D5EEDull, index);
    const VectorXd z = sr.root * box.gaussian_vector(sr.root.cols());
    const Eigen::Index T = z.size() - 1;
    const double flip = z(T) < 0.0 ? -1.0 : 1.0;
    VectorXd u(T);
    for (Eigen::Index i = 0; i < T; ++i) u(i) = sr.u_bar * (z(i) * flip < 0.0 ? -1.0 : 1.0);
    const double obj = problem.objective_value_at(u);
    if (!s.feasible || (problem.minimize() ? obj < s.objective : obj > s.objective)) {
      s.feasible = true;
      s.u = u;
      s.objective = obj;
    }
  }
  return s;
}

void fill_measures(DesignResult& r, const AssembledSdp& assembled,
                   const SdpSolution& sol) {
  r.z_achieved = assembled.z_from_pieces(r.u);
  r.v_achieved = assembled.v_from_pieces(r.u);
  r.sdp_optimum = assembled.objective_in_measure_units(sol.objective);
}

}  // namespace

DesignResult randomize(const SdpSolution& sol, const AssembledSdp& assembled,
                       const RandomizeOptions& options) {
  if (options.n_samples < 1) {
    throw InvalidParameter("randomize: n_samples must be >= 1");
  }
  const SdpProblem& problem = assembled.problem;
  DesignResult result;
  result.seed = options.seed;
  result.method = "randomized";

  if (sol.Q_star.cols() == 0) {
    // Nothing to sample: the relaxed solution is already a point.
    result.draws = 1;
    result.samples_used = 1;
    if (problem.min_constraint_slack_at(sol.q_star) >= -1e-8) {
      result.u = sol.q_star;
    } else {
      const LineResult lr =
          line_search(problem, sol.q_star, VectorXd::Zero(sol.q_star.size()));
      if (!lr.feasible) {
        throw NoFeasibleSample(
            "randomize: rank-one relaxed solution cannot be scaled to "
            "feasibility");
      }
      result.u = lr.a * sol.q_star;
    }
    result.trace.push_back(problem.objective_value_at(result.u));
    fill_measures(result, assembled, sol);
    return result;
  }

  SignRounding sr;
  sr.enabled = assembled.spec.direction == Direction::kTraditional &&
               assembled.spec.z_kind == ZKind::kInputAmplitude;
  if (sr.enabled) {
    sr.u_bar = assembled.spec.u_bar;
    sr.root = psd_root(sol.U);
  }

  const int n = options.n_samples;
  const int threads = std::max(1, options.threads);
  std::vector<Sample> samples(static_cast<std::size_t>(n));
  bool have = false;
  double best = 0.0;
  std::size_t best_idx = 0;
  const double sdp = sol.objective;
  bool stop = false;

  for (int start = 0; start < n && !stop; start += kBlock) {
    const int end = std::min(n, start + kBlock);
    auto work = [&](int tid) {
      for (int i = start + tid; i < end; i += threads) {
        samples[static_cast<std::size_t>(i)] =
            draw_sample(sol, problem, sr, options.seed,
                        static_cast<std::uint64_t>(i));
      }
    };
    if (threads == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (int tid = 0; tid < threads; ++tid) pool.emplace_back(work, tid);
      for (auto& th : pool) th.join();
    }
    for (int i = start; i < end; ++i) {
      const Sample& s = samples[static_cast<std::size_t>(i)];
      result.draws += s.draws;
      result.samples_used = i + 1;
      if (s.feasible &&
          (!have || (problem.minimize() ? s.objective < best
                                        : s.objective > best))) {
        have = true;
        best = s.objective;
        best_idx = static_cast<std::size_t>(i);
      }
      result.trace.push_back(have ? best : std::nan(""));
      if (have && options.early_stop_factor > 0.0) {
        const double f = options.early_stop_factor;
        if (problem.minimize() ? best <= f * sdp : best >= sdp / f) {
          stop = true;
          break;
        }
      }
    }
  }
  if (!have) {
    throw NoFeasibleSample("randomize: no feasible sample in " +
                           std::to_string(result.draws) + " draws");
  }
  result.u = samples[best_idx].u;
  fill_measures(result, assembled, sol);
  return result;
}

DesignOutcome design_input(const ModelSet& models, const DesignSpec& spec,
                           const DesignOptions& options) {
  DesignOutcome out;
  out.pairs = discrimination_pairs(models);
  out.assembled = homogenize(spec, models, out.pairs);
  const SdpProblem& problem = out.assembled.problem;

  out.relaxed = solve_sdp(problem, options.sdp);
  out.reduced = rank_reduce(out.relaxed, problem);

  DesignResult& r = out.result;
  if (auto u = extract_rank1(out.reduced, options.rank1_tol)) {
    // Exact line search along the ray through the extracted point absorbs
    // solver round-off in the constraint values.
    const LineResult lr =
        line_search(problem, *u, VectorXd::Zero(u->size()));
    r.u = lr.feasible ? VectorXd(lr.a * *u) : *u;
    r.method = "rank1";
    r.seed = options.randomize.seed;
    fill_measures(r, out.assembled, out.reduced);
  } else {
    r = randomize(out.reduced, out.assembled, options.randomize);
  }

  const QualityBounds qb = quality_bounds(out.reduced, out.assembled);
  r.rho = qb.rho;
  r.rho_lower_bound = qb.rho_lower;
  r.approximation_interval = qb.approximation_interval;
  r.eta_zero_interval = qb.eta_zero_interval;
  return out;
}

}  // namespace probedesign
