#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "probedesign/quadprog.hpp"
#include "probedesign/sdr.hpp"

namespace instances {

namespace pd = probedesign;
using pd::MatrixXd;
using pd::VectorXd;

struct Instance {
  pd::ModelSet models;
  pd::DesignSpec spec;
};

// N random first-order models with direct feedthrough, so that even T = 1
// carries input information.
inline Instance small_instance(std::mt19937_64& gen, int N, int T,
                               pd::ZKind z, pd::VKind v, pd::Direction dir,
                               double sigma_bar) {
  std::uniform_real_distribution<double> pole(-0.8, 0.8), gain(0.3, 1.5),
      feed(0.4, 1.2), xb(-0.5, 0.5);
  std::vector<pd::StateSpaceModel> ms;
  for (int n = 0; n < N; ++n) {
    ms.push_back(fixtures::scalar_model(pole(gen), gain(gen), 1.0, feed(gen),
                                        xb(gen), 1.0));
  }
  pd::DesignSpec spec;
  spec.z_kind = z;
  spec.v_kind = v;
  spec.direction = dir;
  spec.T = T;
  spec.u_bar = 1.0;
  spec.y_bar = 1.0;
  return {fixtures::make_set(ms, T, sigma_bar), spec};
}

// Design-structured relaxation with one cost piece |u|^2 and K random
// discrimination constraints |A_k u + b_k|^2 >= 1.
inline pd::SdpProblem random_least_costly(std::mt19937_64& gen, int K, int T) {
  pd::SdpProblem p;
  p.sense = pd::SdpSense::kMinimizeMax;
  p.objective.push_back(
      pd::affine_square(MatrixXd::Identity(T, T), VectorXd::Zero(T), 1.0));
  std::normal_distribution<double> nd;
  for (int k = 0; k < K; ++k) {
    const int rows = T + 1;
    MatrixXd A(rows, T);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < T; ++j) A(i, j) = nd(gen);
    VectorXd b(rows);
    for (int i = 0; i < rows; ++i) b(i) = 0.1 * nd(gen);
    p.constraints.push_back(pd::affine_square(A, b, 0.25));
  }
  return p;
}

// Design objective at u by direct evaluation, +inf (least-costly) or -inf
// (traditional) when u violates the design constraint.
inline double design_value(const Instance& in,
                           const std::vector<pd::PairStats>& pairs,
                           const VectorXd& u) {
  const double z = pd::z_value(in.spec, in.models, u);
  const double v = pd::v_value(in.spec, pairs, u);
  if (in.spec.direction == pd::Direction::kLeastCostly) {
    return v >= 1.0 ? z : std::numeric_limits<double>::infinity();
  }
  return z <= 1.0 ? v : -std::numeric_limits<double>::infinity();
}

// Quadratic a t^2 + 2 b t + c along a line.
struct LineQuad {
  double a = 0.0, b = 0.0, c = 0.0;
  double at(double t) const { return (a * t + 2.0 * b) * t + c; }
};

// s |t p + q|^2.
inline LineQuad line_quad(const VectorXd& p, const VectorXd& q, double s) {
  return {s * p.squaredNorm(), s * p.dot(q), s * q.squaredNorm()};
}

// Cost and discrimination terms of the design along u = t d, built straight
// from the model matrices.
inline void line_terms(const Instance& in, const std::vector<pd::PairStats>& pairs,
                       const VectorXd& d, std::vector<LineQuad>& cost,
                       std::vector<LineQuad>& disc) {
  const pd::DesignSpec& sp = in.spec;
  const int T = sp.T;
  const double ub2 = 1.0 / (sp.u_bar * sp.u_bar);
  const double yb2 = 1.0 / (sp.y_bar * sp.y_bar);
  cost.clear();
  disc.clear();
  switch (sp.z_kind) {
    case pd::ZKind::kInputPower:
      cost.push_back(line_quad(d, VectorXd::Zero(T), ub2));
      break;
    case pd::ZKind::kInputAmplitude:
      for (int i = 0; i < T; ++i) cost.push_back({d(i) * d(i) * ub2, 0.0, 0.0});
      break;
    case pd::ZKind::kOutputPower:
      for (const auto& m : in.models.models()) {
        cost.push_back(line_quad(m.G() * d, m.Psi() * m.x_bar(), yb2));
      }
      break;
    case pd::ZKind::kOutputAmplitude:
      for (const auto& m : in.models.models()) {
        const VectorXd gd = m.G() * d;
        const VectorXd fr = m.Psi() * m.x_bar();
        for (int t = 0; t < T; ++t) {
          cost.push_back(line_quad(gd.segment(t, 1), fr.segment(t, 1), yb2));
        }
      }
      break;
  }
  const double M = static_cast<double>(pairs.size());
  LineQuad avg;
  for (std::size_t m = 0; m < pairs.size(); ++m) {
    const auto& f = pairs[m].forward;
    const double g2 = pairs[m].gamma * pairs[m].gamma;
    const LineQuad q = line_quad(f.G_bar * d, f.eta_bar, 1.0 / g2);
    if (sp.v_kind == pd::VKind::kWorstCase) {
      disc.push_back(q);
    } else {
      const double w = sp.weight(m) / M;
      avg.a += w * q.a;
      avg.b += w * q.b;
      avg.c += w * q.c;
    }
  }
  if (sp.v_kind == pd::VKind::kWeightedAverage) disc.push_back(avg);
}

using Interval = std::pair<double, double>;
constexpr double kInfT = std::numeric_limits<double>::infinity();

// {t : q(t) >= level} (upper = true) or {t : q(t) <= level}, for convex q.
inline std::vector<Interval> level_set(const LineQuad& q, double level, bool upper) {
  const double a = q.a, b = q.b, c = q.c - level;
  const double scale = std::max({std::abs(a), std::abs(b), std::abs(c), 1e-300});
  if (std::abs(a) <= 1e-14 * scale) {
    if (std::abs(b) <= 1e-14 * scale) {
      const bool ok = upper ? c >= 0.0 : c <= 0.0;
      return ok ? std::vector<Interval>{{-kInfT, kInfT}} : std::vector<Interval>{};
    }
    const double root = -c / (2.0 * b);
    const bool right = (b > 0.0) == upper;
    return {right ? Interval{root, kInfT} : Interval{-kInfT, root}};
  }
  const double disc = b * b - a * c;
  if (disc < 0.0) {
    return upper ? std::vector<Interval>{{-kInfT, kInfT}} : std::vector<Interval>{};
  }
  const double r = std::sqrt(disc);
  const double t1 = (-b - r) / a, t2 = (-b + r) / a;
  if (upper) return {{-kInfT, t1}, {t2, kInfT}};
  return {{t1, t2}};
}

inline std::vector<Interval> intersect(const std::vector<Interval>& x,
                                       const std::vector<Interval>& y) {
  std::vector<Interval> out;
  for (const auto& [a0, a1] : x) {
    for (const auto& [b0, b1] : y) {
      const double lo = std::max(a0, b0), hi = std::min(a1, b1);
      if (lo <= hi) out.push_back({lo, hi});
    }
  }
  return out;
}

// Best design value along u = t d over all real t. Infeasible lines give
// +inf (least-costly) or -inf (traditional).
inline double best_on_line(const Instance& in, const std::vector<pd::PairStats>& pairs,
                           const VectorXd& d) {
  std::vector<LineQuad> cost, disc;
  line_terms(in, pairs, d, cost, disc);
  const bool least_costly = in.spec.direction == pd::Direction::kLeastCostly;
  const std::vector<LineQuad>& cons = least_costly ? disc : cost;
  std::vector<Interval> feas{{-kInfT, kInfT}};
  for (const auto& q : cons) feas = intersect(feas, level_set(q, 1.0, least_costly));
  auto envelope = [&](double t) {
    double v = least_costly ? -kInfT : kInfT;
    for (const auto& q : least_costly ? cost : disc) {
      v = least_costly ? std::max(v, q.at(t)) : std::min(v, q.at(t));
    }
    return v;
  };
  auto measure = [&](double t) {
    // Amplitude costs are reported as the norm, not its square.
    const double v = envelope(t);
    return least_costly && (in.spec.z_kind == pd::ZKind::kInputAmplitude ||
                            in.spec.z_kind == pd::ZKind::kOutputAmplitude)
               ? std::sqrt(std::max(0.0, v))
               : v;
  };
  if (least_costly) {
    // Convex envelope: ternary search for its minimizer, then clamp into each
    // feasible interval.
    double lo = -1e6, hi = 1e6;
    for (int it = 0; it < 300; ++it) {
      const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
      if (envelope(m1) < envelope(m2)) {
        hi = m2;
      } else {
        lo = m1;
      }
    }
    const double t0 = 0.5 * (lo + hi);
    double best = kInfT;
    for (const auto& [a, b] : feas) best = std::min(best, measure(std::clamp(t0, a, b)));
    return best;
  }
  double best = -kInfT;
  for (const auto& [a, b] : feas) {
    if (!std::isfinite(a) || !std::isfinite(b)) return kInfT;
    std::vector<double> cand{a, b, 0.5 * (a + b)};
    for (std::size_t i = 0; i < disc.size(); ++i) {
      for (std::size_t j = i + 1; j < disc.size(); ++j) {
        const LineQuad d2{disc[i].a - disc[j].a, disc[i].b - disc[j].b,
                          disc[i].c - disc[j].c};
        for (const auto& [r0, r1] : level_set(d2, 0.0, false)) {
          cand.push_back(r0);
          cand.push_back(r1);
        }
      }
    }
    for (double t : cand) {
      if (std::isfinite(t) && t >= a && t <= b) best = std::max(best, measure(t));
    }
  }
  return best;
}

// Exhaustive search for the design optimum of a T <= 2 instance: every
// point lies on a line through the origin, so an exact solve along each
// line of an angular grid (spacing `step`), refined tenfold around the
// incumbent, covers the whole input space.
inline double brute_force_optimum(const Instance& in, double step = 1e-3) {
  const auto pairs = pd::discrimination_pairs(in.models);
  const bool least_costly = in.spec.direction == pd::Direction::kLeastCostly;
  auto better = [&](double x, double y) { return least_costly ? x < y : x > y; };
  auto dir = [&](double th) {
    VectorXd d(in.spec.T);
    if (in.spec.T == 1) {
      d(0) = 1.0;
    } else {
      d << std::cos(th), std::sin(th);
    }
    return d;
  };
  double best_th = 0.0;
  double best = best_on_line(in, pairs, dir(0.0));
  if (in.spec.T == 2) {
    const double pi = std::acos(-1.0);
    auto sweep = [&](double lo, double hi, double h) {
      for (double th = lo; th <= hi; th += h) {
        const double v = best_on_line(in, pairs, dir(th));
        if (better(v, best)) {
          best = v;
          best_th = th;
        }
      }
    };
    sweep(0.0, pi, step);
    double h = step;
    for (int level = 0; level < 6; ++level) {
      const double c = best_th;
      sweep(c - 2.0 * h, c + 2.0 * h, h / 10.0);
      h /= 10.0;
    }
  }
  return best;
}

// Design objective reached by the relaxation pipeline.
inline double pipeline_value(const pd::DesignOutcome& o) {
  return o.assembled.spec.direction == pd::Direction::kLeastCostly
             ? o.result.z_achieved
             : o.result.v_achieved;
}

}  // namespace instances
