#include "probedesign/quadprog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "probedesign/errors.hpp"

namespace probedesign {

const char* to_string(ZKind k) {
  switch (k) {
    case ZKind::kInputPower:
      return "i2";
    case ZKind::kOutputPower:
      return "o2";
    case ZKind::kInputAmplitude:
      return "iinf";
    case ZKind::kOutputAmplitude:
      return "oinf";
  }
  return "?";
}

const char* to_string(VKind k) {
  return k == VKind::kWorstCase ? "worst" : "avg";
}

const char* to_string(Direction d) {
  return d == Direction::kLeastCostly ? "least_costly" : "traditional";
}

ZKind parse_z_kind(const std::string& s) {
  if (s == "i2") return ZKind::kInputPower;
  if (s == "o2") return ZKind::kOutputPower;
  if (s == "iinf") return ZKind::kInputAmplitude;
  if (s == "oinf") return ZKind::kOutputAmplitude;
  throw InvalidParameter("unknown z kind '" + s + "' (i2, o2, iinf, oinf)");
}

VKind parse_v_kind(const std::string& s) {
  if (s == "worst") return VKind::kWorstCase;
  if (s == "avg") return VKind::kWeightedAverage;
  throw InvalidParameter("unknown v kind '" + s + "' (worst, avg)");
}

Direction parse_direction(const std::string& s) {
  if (s == "least_costly") return Direction::kLeastCostly;
  if (s == "traditional") return Direction::kTraditional;
  throw InvalidParameter("unknown direction '" + s +
                         "' (least_costly, traditional)");
}

void DesignSpec::validate(std::size_t pair_count) const {
  if (T < 1) throw InvalidParameter("design horizon T must be >= 1");
  if (!(u_bar > 0.0) || !std::isfinite(u_bar)) {
    throw InvalidParameter("u_bar must be positive");
  }
  if (!(y_bar > 0.0) || !std::isfinite(y_bar)) {
    throw InvalidParameter("y_bar must be positive");
  }
  if (!weights.empty()) {
    if (weights.size() != pair_count) {
      throw DimensionMismatch("weights must have one entry per model pair");
    }
    for (double w : weights) {
      if (!(w > 0.0)) throw InvalidParameter("weights must be positive");
    }
  }
}

double z_value(const DesignSpec& spec, const ModelSet& models,
               const VectorXd& u) {
  if (u.size() != models.horizon()) {
    throw DimensionMismatch("z_value: input length must equal T");
  }
  switch (spec.z_kind) {
    case ZKind::kInputPower:
      return u.squaredNorm() / (spec.u_bar * spec.u_bar);
    case ZKind::kInputAmplitude:
      return u.size() == 0 ? 0.0 : u.cwiseAbs().maxCoeff() / spec.u_bar;
    case ZKind::kOutputPower:
    case ZKind::kOutputAmplitude: {
      double best = 0.0;
      for (const auto& m : models.models()) {
        const VectorXd y = m.G() * u + m.free_response();
        const double v = spec.z_kind == ZKind::kOutputPower
                             ? y.squaredNorm() / (spec.y_bar * spec.y_bar)
                             : y.cwiseAbs().maxCoeff() / spec.y_bar;
        best = std::max(best, v);
      }
      return best;
    }
  }
  return 0.0;
}

double v_value(const DesignSpec& spec, const std::vector<PairStats>& pairs,
               const VectorXd& u) {
  if (pairs.empty()) throw InvalidParameter("v_value: no model pairs");
  const double M = static_cast<double>(pairs.size());
  double worst = std::numeric_limits<double>::infinity();
  double avg = 0.0;
  for (std::size_t m = 0; m < pairs.size(); ++m) {
    const auto& p = pairs[m];
    const double g2 = p.gamma * p.gamma;
    const double term = p.forward.mean_shift(u).squaredNorm() / g2;
    worst = std::min(worst, term);
    avg += spec.weight(m) * term / M;
  }
  return spec.v_kind == VKind::kWorstCase ? worst : avg;
}

QuadForm affine_square(const MatrixXd& A, const VectorXd& b, double scale) {
  MatrixXd Ab(A.rows(), A.cols() + 1);
  Ab << A, b;
  MatrixXd M = scale * (Ab.transpose() * Ab);
  return QuadForm{0.5 * (M + M.transpose())};
}

namespace {

double max_piece(const std::vector<QuadForm>& pieces, const VectorXd& u) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& q : pieces) best = std::max(best, q.evaluate(u));
  return best;
}

double min_piece(const std::vector<QuadForm>& pieces, const VectorXd& u) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& q : pieces) best = std::min(best, q.evaluate(u));
  return best;
}

}  // namespace

double AssembledSdp::z_from_pieces(const VectorXd& u) const {
  const double v = std::max(0.0, max_piece(z_pieces, u));
  return spec.amplitude_kind() ? std::sqrt(v) : v;
}

double AssembledSdp::v_from_pieces(const VectorXd& u) const {
  return min_piece(v_pieces, u);
}

double AssembledSdp::z_relaxed(const MatrixXd& U) const {
  double best = 0.0;
  for (const auto& q : z_pieces) best = std::max(best, q.trace_with(U));
  return spec.amplitude_kind() ? std::sqrt(best) : best;
}

double AssembledSdp::v_relaxed(const MatrixXd& U) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& q : v_pieces) best = std::min(best, q.trace_with(U));
  return best;
}

double AssembledSdp::objective_in_measure_units(double sdp_objective) const {
  if (spec.direction == Direction::kLeastCostly && spec.amplitude_kind()) {
    return std::sqrt(std::max(0.0, sdp_objective));
  }
  return sdp_objective;
}

AssembledSdp homogenize(const DesignSpec& spec, const ModelSet& models,
                        const std::vector<PairStats>& pairs) {
  const int T = models.horizon();
  if (spec.T != T) {
    throw DimensionMismatch("design horizon differs from the model horizon");
  }
  if (pairs.size() != models.pair_count()) {
    throw DimensionMismatch("expected one PairStats per unordered model pair");
  }
  spec.validate(pairs.size());
  for (const auto& p : pairs) {
    if (!(p.gamma > 0.0)) {
      throw InvalidParameter(
          "pair threshold gamma is zero; sigma_bar must be positive to design");
    }
  }

  AssembledSdp out;
  out.spec = spec;
  out.pair_count = pairs.size();
  const double ub2 = 1.0 / (spec.u_bar * spec.u_bar);
  const double yb2 = 1.0 / (spec.y_bar * spec.y_bar);

  switch (spec.z_kind) {
    case ZKind::kInputPower:
      out.z_pieces.push_back(
          affine_square(MatrixXd::Identity(T, T), VectorXd::Zero(T), ub2));
      break;
    case ZKind::kInputAmplitude:
      for (int i = 0; i < T; ++i) {
        MatrixXd M = MatrixXd::Zero(T + 1, T + 1);
        M(i, i) = ub2;
        out.z_pieces.push_back(QuadForm{M});
      }
      break;
    case ZKind::kOutputPower:
      for (const auto& m : models.models()) {
        out.z_pieces.push_back(affine_square(m.G(), m.free_response(), yb2));
      }
      break;
    case ZKind::kOutputAmplitude:
      for (const auto& m : models.models()) {
        for (int t = 0; t < T; ++t) {
          out.z_pieces.push_back(affine_square(
              m.G().row(t), m.free_response().segment(t, 1), yb2));
        }
      }
      break;
  }

  const double M = static_cast<double>(pairs.size());
  if (spec.v_kind == VKind::kWorstCase) {
    for (const auto& p : pairs) {
      out.v_pieces.push_back(affine_square(p.forward.G_bar, p.forward.eta_bar,
                                           1.0 / (p.gamma * p.gamma)));
    }
  } else {
    MatrixXd S = MatrixXd::Zero(T + 1, T + 1);
    for (std::size_t m = 0; m < pairs.size(); ++m) {
      const auto& p = pairs[m];
      S += affine_square(p.forward.G_bar, p.forward.eta_bar,
                         spec.weight(m) / (M * p.gamma * p.gamma))
               .M;
    }
    out.v_pieces.push_back(QuadForm{S});
  }

  out.problem.bound = 1.0;
  if (spec.direction == Direction::kLeastCostly) {
    out.problem.sense = SdpSense::kMinimizeMax;
    out.problem.objective = out.z_pieces;
    out.problem.constraints = out.v_pieces;
  } else {
    out.problem.sense = SdpSense::kMaximizeMin;
    out.problem.objective = out.v_pieces;
    out.problem.constraints = out.z_pieces;
  }
  return out;
}

}  // namespace probedesign
