#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "probedesign/discrim.hpp"
#include "probedesign/lti_lift.hpp"
#include "probedesign/sdp.hpp"

namespace probedesign {

/// Signal cost measure.
enum class ZKind {
  kInputPower,       // |u|^2 / u_bar^2
  kOutputPower,      // max_n |G_n u + Psi_n x_n|^2 / y_bar^2
  kInputAmplitude,   // |u|_inf / u_bar
  kOutputAmplitude,  // max_n |G_n u + Psi_n x_n|_inf / y_bar
};

/// Discrimination measure over the M model pairs.
enum class VKind {
  kWorstCase,        // min_m |G_m u + eta_m|^2 / gamma_m^2
  kWeightedAverage,  // (1/M) sum_m w_m / gamma_m^2 |G_m u + eta_m|^2
};

enum class Direction {
  kLeastCostly,  // min Z  s.t. V >= 1
  kTraditional,  // max V  s.t. Z <= 1
};

const char* to_string(ZKind k);
const char* to_string(VKind k);
const char* to_string(Direction d);
ZKind parse_z_kind(const std::string& s);
VKind parse_v_kind(const std::string& s);
Direction parse_direction(const std::string& s);

struct DesignSpec {
  ZKind z_kind = ZKind::kInputPower;
  VKind v_kind = VKind::kWorstCase;
  Direction direction = Direction::kLeastCostly;
  double u_bar = 1.0;
  double y_bar = 1.0;
  // Empty means all ones.
  std::vector<double> weights;
  int T = 0;

  // Throws InvalidParameter / DimensionMismatch.
  void validate(std::size_t pair_count) const;
  double weight(std::size_t m) const {
    return weights.empty() ? 1.0 : weights[m];
  }
  bool amplitude_kind() const {
    return z_kind == ZKind::kInputAmplitude ||
           z_kind == ZKind::kOutputAmplitude;
  }
};

double z_value(const DesignSpec& spec, const ModelSet& models,
               const VectorXd& u);

// `pairs` in the order produced by discrimination_pairs().
double v_value(const DesignSpec& spec, const std::vector<PairStats>& pairs,
               const VectorXd& u);

/// [A b]' [A b] as a form on [u; 1], scaled by `scale`.
QuadForm affine_square(const MatrixXd& A, const VectorXd& b, double scale);

/// The design problem written as min-max / max-min over quadratic forms.
///
/// Z pieces evaluate to Z itself for the power kinds and to the square of one
/// coordinate term for the amplitude kinds. V pieces evaluate to V terms.
struct AssembledSdp {
  SdpProblem problem;
  DesignSpec spec;
  std::vector<QuadForm> z_pieces;
  std::vector<QuadForm> v_pieces;
  std::size_t pair_count = 0;

  // Max over Z pieces, returned in Z units (square root for amplitude kinds).
  double z_from_pieces(const VectorXd& u) const;
  double v_from_pieces(const VectorXd& u) const;
  // The relaxed measures at a lifted U.
  double z_relaxed(const MatrixXd& U) const;
  double v_relaxed(const MatrixXd& U) const;
  // Relaxation optimum in the units of the design objective.
  double objective_in_measure_units(double sdp_objective) const;
};

AssembledSdp homogenize(const DesignSpec& spec, const ModelSet& models,
                        const std::vector<PairStats>& pairs);

}  // namespace probedesign
