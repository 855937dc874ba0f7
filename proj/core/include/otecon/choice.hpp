#pragma once

#include "otecon/entropic.hpp"
#include "otecon/types.hpp"

namespace otecon {

/// Empirical taste-shock sample: row i holds draw epsilon_i over the
/// alternatives, each with weight 1/N. sigma is the Gumbel smoothing scale
/// (0 = pure argmax choice). The library never draws internally; samples
/// come from the caller.
struct ChoiceSample {
  Matrix draws;        // N x |Y|
  double sigma = 0.0;  // >= 0

  ChoiceSample(Matrix draws, double sigma);
  int num_draws() const { return static_cast<int>(draws.rows()); }
  int num_alternatives() const { return static_cast<int>(draws.cols()); }
};

/// Market shares over alternatives (a point on the simplex).
struct ShareVector {
  Vector q;

  explicit ShareVector(Vector shares);
};

/// Q_y(V): average over draws of the smoothed (or exact) argmax of
/// V_y + epsilon_iy; sigma = 0 breaks ties toward the lowest index.
ShareVector simulate_market_shares(const Vector& systematic, const ChoiceSample& sample);

/// Closed-form logit inversion V_y = sigma (log q_y - log q_y0), V_{y0} = 0.
Vector invert_pure_logit(const ShareVector& shares, double sigma);

struct SampledInversion {
  Vector systematic;   // V, normalized V_{y0} = 0
  TransportPlan plan;  // assignment of draws to alternatives
  Potentials potentials;
  int iterations = 0;
};

/// Nonsmooth demand inversion: exact transport between the empirical draw
/// measure (mass 1/N each) and the shares, surplus epsilon_iy; V = -v from
/// the dual. Requires sigma = 0 on the sample.
SampledInversion invert_sampled_lp(const ShareVector& shares, const ChoiceSample& sample,
                                   const ToleranceConfig& cfg = {});

struct MixedLogitInversion {
  Vector systematic;  // V, normalized V_{y0} = 0
  TransportPlan plan;
  Potentials potentials;
  int iterations = 0;
  /// v iterate after each sweep; elementwise equal to the classic
  /// share-matching contraction iterate on the same inputs.
  std::vector<Vector> v_history;
};

/// Smooth inversion by matrix scaling on the sample problem (sigma > 0).
/// The fixed point reproduces the shares: Q^sigma(V) = q.
MixedLogitInversion invert_mixed_logit(const ShareVector& shares, const ChoiceSample& sample,
                                       const EntropicConfig& cfg);

}  // namespace otecon
