#pragma once

#include "otecon/finance.hpp"
#include "otecon/otexact.hpp"
#include "otecon/types.hpp"

namespace otecon {

/// Uniform grid on (0,1): m levels with weight 1/m each.
struct QuantileGrid {
  Vector taus;

  explicit QuantileGrid(Vector taus);
  /// Midpoint grid tau_j = (j - 1/2)/m.
  static QuantileGrid midpoint(int m);
  int size() const { return static_cast<int>(taus.size()); }
};

/// Observations (X_i, Y_i) with an intercept column in X.
struct RegressionData {
  Matrix X;  // N x k
  Vector Y;  // N

  RegressionData(Matrix X, Vector Y);
  int num_obs() const { return static_cast<int>(X.rows()); }
  int dim() const { return static_cast<int>(X.cols()); }
};

struct MonotoneCouplingCheck {
  bool is_monotone = true;
  double value = 0.0;         // transport value of the returned plan
  double oracle_value = 0.0;  // value of the sorted (north-west) coupling
  double max_crossing_mass = 0.0;
};

struct QuantileTransportResult {
  OtSolution solution;
  MonotoneCouplingCheck check;
};

/// 1-D transport between the grid and a law with surplus x*y; the optimal
/// plan is the monotone coupling Y = F^{-1}(X), re-checked against an
/// independently built sorted coupling.
QuantileTransportResult quantile_transform_ot(const QuantileGrid& grid,
                                              const MarginalLaw& law,
                                              const ToleranceConfig& cfg = {});

/// Classical tau-th quantile regression as a linear program (pinball loss).
Vector classic_qr(const RegressionData& data, double tau, const ToleranceConfig& cfg = {});

/// beta rows beta(tau_j) plus the cumulative curve b(tau_j) =
/// sum_{j' <= j} beta(tau_j')/m (so b starts from 0 by convention).
struct QuantileCurve {
  Matrix beta;  // m x k
  Matrix b;     // m x k
};

struct VqrResult {
  Matrix coupling;  // m x N
  QuantileCurve curve;
  Vector psi;                         // per-observation dual, min 0
  std::vector<int> crossing_segments; // j where differencing is non-monotone
  double representation_error = 0.0;  // max |Y_i - X_i beta(tau_j)| on support
  double mean_independence_residual = 0.0;
  int lp_pivots = 0;
};

/// Discretized vector quantile regression: maximize E[UY] over couplings of
/// the grid and the data subject to mean independence of X from U; b comes
/// from the dual multipliers and beta(tau_j) by first differences of b.
VqrResult vqr_solve(const RegressionData& data, const QuantileGrid& grid,
                    const ToleranceConfig& cfg = {});

}  // namespace otecon
