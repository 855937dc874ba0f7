#pragma once

#include <functional>

#include "otecon/types.hpp"

namespace otecon {

/// Discrete risk-neutral marginal: support sorted ascending, probabilities
/// on the simplex.
struct MarginalLaw {
  Vector support;
  Vector probs;

  MarginalLaw(Vector support, Vector probs);
  int size() const { return static_cast<int>(support.size()); }
  double mean() const { return support.dot(probs); }
};

using PayoffFn = std::function<double(double, double)>;

/// A static (and, in the martingale case, dynamic) replicating portfolio:
/// u on the first marginal, v on the second, h the per-state forward
/// positions on the martingale rows (empty for static bounds).
struct Hedge {
  Vector u;
  Vector v;
  Vector h;
  double price = 0.0;  // E_P[u] + E_Q[v]
};

struct BoundsResult {
  double lower = 0.0;
  double upper = 0.0;
  Hedge upper_hedge;  // cheapest overreplication found
  Hedge lower_hedge;  // costliest underreplication found
  TransportPlan upper_plan;
  TransportPlan lower_plan;
};

/// Model-free price bounds over all couplings of P and Q; upper/lower are
/// the max-/min-coupling transport values and the hedges come from the
/// duals.
BoundsResult option_bounds_static(const MarginalLaw& P, const MarginalLaw& Q,
                                  const PayoffFn& payoff, const ToleranceConfig& cfg = {});
BoundsResult option_bounds_static(const MarginalLaw& P, const MarginalLaw& Q,
                                  const Matrix& payoff, const ToleranceConfig& cfg = {});

/// Same-asset two-date bounds: couplings restricted by E[Y|X] = X. Raises
/// NoMartingaleCoupling (naming the violated convex-order threshold) when
/// none exists.
BoundsResult option_bounds_martingale(const MarginalLaw& P, const MarginalLaw& Q,
                                      const PayoffFn& payoff,
                                      const ToleranceConfig& cfg = {});
BoundsResult option_bounds_martingale(const MarginalLaw& P, const MarginalLaw& Q,
                                      const Matrix& payoff,
                                      const ToleranceConfig& cfg = {});

}  // namespace otecon
