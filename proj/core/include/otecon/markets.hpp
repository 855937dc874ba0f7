#pragma once

#include "otecon/types.hpp"

namespace otecon {

struct StabilityViolation {
  std::string kind;  // which equilibrium condition failed
  int x = -1;
  int y = -1;
  double amount = 0.0;
};

/// Stable-matching outcome: coupling, single masses, payoffs, and the list
/// of equilibrium conditions violated (empty on a certified outcome).
struct MatchingOutcome {
  TransportPlan plan;
  Vector single_p;  // unmatched mass per X type
  Vector single_q;  // unmatched mass per Y type
  Potentials payoffs;
  Matrix surplus_used;
  std::vector<StabilityViolation> stability_violations;
  double value = 0.0;
};

/// Transferable-utility stable matching via the unmatched-variant solver;
/// every equilibrium condition is re-checked on the returned outcome.
MatchingOutcome solve_stable_matching(const DiscreteMeasure& p, const DiscreteMeasure& q,
                                      const SurplusMatrix& surplus,
                                      const ToleranceConfig& cfg = {});

/// Equilibrium wage interval per pair: [gamma_xy - v_y, u_x - alpha_xy].
/// Point-valued on matched pairs.
struct WageIntervalTable {
  Matrix lower;
  Matrix upper;
};

WageIntervalTable wage_bounds(const MatchingOutcome& outcome, const Matrix& alpha,
                              const Matrix& gamma, const ToleranceConfig& cfg = {});

/// Quality-differentiated market: producer costs C (X x Z) and consumer
/// utilities U (Y x Z).
struct HedonicSpec {
  Matrix producer_cost;
  Matrix consumer_utility;

  HedonicSpec(Matrix producer_cost, Matrix consumer_utility);
  int qualities() const { return static_cast<int>(producer_cost.cols()); }
};

struct HedonicReduction {
  SurplusMatrix surplus;                          // max_z (U_yz - C_xz)
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> best_quality;  // argmax, lowest index on ties
};

HedonicReduction hedonic_reduce(const HedonicSpec& spec);

/// Price interval per quality: [max_y (U_yz - v_y), min_x (u_x + C_xz)].
/// Width ~ 0 for every traded quality; untraded qualities may carry a wide
/// or even empty interval.
struct HedonicPriceBounds {
  Vector lower;
  Vector upper;
  std::vector<bool> traded;
};

HedonicPriceBounds hedonic_price_bounds(const MatchingOutcome& outcome,
                                        const HedonicSpec& spec,
                                        const ToleranceConfig& cfg = {});

}  // namespace otecon
