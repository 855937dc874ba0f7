#pragma once

#include <functional>

#include "otecon/types.hpp"

namespace otecon {

struct EntropicConfig {
  double sigma = 1.0;            // regularization temperature, > 0
  double marginal_tol = 1e-10;   // stop when both margin residuals pass
  int max_iterations = 100000;   // full sweeps
  bool log_domain = true;        // max-shifted log-sum-exp updates
  /// Optional strictly decreasing warm-start schedule run before sigma.
  std::vector<double> epsilon_scaling_schedule;
  bool record_history = false;
};

struct IpfpSweep {
  Vector u;
  Vector v;
  double dual_objective = 0.0;
  double marginal_residual = 0.0;
};

struct IpfpResult {
  Potentials potentials;
  TransportPlan plan;
  int iterations = 0;
  double marginal_residual = 0.0;
  std::vector<IpfpSweep> history;  // filled when record_history is set
};

/// Alternating closed-form coordinate descent on the regularized dual
/// (matrix scaling). Requires balanced masses and strictly positive margins.
IpfpResult ipfp_solve(const DiscreteMeasure& p, const DiscreteMeasure& q,
                      const SurplusMatrix& surplus, const EntropicConfig& cfg);

/// Gibbs plan pi_xy = exp((surplus - u_x - v_y)/sigma). Exponents above the
/// double range are clamped; clamped_cells (optional out) counts them.
TransportPlan plan_from_potentials(const Vector& u, const Vector& v,
                                   const SurplusMatrix& surplus, double sigma,
                                   int* clamped_cells = nullptr);

/// Regularized dual objective
/// sum p u + sum q v + sigma * sum exp((surplus - u - v)/sigma) - sigma.
double dual_objective(const Vector& u, const Vector& v, const DiscreteMeasure& p,
                      const DiscreteMeasure& q, const SurplusMatrix& surplus,
                      double sigma);

/// Link description for the generalized (GLM) regularization: L is a
/// primitive of the link l, Lstar its convex conjugate, and Lstar_prime =
/// inverse link (nonnegative where defined).
struct LinkFunction {
  enum class Tag { Log, IdentityThreshold, Custom };
  Tag tag = Tag::Log;
  std::function<double(double)> L;
  std::function<double(double)> Lstar;
  std::function<double(double)> Lstar_prime;

  static LinkFunction log_link();
  static LinkFunction identity_threshold();
  static LinkFunction custom(std::function<double(double)> L,
                             std::function<double(double)> Lstar,
                             std::function<double(double)> Lstar_prime);
};

struct GeneralRegularizedResult {
  Potentials potentials;
  TransportPlan plan;
  double W = 0.0;  // dual objective value at the solution
  int iterations = 0;
  double marginal_residual = 0.0;
};

/// Blockwise coordinate descent on
///   sum p u + sum q v + sum Lstar(design - u - v),
/// with closed-form updates for the log link and guarded 1-D root finding
/// otherwise. With the log link this coincides with ipfp_solve at sigma = 1.
GeneralRegularizedResult solve_regularized_general(const DiscreteMeasure& p,
                                                   const DiscreteMeasure& q,
                                                   const Matrix& design,
                                                   const LinkFunction& link,
                                                   const EntropicConfig& cfg);

}  // namespace otecon
