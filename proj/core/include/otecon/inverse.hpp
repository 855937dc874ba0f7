#pragma once

#include "otecon/types.hpp"

namespace otecon {

/// Surplus parametrized on basis matrices: surplus = sum_k lambda_k basis_k.
struct ParametricSurplus {
  std::vector<Matrix> basis;
  Vector lambda;

  Matrix combine() const;
};

/// An observed coupling with its induced margins.
struct ObservedPlan {
  Matrix pi_hat;
  Vector row_margins;
  Vector col_margins;

  static ObservedPlan from_matrix(Matrix pi_hat);
};

struct InverseConfig {
  double moment_tol = 1e-6;    // absolute, on sum pi phi^k - observed moment
  double marginal_tol = 1e-9;  // relative to total observed mass
  int max_iterations = 20000;  // outer block sweeps
};

struct FitReport {
  int iterations = 0;
  double moment_residual = 0.0;
  double marginal_residual = 0.0;
  double objective = 0.0;
  std::vector<double> objective_history;  // one entry per block sweep
  bool converged = false;
  std::vector<int> dropped;  // gravity: country indices removed before the fit
  std::vector<std::string> warnings;
};

struct InverseFit {
  Vector lambda;
  Potentials potentials;  // fixed effects, normalized to min_x u_x = 0
  TransportPlan fitted;
  FitReport report;
};

/// Moment-matching estimation of lambda: block coordinate descent with
/// closed-form scaling steps on (u, v) and a damped Newton step on lambda.
/// At convergence the fitted plan has the observed margins and moments.
InverseFit fit_inverse_ot(const ObservedPlan& obs, const std::vector<Matrix>& basis,
                          const InverseConfig& cfg = {});

struct LassoFit {
  Vector lambda;
  Potentials potentials;
  TransportPlan fitted;
  FitReport report;
  std::vector<int> active_set;  // indices with lambda_k != 0
};

/// l1-penalized variant: scaling blocks alternate with a proximal gradient
/// (soft-threshold) step on lambda. penalty_weight = 0 recovers
/// fit_inverse_ot's optimum.
LassoFit fit_lasso(const ObservedPlan& obs, const std::vector<Matrix>& basis,
                   double penalty_weight, const InverseConfig& cfg = {});

struct GravityFit {
  Vector lambda;
  Potentials resistances;  // exporter/importer fixed effects
  TransportPlan fitted;    // retained countries, structural zero diagonal
  std::vector<int> retained;
  FitReport report;
};

/// Gravity-equation wrapper: square flow matrix, diagonal excluded from all
/// sums, countries with zero exports or imports dropped with a warning.
GravityFit gravity_fit(const ObservedPlan& flows, const std::vector<Matrix>& basis,
                       const InverseConfig& cfg = {});

}  // namespace otecon
