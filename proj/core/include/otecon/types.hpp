#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace otecon {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Labeled nonnegative mass vector over a finite type space. Masses are raw
/// (not normalized to probabilities); normalization is the caller's choice.
struct DiscreteMeasure {
  std::vector<std::string> labels;
  Vector weights;

  int size() const { return static_cast<int>(weights.size()); }
  double total_mass() const { return weights.sum(); }

  /// Validating constructor with explicit labels.
  static DiscreteMeasure with_labels(std::vector<std::string> labels, Vector weights);
  /// Validating constructor; labels default to "0", "1", ...
  static DiscreteMeasure from_weights(Vector weights);
};

/// Dense matrix of pairwise match surplus (entries may be negative;
/// cost = -surplus).
struct SurplusMatrix {
  Matrix values;

  explicit SurplusMatrix(Matrix values);
  int rows() const { return static_cast<int>(values.rows()); }
  int cols() const { return static_cast<int>(values.cols()); }
};

/// Nonnegative coupling with cached margins and, when a surplus is attached,
/// the total value sum(mass * surplus).
struct TransportPlan {
  Matrix mass;
  Vector row_margins;
  Vector col_margins;
  std::optional<double> value;

  static TransportPlan from_mass(Matrix mass);
  static TransportPlan from_mass(Matrix mass, const SurplusMatrix& surplus);
};

/// Dual pair (u, v). feasibility_violation is
/// max over (x,y) of surplus - u_x - v_y, clipped below at zero.
struct Potentials {
  Vector u;
  Vector v;
  double feasibility_violation = 0.0;
};

Potentials make_potentials(Vector u, Vector v, const SurplusMatrix& surplus);

struct ToleranceConfig {
  double feasibility_tol = 1e-9;
  double duality_gap_tol = 1e-8;
  int max_iterations = 200000;
  /// Flow masses below mass_quantum * total mass count as saturated.
  double mass_quantum = 1e-12;
};

/// Outcome of validate_problem. Never an error: problems are described, not
/// rejected.
struct ValidationReport {
  bool valid = true;     // dimensions consistent, entries finite, weights >= 0
  bool balanced = true;  // sum p == sum q within feasibility_tol (scaled)
  std::vector<std::string> issues;
};

/// Total check of a transport problem: dimension mismatches, negative
/// weights, non-finite entries, and the mass balance required by the
/// equality-margin problem.
ValidationReport validate_problem(const DiscreteMeasure& p, const DiscreteMeasure& q,
                                  const SurplusMatrix& surplus,
                                  const ToleranceConfig& cfg = {});

/// Independent coupling pi_xy = p_x q_y for probability measures.
TransportPlan random_matching(const DiscreteMeasure& p, const DiscreteMeasure& q,
                              const ToleranceConfig& cfg = {});

/// Dual value minus primal value for a feasible plan and feasible potentials.
/// Weak duality makes the result >= -tol; rejects infeasible inputs naming
/// the violated constraint.
double duality_gap(const TransportPlan& plan, const Potentials& pot,
                   const SurplusMatrix& surplus, const DiscreteMeasure& p,
                   const DiscreteMeasure& q, const ToleranceConfig& cfg = {});

}  // namespace otecon
