#pragma once

#include "otecon/types.hpp"

namespace otecon {

/// One complementary-slackness record: a support cell and its dual slack.
struct SlacknessEntry {
  int x = 0;
  int y = 0;
  double mass = 0.0;
  double slack = 0.0;  // u_x + v_y - surplus_xy
};

struct OtSolution {
  TransportPlan plan;
  Potentials potentials;
  double value = 0.0;
  std::vector<SlacknessEntry> slackness_report;
  int iterations = 0;
  /// Mass left unassigned per type (all zeros for the equality variant).
  Vector unmatched_p;
  Vector unmatched_q;
};

/// Bipartite network view of a transport problem: nodes Z = X then Y, one
/// arc per (x, y) pair, incidence +1 at the head y and -1 at the tail x,
/// signed quantities (-p, q), arc costs c = -surplus.
struct NetworkView {
  int n = 0;  // |X|
  int m = 0;  // |Y|
  Matrix arc_costs;       // n x m, c = -surplus
  Vector signed_quantity; // size n + m: (-p, q)

  static NetworkView from_problem(const DiscreteMeasure& p, const DiscreteMeasure& q,
                                  const SurplusMatrix& surplus);
  int nodes() const { return n + m; }
  int arcs() const { return n * m; }
  /// Dense arc-node incidence matrix (arcs x nodes), one +1 and one -1 per row.
  Matrix incidence() const;
  /// (grad v)_xy = v_y - v_x for a signed price vector over the nodes.
  Matrix apply_gradient(const Vector& signed_prices) const;
};

/// Exact equality-margin OT by successive shortest paths with node
/// potentials (Bellman-Ford start, Dijkstra with reduced costs after).
/// Returns the optimal plan, duals normalized to min_x u_x = 0, and a
/// certified slackness report.
OtSolution solve_exact(const DiscreteMeasure& p, const DiscreteMeasure& q,
                       const SurplusMatrix& surplus, const ToleranceConfig& cfg = {});

/// Variant with unassigned agents: row sums <= p, column sums <= q,
/// duals u, v >= 0. Implemented on the same flow engine by augmenting the
/// network with a null node of unbounded capacity and zero-surplus arcs.
OtSolution solve_with_unmatched(const DiscreteMeasure& p, const DiscreteMeasure& q,
                                const SurplusMatrix& surplus,
                                const ToleranceConfig& cfg = {});

/// Min-cost-flow value C at a signed quantity vector; +infinity when the
/// quantities do not balance or no nonnegative flow matches them.
double eval_cost_C(const Vector& signed_quantity, const Matrix& arc_costs,
                   const ToleranceConfig& cfg = {});

/// Smoothed indirect profit C*_sigma(v) = sigma * sum exp((c - grad v)/sigma).
double eval_Cstar_regularized(const Vector& signed_prices, const SurplusMatrix& surplus,
                              double sigma);

/// Lattice submodularity check of C*_sigma at a pair of signed price
/// vectors: C*(min) + C*(max) <= C*(v1) + C*(v2) + tol.
bool check_submodular_Cstar(const Vector& v1, const Vector& v2,
                            const SurplusMatrix& surplus, double sigma,
                            const ToleranceConfig& cfg = {});

}  // namespace otecon
