#include "otecon/markets.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "otecon/otexact.hpp"

namespace otecon {

MatchingOutcome solve_stable_matching(const DiscreteMeasure& p, const DiscreteMeasure& q,
                                      const SurplusMatrix& surplus,
                                      const ToleranceConfig& cfg) {
  OtSolution sol = solve_with_unmatched(p, q, surplus, cfg);

  MatchingOutcome outcome;
  outcome.plan = sol.plan;
  outcome.single_p = sol.unmatched_p;
  outcome.single_q = sol.unmatched_q;
  outcome.payoffs = sol.potentials;
  outcome.surplus_used = surplus.values;
  outcome.value = sol.value;

  // Re-check every equilibrium condition on the outcome itself.
  const int n = p.size();
  const int m = q.size();
  const double tol = cfg.feasibility_tol * std::max(1.0, p.total_mass() + q.total_mass());
  const Vector& u = outcome.payoffs.u;
  const Vector& v = outcome.payoffs.v;
  auto violate = [&](std::string kind, int x, int y, double amount) {
    outcome.stability_violations.push_back({std::move(kind), x, y, amount});
  };

  for (int x = 0; x < n; ++x) {
    const double resid =
        std::abs(outcome.plan.row_margins[x] + outcome.single_p[x] - p.weights[x]);
    if (resid > tol) violate("margin_with_singles_x", x, -1, resid);
    if (u[x] < -tol) violate("participation_u", x, -1, -u[x]);
    if (outcome.single_p[x] > tol && u[x] > tol) violate("single_payoff_u", x, -1, u[x]);
  }
  for (int y = 0; y < m; ++y) {
    const double resid =
        std::abs(outcome.plan.col_margins[y] + outcome.single_q[y] - q.weights[y]);
    if (resid > tol) violate("margin_with_singles_y", -1, y, resid);
    if (v[y] < -tol) violate("participation_v", -1, y, -v[y]);
    if (outcome.single_q[y] > tol && v[y] > tol) violate("single_payoff_v", -1, y, v[y]);
  }
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < m; ++y) {
      const double slack = u[x] + v[y] - surplus.values(x, y);
      if (slack < -tol) violate("blocking_pair", x, y, -slack);
      if (outcome.plan.mass(x, y) > tol && std::abs(slack) > tol)
        violate("matched_pair_split", x, y, std::abs(slack));
    }
  return outcome;
}

WageIntervalTable wage_bounds(const MatchingOutcome& outcome, const Matrix& alpha,
                              const Matrix& gamma, const ToleranceConfig& cfg) {
  const int n = static_cast<int>(outcome.surplus_used.rows());
  const int m = static_cast<int>(outcome.surplus_used.cols());
  if (alpha.rows() != n || alpha.cols() != m || gamma.rows() != n || gamma.cols() != m)
    throw std::invalid_argument("wage_bounds: alpha/gamma dimensions");
  const double scale = std::max(1.0, outcome.surplus_used.cwiseAbs().maxCoeff());
  if (((alpha + gamma) - outcome.surplus_used).cwiseAbs().maxCoeff() >
      cfg.feasibility_tol * scale)
    throw std::invalid_argument(
        "wage_bounds: alpha + gamma does not match the surplus the outcome was solved with");

  WageIntervalTable table;
  table.lower = gamma - Matrix::Ones(n, 1) * outcome.payoffs.v.transpose();
  table.upper = outcome.payoffs.u * Matrix::Ones(1, m) - alpha;
  return table;
}

HedonicSpec::HedonicSpec(Matrix cost, Matrix utility)
    : producer_cost(std::move(cost)), consumer_utility(std::move(utility)) {
  if (!producer_cost.allFinite() || !consumer_utility.allFinite())
    throw std::invalid_argument("hedonic: entries must be finite");
  if (producer_cost.cols() != consumer_utility.cols())
    throw std::invalid_argument("hedonic: producers and consumers must share the quality space");
  if (producer_cost.cols() == 0)
    throw std::invalid_argument("hedonic: empty quality space");
}

HedonicReduction hedonic_reduce(const HedonicSpec& spec) {
  const int n = static_cast<int>(spec.producer_cost.rows());
  const int m = static_cast<int>(spec.consumer_utility.rows());
  const int nz = spec.qualities();
  Matrix phi(n, m);
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> argmax(n, m);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < m; ++y) {
      double best = -std::numeric_limits<double>::infinity();
      int best_z = 0;
      for (int z = 0; z < nz; ++z) {
        const double s = spec.consumer_utility(y, z) - spec.producer_cost(x, z);
        if (s > best) {  // ties keep the lowest quality index
          best = s;
          best_z = z;
        }
      }
      phi(x, y) = best;
      argmax(x, y) = best_z;
    }
  return HedonicReduction{SurplusMatrix(std::move(phi)), std::move(argmax)};
}

HedonicPriceBounds hedonic_price_bounds(const MatchingOutcome& outcome,
                                        const HedonicSpec& spec,
                                        const ToleranceConfig& cfg) {
  HedonicReduction red = hedonic_reduce(spec);
  const double scale = std::max(1.0, red.surplus.values.cwiseAbs().maxCoeff());
  if ((red.surplus.values - outcome.surplus_used).cwiseAbs().maxCoeff() >
      cfg.feasibility_tol * scale)
    throw std::invalid_argument(
        "hedonic_price_bounds: outcome was not solved on this spec's reduced surplus");

  const int n = static_cast<int>(spec.producer_cost.rows());
  const int m = static_cast<int>(spec.consumer_utility.rows());
  const int nz = spec.qualities();
  const double tol = cfg.feasibility_tol * std::max(1.0, outcome.plan.mass.sum());

  HedonicPriceBounds bounds;
  bounds.lower = Vector::Constant(nz, -std::numeric_limits<double>::infinity());
  bounds.upper = Vector::Constant(nz, std::numeric_limits<double>::infinity());
  bounds.traded.assign(nz, false);
  for (int z = 0; z < nz; ++z) {
    for (int y = 0; y < m; ++y)
      bounds.lower[z] =
          std::max(bounds.lower[z], spec.consumer_utility(y, z) - outcome.payoffs.v[y]);
    for (int x = 0; x < n; ++x)
      bounds.upper[z] =
          std::min(bounds.upper[z], outcome.payoffs.u[x] + spec.producer_cost(x, z));
  }
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < m; ++y)
      if (outcome.plan.mass(x, y) > tol) bounds.traded[red.best_quality(x, y)] = true;
  return bounds;
}

}  // namespace otecon
