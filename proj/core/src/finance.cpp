#include "otecon/finance.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "otecon/errors.hpp"
#include "otecon/linprog.hpp"
#include "otecon/otexact.hpp"

namespace otecon {

namespace {

Matrix payoff_matrix(const MarginalLaw& P, const MarginalLaw& Q, const PayoffFn& payoff) {
  Matrix phi(P.size(), Q.size());
  for (int i = 0; i < P.size(); ++i)
    for (int j = 0; j < Q.size(); ++j) phi(i, j) = payoff(P.support[i], Q.support[j]);
  if (!phi.allFinite()) throw std::invalid_argument("option bounds: payoff must be finite");
  return phi;
}

void check_sandwich(const BoundsResult& r, const ToleranceConfig& cfg) {
  const double scale =
      1.0 + std::max(std::abs(r.lower), std::abs(r.upper));
  const double tol = cfg.duality_gap_tol * scale;
  if (r.lower > r.upper + tol || r.upper_hedge.price < r.upper - tol ||
      r.lower_hedge.price > r.lower + tol)
    throw SolverError("option bounds: hedge prices failed the duality sandwich");
}

}  // namespace

MarginalLaw::MarginalLaw(Vector support_in, Vector probs_in)
    : support(std::move(support_in)), probs(std::move(probs_in)) {
  if (support.size() != probs.size())
    throw std::invalid_argument("marginal law: support/probability lengths differ");
  if (support.size() == 0) throw std::invalid_argument("marginal law: empty support");
  if (!support.allFinite() || !probs.allFinite())
    throw std::invalid_argument("marginal law: entries must be finite");
  for (int i = 1; i < support.size(); ++i)
    if (support[i] < support[i - 1])
      throw std::invalid_argument("marginal law: support must be sorted ascending");
  if ((probs.array() < 0.0).any() || std::abs(probs.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("marginal law: probabilities must lie on the simplex");
}

BoundsResult option_bounds_static(const MarginalLaw& P, const MarginalLaw& Q,
                                  const PayoffFn& payoff, const ToleranceConfig& cfg) {
  return option_bounds_static(P, Q, payoff_matrix(P, Q, payoff), cfg);
}

BoundsResult option_bounds_static(const MarginalLaw& P, const MarginalLaw& Q,
                                  const Matrix& phi, const ToleranceConfig& cfg) {
  if (phi.rows() != P.size() || phi.cols() != Q.size())
    throw std::invalid_argument("option bounds: payoff dimensions");
  if (!phi.allFinite()) throw std::invalid_argument("option bounds: payoff must be finite");
  DiscreteMeasure p = DiscreteMeasure::from_weights(P.probs);
  DiscreteMeasure q = DiscreteMeasure::from_weights(Q.probs);

  OtSolution hi = solve_exact(p, q, SurplusMatrix(phi), cfg);
  OtSolution lo = solve_exact(p, q, SurplusMatrix(-phi), cfg);

  BoundsResult result;
  result.upper = hi.value;
  result.lower = -lo.value;
  result.upper_plan = hi.plan;
  result.lower_plan = TransportPlan::from_mass(lo.plan.mass, SurplusMatrix(phi));
  result.upper_hedge = {hi.potentials.u, hi.potentials.v, Vector(),
                        P.probs.dot(hi.potentials.u) + Q.probs.dot(hi.potentials.v)};
  result.lower_hedge = {-lo.potentials.u, -lo.potentials.v, Vector(),
                        -(P.probs.dot(lo.potentials.u) + Q.probs.dot(lo.potentials.v))};
  check_sandwich(result, cfg);
  return result;
}

namespace {

// Means must match and call-payoff expectations must dominate at every
// support threshold; otherwise no martingale coupling exists.
void check_convex_order(const MarginalLaw& P, const MarginalLaw& Q,
                        const ToleranceConfig& cfg) {
  const double scale = 1.0 + std::max(P.support.cwiseAbs().maxCoeff(),
                                      Q.support.cwiseAbs().maxCoeff());
  const double tol = cfg.feasibility_tol * scale;
  if (std::abs(P.mean() - Q.mean()) > tol) {
    std::ostringstream os;
    os << "no martingale coupling: mean of X is " << P.mean() << " but mean of Y is "
       << Q.mean();
    throw NoMartingaleCoupling(os.str());
  }
  auto call_price = [](const MarginalLaw& law, double k) {
    double total = 0.0;
    for (int i = 0; i < law.size(); ++i)
      total += law.probs[i] * std::max(0.0, law.support[i] - k);
    return total;
  };
  std::vector<double> thresholds(P.support.data(), P.support.data() + P.size());
  thresholds.insert(thresholds.end(), Q.support.data(), Q.support.data() + Q.size());
  for (double k : thresholds) {
    if (call_price(Q, k) < call_price(P, k) - tol) {
      std::ostringstream os;
      os << "no martingale coupling: convex order fails at threshold " << k
         << " (E[(Y-k)+] = " << call_price(Q, k) << " < E[(X-k)+] = " << call_price(P, k)
         << ")";
      throw NoMartingaleCoupling(os.str());
    }
  }
}

struct MartingaleLp {
  LinearProgram lp;
  double row_scale = 1.0;
};

MartingaleLp build_martingale_lp(const MarginalLaw& P, const MarginalLaw& Q,
                                 const Matrix& phi, bool maximize) {
  const int n = static_cast<int>(phi.rows());
  const int m = static_cast<int>(phi.cols());
  MartingaleLp out;
  // Martingale rows are scaled by the largest support magnitude so the
  // simplex tableau stays well conditioned.
  out.row_scale = std::max(1.0, std::max(P.support.cwiseAbs().maxCoeff(),
                                         Q.support.cwiseAbs().maxCoeff()));
  LinearProgram& lp = out.lp;
  const int rows = n + m + n;
  lp.constraints = Matrix::Zero(rows, n * m);
  lp.rhs = Vector::Zero(rows);
  lp.sense.assign(rows, RowSense::Equal);
  lp.objective = Vector(n * m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      const int var = i * m + j;
      lp.objective[var] = maximize ? phi(i, j) : -phi(i, j);
      lp.constraints(i, var) = 1.0;
      lp.constraints(n + j, var) = 1.0;
      lp.constraints(n + m + i, var) = (Q.support[j] - P.support[i]) / out.row_scale;
    }
  lp.rhs.head(n) = P.probs;
  lp.rhs.segment(n, m) = Q.probs;
  return out;
}

}  // namespace

BoundsResult option_bounds_martingale(const MarginalLaw& P, const MarginalLaw& Q,
                                      const PayoffFn& payoff, const ToleranceConfig& cfg) {
  return option_bounds_martingale(P, Q, payoff_matrix(P, Q, payoff), cfg);
}

BoundsResult option_bounds_martingale(const MarginalLaw& P, const MarginalLaw& Q,
                                      const Matrix& phi, const ToleranceConfig& cfg) {
  if (phi.rows() != P.size() || phi.cols() != Q.size())
    throw std::invalid_argument("option bounds: payoff dimensions");
  if (!phi.allFinite()) throw std::invalid_argument("option bounds: payoff must be finite");
  check_convex_order(P, Q, cfg);

  const int n = static_cast<int>(phi.rows());
  const int m = static_cast<int>(phi.cols());
  auto solve_side = [&](bool maximize) {
    MartingaleLp built = build_martingale_lp(P, Q, phi, maximize);
    LpSolution sol = solve_lp(built.lp, cfg);
    if (sol.status == LpStatus::Infeasible)
      throw NoMartingaleCoupling(
          "no martingale coupling: the transport program with E[Y|X] = X rows is infeasible");
    if (sol.status != LpStatus::Optimal)
      throw SolverError(std::string("option bounds: simplex returned ") +
                        to_string(sol.status));
    return std::pair<LpSolution, double>(std::move(sol), built.row_scale);
  };

  auto [hi, hi_scale] = solve_side(true);
  auto [lo, lo_scale] = solve_side(false);

  Matrix hi_mass = Eigen::Map<const Matrix>(hi.x.data(), m, n).transpose();
  Matrix lo_mass = Eigen::Map<const Matrix>(lo.x.data(), m, n).transpose();

  BoundsResult result;
  result.upper = hi.objective_value;
  result.lower = -lo.objective_value;
  result.upper_plan = TransportPlan::from_mass(hi_mass, SurplusMatrix(phi));
  result.lower_plan = TransportPlan::from_mass(lo_mass, SurplusMatrix(phi));
  result.upper_hedge = {hi.y.head(n), hi.y.segment(n, m), hi.y.tail(n) / hi_scale,
                        P.probs.dot(hi.y.head(n)) + Q.probs.dot(hi.y.segment(n, m))};
  result.lower_hedge = {-lo.y.head(n), -lo.y.segment(n, m), -lo.y.tail(n) / lo_scale,
                        -(P.probs.dot(lo.y.head(n)) + Q.probs.dot(lo.y.segment(n, m)))};
  check_sandwich(result, cfg);
  return result;
}

}  // namespace otecon
