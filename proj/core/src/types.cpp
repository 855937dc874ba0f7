#include "otecon/types.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace otecon {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

DiscreteMeasure DiscreteMeasure::with_labels(std::vector<std::string> labels, Vector weights) {
  require(static_cast<int>(labels.size()) == weights.size(),
          "measure: labels and weights must have equal length");
  std::set<std::string> seen;
  for (const auto& l : labels) {
    require(seen.insert(l).second, "measure: duplicate label '" + l + "'");
  }
  for (int i = 0; i < weights.size(); ++i) {
    require(std::isfinite(weights[i]), "measure: weight " + std::to_string(i) + " is not finite");
    require(weights[i] >= 0.0, "measure: weight " + std::to_string(i) + " is negative");
  }
  return DiscreteMeasure{std::move(labels), std::move(weights)};
}

DiscreteMeasure DiscreteMeasure::from_weights(Vector weights) {
  std::vector<std::string> labels(weights.size());
  for (int i = 0; i < weights.size(); ++i) labels[i] = std::to_string(i);
  return with_labels(std::move(labels), std::move(weights));
}

SurplusMatrix::SurplusMatrix(Matrix v) : values(std::move(v)) {
  require(values.allFinite(), "surplus: entries must be finite");
}

TransportPlan TransportPlan::from_mass(Matrix mass) {
  require(mass.allFinite(), "plan: entries must be finite");
  require((mass.array() >= 0.0).all(), "plan: entries must be nonnegative");
  TransportPlan plan;
  plan.row_margins = mass.rowwise().sum();
  plan.col_margins = mass.colwise().sum().transpose();
  plan.mass = std::move(mass);
  return plan;
}

TransportPlan TransportPlan::from_mass(Matrix mass, const SurplusMatrix& surplus) {
  require(mass.rows() == surplus.values.rows() && mass.cols() == surplus.values.cols(),
          "plan: dimensions do not match the surplus matrix");
  TransportPlan plan = from_mass(std::move(mass));
  plan.value = (plan.mass.array() * surplus.values.array()).sum();
  return plan;
}

Potentials make_potentials(Vector u, Vector v, const SurplusMatrix& surplus) {
  require(u.size() == surplus.values.rows() && v.size() == surplus.values.cols(),
          "potentials: lengths must match the surplus matrix");
  double worst = 0.0;
  for (int x = 0; x < u.size(); ++x)
    for (int y = 0; y < v.size(); ++y)
      worst = std::max(worst, surplus.values(x, y) - u[x] - v[y]);
  return Potentials{std::move(u), std::move(v), worst};
}

ValidationReport validate_problem(const DiscreteMeasure& p, const DiscreteMeasure& q,
                                  const SurplusMatrix& surplus, const ToleranceConfig& cfg) {
  ValidationReport report;
  auto flag = [&report](const std::string& msg) {
    report.valid = false;
    report.issues.push_back(msg);
  };

  if (surplus.rows() != p.size())
    flag("surplus has " + std::to_string(surplus.rows()) + " rows but p has " +
         std::to_string(p.size()) + " types");
  if (surplus.cols() != q.size())
    flag("surplus has " + std::to_string(surplus.cols()) + " cols but q has " +
         std::to_string(q.size()) + " types");
  if (static_cast<int>(p.labels.size()) != p.size()) flag("p: label/weight length mismatch");
  if (static_cast<int>(q.labels.size()) != q.size()) flag("q: label/weight length mismatch");

  for (int i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p.weights[i])) flag("p[" + std::to_string(i) + "] is not finite");
    else if (p.weights[i] < 0.0) flag("p[" + std::to_string(i) + "] is negative");
  }
  for (int i = 0; i < q.size(); ++i) {
    if (!std::isfinite(q.weights[i])) flag("q[" + std::to_string(i) + "] is not finite");
    else if (q.weights[i] < 0.0) flag("q[" + std::to_string(i) + "] is negative");
  }
  if (!surplus.values.allFinite()) flag("surplus has non-finite entries");

  const double scale = std::max(1.0, std::max(p.weights.sum(), q.weights.sum()));
  report.balanced =
      std::abs(p.weights.sum() - q.weights.sum()) <= cfg.feasibility_tol * scale;
  if (!report.balanced)
    report.issues.push_back(
        "mass imbalance: sum p = " + std::to_string(p.weights.sum()) + ", sum q = " +
        std::to_string(q.weights.sum()) +
        " (equality-margin problem infeasible; unmatched variant feasible)");
  return report;
}

TransportPlan random_matching(const DiscreteMeasure& p, const DiscreteMeasure& q,
                              const ToleranceConfig& cfg) {
  const double mp = p.total_mass();
  const double mq = q.total_mass();
  const double scale = std::max(1.0, std::max(mp, mq));
  require(std::abs(mp - mq) <= cfg.feasibility_tol * scale,
          "random_matching: unbalanced masses");
  require(mq > 0.0, "random_matching: total mass must be positive");
  // For probability measures this is exactly pi_xy = p_x q_y; dividing by the
  // total keeps the margins exact for any balanced masses.
  Matrix mass = (p.weights * q.weights.transpose()) / mq;
  return TransportPlan::from_mass(std::move(mass));
}

double duality_gap(const TransportPlan& plan, const Potentials& pot,
                   const SurplusMatrix& surplus, const DiscreteMeasure& p,
                   const DiscreteMeasure& q, const ToleranceConfig& cfg) {
  const int n = p.size();
  const int m = q.size();
  require(plan.mass.rows() == n && plan.mass.cols() == m, "duality_gap: plan dimensions");
  require(surplus.rows() == n && surplus.cols() == m, "duality_gap: surplus dimensions");
  require(pot.u.size() == n && pot.v.size() == m, "duality_gap: potential lengths");

  const double scale = std::max(1.0, p.total_mass());
  const double tol = cfg.feasibility_tol * scale;
  for (int x = 0; x < n; ++x) {
    if (std::abs(plan.row_margins[x] - p.weights[x]) > tol) {
      std::ostringstream os;
      os << "duality_gap: plan infeasible, row margin " << x << " is "
         << plan.row_margins[x] << " but p[" << x << "] = " << p.weights[x];
      throw std::invalid_argument(os.str());
    }
  }
  for (int y = 0; y < m; ++y) {
    if (std::abs(plan.col_margins[y] - q.weights[y]) > tol) {
      std::ostringstream os;
      os << "duality_gap: plan infeasible, column margin " << y << " is "
         << plan.col_margins[y] << " but q[" << y << "] = " << q.weights[y];
      throw std::invalid_argument(os.str());
    }
  }
  if (pot.feasibility_violation > tol) {
    std::ostringstream os;
    os << "duality_gap: potentials infeasible, max surplus - u - v = "
       << pot.feasibility_violation;
    throw std::invalid_argument(os.str());
  }

  const double dual = p.weights.dot(pot.u) + q.weights.dot(pot.v);
  const double primal = (plan.mass.array() * surplus.values.array()).sum();
  return dual - primal;
}

}  // namespace otecon
