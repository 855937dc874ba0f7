#include "otecon/otexact.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "otecon/errors.hpp"

namespace otecon {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Successive shortest paths on the dense bipartite transport network.
// Nodes 0..n-1 are the X side (supplies), n..n+m-1 the Y side (demands).
// Maintains node potentials so Dijkstra runs on nonnegative reduced costs.
struct FlowEngine {
  int n, m;
  const Matrix& surplus;  // arc gain; cost = -surplus
  Matrix flow;
  Vector rem_supply, rem_demand;
  Vector psi;
  double quantum;
  int max_iterations;
  int augmentations = 0;

  FlowEngine(const Vector& p, const Vector& q, const Matrix& phi, const ToleranceConfig& cfg)
      : n(static_cast<int>(p.size())),
        m(static_cast<int>(q.size())),
        surplus(phi),
        flow(Matrix::Zero(p.size(), q.size())),
        rem_supply(p),
        rem_demand(q),
        psi(Vector::Zero(p.size() + q.size())),
        quantum(cfg.mass_quantum * std::max(1.0, p.sum())),
        max_iterations(cfg.max_iterations) {}

  double cost(int x, int y) const { return -surplus(x, y); }
  bool active_x(int x) const { return rem_supply[x] > quantum; }
  bool active_y(int y) const { return rem_demand[y] > quantum; }

  void init_potentials() {
    // Bellman-Ford from the supply set; with zero flow only forward arcs
    // exist, so the relaxation settles after one pass over X.
    Vector dist = Vector::Constant(n + m, kInf);
    for (int x = 0; x < n; ++x)
      if (active_x(x)) dist[x] = 0.0;
    bool changed = true;
    int pass = 0;
    while (changed && pass++ <= n + m + 1) {
      changed = false;
      for (int x = 0; x < n; ++x) {
        if (dist[x] == kInf) continue;
        for (int y = 0; y < m; ++y) {
          const double cand = dist[x] + cost(x, y);
          if (cand < dist[n + y] - 1e-18) {
            dist[n + y] = cand;
            changed = true;
          }
        }
      }
    }
    for (int z = 0; z < n + m; ++z) psi[z] = (dist[z] == kInf) ? 0.0 : dist[z];
  }

  void run() {
    init_potentials();
    std::vector<int> parent(n + m);
    std::vector<char> settled(n + m);
    Vector dist(n + m);

    while (true) {
      bool any_supply = false;
      for (int x = 0; x < n; ++x)
        if (active_x(x)) { any_supply = true; break; }
      if (!any_supply) break;
      if (augmentations >= max_iterations)
        throw NonConvergence("min-cost flow: augmentation cap reached", augmentations,
                             rem_supply.maxCoeff());

      // Dijkstra with reduced costs from all remaining supply nodes.
      dist.setConstant(kInf);
      std::fill(settled.begin(), settled.end(), 0);
      std::fill(parent.begin(), parent.end(), -1);
      for (int x = 0; x < n; ++x)
        if (active_x(x)) dist[x] = 0.0;

      int target = -1;
      while (true) {
        int cur = -1;
        double best = kInf;
        for (int z = 0; z < n + m; ++z)
          if (!settled[z] && dist[z] < best) { best = dist[z]; cur = z; }
        if (cur < 0) break;
        settled[cur] = 1;
        if (cur >= n && active_y(cur - n)) { target = cur; break; }
        if (cur < n) {
          const int x = cur;
          for (int y = 0; y < m; ++y) {
            const double rc = std::max(0.0, cost(x, y) + psi[x] - psi[n + y]);
            if (dist[x] + rc < dist[n + y]) {
              dist[n + y] = dist[x] + rc;
              parent[n + y] = x;
            }
          }
        } else {
          const int y = cur - n;
          for (int x = 0; x < n; ++x) {
            if (flow(x, y) <= quantum) continue;  // no backward residual
            const double rc = std::max(0.0, -cost(x, y) + psi[n + y] - psi[x]);
            if (dist[n + y] + rc < dist[x]) {
              dist[x] = dist[n + y] + rc;
              parent[x] = n + y;
            }
          }
        }
      }
      if (target < 0)
        throw NonConvergence("min-cost flow: no augmenting path", augmentations,
                             rem_supply.maxCoeff());

      // Bottleneck along the path, then apply.
      double delta = rem_demand[target - n];
      int z = target;
      while (parent[z] >= 0) {
        const int prev = parent[z];
        if (z < n) delta = std::min(delta, flow(z, prev - n));  // backward arc
        z = prev;
      }
      delta = std::min(delta, rem_supply[z]);
      const int source = z;

      z = target;
      while (parent[z] >= 0) {
        const int prev = parent[z];
        if (z >= n) flow(prev, z - n) += delta;
        else flow(z, prev - n) -= delta;
        z = prev;
      }
      rem_supply[source] -= delta;
      rem_demand[target - n] -= delta;

      const double dt = dist[target];
      for (int w = 0; w < n + m; ++w) psi[w] += std::min(dist[w], dt);
      ++augmentations;
    }
  }

  // Duals: u = psi on X, v = -psi on Y, extended to zero-mass types so the
  // constraint u_x + v_y >= surplus holds on every pair.
  void extract_duals(Vector& u, Vector& v, const Vector& p0, const Vector& q0) const {
    u.resize(n);
    v.resize(m);
    for (int x = 0; x < n; ++x) u[x] = psi[x];
    for (int y = 0; y < m; ++y) v[y] = -psi[n + y];
    for (int y = 0; y < m; ++y) {
      if (q0[y] > quantum) continue;
      double best = -kInf;
      for (int x = 0; x < n; ++x)
        if (p0[x] > quantum) best = std::max(best, surplus(x, y) - u[x]);
      v[y] = (best == -kInf) ? 0.0 : best;
    }
    for (int x = 0; x < n; ++x) {
      if (p0[x] > quantum) continue;
      double best = -kInf;
      for (int y = 0; y < m; ++y) best = std::max(best, surplus(x, y) - v[y]);
      u[x] = (best == -kInf) ? 0.0 : best;
    }
  }
};

OtSolution solve_flow(const DiscreteMeasure& p, const DiscreteMeasure& q,
                      const SurplusMatrix& surplus, const ToleranceConfig& cfg) {
  FlowEngine engine(p.weights, q.weights, surplus.values, cfg);
  engine.run();

  Vector u, v;
  engine.extract_duals(u, v, p.weights, q.weights);
  const double shift = (u.size() > 0) ? u.minCoeff() : 0.0;
  u.array() -= shift;
  v.array() += shift;

  OtSolution sol;
  sol.plan = TransportPlan::from_mass(engine.flow, surplus);
  sol.potentials = make_potentials(std::move(u), std::move(v), surplus);
  sol.value = *sol.plan.value;
  sol.iterations = engine.augmentations;
  sol.unmatched_p = Vector::Zero(p.size());
  sol.unmatched_q = Vector::Zero(q.size());
  for (int x = 0; x < engine.n; ++x)
    for (int y = 0; y < engine.m; ++y)
      if (engine.flow(x, y) > engine.quantum)
        sol.slackness_report.push_back(
            {x, y, engine.flow(x, y),
             sol.potentials.u[x] + sol.potentials.v[y] - surplus.values(x, y)});
  return sol;
}

}  // namespace

NetworkView NetworkView::from_problem(const DiscreteMeasure& p, const DiscreteMeasure& q,
                                      const SurplusMatrix& surplus) {
  if (surplus.rows() != p.size() || surplus.cols() != q.size())
    throw std::invalid_argument("network view: dimension mismatch");
  NetworkView view;
  view.n = p.size();
  view.m = q.size();
  view.arc_costs = -surplus.values;
  view.signed_quantity.resize(view.n + view.m);
  view.signed_quantity.head(view.n) = -p.weights;
  view.signed_quantity.tail(view.m) = q.weights;
  return view;
}

Matrix NetworkView::incidence() const {
  Matrix grad = Matrix::Zero(arcs(), nodes());
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < m; ++y) {
      grad(x * m + y, x) = -1.0;
      grad(x * m + y, n + y) = 1.0;
    }
  return grad;
}

Matrix NetworkView::apply_gradient(const Vector& signed_prices) const {
  if (signed_prices.size() != nodes())
    throw std::invalid_argument("network view: price vector length");
  Matrix out(n, m);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < m; ++y) out(x, y) = signed_prices[n + y] - signed_prices[x];
  return out;
}

OtSolution solve_exact(const DiscreteMeasure& p, const DiscreteMeasure& q,
                       const SurplusMatrix& surplus, const ToleranceConfig& cfg) {
  ValidationReport report = validate_problem(p, q, surplus, cfg);
  if (!report.valid)
    throw std::invalid_argument("solve_exact: " + report.issues.front());
  if (!report.balanced)
    throw std::invalid_argument(
        "solve_exact: unbalanced masses; use solve_with_unmatched for the "
        "variant with unassigned agents");
  return solve_flow(p, q, surplus, cfg);
}

OtSolution solve_with_unmatched(const DiscreteMeasure& p, const DiscreteMeasure& q,
                                const SurplusMatrix& surplus, const ToleranceConfig& cfg) {
  ValidationReport report = validate_problem(p, q, surplus, cfg);
  if (!report.valid)
    throw std::invalid_argument("solve_with_unmatched: " + report.issues.front());

  const int n = p.size();
  const int m = q.size();
  // Null node on each side: extra sink absorbs unmatched X mass, extra
  // source feeds unmatched Y mass, all null arcs carry zero surplus.
  Vector p_aug(n + 1), q_aug(m + 1);
  p_aug.head(n) = p.weights;
  p_aug[n] = q.total_mass();
  q_aug.head(m) = q.weights;
  q_aug[m] = p.total_mass();
  Matrix phi_aug = Matrix::Zero(n + 1, m + 1);
  phi_aug.topLeftCorner(n, m) = surplus.values;

  OtSolution aug = solve_flow(DiscreteMeasure::from_weights(p_aug),
                              DiscreteMeasure::from_weights(q_aug),
                              SurplusMatrix(phi_aug), cfg);

  // Shift-invariant dual transform: u_x + v_null and v_y + u_null are
  // feasible for the inequality-margin dual (u, v >= 0) and inherit
  // complementary slackness from the augmented problem.
  const Vector& ua = aug.potentials.u;
  const Vector& va = aug.potentials.v;
  Vector u(n), v(m);
  for (int x = 0; x < n; ++x) u[x] = std::max(0.0, ua[x] + va[m]);
  for (int y = 0; y < m; ++y) v[y] = std::max(0.0, va[y] + ua[n]);

  OtSolution sol;
  sol.plan = TransportPlan::from_mass(aug.plan.mass.topLeftCorner(n, m), surplus);
  sol.potentials = make_potentials(std::move(u), std::move(v), surplus);
  sol.value = *sol.plan.value;
  sol.iterations = aug.iterations;
  sol.unmatched_p = p.weights - sol.plan.row_margins;
  sol.unmatched_q = q.weights - sol.plan.col_margins;
  const double quantum = cfg.mass_quantum * std::max(1.0, p.total_mass() + q.total_mass());
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < m; ++y)
      if (sol.plan.mass(x, y) > quantum)
        sol.slackness_report.push_back(
            {x, y, sol.plan.mass(x, y),
             sol.potentials.u[x] + sol.potentials.v[y] - surplus.values(x, y)});
  return sol;
}

double eval_cost_C(const Vector& signed_quantity, const Matrix& arc_costs,
                   const ToleranceConfig& cfg) {
  const int n = static_cast<int>(arc_costs.rows());
  const int m = static_cast<int>(arc_costs.cols());
  if (signed_quantity.size() != n + m)
    throw std::invalid_argument("eval_cost_C: quantity vector must have one entry per node");

  const double scale = std::max(1.0, signed_quantity.cwiseAbs().sum());
  if (std::abs(signed_quantity.sum()) > cfg.feasibility_tol * scale) return kInf;

  Vector p = -signed_quantity.head(n);
  Vector q = signed_quantity.tail(m);
  const double tol = cfg.feasibility_tol * scale;
  if ((p.array() < -tol).any() || (q.array() < -tol).any()) return kInf;
  p = p.cwiseMax(0.0);
  q = q.cwiseMax(0.0);
  // Tiny clamp may leave a quantum-scale imbalance; the flow engine ships
  // what it can and the leftover is below tolerance.
  OtSolution sol = solve_flow(DiscreteMeasure::from_weights(p),
                              DiscreteMeasure::from_weights(q),
                              SurplusMatrix(-arc_costs), cfg);
  return -sol.value;
}

double eval_Cstar_regularized(const Vector& signed_prices, const SurplusMatrix& surplus,
                              double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("C*_sigma: sigma must be positive");
  const int n = surplus.rows();
  const int m = surplus.cols();
  if (signed_prices.size() != n + m)
    throw std::invalid_argument("C*_sigma: price vector must have one entry per node");
  double total = 0.0;
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < m; ++y) {
      const double c = -surplus.values(x, y);
      const double grad = signed_prices[n + y] - signed_prices[x];
      total += std::exp((c - grad) / sigma);
    }
  return sigma * total;
}

bool check_submodular_Cstar(const Vector& v1, const Vector& v2,
                            const SurplusMatrix& surplus, double sigma,
                            const ToleranceConfig& cfg) {
  if (sigma <= 0.0) throw std::invalid_argument("check_submodular_Cstar: sigma must be positive");
  if (v1.size() != v2.size())
    throw std::invalid_argument("check_submodular_Cstar: price vectors must have equal length");
  const Vector lo = v1.cwiseMin(v2);
  const Vector hi = v1.cwiseMax(v2);
  const double lhs =
      eval_Cstar_regularized(lo, surplus, sigma) + eval_Cstar_regularized(hi, surplus, sigma);
  const double rhs =
      eval_Cstar_regularized(v1, surplus, sigma) + eval_Cstar_regularized(v2, surplus, sigma);
  const double tol = cfg.feasibility_tol * (1.0 + std::abs(rhs));
  return lhs <= rhs + tol;
}

}  // namespace otecon
