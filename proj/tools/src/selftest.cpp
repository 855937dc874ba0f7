#include "selftest.hpp"

#include <otecon/choice.hpp>
#include <otecon/entropic.hpp>
#include <otecon/errors.hpp>
#include <otecon/finance.hpp>
#include <otecon/games.hpp>
#include <otecon/inverse.hpp>
#include <otecon/linprog.hpp>
#include <otecon/markets.hpp>
#include <otecon/otexact.hpp>
#include <otecon/quantiles.hpp>
#include <otecon/rng.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

#include "problem_io.hpp"

namespace otecon::cli {

namespace {

struct Check {
  bool ok = true;
  double worst = 0.0;
  std::string note;

  void expect(bool cond, double magnitude, const std::string& what) {
    worst = std::max(worst, magnitude);
    if (!cond && ok) {
      ok = false;
      std::ostringstream os;
      os << what << " (measured " << magnitude << ")";
      note = os.str();
    }
  }
};

Matrix random_matrix(SplitMix64& rng, int n, int m, double lo = -1.0, double hi = 1.0) {
  Matrix out(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) out(i, j) = rng.uniform(lo, hi);
  return out;
}

Vector random_simplex(SplitMix64& rng, int n) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = 0.05 + rng.uniform01();
  return v / v.sum();
}

double transportation_value_lp(const DiscreteMeasure& p, const DiscreteMeasure& q,
                               const Matrix& phi) {
  const int n = p.size(), m = q.size();
  LinearProgram lp;
  lp.objective = Vector(n * m);
  lp.constraints = Matrix::Zero(n + m, n * m);
  lp.rhs = Vector(n + m);
  lp.sense.assign(n + m, RowSense::Equal);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < m; ++y) {
      lp.objective[x * m + y] = phi(x, y);
      lp.constraints(x, x * m + y) = 1.0;
      lp.constraints(n + y, x * m + y) = 1.0;
    }
  lp.rhs.head(n) = p.weights;
  lp.rhs.tail(m) = q.weights;
  LpSolution sol = solve_lp(lp);
  return sol.status == LpStatus::Optimal ? sol.objective_value
                                         : std::numeric_limits<double>::quiet_NaN();
}

// 1. Strong duality of the flow solver, cross-checked against the simplex.
CriterionResult criterion_strong_duality() {
  Check c;
  SplitMix64 rng(1001);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 2 + static_cast<int>(rng.next() % 19);
    const int m = 2 + static_cast<int>(rng.next() % 19);
    auto p = DiscreteMeasure::from_weights(random_simplex(rng, n));
    auto q = DiscreteMeasure::from_weights(random_simplex(rng, m));
    Matrix phi = random_matrix(rng, n, m);
    OtSolution sol = solve_exact(p, q, SurplusMatrix(phi));
    const double dual = p.weights.dot(sol.potentials.u) + q.weights.dot(sol.potentials.v);
    c.expect(std::abs(dual - sol.value) <= 1e-8, std::abs(dual - sol.value),
             "primal-dual gap above 1e-8");
    const double lp_value = transportation_value_lp(p, q, phi);
    c.expect(std::abs(lp_value - sol.value) <= 1e-8, std::abs(lp_value - sol.value),
             "network-flow vs simplex value gap above 1e-8");
  }
  return {1, "strong duality on 100 random instances (flow vs simplex)", c.ok, c.note};
}

// 2. Complementary slackness on the same ensemble.
CriterionResult criterion_slackness() {
  Check c;
  SplitMix64 rng(1001);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 2 + static_cast<int>(rng.next() % 19);
    const int m = 2 + static_cast<int>(rng.next() % 19);
    auto p = DiscreteMeasure::from_weights(random_simplex(rng, n));
    auto q = DiscreteMeasure::from_weights(random_simplex(rng, m));
    Matrix phi = random_matrix(rng, n, m);
    OtSolution sol = solve_exact(p, q, SurplusMatrix(phi));
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < m; ++y) {
        if (sol.plan.mass(x, y) <= 1e-9) continue;
        const double slack =
            sol.potentials.u[x] + sol.potentials.v[y] - phi(x, y);
        c.expect(std::abs(slack) <= 1e-9, std::abs(slack),
                 "support cell with dual slack above 1e-9");
      }
  }
  return {2, "complementary slackness on every supported cell", c.ok, c.note};
}

// 3. Scaling-iteration correctness: margins, monotone dual, analytic 2x2.
CriterionResult criterion_ipfp(const SelfTestConfig& cfg) {
  Check c;
  SplitMix64 rng(1003);
  for (int rep = 0; rep < 5; ++rep) {
    const int n = 3 + static_cast<int>(rng.next() % 5);
    const int m = 3 + static_cast<int>(rng.next() % 5);
    auto p = DiscreteMeasure::from_weights(random_simplex(rng, n));
    auto q = DiscreteMeasure::from_weights(random_simplex(rng, m));
    EntropicConfig ecfg;
    ecfg.sigma = 0.4;
    ecfg.marginal_tol = cfg.ipfp_marginal_tol;
    ecfg.record_history = true;
    IpfpResult res = ipfp_solve(p, q, SurplusMatrix(random_matrix(rng, n, m)), ecfg);
    const double row = (res.plan.row_margins - p.weights).cwiseAbs().maxCoeff();
    const double col = (res.plan.col_margins - q.weights).cwiseAbs().maxCoeff();
    c.expect(row <= 1e-10 && col <= 1e-10, std::max(row, col),
             "marginal residual above 1e-10 at termination");
    for (std::size_t t = 1; t < res.history.size(); ++t)
      c.expect(res.history[t].dual_objective <= res.history[t - 1].dual_objective + 1e-12,
               res.history[t].dual_objective - res.history[t - 1].dual_objective,
               "dual objective increased across a sweep");
  }
  // Analytic 2x2 instance at sigma = 1/2 against a bisection oracle.
  {
    EntropicConfig ecfg;
    ecfg.sigma = 0.5;
    ecfg.marginal_tol = cfg.ipfp_marginal_tol;
    Matrix phi(2, 2);
    phi << 1, 0, 0, 1;
    auto half = DiscreteMeasure::from_weights(Vector::Constant(2, 0.5));
    IpfpResult res = ipfp_solve(half, half, SurplusMatrix(phi), ecfg);
    double lo = 1e-12, hi = 0.5 - 1e-12;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (std::log(mid / (0.5 - mid)) - 2.0 < 0.0 ? lo : hi) = mid;
    }
    const double oracle = 0.5 * (lo + hi);
    c.expect(std::abs(oracle - 0.5 * std::exp(2.0) / (1.0 + std::exp(2.0))) <= 1e-12,
             std::abs(oracle - 0.5 * std::exp(2.0) / (1.0 + std::exp(2.0))),
             "bisection oracle does not match the closed form");
    c.expect(std::abs(res.plan.mass(0, 0) - oracle) <= 1e-8,
             std::abs(res.plan.mass(0, 0) - oracle),
             "2x2 analytic diagonal mass missed beyond 1e-8");
  }
  return {3, "matrix scaling: margins, monotone dual descent, analytic 2x2", c.ok, c.note};
}

// 4. Vanishing regularization against the exact value.
CriterionResult criterion_sigma_to_zero() {
  Check c;
  for (std::uint64_t seed : {2001ull, 2002ull, 2003ull}) {
    SplitMix64 rng(seed);
    auto p = DiscreteMeasure::from_weights(random_simplex(rng, 5));
    auto q = DiscreteMeasure::from_weights(random_simplex(rng, 5));
    Matrix phi = random_matrix(rng, 5, 5);
    const double exact = solve_exact(p, q, SurplusMatrix(phi)).value;
    double previous = std::numeric_limits<double>::infinity();
    for (double sigma : {1.0, 0.1, 0.01, 0.001}) {
      EntropicConfig ecfg;
      ecfg.sigma = sigma;
      ecfg.max_iterations = 2000000;
      if (sigma < 0.05) ecfg.epsilon_scaling_schedule = {1.0, 0.3, 0.1, 0.03, 0.01, 0.003};
      IpfpResult res = ipfp_solve(p, q, SurplusMatrix(phi), ecfg);
      const double linear = (res.plan.mass.array() * phi.array()).sum();
      const double gap = std::abs(exact - linear);
      c.expect(gap <= sigma * std::log(25.0) + 1e-6, gap,
               "entropic value gap above sigma*log(|X||Y|)+1e-6");
      c.expect(gap <= previous + 1e-9, gap - previous, "gap failed to shrink with sigma");
      previous = gap;
    }
  }
  return {4, "entropic value converges to the exact value as sigma vanishes", c.ok, c.note};
}

// 5. Inverse fit recovers a planted parameter; gravity margins close.
CriterionResult criterion_inverse() {
  Check c;
  SplitMix64 rng(3001);
  std::vector<Matrix> basis = {random_matrix(rng, 10, 10), random_matrix(rng, 10, 10),
                               random_matrix(rng, 10, 10)};
  Vector lambda_star(3);
  lambda_star << 1.5, -0.7, 0.3;
  Matrix s = Matrix::Zero(10, 10);
  for (int j = 0; j < 3; ++j) s += lambda_star[j] * basis[j];
  Matrix pi_hat = s.array().exp();
  InverseConfig icfg;
  icfg.moment_tol = 1e-8;
  icfg.marginal_tol = 1e-10;
  InverseFit fit = fit_inverse_ot(ObservedPlan::from_matrix(pi_hat), basis, icfg);
  c.expect((fit.lambda - lambda_star).cwiseAbs().maxCoeff() <= 1e-6,
           (fit.lambda - lambda_star).cwiseAbs().maxCoeff(),
           "planted coefficients missed beyond 1e-6");
  for (int j = 0; j < 3; ++j) {
    const double moment = ((fit.fitted.mass - pi_hat).array() * basis[j].array()).sum();
    c.expect(std::abs(moment) <= 1e-6, std::abs(moment), "moment condition above 1e-6");
  }

  // Gravity wrapper: planted coefficient on a symmetric distance basis, all
  // sums with the diagonal masked out.
  Matrix dist(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) dist(i, j) = -0.4 * std::abs(i - j);
  Matrix flows = Matrix::Zero(6, 6);
  SplitMix64 rng2(3002);
  Vector u0 = random_matrix(rng2, 6, 1).col(0), v0 = random_matrix(rng2, 6, 1).col(0);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      if (i != j) flows(i, j) = std::exp(1.1 * dist(i, j) - u0[i] - v0[j]);
  GravityFit gfit = gravity_fit(ObservedPlan::from_matrix(flows), {dist}, icfg);
  c.expect(std::abs(gfit.lambda[0] - 1.1) <= 1e-6, std::abs(gfit.lambda[0] - 1.1),
           "gravity coefficient missed beyond 1e-6");
  Vector exports = flows.rowwise().sum(), imports = flows.colwise().sum().transpose();
  const double balance =
      std::max((gfit.fitted.row_margins - exports).cwiseAbs().maxCoeff(),
               (gfit.fitted.col_margins - imports).cwiseAbs().maxCoeff());
  c.expect(balance <= 1e-8, balance, "balance-of-trade residual above 1e-8");
  c.expect(gfit.fitted.mass.diagonal().cwiseAbs().maxCoeff() == 0.0,
           gfit.fitted.mass.diagonal().cwiseAbs().maxCoeff(),
           "fitted flows leak onto the masked diagonal");
  return {5, "inverse fit recovers planted parameters; gravity margins close", c.ok, c.note};
}

// 6. Stability of the matching outcome on random unbalanced instances.
CriterionResult criterion_stability() {
  Check c;
  SplitMix64 rng(4001);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 1 + static_cast<int>(rng.next() % 8);
    const int m = 1 + static_cast<int>(rng.next() % 8);
    Vector pw(n), qw(m);
    for (int i = 0; i < n; ++i) pw[i] = rng.uniform(0.1, 1.0);
    for (int j = 0; j < m; ++j) qw[j] = rng.uniform(0.1, 1.0);
    Matrix phi = random_matrix(rng, n, m);
    Matrix alpha = random_matrix(rng, n, m);
    MatchingOutcome out = solve_stable_matching(DiscreteMeasure::from_weights(pw),
                                                DiscreteMeasure::from_weights(qw),
                                                SurplusMatrix(phi));
    const Vector& u = out.payoffs.u;
    const Vector& v = out.payoffs.v;
    for (int x = 0; x < n; ++x) {
      const double margin =
          std::abs(out.plan.row_margins[x] + out.single_p[x] - pw[x]);
      c.expect(margin <= 1e-9, margin, "margin-with-singles residual above 1e-9");
      c.expect(u[x] >= -1e-9, -u[x], "negative worker payoff");
      if (out.single_p[x] > 1e-9)
        c.expect(u[x] <= 1e-9, u[x], "single worker with positive payoff");
    }
    for (int y = 0; y < m; ++y) {
      const double margin =
          std::abs(out.plan.col_margins[y] + out.single_q[y] - qw[y]);
      c.expect(margin <= 1e-9, margin, "margin-with-singles residual above 1e-9");
      c.expect(v[y] >= -1e-9, -v[y], "negative firm payoff");
      if (out.single_q[y] > 1e-9)
        c.expect(v[y] <= 1e-9, v[y], "single firm with positive payoff");
    }
    WageIntervalTable wages = wage_bounds(out, alpha, phi - alpha);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < m; ++y) {
        const double slack = u[x] + v[y] - phi(x, y);
        c.expect(slack >= -1e-9, -slack, "blocking pair beyond 1e-9");
        if (out.plan.mass(x, y) > 1e-9) {
          c.expect(std::abs(slack) <= 1e-9, std::abs(slack),
                   "matched pair fails to split the surplus");
          const double width = wages.upper(x, y) - wages.lower(x, y);
          c.expect(std::abs(width) <= 1e-9, std::abs(width),
                   "matched-pair wage interval wider than 1e-9");
        }
      }
  }
  return {6, "stable-matching conditions and wage intervals on 100 instances", c.ok, c.note};
}

// 7. Demand inversion: contraction equivalence, closed form, round trip.
CriterionResult criterion_choice() {
  Check c;
  SplitMix64 rng(5001);
  {
    Matrix draws(5, 3);
    for (int i = 0; i < 5; ++i)
      for (int y = 0; y < 3; ++y) draws(i, y) = rng.normal();
    ChoiceSample sample(draws, 0.7);
    ShareVector q(random_simplex(rng, 3));
    EntropicConfig ecfg;
    ecfg.marginal_tol = 1e-12;
    MixedLogitInversion inv = invert_mixed_logit(q, sample, ecfg);
    Vector v_blp = Vector::Zero(3);
    for (std::size_t t = 0; t < std::min<std::size_t>(inv.v_history.size(), 12); ++t) {
      ShareVector sim = simulate_market_shares(v_blp, sample);
      v_blp += sample.sigma * (q.q.array().log() - sim.q.array().log()).matrix();
      const double diff = (inv.v_history[t] + v_blp).cwiseAbs().maxCoeff();
      c.expect(diff <= 1e-12, diff, "scaling and contraction iterates differ beyond 1e-12");
    }
  }
  {
    ShareVector q(random_simplex(rng, 4));
    Vector closed = invert_pure_logit(q, 0.9);
    ChoiceSample degenerate(Matrix::Zero(1, 4), 0.9);
    EntropicConfig ecfg;
    ecfg.marginal_tol = 1e-13;
    MixedLogitInversion inv = invert_mixed_logit(q, degenerate, ecfg);
    const double diff = (inv.systematic - closed).cwiseAbs().maxCoeff();
    c.expect(diff <= 1e-10, diff, "logit inversion misses the closed form beyond 1e-10");
  }
  {
    Matrix draws(25, 3);
    for (int i = 0; i < 25; ++i)
      for (int y = 0; y < 3; ++y) draws(i, y) = rng.normal();
    ChoiceSample sample(draws, 0.5);
    Vector v_star(3);
    v_star << 0.0, 0.4, -0.3;
    ShareVector q = simulate_market_shares(v_star, sample);
    EntropicConfig ecfg;
    ecfg.marginal_tol = 1e-12;
    MixedLogitInversion inv = invert_mixed_logit(q, sample, ecfg);
    const double resid =
        (simulate_market_shares(inv.systematic, sample).q - q.q).cwiseAbs().maxCoeff();
    c.expect(resid <= 1e-8, resid, "mixed-logit share round trip above 1e-8");
  }
  return {7, "demand inversion: contraction equivalence, closed form, round trip", c.ok,
          c.note};
}

// 8. Option bounds: separable width, nesting, forced coupling, infeasibility.
CriterionResult criterion_bounds() {
  Check c;
  SplitMix64 rng(6001);
  for (int rep = 0; rep < 10; ++rep) {
    MarginalLaw P(Vector::LinSpaced(3, 0.0, 2.0), random_simplex(rng, 3));
    MarginalLaw Q(Vector::LinSpaced(4, -1.0, 2.0), random_simplex(rng, 4));
    Vector a = random_matrix(rng, 3, 1).col(0), b = random_matrix(rng, 4, 1).col(0);
    Matrix payoff(3, 4);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 4; ++j) payoff(i, j) = a[i] + b[j];
    BoundsResult r = option_bounds_static(P, Q, payoff);
    c.expect(r.upper - r.lower <= 1e-9, r.upper - r.lower,
             "separable payoff priced with width above 1e-9");
  }
  for (int rep = 0; rep < 10; ++rep) {
    Vector base(3);
    base << 0.0, 1.0, 2.5;
    MarginalLaw P(base, random_simplex(rng, 3));
    std::map<double, double> atoms;
    for (int i = 0; i < 3; ++i) {
      const double d = rng.uniform(0.1, 0.5);
      atoms[P.support[i] - d] += 0.5 * P.probs[i];
      atoms[P.support[i] + d] += 0.5 * P.probs[i];
    }
    Vector qs(static_cast<Eigen::Index>(atoms.size())), qp(static_cast<Eigen::Index>(atoms.size()));
    int idx = 0;
    for (auto [xv, w] : atoms) {
      qs[idx] = xv;
      qp[idx++] = w;
    }
    MarginalLaw Q(qs, qp);
    Matrix payoff(P.size(), Q.size());
    for (int i = 0; i < P.size(); ++i)
      for (int j = 0; j < Q.size(); ++j)
        payoff(i, j) = std::abs(Q.support[j] - P.support[i]);
    BoundsResult st = option_bounds_static(P, Q, payoff);
    BoundsResult mart = option_bounds_martingale(P, Q, payoff);
    c.expect(st.lower - 1e-9 <= mart.lower && mart.lower <= mart.upper + 1e-9 &&
                 mart.upper <= st.upper + 1e-9,
             std::max(st.lower - mart.lower, mart.upper - st.upper),
             "martingale bounds escape the static bounds");
  }
  {
    MarginalLaw P(Vector::Constant(1, 1.0), Vector::Constant(1, 1.0));
    Vector s2(2), p2(2);
    s2 << 0.0, 2.0;
    p2 << 0.5, 0.5;
    MarginalLaw Q(s2, p2);
    Matrix payoff(1, 2);
    payoff << 1.0, 1.0;  // (y-1)^2 on the support {0, 2}
    BoundsResult r = option_bounds_martingale(P, Q, payoff);
    c.expect(std::abs(r.lower - 1.0) <= 1e-12 && std::abs(r.upper - 1.0) <= 1e-12,
             std::max(std::abs(r.lower - 1.0), std::abs(r.upper - 1.0)),
             "forced martingale coupling mispriced");
  }
  {
    MarginalLaw P(Vector::Constant(1, 0.0), Vector::Constant(1, 1.0));
    MarginalLaw Q(Vector::Constant(1, 1.0), Vector::Constant(1, 1.0));
    bool caught = false;
    try {
      option_bounds_martingale(P, Q, Matrix::Zero(1, 1));
    } catch (const NoMartingaleCoupling&) {
      caught = true;
    }
    c.expect(caught, caught ? 0.0 : 1.0, "mean mismatch not detected");
  }
  return {8, "option bounds: separable width, nesting, forced case, infeasibility", c.ok,
          c.note};
}

// Independent duals of the sorted grid/sample coupling via the support
// tree; pins the shift with min psi = 0 exactly like the solver does.
Matrix monotone_dual_oracle(int m, const Vector& sorted_y) {
  const int n = static_cast<int>(sorted_y.size());
  Vector taus(m);
  for (int j = 0; j < m; ++j) taus[j] = (j + 0.5) / m;
  Vector d(m), psi(n);
  d[0] = 0.0;
  int atom = 0;
  double atom_left = 1.0 / n;
  for (int j = 0; j < m; ++j) {
    double grid_left = 1.0 / m;
    while (true) {
      psi[atom] = taus[j] * sorted_y[atom] - d[j];
      const double step = std::min(grid_left, atom_left);
      grid_left -= step;
      atom_left -= step;
      if (atom_left <= 1e-15 && atom + 1 < n) {
        ++atom;
        atom_left = 1.0 / n;
      }
      if (grid_left <= 1e-15) break;
    }
    if (j + 1 < m) d[j + 1] = taus[j + 1] * sorted_y[atom] - psi[atom];
  }
  const double shift = psi.minCoeff();
  d.array() += shift;
  Matrix beta(m, 1);
  beta(0, 0) = m * d[0];
  for (int j = 1; j < m; ++j) beta(j, 0) = m * (d[j] - d[j - 1]);
  return beta;
}

// 9. Quantiles: monotone coupling optimality and the regression bridge.
CriterionResult criterion_quantiles() {
  Check c;
  SplitMix64 rng(7001);
  for (int n : {4, 5, 6}) {
    Vector y(n);
    for (int i = 0; i < n; ++i) y[i] = rng.uniform(-2.0, 2.0);
    std::sort(y.data(), y.data() + n);
    QuantileGrid grid = QuantileGrid::midpoint(n);
    auto res = quantile_transform_ot(grid, MarginalLaw(y, Vector::Constant(n, 1.0 / n)));
    c.expect(res.check.is_monotone, res.check.max_crossing_mass,
             "returned plan is not the sorted coupling");
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    double best_perm = -std::numeric_limits<double>::infinity();
    do {
      double value = 0.0;
      for (int j = 0; j < n; ++j) value += grid.taus[j] * y[perm[j]] / n;
      best_perm = std::max(best_perm, value);
    } while (std::next_permutation(perm.begin(), perm.end()));
    c.expect(res.solution.value >= best_perm - 1e-10, best_perm - res.solution.value,
             "a permutation coupling beat the solver");
  }
  // Intercept-only regression equals the empirical quantile function for
  // grid/sample sizes up to 50 x 200 (coprime pairs keep the dual unique).
  for (auto [m, n] : std::vector<std::pair<int, int>>{{5, 23}, {11, 60}, {23, 150},
                                                      {50, 199}, {49, 200}}) {
    Vector y(n);
    for (int i = 0; i < n; ++i) y[i] = rng.uniform(-3.0, 3.0);
    RegressionData data(Matrix::Ones(n, 1), y);
    VqrResult res = vqr_solve(data, QuantileGrid::midpoint(m));
    Vector sorted = y;
    std::sort(sorted.data(), sorted.data() + n);
    Matrix oracle = monotone_dual_oracle(m, sorted);
    const double diff = (res.curve.beta - oracle).cwiseAbs().maxCoeff();
    c.expect(diff <= 1e-8, diff, "regression curve deviates from the dual oracle");
    for (int j = 1; j < m; ++j) {
      const int order_stat = static_cast<int>(std::ceil(double(j) * n / m));
      const double err = std::abs(res.curve.beta(j, 0) - sorted[order_stat - 1]);
      c.expect(err <= 1e-8, err, "interior level misses the empirical quantile");
    }
  }
  return {9, "quantiles: sorted coupling optimal; regression matches empirical quantiles",
          c.ok, c.note};
}

// 10. Hide-and-seek value against the direct minimax program.
CriterionResult criterion_games() {
  Check c;
  SplitMix64 rng(8001);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 1 + static_cast<int>(rng.next() % 5);
    HideSeekGame game(random_matrix(rng, n, n, 0.5, 3.0));
    GameSolution sol = hide_and_seek_solve(game);
    const double oracle = minimax_oracle(game);
    c.expect(std::abs(sol.game_value - oracle) <= 1e-8, std::abs(sol.game_value - oracle),
             "transport value disagrees with the minimax oracle");
    c.expect(sol.seeker_guarantee >= sol.game_value - 1e-9,
             sol.game_value - sol.seeker_guarantee, "seeker strategy not certified");
    c.expect(sol.hider_exposure <= sol.game_value + 1e-9,
             sol.hider_exposure - sol.game_value, "hider strategy not certified");
  }
  return {10, "hide-and-seek value matches the minimax oracle on 50 games", c.ok, c.note};
}

// 11. Strassen duality by subset enumeration.
CriterionResult criterion_strassen() {
  Check c;
  SplitMix64 rng(9001);
  for (int rep = 0; rep < 25; ++rep) {
    const int n = 2 + static_cast<int>(rng.next() % 6);
    const int m = 2 + static_cast<int>(rng.next() % 9);
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> gamma(n, m);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < m; ++y) gamma(x, y) = rng.uniform01() < 0.35;
    IdentificationSpec spec(gamma, random_simplex(rng, n), random_simplex(rng, m));
    StrassenResult res = strassen_test(spec);
    c.expect(std::abs(res.primal - res.dual) <= 1e-8, std::abs(res.primal - res.dual),
             "primal transport value differs from the subset dual");
  }
  return {11, "set-inclusion duality: transport primal equals subset dual", c.ok, c.note};
}

// 12. Submodularity of the smoothed indirect profit.
CriterionResult criterion_submodularity() {
  Check c;
  SplitMix64 rng(10001);
  const std::vector<std::pair<int, int>> sizes = {{3, 3}, {4, 2}, {5, 5}};
  for (auto [n, m] : sizes) {
    SurplusMatrix phi(random_matrix(rng, n, m));
    for (double sigma : {0.1, 1.0}) {
      for (int rep = 0; rep < 1000; ++rep) {
        Vector v1 = random_matrix(rng, n + m, 1).col(0);
        Vector v2 = random_matrix(rng, n + m, 1).col(0);
        const bool ok = check_submodular_Cstar(v1, v2, phi, sigma);
        c.expect(ok, ok ? 0.0 : 1.0, "lattice inequality failed");
      }
    }
  }
  return {12, "submodularity of the smoothed indirect profit (6000 pairs)", c.ok, c.note};
}

// 13. Byte-identical result documents for identical input and seed.
CriterionResult criterion_cli_determinism() {
  Check c;
  const std::string raw = R"({"schema":1,"kind":"choice_invert","method":"mixed",
    "shares":[0.25,0.45,0.3],"sigma":0.6,
    "sample":{"num_draws":50,"distribution":"normal","seed":424242}})";
  const std::string raw2 = R"({"schema":1,"kind":"entropic","sigma":0.5,
    "p":{"weights":[0.5,0.5]},"q":{"weights":[0.5,0.5]},
    "surplus":{"rows":2,"cols":2,"values":[[1,0],[0,1]]}})";
  for (const std::string& text : {raw, raw2}) {
    Json doc = Json::parse(text);
    auto strip = [](Json j) {
      j.erase("wall_clock_ms");
      return j.dump();
    };
    auto [code1, out1] = run_document(doc, {}, text);
    auto [code2, out2] = run_document(doc, {}, text);
    c.expect(code1 == 0 && code2 == 0, std::max(code1, code2), "pipeline returned nonzero");
    const bool identical = strip(out1) == strip(out2);
    c.expect(identical, identical ? 0.0 : 1.0,
             "documents differ between identical runs");
  }
  return {13, "CLI determinism: identical input and seed give identical documents", c.ok,
          c.note};
}

}  // namespace

CriterionResult run_criterion(int id, const SelfTestConfig& cfg) {
  switch (id) {
    case 1: return criterion_strong_duality();
    case 2: return criterion_slackness();
    case 3: return criterion_ipfp(cfg);
    case 4: return criterion_sigma_to_zero();
    case 5: return criterion_inverse();
    case 6: return criterion_stability();
    case 7: return criterion_choice();
    case 8: return criterion_bounds();
    case 9: return criterion_quantiles();
    case 10: return criterion_games();
    case 11: return criterion_strassen();
    case 12: return criterion_submodularity();
    case 13: return criterion_cli_determinism();
    default: throw std::invalid_argument("unknown acceptance criterion id");
  }
}

std::vector<CriterionResult> run_acceptance(const SelfTestConfig& cfg) {
  std::vector<CriterionResult> results;
  for (int id = 1; id <= 13; ++id) results.push_back(run_criterion(id, cfg));
  return results;
}

int print_acceptance_report(const std::vector<CriterionResult>& results, std::ostream& out) {
  int failures = 0;
  for (const auto& r : results) {
    out << (r.passed ? "PASS" : "FAIL") << "  " << r.id << ". " << r.name;
    if (!r.passed) {
      out << " -- " << r.detail;
      ++failures;
    }
    out << "\n";
  }
  out << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
      << "\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace otecon::cli
