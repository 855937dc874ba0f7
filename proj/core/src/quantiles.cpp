#include "otecon/quantiles.hpp"

#include <cmath>
#include <stdexcept>

#include "otecon/errors.hpp"
#include "otecon/linprog.hpp"

namespace otecon {

QuantileGrid::QuantileGrid(Vector taus_in) : taus(std::move(taus_in)) {
  if (taus.size() < 2) throw std::invalid_argument("quantile grid: needs at least two levels");
  for (int j = 0; j < taus.size(); ++j)
    if (!(taus[j] > 0.0 && taus[j] < 1.0))
      throw std::invalid_argument("quantile grid: levels must lie strictly inside (0,1)");
  for (int j = 1; j < taus.size(); ++j)
    if (taus[j] <= taus[j - 1])
      throw std::invalid_argument("quantile grid: levels must be strictly increasing");
}

QuantileGrid QuantileGrid::midpoint(int m) {
  if (m < 2) throw std::invalid_argument("quantile grid: needs at least two levels");
  Vector taus(m);
  for (int j = 0; j < m; ++j) taus[j] = (j + 0.5) / m;
  return QuantileGrid(taus);
}

RegressionData::RegressionData(Matrix X_in, Vector Y_in)
    : X(std::move(X_in)), Y(std::move(Y_in)) {
  if (X.rows() != Y.size())
    throw std::invalid_argument("regression data: X and Y row counts differ");
  if (!X.allFinite() || !Y.allFinite())
    throw std::invalid_argument("regression data: entries must be finite");
  if (X.rows() < X.cols())
    throw std::invalid_argument("regression data: fewer observations than covariates");
}

QuantileTransportResult quantile_transform_ot(const QuantileGrid& grid,
                                              const MarginalLaw& law,
                                              const ToleranceConfig& cfg) {
  const int m = grid.size();
  const int na = law.size();
  Matrix phi(m, na);
  for (int j = 0; j < m; ++j)
    for (int a = 0; a < na; ++a) phi(j, a) = grid.taus[j] * law.support[a];

  DiscreteMeasure gm = DiscreteMeasure::from_weights(Vector::Constant(m, 1.0 / m));
  DiscreteMeasure lm = DiscreteMeasure::from_weights(law.probs);
  OtSolution sol = solve_exact(gm, lm, SurplusMatrix(phi), cfg);

  // Independent oracle: fill the sorted coupling corner by corner.
  double oracle = 0.0;
  {
    int j = 0, a = 0;
    double rg = 1.0 / m, ra = law.probs[0];
    while (j < m && a < na) {
      const double step = std::min(rg, ra);
      oracle += step * grid.taus[j] * law.support[a];
      rg -= step;
      ra -= step;
      if (rg <= 1e-15) { ++j; rg = 1.0 / m; }
      if (ra <= 1e-15) { ++a; ra = (a < na) ? law.probs[a] : 0.0; }
    }
  }

  MonotoneCouplingCheck check;
  check.value = sol.value;
  check.oracle_value = oracle;
  const double mass_tol = cfg.mass_quantum * 10.0 + 1e-14;
  const double val_tol = cfg.feasibility_tol *
                         (1.0 + law.support.cwiseAbs().maxCoeff());
  for (const auto& cell : sol.slackness_report) {
    for (const auto& other : sol.slackness_report) {
      const double dx = grid.taus[cell.x] - grid.taus[other.x];
      const double dy = law.support[cell.y] - law.support[other.y];
      if (dx * dy < 0.0 && std::abs(dy) > val_tol)
        check.max_crossing_mass =
            std::max(check.max_crossing_mass, std::min(cell.mass, other.mass));
    }
  }
  check.is_monotone = check.max_crossing_mass <= mass_tol;
  return {std::move(sol), check};
}

Vector classic_qr(const RegressionData& data, double tau, const ToleranceConfig& cfg) {
  if (!(tau > 0.0 && tau < 1.0))
    throw std::invalid_argument("classic_qr: tau must lie strictly inside (0,1)");
  const int n = data.num_obs();
  const int k = data.dim();
  Eigen::ColPivHouseholderQR<Matrix> qr(data.X);
  qr.setThreshold(1e-10);
  if (qr.rank() < k)
    throw DegenerateDesign("classic_qr: design matrix is rank deficient", {});

  // Variables: beta+ (k), beta- (k), r+ (n), r- (n); rows X beta + r+ - r- = Y.
  const int vars = 2 * k + 2 * n;
  LinearProgram lp;
  lp.objective = Vector::Zero(vars);
  for (int i = 0; i < n; ++i) {
    lp.objective[2 * k + i] = -tau / n;
    lp.objective[2 * k + n + i] = -(1.0 - tau) / n;
  }
  lp.constraints = Matrix::Zero(n, vars);
  lp.constraints.block(0, 0, n, k) = data.X;
  lp.constraints.block(0, k, n, k) = -data.X;
  lp.constraints.block(0, 2 * k, n, n) = Matrix::Identity(n, n);
  lp.constraints.block(0, 2 * k + n, n, n) = -Matrix::Identity(n, n);
  lp.rhs = data.Y;
  lp.sense.assign(n, RowSense::Equal);

  LpSolution sol = solve_lp(lp, cfg);
  if (sol.status != LpStatus::Optimal)
    throw SolverError(std::string("classic_qr: simplex returned ") + to_string(sol.status));
  return sol.x.head(k) - sol.x.segment(k, k);
}

VqrResult vqr_solve(const RegressionData& data, const QuantileGrid& grid,
                    const ToleranceConfig& cfg) {
  const int m = grid.size();
  const int n = data.num_obs();
  const int k = data.dim();

  int intercept = -1;
  for (int c = 0; c < k && intercept < 0; ++c)
    if ((data.X.col(c).array() - 1.0).abs().maxCoeff() <= 1e-12) intercept = c;
  if (intercept < 0)
    throw std::invalid_argument("vqr_solve: X must contain an intercept column of ones");
  Eigen::ColPivHouseholderQR<Matrix> qr(data.X);
  qr.setThreshold(1e-10);
  if (qr.rank() < k) throw DegenerateDesign("vqr_solve: design matrix is rank deficient", {});

  const Vector xbar = data.X.colwise().mean();
  std::vector<int> covs;  // non-intercept columns, original order
  for (int c = 0; c < k; ++c)
    if (c != intercept) covs.push_back(c);
  const int kc = static_cast<int>(covs.size());
  Vector col_scale(kc);
  for (int c = 0; c < kc; ++c) {
    const Vector centered = data.X.col(covs[c]).array() - xbar[covs[c]];
    col_scale[c] = std::max(1.0, centered.cwiseAbs().maxCoeff());
  }

  // Variables pi(j,i), flattened j*n + i. Rows: m grid margins, n data
  // margins, then one mean-independence row per (grid level, covariate).
  const int vars = m * n;
  const int rows = m + n + m * kc;
  LinearProgram lp;
  lp.objective = Vector(vars);
  lp.constraints = Matrix::Zero(rows, vars);
  lp.rhs = Vector::Zero(rows);
  lp.sense.assign(rows, RowSense::Equal);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) {
      const int var = j * n + i;
      lp.objective[var] = grid.taus[j] * data.Y[i];
      lp.constraints(j, var) = 1.0;
      lp.constraints(m + i, var) = 1.0;
      for (int c = 0; c < kc; ++c)
        lp.constraints(m + n + j * kc + c, var) =
            (data.X(i, covs[c]) - xbar[covs[c]]) / col_scale[c];
    }
  lp.rhs.head(m).setConstant(1.0 / m);
  lp.rhs.segment(m, n).setConstant(1.0 / n);

  LpSolution sol = solve_lp(lp, cfg);
  if (sol.status != LpStatus::Optimal)
    throw SolverError(std::string("vqr_solve: simplex returned ") + to_string(sol.status));

  VqrResult result;
  result.lp_pivots = sol.pivots;
  result.coupling = Matrix(m, n);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) result.coupling(j, i) = sol.x[j * n + i];

  // Duals: grid rows give d, data rows give psi, the remaining rows the
  // slope multipliers. Normalize the additive freedom so min psi = 0.
  Vector d = sol.y.head(m);
  Vector psi = sol.y.segment(m, n);
  const double shift = psi.minCoeff();
  psi.array() -= shift;
  d.array() += shift;

  Matrix b = Matrix::Zero(m, k);
  for (int j = 0; j < m; ++j) {
    double dot = 0.0;
    for (int c = 0; c < kc; ++c) {
      const double h = sol.y[m + n + j * kc + c] / col_scale[c];
      b(j, covs[c]) = h;
      dot += h * xbar[covs[c]];
    }
    b(j, intercept) = d[j] - dot;
  }
  Matrix beta(m, k);
  beta.row(0) = static_cast<double>(m) * b.row(0);
  for (int j = 1; j < m; ++j) beta.row(j) = static_cast<double>(m) * (b.row(j) - b.row(j - 1));
  result.curve.beta = beta;
  result.curve.b = b;
  result.psi = psi;

  const double y_scale = 1.0 + data.Y.cwiseAbs().maxCoeff();
  for (int j = 1; j < m; ++j) {
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
      worst = std::min(worst, data.X.row(i).dot(beta.row(j) - beta.row(j - 1)));
    if (worst < -cfg.feasibility_tol * y_scale) result.crossing_segments.push_back(j);
  }

  const double mass_tol = 10.0 * cfg.mass_quantum + 1e-14;
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) {
      if (result.coupling(j, i) <= mass_tol) continue;
      result.representation_error =
          std::max(result.representation_error,
                   std::abs(data.Y[i] - data.X.row(i).dot(beta.row(j))));
    }
  for (int j = 0; j < m; ++j)
    for (int c = 0; c < kc; ++c) {
      double s = 0.0;
      for (int i = 0; i < n; ++i)
        s += result.coupling(j, i) * (data.X(i, covs[c]) - xbar[covs[c]]);
      result.mean_independence_residual =
          std::max(result.mean_independence_residual, std::abs(s));
    }
  return result;
}

}  // namespace otecon
