#include "otecon/inverse.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "otecon/errors.hpp"

namespace otecon {

namespace {

using Mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

double masked_logsumexp(const Matrix& expo, const Mask& mask, int fixed, bool row) {
  double shift = -std::numeric_limits<double>::infinity();
  const int len = row ? static_cast<int>(expo.cols()) : static_cast<int>(expo.rows());
  for (int i = 0; i < len; ++i) {
    if (row ? mask(fixed, i) : mask(i, fixed))
      shift = std::max(shift, row ? expo(fixed, i) : expo(i, fixed));
  }
  if (!std::isfinite(shift)) return shift;
  double sum = 0.0;
  for (int i = 0; i < len; ++i) {
    if (row ? mask(fixed, i) : mask(i, fixed))
      sum += std::exp((row ? expo(fixed, i) : expo(i, fixed)) - shift);
  }
  return shift + std::log(sum);
}

// Residualize each flattened basis matrix against the span of row and
// column indicators on the masked support, then demand full rank of the
// residuals. Names a null combination on failure.
void check_identified(const std::vector<Matrix>& basis, const Mask& mask, int n, int m) {
  const int k = static_cast<int>(basis.size());
  if (k == 0) return;
  Matrix ztz = Matrix::Zero(n + m, n + m);
  Matrix ztf = Matrix::Zero(n + m, k);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < m; ++y) {
      if (!mask(x, y)) continue;
      ztz(x, x) += 1.0;
      ztz(n + y, n + y) += 1.0;
      ztz(x, n + y) += 1.0;
      ztz(n + y, x) += 1.0;
      for (int j = 0; j < k; ++j) {
        ztf(x, j) += basis[j](x, y);
        ztf(n + y, j) += basis[j](x, y);
      }
    }
  ztz.diagonal().array() += 1e-10 * std::max(1.0, ztz.trace());
  Matrix coef = ztz.ldlt().solve(ztf);

  Matrix gram = Matrix::Zero(k, k);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < m; ++y) {
      if (!mask(x, y)) continue;
      Vector r(k);
      for (int j = 0; j < k; ++j)
        r[j] = basis[j](x, y) - coef(x, j) - coef(n + y, j);
      gram += r * r.transpose();
    }
  double basis_scale = 0.0;  // absolute floor so a single flat basis is caught
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < m; ++y) {
      if (!mask(x, y)) continue;
      for (int j = 0; j < k; ++j) basis_scale += basis[j](x, y) * basis[j](x, y);
    }
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  const double top = es.eigenvalues().maxCoeff();
  if (es.eigenvalues().minCoeff() <= std::max(1e-10 * top, 1e-12 * basis_scale)) {
    Vector null = es.eigenvectors().col(0);
    std::ostringstream os;
    os << "degenerate design: after projecting out the fixed effects the basis "
          "admits the dependent combination";
    std::vector<double> combo(null.data(), null.data() + k);
    for (int j = 0; j < k; ++j) os << (j ? " + " : " ") << combo[j] << "*phi" << j;
    throw DegenerateDesign(os.str(), combo);
  }
}

struct Engine {
  Matrix pi_hat;  // owned: callers may pass temporaries
  std::vector<Matrix> basis;
  Mask mask;
  InverseConfig cfg;

  int n, m, k;
  Vector p, q;       // masked margins of pi_hat
  Vector moments;    // observed moments against the basis
  double total = 0.0;

  Vector lambda, u, v;
  Matrix pi;  // current model plan over the mask

  Engine(const ObservedPlan& obs, const std::vector<Matrix>& basis_in, Mask mask_in,
         const InverseConfig& cfg_in)
      : pi_hat(obs.pi_hat), basis(basis_in), mask(std::move(mask_in)), cfg(cfg_in) {
    n = static_cast<int>(pi_hat.rows());
    m = static_cast<int>(pi_hat.cols());
    k = static_cast<int>(basis.size());
    for (const auto& b : basis)
      if (b.rows() != n || b.cols() != m)
        throw std::invalid_argument("inverse: basis dimensions do not match the plan");
    if ((pi_hat.array() < 0.0).any())
      throw std::invalid_argument("inverse: observed plan must be nonnegative");

    p = Vector::Zero(n);
    q = Vector::Zero(m);
    moments = Vector::Zero(k);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < m; ++y) {
        if (!mask(x, y)) continue;
        p[x] += pi_hat(x, y);
        q[y] += pi_hat(x, y);
        for (int j = 0; j < k; ++j) moments[j] += pi_hat(x, y) * basis[j](x, y);
      }
    total = p.sum();
    if ((p.array() <= 0.0).any() || (q.array() <= 0.0).any())
      throw std::invalid_argument("inverse: margins must be strictly positive");

    check_identified(basis, mask, n, m);
    lambda = Vector::Zero(k);
    u = Vector::Zero(n);
    v = Vector::Zero(m);
    pi = Matrix::Zero(n, m);
  }

  Matrix surplus() const {
    Matrix s = Matrix::Zero(n, m);
    for (int j = 0; j < k; ++j) s += lambda[j] * basis[j];
    return s;
  }

  void scaling_sweep(const Matrix& s) {
    Matrix expo = s;
    expo.colwise() -= u;
    expo.rowwise() -= v.transpose();
    for (int x = 0; x < n; ++x)
      u[x] += masked_logsumexp(expo, mask, x, true) - std::log(p[x]);
    expo = s;
    expo.colwise() -= u;
    expo.rowwise() -= v.transpose();
    for (int y = 0; y < m; ++y)
      v[y] += masked_logsumexp(expo, mask, y, false) - std::log(q[y]);
  }

  void refresh_plan(const Matrix& s) {
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < m; ++y)
        pi(x, y) = mask(x, y) ? std::exp(s(x, y) - u[x] - v[y]) : 0.0;
  }

  // Lambda part of the PPML objective at fixed (u, v).
  double lambda_objective(const Vector& lam) const {
    double val = 0.0;
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < m; ++y) {
        if (!mask(x, y)) continue;
        double s = 0.0;
        for (int j = 0; j < k; ++j) s += lam[j] * basis[j](x, y);
        val += std::exp(s - u[x] - v[y]) - pi_hat(x, y) * s;
      }
    return val;
  }

  Vector moment_gradient() const {
    Vector g = Vector::Zero(k);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < m; ++y) {
        if (!mask(x, y)) continue;
        for (int j = 0; j < k; ++j) g[j] += pi(x, y) * basis[j](x, y);
      }
    return g - moments;
  }

  Matrix moment_hessian() const {
    Matrix h = Matrix::Zero(k, k);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < m; ++y) {
        if (!mask(x, y)) continue;
        Vector f(k);
        for (int j = 0; j < k; ++j) f[j] = basis[j](x, y);
        h += pi(x, y) * f * f.transpose();
      }
    return h;
  }

  // Damped Newton with gradient fallback; returns the step actually taken.
  void newton_step(const Vector& g) {
    Matrix h = moment_hessian();
    Vector dir;
    Eigen::LDLT<Matrix> ldlt(h);
    bool use_newton = ldlt.info() == Eigen::Success;
    if (use_newton) {
      dir = -ldlt.solve(g);
      if (!dir.allFinite() || (h * dir + g).norm() > 1e-6 * std::max(1.0, g.norm()))
        use_newton = false;
    }
    if (!use_newton) dir = -g / std::max(1.0, h.trace());

    const double f0 = lambda_objective(lambda);
    const double slope = g.dot(dir);
    double alpha = 1.0;
    for (int it = 0; it < 60; ++it) {
      Vector cand = lambda + alpha * dir;
      if (lambda_objective(cand) <= f0 + 0.1 * alpha * slope + 1e-14 * std::abs(f0)) {
        lambda = cand;
        return;
      }
      alpha *= 0.5;
    }
  }

  double margin_residual() const {
    double worst = 0.0;
    Vector rows = pi.rowwise().sum();
    Vector cols = pi.colwise().sum().transpose();
    worst = std::max((rows - p).cwiseAbs().maxCoeff(), (cols - q).cwiseAbs().maxCoeff());
    return worst / std::max(1e-300, total);
  }

  template <typename LambdaStep, typename Converged>
  FitReport run(LambdaStep&& lambda_step, Converged&& converged) {
    FitReport report;
    Matrix s = surplus();
    for (int it = 0; it < cfg.max_iterations; ++it) {
      scaling_sweep(s);
      refresh_plan(s);
      if (k > 0) {
        lambda_step();
        s = surplus();
        refresh_plan(s);
      }
      report.iterations = it + 1;
      report.objective_history.push_back(p.dot(u) + q.dot(v) + lambda_objective(lambda));
      Vector g = moment_gradient();
      report.moment_residual = (k > 0) ? g.cwiseAbs().maxCoeff() : 0.0;
      report.marginal_residual = margin_residual();
      if (report.marginal_residual <= cfg.marginal_tol && converged(g)) {
        report.converged = true;
        break;
      }
    }
    if (!report.converged)
      throw NonConvergence("inverse fit: iteration cap before the moment conditions",
                           report.iterations,
                           std::max(report.moment_residual, report.marginal_residual));
    report.objective = p.dot(u) + q.dot(v) + lambda_objective(lambda);
    // Identification shift: pin min_x u_x = 0, absorbing the constant in v.
    const double shift = u.minCoeff();
    u.array() -= shift;
    v.array() += shift;
    refresh_plan(surplus());
    return report;
  }
};

Mask all_true(int n, int m) { return Mask::Constant(n, m, true); }

Mask off_diagonal(int n) {
  Mask mask = Mask::Constant(n, n, true);
  mask.diagonal().setConstant(false);
  return mask;
}

}  // namespace

Matrix ParametricSurplus::combine() const {
  if (basis.empty()) throw std::invalid_argument("parametric surplus: empty basis");
  if (lambda.size() != static_cast<Eigen::Index>(basis.size()))
    throw std::invalid_argument("parametric surplus: lambda length");
  Matrix s = Matrix::Zero(basis.front().rows(), basis.front().cols());
  for (std::size_t j = 0; j < basis.size(); ++j) {
    if (basis[j].rows() != s.rows() || basis[j].cols() != s.cols())
      throw std::invalid_argument("parametric surplus: basis dimensions differ");
    s += lambda[static_cast<Eigen::Index>(j)] * basis[j];
  }
  return s;
}

ObservedPlan ObservedPlan::from_matrix(Matrix pi_hat) {
  if (!pi_hat.allFinite() || (pi_hat.array() < 0.0).any())
    throw std::invalid_argument("observed plan: entries must be finite and nonnegative");
  ObservedPlan obs;
  obs.row_margins = pi_hat.rowwise().sum();
  obs.col_margins = pi_hat.colwise().sum().transpose();
  obs.pi_hat = std::move(pi_hat);
  return obs;
}

InverseFit fit_inverse_ot(const ObservedPlan& obs, const std::vector<Matrix>& basis,
                          const InverseConfig& cfg) {
  Engine engine(obs, basis, all_true(static_cast<int>(obs.pi_hat.rows()),
                                     static_cast<int>(obs.pi_hat.cols())),
                cfg);
  FitReport report = engine.run(
      [&] { engine.newton_step(engine.moment_gradient()); },
      [&](const Vector& g) {
        return engine.k == 0 || g.cwiseAbs().maxCoeff() <= cfg.moment_tol;
      });

  InverseFit fit;
  fit.lambda = engine.lambda;
  fit.fitted = TransportPlan::from_mass(engine.pi);
  fit.potentials = make_potentials(engine.u, engine.v, SurplusMatrix(engine.surplus()));
  fit.report = std::move(report);
  return fit;
}

LassoFit fit_lasso(const ObservedPlan& obs, const std::vector<Matrix>& basis,
                   double penalty_weight, const InverseConfig& cfg) {
  if (penalty_weight < 0.0)
    throw std::invalid_argument("fit_lasso: penalty weight must be nonnegative");
  Engine engine(obs, basis, all_true(static_cast<int>(obs.pi_hat.rows()),
                                     static_cast<int>(obs.pi_hat.cols())),
                cfg);

  auto soft = [&](double t, double thr) {
    if (t > thr) return t - thr;
    if (t < -thr) return t + thr;
    return 0.0;
  };
  double eta = 1.0;
  auto ista_step = [&] {
    Vector g = engine.moment_gradient();
    const double f0 = engine.lambda_objective(engine.lambda);
    for (int it = 0; it < 80; ++it) {
      Vector cand(engine.k);
      for (int j = 0; j < engine.k; ++j)
        cand[j] = soft(engine.lambda[j] - eta * g[j], eta * penalty_weight);
      Vector d = cand - engine.lambda;
      const double quad = f0 + g.dot(d) + d.squaredNorm() / (2.0 * eta);
      if (engine.lambda_objective(cand) <= quad + 1e-14 * std::abs(f0)) {
        engine.lambda = cand;
        eta *= 1.2;  // gentle recovery between sweeps
        return;
      }
      eta *= 0.5;
    }
  };
  auto stationarity = [&](const Vector& g) {
    for (int j = 0; j < engine.k; ++j) {
      if (engine.lambda[j] != 0.0) {
        if (std::abs(g[j] + penalty_weight * (engine.lambda[j] > 0 ? 1.0 : -1.0)) >
            cfg.moment_tol)
          return false;
      } else if (std::abs(g[j]) > penalty_weight + cfg.moment_tol) {
        return false;
      }
    }
    return true;
  };

  FitReport report = engine.run(ista_step, stationarity);

  LassoFit fit;
  fit.lambda = engine.lambda;
  fit.fitted = TransportPlan::from_mass(engine.pi);
  fit.potentials = make_potentials(engine.u, engine.v, SurplusMatrix(engine.surplus()));
  for (int j = 0; j < engine.k; ++j)
    if (engine.lambda[j] != 0.0) fit.active_set.push_back(j);
  fit.report = std::move(report);
  return fit;
}

GravityFit gravity_fit(const ObservedPlan& flows, const std::vector<Matrix>& basis,
                       const InverseConfig& cfg) {
  const int n_all = static_cast<int>(flows.pi_hat.rows());
  if (flows.pi_hat.cols() != n_all)
    throw std::invalid_argument("gravity_fit: flow matrix must be square");

  // Countries with zero exports or imports (diagonal excluded) cannot carry
  // a finite fixed effect; drop them and refit the margins.
  std::vector<int> retained(n_all);
  for (int i = 0; i < n_all; ++i) retained[i] = i;
  std::vector<int> dropped;
  while (true) {
    bool changed = false;
    std::vector<int> next;
    for (int idx : retained) {
      double exports = 0.0, imports = 0.0;
      for (int other : retained) {
        if (other == idx) continue;
        exports += flows.pi_hat(idx, other);
        imports += flows.pi_hat(other, idx);
      }
      if (exports <= 0.0 || imports <= 0.0) {
        dropped.push_back(idx);
        changed = true;
      } else {
        next.push_back(idx);
      }
    }
    retained = std::move(next);
    if (!changed) break;
  }
  if (retained.size() < 2)
    throw std::invalid_argument("gravity_fit: fewer than two countries with positive trade");

  const int n = static_cast<int>(retained.size());
  Matrix sub(n, n);
  std::vector<Matrix> sub_basis(basis.size(), Matrix(n, n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      sub(a, b) = flows.pi_hat(retained[a], retained[b]);
      for (std::size_t j = 0; j < basis.size(); ++j)
        sub_basis[j](a, b) = basis[j](retained[a], retained[b]);
    }

  Engine engine(ObservedPlan::from_matrix(sub), sub_basis, off_diagonal(n), cfg);
  FitReport report = engine.run(
      [&] { engine.newton_step(engine.moment_gradient()); },
      [&](const Vector& g) {
        return engine.k == 0 || g.cwiseAbs().maxCoeff() <= cfg.moment_tol;
      });
  report.dropped = dropped;
  for (int idx : dropped)
    report.warnings.push_back("dropped country " + std::to_string(idx) +
                              ": zero exports or imports");

  GravityFit fit;
  fit.lambda = engine.lambda;
  fit.fitted = TransportPlan::from_mass(engine.pi);
  fit.resistances = make_potentials(engine.u, engine.v, SurplusMatrix(engine.surplus()));
  fit.retained = retained;
  fit.report = std::move(report);
  return fit;
}

}  // namespace otecon
