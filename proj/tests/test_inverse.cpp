#include <doctest.h>
#include <otecon/errors.hpp>
#include <otecon/inverse.hpp>

#include <cmath>

#include "helpers.hpp"

using namespace otecon;
using namespace otecon::testing;

namespace {

InverseConfig tight() {
  InverseConfig cfg;
  cfg.moment_tol = 1e-9;
  cfg.marginal_tol = 1e-10;
  return cfg;
}

// Forward model pi = exp(sum lambda phi - u - v) on the full grid.
Matrix forward_plan(const std::vector<Matrix>& basis, const Vector& lambda, const Vector& u,
                    const Vector& v) {
  Matrix s = ParametricSurplus{basis, lambda}.combine();
  Matrix out(u.size(), v.size());
  for (int x = 0; x < u.size(); ++x)
    for (int y = 0; y < v.size(); ++y) out(x, y) = std::exp(s(x, y) - u[x] - v[y]);
  return out;
}

double entropy(const Matrix& pi) {
  double h = 0.0;
  for (int x = 0; x < pi.rows(); ++x)
    for (int y = 0; y < pi.cols(); ++y)
      if (pi(x, y) > 0.0) h -= pi(x, y) * std::log(pi(x, y));
  return h;
}

}  // namespace

TEST_CASE("parametric surplus combination") {
  SplitMix64 rng(49);
  std::vector<Matrix> basis = {random_matrix(rng, 3, 4), random_matrix(rng, 3, 4)};
  ParametricSurplus ps{basis, vec({2.0, -0.5})};
  CHECK(ps.combine().isApprox(2.0 * basis[0] - 0.5 * basis[1]));
  CHECK_THROWS_AS((ParametricSurplus{basis, vec({1.0})}.combine()), std::invalid_argument);
  CHECK_THROWS_AS((ParametricSurplus{{random_matrix(rng, 3, 4), random_matrix(rng, 2, 2)},
                                     vec({1.0, 1.0})}
                       .combine()),
                  std::invalid_argument);
}

TEST_CASE("fit_inverse_ot") {
  SUBCASE("planted coefficient on a 5x5 instance is recovered") {
    SplitMix64 rng(50);
    std::vector<Matrix> basis = {random_matrix(rng, 5, 5)};
    Vector lambda_star = vec({1.5});
    auto obs = ObservedPlan::from_matrix(
        forward_plan(basis, lambda_star, Vector::Zero(5), Vector::Zero(5)));
    auto fit = fit_inverse_ot(obs, basis, tight());
    CHECK(std::abs(fit.lambda[0] - 1.5) <= 1e-6);
    CHECK(fit.report.moment_residual <= 1e-9);
    CHECK(fit.report.marginal_residual <= 1e-10);
  }
  SUBCASE("independent observed plan fits with lambda zero") {
    SplitMix64 rng(51);
    Vector p = random_simplex(rng, 4), q = random_simplex(rng, 4);
    auto obs = ObservedPlan::from_matrix(p * q.transpose());
    std::vector<Matrix> basis = {random_matrix(rng, 4, 4)};
    auto fit = fit_inverse_ot(obs, basis, tight());
    CHECK(std::abs(fit.lambda[0]) <= 1e-6);
  }
  SUBCASE("1x1 plan leaves no information beyond the margins") {
    auto obs = ObservedPlan::from_matrix(mat({{1.0}}));
    std::vector<Matrix> basis = {mat({{2.0}})};
    CHECK_THROWS_AS(fit_inverse_ot(obs, basis), DegenerateDesign);
  }
  SUBCASE("moment and margin conditions hold at convergence") {
    SplitMix64 rng(52);
    std::vector<Matrix> basis = {random_matrix(rng, 6, 5), random_matrix(rng, 6, 5)};
    auto obs = ObservedPlan::from_matrix(random_matrix(rng, 6, 5, 0.2, 2.0));
    auto fit = fit_inverse_ot(obs, basis, tight());
    for (std::size_t j = 0; j < basis.size(); ++j) {
      const double fitted = (fit.fitted.mass.array() * basis[j].array()).sum();
      const double observed = (obs.pi_hat.array() * basis[j].array()).sum();
      CHECK(std::abs(fitted - observed) <= 1e-8);
    }
    CHECK((fit.fitted.row_margins - obs.row_margins).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((fit.fitted.col_margins - obs.col_margins).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(fit.potentials.u.minCoeff() == doctest::Approx(0.0).epsilon(1e-14));
    // Convex objective: block descent never increases it.
    for (std::size_t t = 1; t < fit.report.objective_history.size(); ++t)
      CHECK(fit.report.objective_history[t] <=
            fit.report.objective_history[t - 1] + 1e-10);
  }
  SUBCASE("fitted plan maximizes entropy among constrained rivals") {
    SplitMix64 rng(53);
    std::vector<Matrix> basis = {random_matrix(rng, 3, 3)};
    auto obs = ObservedPlan::from_matrix(random_matrix(rng, 3, 3, 0.3, 1.2));
    auto fit = fit_inverse_ot(obs, basis, tight());
    // Constraint matrix of the dual program: margins and moments are linear
    // in pi, so feasible rivals live in pi* + null space.
    Matrix cons = Matrix::Zero(3 + 3 + 1, 9);
    for (int x = 0; x < 3; ++x)
      for (int y = 0; y < 3; ++y) {
        const int idx = x + 3 * y;  // column-major, matching Eigen::Map below
        cons(x, idx) = 1.0;
        cons(3 + y, idx) = 1.0;
        cons(6, idx) = basis[0](x, y);
      }
    Eigen::JacobiSVD<Matrix> svd(cons, Eigen::ComputeFullV);
    Matrix null_dirs = svd.matrixV().rightCols(2);
    const double h_star = entropy(fit.fitted.mass);
    for (int a = -5; a <= 5; ++a)
      for (int b = -5; b <= 5; ++b) {
        Vector flat = Eigen::Map<const Vector>(fit.fitted.mass.data(), 9) +
                      0.02 * a * null_dirs.col(0) + 0.02 * b * null_dirs.col(1);
        if ((flat.array() < 1e-12).any()) continue;
        Matrix rival = Eigen::Map<const Matrix>(flat.data(), 3, 3);
        CHECK(entropy(rival) <= h_star + 1e-9);
      }
  }
}

TEST_CASE("fit_lasso") {
  SplitMix64 rng(54);
  std::vector<Matrix> basis = {random_matrix(rng, 5, 5), random_matrix(rng, 5, 5),
                               random_matrix(rng, 5, 5)};
  Vector lambda_star = vec({2.0, 0.0, 0.0});
  auto obs = ObservedPlan::from_matrix(
      forward_plan(basis, lambda_star, Vector::Zero(5), Vector::Zero(5)));

  SUBCASE("zero penalty reproduces the unpenalized fit") {
    auto plain = fit_inverse_ot(obs, basis, tight());
    auto lasso = fit_lasso(obs, basis, 0.0, tight());
    CHECK((plain.lambda - lasso.lambda).cwiseAbs().maxCoeff() <= 1e-6);
  }
  SUBCASE("moderate penalty keeps the planted support") {
    auto lasso = fit_lasso(obs, basis, 0.05, tight());
    REQUIRE(lasso.active_set.size() >= 1);
    CHECK(lasso.active_set.front() == 0);
    CHECK(lasso.lambda[0] > 1.0);
    for (int j : lasso.active_set) CHECK(lasso.lambda[j] != 0.0);
  }
  SUBCASE("huge penalty zeroes every coefficient") {
    auto lasso = fit_lasso(obs, basis, 1e6, tight());
    CHECK(lasso.lambda.cwiseAbs().maxCoeff() == 0.0);
    CHECK(lasso.active_set.empty());
  }
}

TEST_CASE("gravity_fit") {
  SUBCASE("planted proximity coefficient is recovered") {
    Matrix dist(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) dist(i, j) = -std::abs(i - j) * 0.6;
    Vector u0 = vec({0.0, 0.2, -0.1, 0.15}), v0 = vec({0.1, 0.0, 0.3, -0.2});
    const double lambda_star = 1.3;
    Matrix flows = Matrix::Zero(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (i != j) flows(i, j) = std::exp(lambda_star * dist(i, j) - u0[i] - v0[j]);
    auto fit = gravity_fit(ObservedPlan::from_matrix(flows), {dist}, tight());
    CHECK(std::abs(fit.lambda[0] - lambda_star) <= 1e-6);
    CHECK(fit.fitted.mass.diagonal().cwiseAbs().maxCoeff() == 0.0);
    // Balance of trade: fitted margins match observed exports/imports.
    Vector exports = flows.rowwise().sum(), imports = flows.colwise().sum().transpose();
    CHECK((fit.fitted.row_margins - exports).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((fit.fitted.col_margins - imports).cwiseAbs().maxCoeff() <= 1e-8);
  }
  SUBCASE("three countries cannot identify a symmetric basis") {
    // On a 3x3 off-diagonal support the orthogonal complement of the fixed
    // effects is spanned by an antisymmetric vector, so any symmetric basis
    // is absorbed by the fixed effects.
    Matrix dist(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) dist(i, j) = -std::abs(i - j) * 0.6;
    Matrix flows = Matrix::Constant(3, 3, 1.0);
    flows.diagonal().setZero();
    CHECK_THROWS_AS(gravity_fit(ObservedPlan::from_matrix(flows), {dist}, tight()),
                    DegenerateDesign);
  }
  SUBCASE("no basis reduces to masked biproportional fitting") {
    SplitMix64 rng(56);
    Matrix flows = random_matrix(rng, 4, 4, 0.2, 1.5);
    flows.diagonal().setZero();
    auto fit = gravity_fit(ObservedPlan::from_matrix(flows), {}, tight());
    // Independent oracle: plain scaling loop on the off-diagonal support.
    Vector a = Vector::Ones(4), b = Vector::Ones(4);
    Vector p = flows.rowwise().sum(), q = flows.colwise().sum().transpose();
    for (int it = 0; it < 5000; ++it) {
      for (int i = 0; i < 4; ++i) {
        double s = 0.0;
        for (int j = 0; j < 4; ++j)
          if (j != i) s += b[j];
        a[i] = p[i] / s;
      }
      for (int j = 0; j < 4; ++j) {
        double s = 0.0;
        for (int i = 0; i < 4; ++i)
          if (i != j) s += a[i];
        b[j] = q[j] / s;
      }
    }
    Matrix oracle = Matrix::Zero(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (i != j) oracle(i, j) = a[i] * b[j];
    CHECK((fit.fitted.mass - oracle).cwiseAbs().maxCoeff() <= 1e-7);
  }
  SUBCASE("uniform off-diagonal flows fit with lambda zero") {
    SplitMix64 rng(57);
    Matrix flows = Matrix::Constant(4, 4, 0.7);
    flows.diagonal().setZero();
    Matrix sym = random_matrix(rng, 4, 4);
    sym = ((sym + sym.transpose()) / 2.0).eval();
    auto fit = gravity_fit(ObservedPlan::from_matrix(flows), {sym}, tight());
    CHECK(std::abs(fit.lambda[0]) <= 1e-6);
  }
  SUBCASE("countries without trade are dropped with a warning") {
    Matrix flows = Matrix::Zero(3, 3);
    flows(0, 1) = 1.0;
    flows(1, 0) = 2.0;  // country 2 never trades
    auto fit = gravity_fit(ObservedPlan::from_matrix(flows), {}, tight());
    CHECK(fit.retained == std::vector<int>{0, 1});
    REQUIRE(fit.report.dropped.size() == 1);
    CHECK(fit.report.dropped[0] == 2);
    CHECK_FALSE(fit.report.warnings.empty());
  }
  SUBCASE("non-square flows are rejected") {
    CHECK_THROWS_AS(gravity_fit(ObservedPlan::from_matrix(mat({{0, 1, 1}, {1, 0, 1}})), {}),
                    std::invalid_argument);
  }
}
