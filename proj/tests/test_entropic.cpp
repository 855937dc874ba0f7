#include <doctest.h>
#include <otecon/entropic.hpp>
#include <otecon/errors.hpp>
#include <otecon/otexact.hpp>

#include <cmath>

#include "helpers.hpp"

using namespace otecon;
using namespace otecon::testing;

namespace {

// Independent oracle for the symmetric 2x2 instance: on the family
// pi = [[t, .5-t], [.5-t, t]] the first-order condition of the regularized
// objective is log(t/(.5-t)) = 1/sigma; solve it by bisection.
double symmetric_2x2_oracle(double sigma) {
  double lo = 1e-12, hi = 0.5 - 1e-12;
  auto g = [&](double t) { return std::log(t / (0.5 - t)) - 1.0 / sigma; };
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

EntropicConfig config(double sigma) {
  EntropicConfig cfg;
  cfg.sigma = sigma;
  return cfg;
}

}  // namespace

TEST_CASE("ipfp_solve") {
  SUBCASE("1x1 forced coupling pins u + v") {
    auto res = ipfp_solve(measure({1.0}), measure({1.0}), SurplusMatrix(mat({{0.7}})),
                          config(1.0));
    CHECK(res.plan.mass(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(res.potentials.u[0] + res.potentials.v[0] == doctest::Approx(0.7).epsilon(1e-10));
  }
  SUBCASE("symmetric 2x2 at sigma 0.5 matches the bisection oracle") {
    auto res = ipfp_solve(measure({0.5, 0.5}), measure({0.5, 0.5}),
                          SurplusMatrix(mat({{1, 0}, {0, 1}})), config(0.5));
    const double t = symmetric_2x2_oracle(0.5);
    CHECK(t == doctest::Approx(0.5 * std::exp(2.0) / (1.0 + std::exp(2.0))).epsilon(1e-10));
    CHECK(res.plan.mass(0, 0) == doctest::Approx(t).epsilon(1e-8));
    CHECK(res.plan.mass(1, 1) == doctest::Approx(t).epsilon(1e-8));
  }
  SUBCASE("huge sigma approaches the independent coupling") {
    auto res = ipfp_solve(measure({0.5, 0.5}), measure({0.5, 0.5}),
                          SurplusMatrix(mat({{1, 0}, {0, 1}})), config(1e6));
    CHECK((res.plan.mass.array() - 0.25).abs().maxCoeff() <= 1e-4);
  }
  SUBCASE("marginal residuals meet the tolerance at termination") {
    SplitMix64 rng(31);
    auto p = DiscreteMeasure::from_weights(random_simplex(rng, 5));
    auto q = DiscreteMeasure::from_weights(random_simplex(rng, 7));
    auto res = ipfp_solve(p, q, SurplusMatrix(random_matrix(rng, 5, 7)), config(0.3));
    CHECK((res.plan.row_margins - p.weights).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((res.plan.col_margins - q.weights).cwiseAbs().maxCoeff() <= 1e-10);
  }
  SUBCASE("dual objective is non-increasing across sweeps") {
    SplitMix64 rng(32);
    auto p = DiscreteMeasure::from_weights(random_simplex(rng, 4));
    auto q = DiscreteMeasure::from_weights(random_simplex(rng, 6));
    auto cfg = config(0.4);
    cfg.record_history = true;
    auto res = ipfp_solve(p, q, SurplusMatrix(random_matrix(rng, 4, 6)), cfg);
    REQUIRE(res.history.size() >= 2);
    for (std::size_t t = 1; t < res.history.size(); ++t)
      CHECK(res.history[t].dual_objective <= res.history[t - 1].dual_objective + 1e-12);
  }
  SUBCASE("log-domain and naive modes agree") {
    SplitMix64 rng(33);
    auto p = DiscreteMeasure::from_weights(random_simplex(rng, 4));
    auto q = DiscreteMeasure::from_weights(random_simplex(rng, 5));
    SurplusMatrix phi{random_matrix(rng, 4, 5)};
    auto log_res = ipfp_solve(p, q, phi, config(0.7));
    auto cfg = config(0.7);
    cfg.log_domain = false;
    auto naive_res = ipfp_solve(p, q, phi, cfg);
    CHECK((log_res.plan.mass - naive_res.plan.mass).cwiseAbs().maxCoeff() <= 1e-10);
  }
  SUBCASE("naive mode overflow signals a log-domain retry") {
    auto cfg = config(1e-3);
    cfg.log_domain = false;
    CHECK_THROWS_AS(ipfp_solve(measure({0.5, 0.5}), measure({0.5, 0.5}),
                               SurplusMatrix(mat({{1, 0}, {0, 1}})), cfg),
                    NaiveOverflow);
  }
  SUBCASE("iteration cap raises non-convergence") {
    auto cfg = config(0.01);
    cfg.max_iterations = 2;
    SplitMix64 rng(34);
    CHECK_THROWS_AS(ipfp_solve(DiscreteMeasure::from_weights(random_simplex(rng, 5)),
                               DiscreteMeasure::from_weights(random_simplex(rng, 5)),
                               SurplusMatrix(random_matrix(rng, 5, 5)), cfg),
                    NonConvergence);
  }
  SUBCASE("zero-mass types are rejected") {
    CHECK_THROWS_AS(ipfp_solve(DiscreteMeasure{{"0", "1"}, vec({0.0, 1.0})},
                               measure({0.5, 0.5}), SurplusMatrix(mat({{0, 0}, {0, 0}})),
                               config(1.0)),
                    std::invalid_argument);
  }
  SUBCASE("raw masses are handled without normalization") {
    SplitMix64 rng(42);
    Vector pw(4), qw(3);
    for (int i = 0; i < 4; ++i) pw[i] = rng.uniform(0.5, 3.0);
    qw << pw.sum() * 0.2, pw.sum() * 0.5, pw.sum() * 0.3;
    auto p = DiscreteMeasure::from_weights(pw);
    auto q = DiscreteMeasure::from_weights(qw);
    auto res = ipfp_solve(p, q, SurplusMatrix(random_matrix(rng, 4, 3)), config(0.6));
    // Residual tolerance scales with the total mass.
    CHECK((res.plan.row_margins - pw).cwiseAbs().maxCoeff() <= 1e-10 * pw.sum());
    CHECK((res.plan.col_margins - qw).cwiseAbs().maxCoeff() <= 1e-10 * pw.sum());
    CHECK(res.plan.mass.sum() == doctest::Approx(pw.sum()).epsilon(1e-10));
  }
  SUBCASE("epsilon scaling schedule reaches small sigma") {
    SplitMix64 rng(35);
    SurplusMatrix phi{random_matrix(rng, 5, 5)};
    auto p = DiscreteMeasure::from_weights(random_simplex(rng, 5));
    auto q = DiscreteMeasure::from_weights(random_simplex(rng, 5));
    auto cfg = config(0.01);
    cfg.epsilon_scaling_schedule = {1.0, 0.3, 0.1, 0.03};
    auto res = ipfp_solve(p, q, phi, cfg);
    CHECK((res.plan.row_margins - p.weights).cwiseAbs().maxCoeff() <= 1e-10);
    auto cfg_bad = cfg;
    cfg_bad.epsilon_scaling_schedule = {0.3, 1.0};
    CHECK_THROWS_AS(ipfp_solve(p, q, phi, cfg_bad), std::invalid_argument);
  }
}

TEST_CASE("plan_from_potentials") {
  SurplusMatrix phi{mat({{1, 0}, {0, 1}})};
  SUBCASE("zero potentials give the elementwise exponential") {
    auto plan = plan_from_potentials(Vector::Zero(2), Vector::Zero(2), phi, 2.0);
    CHECK(plan.mass.isApprox((phi.values / 2.0).array().exp().matrix(), 1e-14));
  }
  SUBCASE("converged potentials reproduce the margins") {
    auto res = ipfp_solve(measure({0.5, 0.5}), measure({0.5, 0.5}), phi, config(0.5));
    auto plan = plan_from_potentials(res.potentials.u, res.potentials.v, phi, 0.5);
    CHECK((plan.row_margins - vec({0.5, 0.5})).cwiseAbs().maxCoeff() <= 1e-10);
  }
  SUBCASE("zero surplus and potentials give all ones") {
    SurplusMatrix zero{mat({{0, 0}, {0, 0}})};
    auto plan = plan_from_potentials(Vector::Zero(2), Vector::Zero(2), zero, 1.0);
    CHECK(plan.mass.isApprox(Matrix::Ones(2, 2)));
  }
  SUBCASE("overflowing exponents are clamped and reported") {
    int clamped = 0;
    auto plan = plan_from_potentials(Vector::Zero(1), Vector::Zero(1),
                                     SurplusMatrix(mat({{900.0}})), 1.0, &clamped);
    CHECK(clamped == 1);
    CHECK(std::isfinite(plan.mass(0, 0)));
  }
}

TEST_CASE("dual_objective") {
  SUBCASE("fixed point matches the regularized primal value") {
    SplitMix64 rng(36);
    auto p = DiscreteMeasure::from_weights(random_simplex(rng, 3));
    auto q = DiscreteMeasure::from_weights(random_simplex(rng, 4));
    SurplusMatrix phi{random_matrix(rng, 3, 4)};
    const double sigma = 0.6;
    auto res = ipfp_solve(p, q, phi, config(sigma));
    double primal = 0.0;  // sum pi phi - sigma sum pi log pi
    for (int x = 0; x < 3; ++x)
      for (int y = 0; y < 4; ++y) {
        const double m = res.plan.mass(x, y);
        primal += m * phi.values(x, y) - sigma * m * std::log(m);
      }
    // For probability margins the normalizing constant sigma*(mass - 1)
    // vanishes, so dual and regularized primal meet exactly.
    CHECK(dual_objective(res.potentials.u, res.potentials.v, p, q, phi, sigma) ==
          doctest::Approx(primal).epsilon(1e-8));
  }
  SUBCASE("zero data evaluates to sigma(|X||Y| - 1)") {
    SurplusMatrix zero{mat({{0, 0}, {0, 0}})};
    CHECK(dual_objective(Vector::Zero(2), Vector::Zero(2), measure({0.5, 0.5}),
                         measure({0.5, 0.5}), zero, 1.0) == doctest::Approx(3.0));
  }
  SUBCASE("invariant under opposite uniform shifts") {
    SplitMix64 rng(37);
    auto p = DiscreteMeasure::from_weights(random_simplex(rng, 3));
    auto q = DiscreteMeasure::from_weights(random_simplex(rng, 3));
    SurplusMatrix phi{random_matrix(rng, 3, 3)};
    Vector u = random_matrix(rng, 3, 1).col(0), v = random_matrix(rng, 3, 1).col(0);
    const double base = dual_objective(u, v, p, q, phi, 0.8);
    CHECK(dual_objective(u.array() + 1.3, v.array() - 1.3, p, q, phi, 0.8) ==
          doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("sigma to zero consistency against the exact solver") {
  SplitMix64 rng(38);
  auto p = DiscreteMeasure::from_weights(random_simplex(rng, 5));
  auto q = DiscreteMeasure::from_weights(random_simplex(rng, 5));
  SurplusMatrix phi{random_matrix(rng, 5, 5)};
  const double exact = solve_exact(p, q, phi).value;
  double previous_gap = std::numeric_limits<double>::infinity();
  for (double sigma : {1.0, 0.1, 0.01}) {
    auto cfg = config(sigma);
    if (sigma < 0.05) cfg.epsilon_scaling_schedule = {1.0, 0.3, 0.1, 0.03};
    auto res = ipfp_solve(p, q, phi, cfg);
    const double linear = (res.plan.mass.array() * phi.values.array()).sum();
    const double gap = std::abs(exact - linear);
    CHECK(gap <= sigma * std::log(25.0) + 1e-6);
    CHECK(gap <= previous_gap + 1e-9);
    previous_gap = gap;
  }
}

TEST_CASE("solve_regularized_general") {
  SUBCASE("log link coincides with ipfp at sigma one") {
    SplitMix64 rng(39);
    auto p = DiscreteMeasure::from_weights(random_simplex(rng, 4));
    auto q = DiscreteMeasure::from_weights(random_simplex(rng, 3));
    Matrix design = random_matrix(rng, 4, 3);
    auto glm = solve_regularized_general(p, q, design, LinkFunction::log_link(), config(1.0));
    auto ipfp = ipfp_solve(p, q, SurplusMatrix(design), config(1.0));
    CHECK((glm.plan.mass - ipfp.plan.mass).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((glm.potentials.u - ipfp.potentials.u).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((glm.potentials.v - ipfp.potentials.v).cwiseAbs().maxCoeff() <= 1e-10);
  }
  SUBCASE("quadratic conjugate solves the scalar first-order condition") {
    auto link = LinkFunction::custom([](double z) { return 0.5 * z * z; },
                                     [](double t) { return 0.5 * t * t; },
                                     [](double t) { return t; });
    Matrix design = mat({{2.4}});
    auto res = solve_regularized_general(measure({1.0}), measure({1.0}), design, link,
                                         config(1.0));
    // Margin 1 forces the plan entry to one, so design - u - v = 1.
    CHECK(res.potentials.u[0] + res.potentials.v[0] == doctest::Approx(1.4).epsilon(1e-9));
    CHECK(res.plan.mass(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("zero design with log link returns the product coupling") {
    SplitMix64 rng(40);
    auto p = DiscreteMeasure::from_weights(random_simplex(rng, 3));
    auto q = DiscreteMeasure::from_weights(random_simplex(rng, 5));
    auto res = solve_regularized_general(p, q, Matrix::Zero(3, 5), LinkFunction::log_link(),
                                         config(1.0));
    Matrix product = p.weights * q.weights.transpose();
    CHECK((res.plan.mass - product).cwiseAbs().maxCoeff() <= 1e-9);
  }
  SUBCASE("identity-threshold link fits margins") {
    SplitMix64 rng(41);
    auto p = DiscreteMeasure::from_weights(random_simplex(rng, 3));
    auto q = DiscreteMeasure::from_weights(random_simplex(rng, 4));
    Matrix design = random_matrix(rng, 3, 4, 0.5, 2.0);
    auto res = solve_regularized_general(p, q, design, LinkFunction::identity_threshold(),
                                         config(1.0));
    CHECK((res.plan.row_margins - p.weights).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((res.plan.mass.array() >= 0.0).all());
  }
}
