#include <doctest.h>
#include <otecon/types.hpp>

#include <cmath>
#include <limits>

#include "helpers.hpp"

using namespace otecon;
using namespace otecon::testing;

TEST_CASE("validate_problem") {
  SUBCASE("well formed balanced input") {
    auto report = validate_problem(measure({0.5, 0.5}), measure({0.5, 0.5}),
                                   SurplusMatrix(mat({{1, 0}, {0, 1}})));
    CHECK(report.valid);
    CHECK(report.balanced);
    CHECK(report.issues.empty());
  }
  SUBCASE("negative weight is reported, not thrown") {
    DiscreteMeasure bad{{"0", "1"}, vec({-0.1, 1.1})};  // bypasses the factory
    auto report = validate_problem(bad, measure({0.5, 0.5}),
                                   SurplusMatrix(mat({{0, 0}, {0, 0}})));
    CHECK_FALSE(report.valid);
    bool mentions_negative = false;
    for (const auto& issue : report.issues)
      mentions_negative |= issue.find("negative") != std::string::npos;
    CHECK(mentions_negative);
  }
  SUBCASE("mass mismatch is valid but unbalanced") {
    auto report = validate_problem(measure({0.6, 0.6}), measure({0.5, 0.5}),
                                   SurplusMatrix(mat({{0, 0}, {0, 0}})));
    CHECK(report.valid);
    CHECK_FALSE(report.balanced);
  }
  SUBCASE("total on garbage input") {
    DiscreteMeasure bad{{"0"}, vec({std::numeric_limits<double>::quiet_NaN()})};
    Matrix phi = mat({{1.0, 2.0}});
    phi(0, 1) = std::numeric_limits<double>::infinity();
    SurplusMatrix s{mat({{0, 0}})};
    s.values = phi;  // sidestep the validating constructor
    CHECK_NOTHROW(validate_problem(bad, measure({0.5, 0.5}), s));
    auto report = validate_problem(bad, measure({0.5, 0.5}), s);
    CHECK_FALSE(report.valid);
  }
}

TEST_CASE("random_matching") {
  SUBCASE("product formula") {
    auto plan = random_matching(measure({0.5, 0.5}), measure({0.5, 0.5}));
    CHECK(plan.mass.isApprox(mat({{0.25, 0.25}, {0.25, 0.25}})));
  }
  SUBCASE("singleton") {
    auto plan = random_matching(measure({1.0}), measure({1.0}));
    CHECK(plan.mass(0, 0) == doctest::Approx(1.0));
  }
  SUBCASE("asymmetric margins") {
    auto plan = random_matching(measure({0.3, 0.7}), measure({0.4, 0.6}));
    CHECK(plan.mass.isApprox(mat({{0.12, 0.18}, {0.28, 0.42}}), 1e-12));
  }
  SUBCASE("margins exact to machine precision") {
    SplitMix64 rng(7);
    for (int rep = 0; rep < 20; ++rep) {
      auto p = DiscreteMeasure::from_weights(random_simplex(rng, 6));
      auto q = DiscreteMeasure::from_weights(random_simplex(rng, 4));
      auto plan = random_matching(p, q);
      CHECK((plan.row_margins - p.weights).cwiseAbs().maxCoeff() <= 1e-15);
      CHECK((plan.col_margins - q.weights).cwiseAbs().maxCoeff() <= 1e-15);
    }
  }
  SUBCASE("unbalanced masses rejected") {
    CHECK_THROWS_AS(random_matching(measure({0.6, 0.6}), measure({0.5, 0.5})),
                    std::invalid_argument);
  }
}

TEST_CASE("duality_gap") {
  const SurplusMatrix identity_surplus{mat({{1, 0}, {0, 1}})};
  const auto p = measure({0.5, 0.5});
  const auto q = measure({0.5, 0.5});

  SUBCASE("zero at an optimal pair") {
    auto plan = TransportPlan::from_mass(mat({{0.5, 0.0}, {0.0, 0.5}}), identity_surplus);
    auto pot = make_potentials(vec({0.5, 0.5}), vec({0.5, 0.5}), identity_surplus);
    CHECK(duality_gap(plan, pot, identity_surplus, p, q) == doctest::Approx(0.0).epsilon(1e-8));
  }
  SUBCASE("random matching against exact duals") {
    auto plan = random_matching(p, q);
    auto pot = make_potentials(vec({0.5, 0.5}), vec({0.5, 0.5}), identity_surplus);
    CHECK(duality_gap(plan, pot, identity_surplus, p, q) == doctest::Approx(0.5));
  }
  SUBCASE("zero surplus") {
    SurplusMatrix zero{mat({{0, 0}, {0, 0}})};
    auto plan = random_matching(p, q);
    auto pot = make_potentials(vec({0, 0}), vec({0, 0}), zero);
    CHECK(duality_gap(plan, pot, zero, p, q) == doctest::Approx(0.0));
  }
  SUBCASE("infeasible plan rejected with the violated constraint") {
    auto plan = TransportPlan::from_mass(mat({{0.5, 0.0}, {0.0, 0.3}}), identity_surplus);
    auto pot = make_potentials(vec({0.5, 0.5}), vec({0.5, 0.5}), identity_surplus);
    CHECK_THROWS_WITH_AS(duality_gap(plan, pot, identity_surplus, p, q),
                         doctest::Contains("row margin"), std::invalid_argument);
  }
  SUBCASE("infeasible potentials rejected") {
    auto plan = random_matching(p, q);
    auto pot = make_potentials(vec({0, 0}), vec({0, 0}), identity_surplus);
    CHECK(pot.feasibility_violation == doctest::Approx(1.0));
    CHECK_THROWS_AS(duality_gap(plan, pot, identity_surplus, p, q), std::invalid_argument);
  }
  SUBCASE("weak duality on randomized instances") {
    SplitMix64 rng(99);
    for (int rep = 0; rep < 50; ++rep) {
      const int n = 2 + static_cast<int>(rng.next() % 5);
      const int m = 2 + static_cast<int>(rng.next() % 5);
      SurplusMatrix phi{random_matrix(rng, n, m)};
      auto pm = DiscreteMeasure::from_weights(random_simplex(rng, n));
      auto qm = DiscreteMeasure::from_weights(random_simplex(rng, m));
      auto plan = random_matching(pm, qm);
      // Feasible duals by construction: v random, u = rowwise max of phi - v.
      Vector v = random_matrix(rng, m, 1).col(0);
      Vector u(n);
      for (int x = 0; x < n; ++x) u[x] = (phi.values.row(x).transpose() - v).maxCoeff();
      auto pot = make_potentials(u, v, phi);
      CHECK(duality_gap(plan, pot, phi, pm, qm) >= -1e-9);
    }
  }
}
