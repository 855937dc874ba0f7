#include <doctest.h>
#include <otecon/markets.hpp>

#include <cmath>

#include "helpers.hpp"

using namespace otecon;
using namespace otecon::testing;

TEST_CASE("solve_stable_matching") {
  SUBCASE("single pair with positive surplus") {
    auto out = solve_stable_matching(measure({1.0}), measure({1.0}), SurplusMatrix(mat({{2.0}})));
    CHECK(out.plan.mass(0, 0) == doctest::Approx(1.0));
    CHECK(out.payoffs.u[0] + out.payoffs.v[0] == doctest::Approx(2.0));
    CHECK(out.stability_violations.empty());
  }
  SUBCASE("negative surplus leaves everyone single") {
    auto out = solve_stable_matching(measure({1.0}), measure({1.0}), SurplusMatrix(mat({{-1.0}})));
    CHECK(out.single_p[0] == doctest::Approx(1.0));
    CHECK(out.single_q[0] == doctest::Approx(1.0));
    CHECK(out.payoffs.u[0] == doctest::Approx(0.0));
    CHECK(out.payoffs.v[0] == doctest::Approx(0.0));
    CHECK(out.stability_violations.empty());
  }
  SUBCASE("the productive worker matches, the other stays single at zero") {
    auto out = solve_stable_matching(measure({1.0, 1.0}), measure({1.0}),
                                     SurplusMatrix(mat({{1.0}, {3.0}})));
    CHECK(out.plan.mass(1, 0) == doctest::Approx(1.0));
    CHECK(out.single_p[0] == doctest::Approx(1.0));
    CHECK(out.payoffs.u[0] == doctest::Approx(0.0));
    CHECK(out.value == doctest::Approx(3.0));
    CHECK(out.stability_violations.empty());
  }
  SUBCASE("random unbalanced instances are certified stable") {
    SplitMix64 rng(61);
    for (int rep = 0; rep < 40; ++rep) {
      const int n = 1 + static_cast<int>(rng.next() % 6);
      const int m = 1 + static_cast<int>(rng.next() % 6);
      Vector pw(n), qw(m);
      for (int i = 0; i < n; ++i) pw[i] = rng.uniform(0.1, 2.0);
      for (int j = 0; j < m; ++j) qw[j] = rng.uniform(0.1, 2.0);
      auto out = solve_stable_matching(DiscreteMeasure::from_weights(pw),
                                       DiscreteMeasure::from_weights(qw),
                                       SurplusMatrix(random_matrix(rng, n, m)));
      CHECK(out.stability_violations.empty());
      // Mass accounting: matched plus single masses rebuild the margins.
      CHECK((out.plan.row_margins + out.single_p - pw).cwiseAbs().maxCoeff() <= 1e-9);
      CHECK((out.plan.col_margins + out.single_q - qw).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
}

TEST_CASE("wage_bounds") {
  SUBCASE("matched pair collapses the interval to the wage") {
    Matrix alpha = mat({{0.0}});
    Matrix gamma = mat({{2.0}});
    auto out = solve_stable_matching(measure({1.0}), measure({1.0}),
                                     SurplusMatrix(alpha + gamma));
    auto table = wage_bounds(out, alpha, gamma);
    CHECK(table.upper(0, 0) - table.lower(0, 0) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(table.upper(0, 0) == doctest::Approx(out.payoffs.u[0]));
    CHECK(table.lower(0, 0) == doctest::Approx(2.0 - out.payoffs.v[0]));
  }
  SUBCASE("unmatched pair keeps a nonempty interval under stability") {
    Matrix phi = mat({{1.0}, {3.0}});
    Matrix alpha = mat({{0.4}, {1.0}});
    Matrix gamma = phi - alpha;
    auto out = solve_stable_matching(measure({1.0, 1.0}), measure({1.0}), SurplusMatrix(phi));
    auto table = wage_bounds(out, alpha, gamma);
    for (int x = 0; x < 2; ++x) CHECK(table.lower(x, 0) <= table.upper(x, 0) + 1e-9);
    // Matched cell (1,0) is point valued; the single's cell may be wide.
    CHECK(table.upper(1, 0) - table.lower(1, 0) == doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("splitting the surplus in half flips the interval under role swap") {
    SplitMix64 rng(62);
    Matrix phi = random_matrix(rng, 3, 4);
    Matrix half = phi / 2.0;
    auto out = solve_stable_matching(measure({1, 1, 1}), measure({1, 1, 1, 1}),
                                     SurplusMatrix(phi));
    auto table = wage_bounds(out, half, half);
    // Swapped roles: transpose everything and exchange u with v. The swapped
    // interval is the negated reflection of the original.
    MatchingOutcome swapped;
    swapped.plan = TransportPlan::from_mass(out.plan.mass.transpose());
    swapped.single_p = out.single_q;
    swapped.single_q = out.single_p;
    swapped.payoffs = Potentials{out.payoffs.v, out.payoffs.u, 0.0};
    swapped.surplus_used = phi.transpose();
    auto table_swapped = wage_bounds(swapped, half.transpose(), half.transpose());
    for (int x = 0; x < 3; ++x)
      for (int y = 0; y < 4; ++y) {
        CHECK(table_swapped.lower(y, x) == doctest::Approx(-table.upper(x, y)).epsilon(1e-12));
        CHECK(table_swapped.upper(y, x) == doctest::Approx(-table.lower(x, y)).epsilon(1e-12));
      }
  }
  SUBCASE("surplus mismatch is rejected") {
    auto out = solve_stable_matching(measure({1.0}), measure({1.0}), SurplusMatrix(mat({{2.0}})));
    CHECK_THROWS_AS(wage_bounds(out, mat({{0.0}}), mat({{1.0}})), std::invalid_argument);
  }
}

TEST_CASE("hedonic_reduce") {
  SUBCASE("pairwise max with recorded quality") {
    auto red = hedonic_reduce(HedonicSpec(mat({{0.0, 1.0}}), mat({{1.0, 3.0}})));
    CHECK(red.surplus.values(0, 0) == doctest::Approx(2.0));
    CHECK(red.best_quality(0, 0) == 1);
  }
  SUBCASE("identical cost and utility rows collapse to zero surplus") {
    Matrix c = mat({{0.5, 1.5}});
    auto red = hedonic_reduce(HedonicSpec(c, c));
    CHECK(red.surplus.values(0, 0) == doctest::Approx(0.0));
  }
  SUBCASE("ties break toward the lowest quality index") {
    auto red = hedonic_reduce(HedonicSpec(mat({{1.0, 1.0}}), mat({{2.0, 2.0}})));
    CHECK(red.best_quality(0, 0) == 0);
  }
}

TEST_CASE("hedonic_price_bounds") {
  SUBCASE("traded quality priced at a point, untraded gets an interval") {
    HedonicSpec spec(mat({{0.0, 1.0}}), mat({{1.0, 3.0}}));
    auto red = hedonic_reduce(spec);
    auto out = solve_stable_matching(measure({1.0}), measure({1.0}), red.surplus);
    auto bounds = hedonic_price_bounds(out, spec);
    REQUIRE(bounds.traded.size() == 2);
    CHECK(bounds.traded[1]);
    CHECK_FALSE(bounds.traded[0]);
    CHECK(bounds.upper[1] - bounds.lower[1] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(bounds.upper[0] - bounds.lower[0] == doctest::Approx(1.0));  // [1-v, 0+C]
  }
  SUBCASE("all singles evaluate with zero payoffs") {
    HedonicSpec spec(mat({{2.0}}), mat({{1.0}}));  // surplus -1, nobody trades
    auto red = hedonic_reduce(spec);
    auto out = solve_stable_matching(measure({1.0}), measure({1.0}), red.surplus);
    auto bounds = hedonic_price_bounds(out, spec);
    CHECK(bounds.lower[0] == doctest::Approx(1.0));  // max_y U - 0
    CHECK(bounds.upper[0] == doctest::Approx(2.0));  // min_x 0 + C
    CHECK_FALSE(bounds.traded[0]);
  }
  SUBCASE("shifting utilities by a constant keeps traded intervals tight") {
    SplitMix64 rng(63);
    Matrix cost = random_matrix(rng, 3, 3, 0.0, 1.0);
    Matrix util = random_matrix(rng, 4, 3, 0.5, 2.0);
    for (double shift : {0.0, 0.9}) {
      HedonicSpec spec(cost, util.array() + shift);
      auto red = hedonic_reduce(spec);
      auto out = solve_stable_matching(measure({1, 1, 1}), measure({1, 1, 1, 1}), red.surplus);
      auto bounds = hedonic_price_bounds(out, spec);
      for (int z = 0; z < 3; ++z)
        if (bounds.traded[z])
          CHECK(bounds.upper[z] - bounds.lower[z] == doctest::Approx(0.0).epsilon(1e-9));
    }
  }
  SUBCASE("hedonic consistency on random instances") {
    SplitMix64 rng(64);
    for (int rep = 0; rep < 20; ++rep) {
      const int n = 1 + static_cast<int>(rng.next() % 4);
      const int m = 1 + static_cast<int>(rng.next() % 4);
      const int nz = 1 + static_cast<int>(rng.next() % 4);
      HedonicSpec spec(random_matrix(rng, n, nz), random_matrix(rng, m, nz));
      auto red = hedonic_reduce(spec);
      Vector pw(n), qw(m);
      for (int i = 0; i < n; ++i) pw[i] = rng.uniform(0.2, 1.5);
      for (int j = 0; j < m; ++j) qw[j] = rng.uniform(0.2, 1.5);
      auto out = solve_stable_matching(DiscreteMeasure::from_weights(pw),
                                       DiscreteMeasure::from_weights(qw), red.surplus);
      // For every matched pair the traded quality realizes u + v.
      for (int x = 0; x < n; ++x)
        for (int y = 0; y < m; ++y) {
          if (out.plan.mass(x, y) <= 1e-9) continue;
          const int z = red.best_quality(x, y);
          CHECK(spec.consumer_utility(y, z) - spec.producer_cost(x, z) ==
                doctest::Approx(out.payoffs.u[x] + out.payoffs.v[y]).epsilon(1e-9));
        }
    }
  }
}
