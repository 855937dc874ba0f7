#include <doctest.h>

#include <sstream>

#include "problem_io.hpp"

using namespace otecon::cli;

namespace {

Json run_ok(const std::string& text) {
  Json doc = Json::parse(text);
  auto [code, result] = run_document(doc, {}, text);
  REQUIRE(code == 0);
  REQUIRE(result["status"] == "ok");
  return result;
}

}  // namespace

TEST_CASE("every problem kind round-trips through the document pipeline") {
  SUBCASE("ot_unmatched") {
    auto r = run_ok(R"({"schema":1,"kind":"ot_unmatched",
      "p":{"weights":[1.0,1.0]},"q":{"weights":[1.0]},
      "surplus":{"rows":2,"cols":1,"values":[[1.0],[3.0]]}})");
    CHECK(r["value"].get<double>() == doctest::Approx(3.0));
    CHECK(r["unmatched_p"][0].get<double>() == doctest::Approx(1.0));
  }
  SUBCASE("inverse, plain and penalized") {
    const char* base = R"({"schema":1,"kind":"inverse",
      "observed":{"rows":2,"cols":2,"values":[[1.0,0.5],[0.5,1.0]]},
      "basis":[{"rows":2,"cols":2,"values":[[1.0,-0.6],[-0.6,0.8]]}])";
    auto plain = run_ok(std::string(base) + "}");
    CHECK(plain["diagnostics"]["moment_residual"].get<double>() <= 1e-6);
    auto lasso = run_ok(std::string(base) + R"(,"penalty_weight":1000.0})");
    CHECK(lasso["lambda"][0].get<double>() == 0.0);
    CHECK(lasso["active_set"].empty());
  }
  SUBCASE("gravity") {
    auto r = run_ok(R"({"schema":1,"kind":"gravity",
      "flows":{"rows":3,"cols":3,"values":[[0,1.0,0.5],[0.8,0,1.2],[0.6,0.9,0]]}})");
    CHECK(r["diagnostics"]["marginal_residual"].get<double>() <= 1e-8);
    CHECK(r["fitted"]["values"][0][0].get<double>() == 0.0);
  }
  SUBCASE("matching with a wage split") {
    auto r = run_ok(R"({"schema":1,"kind":"matching",
      "p":{"weights":[1.0]},"q":{"weights":[1.0]},
      "alpha":{"rows":1,"cols":1,"values":[[0.0]]},
      "gamma":{"rows":1,"cols":1,"values":[[2.0]]}})");
    CHECK(r["stability_violations"].empty());
    CHECK(r["wage_upper"]["values"][0][0].get<double>() ==
          doctest::Approx(r["wage_lower"]["values"][0][0].get<double>()));
  }
  SUBCASE("hedonic") {
    auto r = run_ok(R"({"schema":1,"kind":"hedonic",
      "p":{"weights":[1.0]},"q":{"weights":[1.0]},
      "producer_cost":{"rows":1,"cols":2,"values":[[0.0,1.0]]},
      "consumer_utility":{"rows":1,"cols":2,"values":[[1.0,3.0]]}})");
    CHECK(r["surplus"]["values"][0][0].get<double>() == doctest::Approx(2.0));
    CHECK(r["best_quality"][0][0].get<int>() == 1);
    CHECK(r["traded"][1].get<bool>());
  }
  SUBCASE("choice_invert by closed-form logit") {
    auto r = run_ok(R"({"schema":1,"kind":"choice_invert","method":"logit",
      "shares":[0.5,0.5],"sigma":1.0})");
    CHECK(r["systematic"][1].get<double>() == doctest::Approx(0.0));
  }
  SUBCASE("choice_invert by sampled assignment") {
    auto r = run_ok(R"({"schema":1,"kind":"choice_invert","method":"sampled_lp",
      "shares":[0.5,0.5],
      "draws":{"rows":2,"cols":2,"values":[[1.0,0.0],[0.0,2.0]]}})");
    CHECK(r["plan"]["values"][0][0].get<double>() == doctest::Approx(0.5));
  }
  SUBCASE("static bounds") {
    auto r = run_ok(R"({"schema":1,"kind":"bounds",
      "P":{"support":[0.0,1.0],"probs":[0.5,0.5]},
      "Q":{"support":[0.0,1.0],"probs":[0.5,0.5]},
      "payoff":{"rows":2,"cols":2,"values":[[0.0,0.0],[0.0,1.0]]}})");
    CHECK(r["upper"].get<double>() == doctest::Approx(0.5));
    CHECK(r["lower"].get<double>() == doctest::Approx(0.0));
  }
  SUBCASE("qr") {
    auto r = run_ok(R"({"schema":1,"kind":"qr","tau":0.5,
      "X":{"rows":3,"cols":1,"values":[[1],[1],[1]]},"Y":[1.0,2.0,9.0]})");
    CHECK(r["beta"][0].get<double>() == doctest::Approx(2.0));
  }
  SUBCASE("vqr") {
    auto r = run_ok(R"({"schema":1,"kind":"vqr","grid":{"m":3},
      "X":{"rows":6,"cols":1,"values":[[1],[1],[1],[1],[1],[1]]},
      "Y":[0.1,0.9,0.4,0.7,0.2,0.6]})");
    CHECK(r["beta"]["rows"].get<int>() == 3);
    CHECK(r["diagnostics"]["mean_independence_residual"].get<double>() <= 1e-9);
  }
  SUBCASE("quantile_transform") {
    auto r = run_ok(R"({"schema":1,"kind":"quantile_transform",
      "grid":{"taus":[0.25,0.75]},
      "law":{"support":[3.0,7.0],"probs":[0.5,0.5]}})");
    CHECK(r["value"].get<double>() == doctest::Approx(3.0));
    CHECK(r["is_monotone"].get<bool>());
  }
  SUBCASE("game") {
    auto r = run_ok(R"({"schema":1,"kind":"game",
      "payoff":{"rows":1,"cols":1,"values":[[4.0]]}})");
    CHECK(r["game_value"].get<double>() == doctest::Approx(4.0));
  }
  SUBCASE("strassen") {
    auto r = run_ok(R"({"schema":1,"kind":"strassen",
      "gamma":{"rows":2,"cols":2,"values":[[1,0],[0,1]]},
      "p":[0.7,0.3],"q":[0.5,0.5]})");
    CHECK(r["primal"].get<double>() == doctest::Approx(0.2));
    CHECK(r["witness"][0].get<int>() == 1);
    CHECK_FALSE(r["in_identified_set"].get<bool>());
  }
}

TEST_CASE("schema marker and kind are validated") {
  SUBCASE("wrong schema version") {
    const std::string raw = R"({"schema":2,"kind":"ot"})";
    CHECK_THROWS_AS(run_document(Json::parse(raw), {}, raw), SchemaError);
  }
  SUBCASE("missing schema") {
    const std::string raw = R"({"kind":"ot"})";
    CHECK_THROWS_AS(run_document(Json::parse(raw), {}, raw), SchemaError);
  }
  SUBCASE("unknown kind") {
    const std::string raw = R"({"schema":1,"kind":"frobnicate"})";
    CHECK_THROWS_AS(run_document(Json::parse(raw), {}, raw), SchemaError);
  }
  SUBCASE("sampling without a seed") {
    const std::string raw = R"({"schema":1,"kind":"choice_invert","method":"mixed",
      "shares":[0.5,0.5],"sigma":0.5,
      "sample":{"num_draws":5,"distribution":"normal"}})";
    CHECK_THROWS_AS(run_document(Json::parse(raw), {}, raw), SchemaError);
  }
}

TEST_CASE("input hash is stable and sensitive to bytes") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") != fnv1a64("b"));
  CHECK(fnv1a64("otecon") == fnv1a64("otecon"));
}
