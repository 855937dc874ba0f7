#include "problem_io.hpp"

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

#include <chrono>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace otecon::cli {

namespace {

const Json& field(const Json& doc, const std::string& key, const std::string& where) {
  if (!doc.is_object()) throw SchemaError(where, "expected an object");
  auto it = doc.find(key);
  if (it == doc.end()) throw SchemaError(where, "missing field '" + key + "'");
  return *it;
}

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw SchemaError(where, "expected a number");
  return j.get<double>();
}

Vector parse_vector(const Json& j, const std::string& where) {
  if (!j.is_array()) throw SchemaError(where, "expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = number(j[i], where + "[" + std::to_string(i) + "]");
  return v;
}

Matrix parse_matrix(const Json& j, const std::string& where) {
  const int rows = static_cast<int>(number(field(j, "rows", where), where + ".rows"));
  const int cols = static_cast<int>(number(field(j, "cols", where), where + ".cols"));
  if (rows < 0 || cols < 0) throw SchemaError(where, "negative dimensions");
  const Json& values = field(j, "values", where);
  if (!values.is_array() || static_cast<int>(values.size()) != rows)
    throw SchemaError(where + ".values", "expected " + std::to_string(rows) + " rows");
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const Json& row = values[r];
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      throw SchemaError(where + ".values[" + std::to_string(r) + "]",
                        "expected " + std::to_string(cols) + " columns");
    for (int c = 0; c < cols; ++c)
      m(r, c) = number(row[c], where + ".values[" + std::to_string(r) + "]");
  }
  return m;
}

DiscreteMeasure parse_measure(const Json& j, const std::string& where) {
  Vector weights = parse_vector(field(j, "weights", where), where + ".weights");
  if (j.contains("labels")) {
    const Json& lab = j["labels"];
    if (!lab.is_array() || lab.size() != static_cast<std::size_t>(weights.size()))
      throw SchemaError(where + ".labels", "labels must match weights in length");
    std::vector<std::string> labels;
    for (const auto& l : lab) {
      if (!l.is_string()) throw SchemaError(where + ".labels", "labels must be strings");
      labels.push_back(l.get<std::string>());
    }
    try {
      return DiscreteMeasure::with_labels(std::move(labels), std::move(weights));
    } catch (const std::invalid_argument& e) {
      throw SchemaError(where, e.what());
    }
  }
  try {
    return DiscreteMeasure::from_weights(std::move(weights));
  } catch (const std::invalid_argument& e) {
    throw SchemaError(where, e.what());
  }
}

MarginalLaw parse_law(const Json& j, const std::string& where) {
  try {
    return MarginalLaw(parse_vector(field(j, "support", where), where + ".support"),
                       parse_vector(field(j, "probs", where), where + ".probs"));
  } catch (const std::invalid_argument& e) {
    throw SchemaError(where, e.what());
  }
}

Json vec_json(const Vector& v) {
  Json out = Json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Json mat_json(const Matrix& m) {
  Json out;
  out["rows"] = static_cast<int>(m.rows());
  out["cols"] = static_cast<int>(m.cols());
  Json values = Json::array();
  for (int r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    values.push_back(row);
  }
  out["values"] = values;
  return out;
}

struct Knobs {
  ToleranceConfig tol;
  EntropicConfig entropic;
  InverseConfig inverse;
  double penalty_weight = 0.0;
  bool sigma_given = false;
};

Knobs parse_knobs(const Json& doc, const Overrides& over) {
  Knobs k;
  if (doc.contains("tolerances")) {
    const Json& t = doc["tolerances"];
    if (!t.is_object()) throw SchemaError("tolerances", "expected an object");
    if (t.contains("feasibility_tol")) k.tol.feasibility_tol = number(t["feasibility_tol"], "tolerances.feasibility_tol");
    if (t.contains("duality_gap_tol")) k.tol.duality_gap_tol = number(t["duality_gap_tol"], "tolerances.duality_gap_tol");
    if (t.contains("mass_quantum")) k.tol.mass_quantum = number(t["mass_quantum"], "tolerances.mass_quantum");
    if (t.contains("max_iterations")) k.tol.max_iterations = static_cast<int>(number(t["max_iterations"], "tolerances.max_iterations"));
    if (t.contains("marginal_tol")) k.entropic.marginal_tol = number(t["marginal_tol"], "tolerances.marginal_tol");
    if (t.contains("moment_tol")) k.inverse.moment_tol = number(t["moment_tol"], "tolerances.moment_tol");
  }
  if (doc.contains("sigma")) {
    k.entropic.sigma = number(doc["sigma"], "sigma");
    k.sigma_given = true;
  }
  if (doc.contains("log_domain")) {
    if (!doc["log_domain"].is_boolean()) throw SchemaError("log_domain", "expected a boolean");
    k.entropic.log_domain = doc["log_domain"].get<bool>();
  }
  if (doc.contains("epsilon_scaling_schedule"))
    for (const auto& s : doc["epsilon_scaling_schedule"])
      k.entropic.epsilon_scaling_schedule.push_back(number(s, "epsilon_scaling_schedule"));
  if (doc.contains("penalty_weight")) k.penalty_weight = number(doc["penalty_weight"], "penalty_weight");

  if (over.tol) {
    k.tol.feasibility_tol = *over.tol;
    k.entropic.marginal_tol = *over.tol;
    k.inverse.marginal_tol = *over.tol;
  }
  if (over.max_iterations) {
    k.tol.max_iterations = *over.max_iterations;
    k.entropic.max_iterations = *over.max_iterations;
    k.inverse.max_iterations = *over.max_iterations;
  }
  if (over.sigma) {
    k.entropic.sigma = *over.sigma;
    k.sigma_given = true;
  }
  k.inverse.marginal_tol = std::min(k.inverse.marginal_tol, k.entropic.marginal_tol);
  return k;
}

// ---- per-kind handlers ----------------------------------------------------

Json handle_ot(const Json& doc, const Knobs& k, bool unmatched) {
  auto p = parse_measure(field(doc, "p", "$"), "p");
  auto q = parse_measure(field(doc, "q", "$"), "q");
  SurplusMatrix phi(parse_matrix(field(doc, "surplus", "$"), "surplus"));
  if (phi.rows() != p.size() || phi.cols() != q.size())
    throw SchemaError("surplus", "dimensions do not match the measures");

  OtSolution sol = unmatched ? solve_with_unmatched(p, q, phi, k.tol)
                             : solve_exact(p, q, phi, k.tol);
  Json out;
  out["value"] = sol.value;
  out["plan"] = mat_json(sol.plan.mass);
  out["u"] = vec_json(sol.potentials.u);
  out["v"] = vec_json(sol.potentials.v);
  if (unmatched) {
    out["unmatched_p"] = vec_json(sol.unmatched_p);
    out["unmatched_q"] = vec_json(sol.unmatched_q);
  }
  // Diagnostics recomputed from the reported solution, not solver internals.
  const double dual = p.weights.dot(sol.potentials.u) + q.weights.dot(sol.potentials.v);
  double slack_max = 0.0;
  for (const auto& cell : sol.slackness_report)
    slack_max = std::max(slack_max, std::abs(cell.slack));
  Json diag;
  diag["iterations"] = sol.iterations;
  diag["duality_gap"] = dual - sol.value;
  diag["support_slack_max"] = slack_max;
  diag["feasibility_violation"] = sol.potentials.feasibility_violation;
  if (!unmatched) {
    diag["row_margin_residual"] = (sol.plan.row_margins - p.weights).cwiseAbs().maxCoeff();
    diag["col_margin_residual"] = (sol.plan.col_margins - q.weights).cwiseAbs().maxCoeff();
  }
  out["diagnostics"] = diag;
  return out;
}

Json handle_entropic(const Json& doc, const Knobs& k) {
  auto p = parse_measure(field(doc, "p", "$"), "p");
  auto q = parse_measure(field(doc, "q", "$"), "q");
  SurplusMatrix phi(parse_matrix(field(doc, "surplus", "$"), "surplus"));
  if (phi.rows() != p.size() || phi.cols() != q.size())
    throw SchemaError("surplus", "dimensions do not match the measures");
  if (!k.sigma_given) throw SchemaError("sigma", "entropic problems need sigma");

  IpfpResult res = ipfp_solve(p, q, phi, k.entropic);
  Json out;
  out["u"] = vec_json(res.potentials.u);
  out["v"] = vec_json(res.potentials.v);
  out["plan"] = mat_json(res.plan.mass);
  out["linear_value"] = (res.plan.mass.array() * phi.values.array()).sum();
  out["dual_objective"] =
      dual_objective(res.potentials.u, res.potentials.v, p, q, phi, k.entropic.sigma);
  Json diag;
  diag["iterations"] = res.iterations;
  diag["row_margin_residual"] = (res.plan.row_margins - p.weights).cwiseAbs().maxCoeff();
  diag["col_margin_residual"] = (res.plan.col_margins - q.weights).cwiseAbs().maxCoeff();
  out["diagnostics"] = diag;
  return out;
}

Json handle_inverse(const Json& doc, const Knobs& k) {
  auto obs = [&] {
    try {
      return ObservedPlan::from_matrix(parse_matrix(field(doc, "observed", "$"), "observed"));
    } catch (const std::invalid_argument& e) {
      throw SchemaError("observed", e.what());
    }
  }();
  const Json& basis_json = field(doc, "basis", "$");
  if (!basis_json.is_array()) throw SchemaError("basis", "expected an array of matrices");
  std::vector<Matrix> basis;
  for (std::size_t j = 0; j < basis_json.size(); ++j)
    basis.push_back(parse_matrix(basis_json[j], "basis[" + std::to_string(j) + "]"));

  Json out;
  Json diag;
  if (k.penalty_weight > 0.0) {
    LassoFit fit = fit_lasso(obs, basis, k.penalty_weight, k.inverse);
    out["lambda"] = vec_json(fit.lambda);
    out["active_set"] = fit.active_set;
    out["u"] = vec_json(fit.potentials.u);
    out["v"] = vec_json(fit.potentials.v);
    out["fitted"] = mat_json(fit.fitted.mass);
    diag["iterations"] = fit.report.iterations;
    diag["moment_residual"] = fit.report.moment_residual;
    diag["marginal_residual"] = fit.report.marginal_residual;
  } else {
    InverseFit fit = fit_inverse_ot(obs, basis, k.inverse);
    out["lambda"] = vec_json(fit.lambda);
    out["u"] = vec_json(fit.potentials.u);
    out["v"] = vec_json(fit.potentials.v);
    out["fitted"] = mat_json(fit.fitted.mass);
    diag["iterations"] = fit.report.iterations;
    double moment = 0.0;
    for (std::size_t j = 0; j < basis.size(); ++j)
      moment = std::max(moment, std::abs(((fit.fitted.mass - obs.pi_hat).array() *
                                          basis[j].array())
                                             .sum()));
    diag["moment_residual"] = moment;
    diag["marginal_residual"] = std::max(
        (fit.fitted.row_margins - obs.row_margins).cwiseAbs().maxCoeff(),
        (fit.fitted.col_margins - obs.col_margins).cwiseAbs().maxCoeff());
  }
  out["diagnostics"] = diag;
  return out;
}

Json handle_gravity(const Json& doc, const Knobs& k) {
  auto flows = [&] {
    try {
      return ObservedPlan::from_matrix(parse_matrix(field(doc, "flows", "$"), "flows"));
    } catch (const std::invalid_argument& e) {
      throw SchemaError("flows", e.what());
    }
  }();
  std::vector<Matrix> basis;
  if (doc.contains("basis")) {
    const Json& basis_json = doc["basis"];
    if (!basis_json.is_array()) throw SchemaError("basis", "expected an array of matrices");
    for (std::size_t j = 0; j < basis_json.size(); ++j)
      basis.push_back(parse_matrix(basis_json[j], "basis[" + std::to_string(j) + "]"));
  }
  GravityFit fit = gravity_fit(flows, basis, k.inverse);
  Json out;
  out["lambda"] = vec_json(fit.lambda);
  out["multilateral_resistance_u"] = vec_json(fit.resistances.u);
  out["multilateral_resistance_v"] = vec_json(fit.resistances.v);
  out["retained"] = fit.retained;
  out["fitted"] = mat_json(fit.fitted.mass);
  Json diag;
  diag["iterations"] = fit.report.iterations;
  diag["moment_residual"] = fit.report.moment_residual;
  diag["marginal_residual"] = fit.report.marginal_residual;
  diag["dropped"] = fit.report.dropped;
  diag["warnings"] = fit.report.warnings;
  out["diagnostics"] = diag;
  return out;
}

Json handle_matching(const Json& doc, const Knobs& k) {
  auto p = parse_measure(field(doc, "p", "$"), "p");
  auto q = parse_measure(field(doc, "q", "$"), "q");
  const bool split = doc.contains("alpha") || doc.contains("gamma");
  Matrix alpha, gamma;
  SurplusMatrix phi(Matrix::Zero(p.size(), q.size()));
  if (split) {
    alpha = parse_matrix(field(doc, "alpha", "$"), "alpha");
    gamma = parse_matrix(field(doc, "gamma", "$"), "gamma");
    phi = SurplusMatrix(alpha + gamma);
  } else {
    phi = SurplusMatrix(parse_matrix(field(doc, "surplus", "$"), "surplus"));
  }
  if (phi.rows() != p.size() || phi.cols() != q.size())
    throw SchemaError("surplus", "dimensions do not match the measures");

  MatchingOutcome out_come = solve_stable_matching(p, q, phi, k.tol);
  Json out;
  out["value"] = out_come.value;
  out["plan"] = mat_json(out_come.plan.mass);
  out["single_p"] = vec_json(out_come.single_p);
  out["single_q"] = vec_json(out_come.single_q);
  out["u"] = vec_json(out_come.payoffs.u);
  out["v"] = vec_json(out_come.payoffs.v);
  Json violations = Json::array();
  for (const auto& v : out_come.stability_violations) {
    Json item;
    item["kind"] = v.kind;
    item["x"] = v.x;
    item["y"] = v.y;
    item["amount"] = v.amount;
    violations.push_back(item);
  }
  out["stability_violations"] = violations;
  if (split) {
    auto table = wage_bounds(out_come, alpha, gamma, k.tol);
    out["wage_lower"] = mat_json(table.lower);
    out["wage_upper"] = mat_json(table.upper);
  }
  Json diag;
  diag["violation_count"] = static_cast<int>(out_come.stability_violations.size());
  diag["blocking_pair_worst"] = out_come.payoffs.feasibility_violation;
  out["diagnostics"] = diag;
  return out;
}

Json handle_hedonic(const Json& doc, const Knobs& k) {
  auto p = parse_measure(field(doc, "p", "$"), "p");
  auto q = parse_measure(field(doc, "q", "$"), "q");
  Matrix cost = parse_matrix(field(doc, "producer_cost", "$"), "producer_cost");
  Matrix util = parse_matrix(field(doc, "consumer_utility", "$"), "consumer_utility");
  if (cost.rows() != p.size()) throw SchemaError("producer_cost", "rows must match p");
  if (util.rows() != q.size()) throw SchemaError("consumer_utility", "rows must match q");
  auto spec = [&] {
    try {
      return HedonicSpec(cost, util);
    } catch (const std::invalid_argument& e) {
      throw SchemaError("producer_cost/consumer_utility", e.what());
    }
  }();

  HedonicReduction red = hedonic_reduce(spec);
  MatchingOutcome match = solve_stable_matching(p, q, red.surplus, k.tol);
  HedonicPriceBounds prices = hedonic_price_bounds(match, spec, k.tol);

  Json out;
  out["surplus"] = mat_json(red.surplus.values);
  Json zstar = Json::array();
  for (int x = 0; x < red.best_quality.rows(); ++x) {
    Json row = Json::array();
    for (int y = 0; y < red.best_quality.cols(); ++y) row.push_back(red.best_quality(x, y));
    zstar.push_back(row);
  }
  out["best_quality"] = zstar;
  out["value"] = match.value;
  out["plan"] = mat_json(match.plan.mass);
  out["u"] = vec_json(match.payoffs.u);
  out["v"] = vec_json(match.payoffs.v);
  out["price_lower"] = vec_json(prices.lower);
  out["price_upper"] = vec_json(prices.upper);
  out["traded"] = prices.traded;
  Json diag;
  diag["violation_count"] = static_cast<int>(match.stability_violations.size());
  out["diagnostics"] = diag;
  return out;
}

Json handle_choice(const Json& doc, const Knobs& k) {
  const std::string method = field(doc, "method", "$").get<std::string>();
  ShareVector shares = [&] {
    try {
      return ShareVector(parse_vector(field(doc, "shares", "$"), "shares"));
    } catch (const std::invalid_argument& e) {
      throw SchemaError("shares", e.what());
    }
  }();
  const double sigma = doc.contains("sigma") ? number(doc["sigma"], "sigma") : 0.0;

  Json out;
  Json diag;
  if (method == "logit") {
    Vector v = invert_pure_logit(shares, sigma);
    out["systematic"] = vec_json(v);
    ChoiceSample degenerate(Matrix::Zero(1, shares.q.size()), sigma);
    diag["share_residual"] =
        (simulate_market_shares(v, degenerate).q - shares.q).cwiseAbs().maxCoeff();
    diag["iterations"] = 0;
    out["diagnostics"] = diag;
    return out;
  }

  // Sampled methods: draws either explicit or generated from a seeded,
  // implementation-pinned generator (splitmix64 + Box-Muller / Gumbel).
  Matrix draws;
  if (doc.contains("draws")) {
    draws = parse_matrix(doc["draws"], "draws");
  } else {
    const Json& sample = field(doc, "sample", "$");
    if (!doc.contains("seed") && !sample.contains("seed"))
      throw SchemaError("seed", "sampling requested without a seed");
    const std::uint64_t seed = sample.contains("seed")
                                   ? sample["seed"].get<std::uint64_t>()
                                   : doc["seed"].get<std::uint64_t>();
    const int n = static_cast<int>(number(field(sample, "num_draws", "sample"), "sample.num_draws"));
    if (n < 1) throw SchemaError("sample.num_draws", "need at least one draw");
    const std::string dist = field(sample, "distribution", "sample").get<std::string>();
    const double scale = sample.contains("scale") ? number(sample["scale"], "sample.scale") : 1.0;
    SplitMix64 rng(seed);
    draws = Matrix(n, shares.q.size());
    for (int i = 0; i < n; ++i)
      for (int y = 0; y < shares.q.size(); ++y) {
        if (dist == "normal") draws(i, y) = scale * rng.normal();
        else if (dist == "uniform") draws(i, y) = scale * rng.uniform(-1.0, 1.0);
        else if (dist == "gumbel") draws(i, y) = scale * rng.gumbel();
        else throw SchemaError("sample.distribution", "unknown distribution '" + dist + "'");
      }
  }
  if (draws.cols() != shares.q.size())
    throw SchemaError("draws", "columns must match the number of alternatives");

  if (method == "sampled_lp") {
    ChoiceSample sample(draws, 0.0);
    SampledInversion inv = invert_sampled_lp(shares, sample, k.tol);
    out["systematic"] = vec_json(inv.systematic);
    out["plan"] = mat_json(inv.plan.mass);
    diag["iterations"] = inv.iterations;
    diag["share_residual"] = (inv.plan.col_margins - shares.q).cwiseAbs().maxCoeff();
  } else if (method == "mixed") {
    if (sigma <= 0.0) throw SchemaError("sigma", "mixed inversion needs sigma > 0");
    ChoiceSample sample(draws, sigma);
    MixedLogitInversion inv = invert_mixed_logit(shares, sample, k.entropic);
    out["systematic"] = vec_json(inv.systematic);
    diag["iterations"] = inv.iterations;
    diag["share_residual"] =
        (simulate_market_shares(inv.systematic, sample).q - shares.q).cwiseAbs().maxCoeff();
  } else {
    throw SchemaError("method", "unknown method '" + method + "'");
  }
  out["diagnostics"] = diag;
  return out;
}

Json hedge_json(const Hedge& h) {
  Json out;
  out["u"] = vec_json(h.u);
  out["v"] = vec_json(h.v);
  if (h.h.size() > 0) out["h"] = vec_json(h.h);
  out["price"] = h.price;
  return out;
}

Json handle_bounds(const Json& doc, const Knobs& k, bool martingale) {
  MarginalLaw P = parse_law(field(doc, "P", "$"), "P");
  MarginalLaw Q = parse_law(field(doc, "Q", "$"), "Q");
  Matrix payoff = parse_matrix(field(doc, "payoff", "$"), "payoff");
  if (payoff.rows() != P.size() || payoff.cols() != Q.size())
    throw SchemaError("payoff", "dimensions must match the supports");
  BoundsResult r = martingale ? option_bounds_martingale(P, Q, payoff, k.tol)
                              : option_bounds_static(P, Q, payoff, k.tol);
  Json out;
  out["lower"] = r.lower;
  out["upper"] = r.upper;
  out["upper_hedge"] = hedge_json(r.upper_hedge);
  out["lower_hedge"] = hedge_json(r.lower_hedge);
  out["upper_plan"] = mat_json(r.upper_plan.mass);
  out["lower_plan"] = mat_json(r.lower_plan.mass);
  Json diag;
  diag["width"] = r.upper - r.lower;
  diag["upper_hedge_gap"] = r.upper_hedge.price - r.upper;
  diag["lower_hedge_gap"] = r.lower - r.lower_hedge.price;
  out["diagnostics"] = diag;
  return out;
}

Json handle_qr(const Json& doc, const Knobs& k) {
  Matrix x = parse_matrix(field(doc, "X", "$"), "X");
  Vector y = parse_vector(field(doc, "Y", "$"), "Y");
  const double tau = number(field(doc, "tau", "$"), "tau");
  auto data = [&] {
    try {
      return RegressionData(x, y);
    } catch (const std::invalid_argument& e) {
      throw SchemaError("X/Y", e.what());
    }
  }();
  Vector beta = classic_qr(data, tau, k.tol);
  Json out;
  out["beta"] = vec_json(beta);
  double loss = 0.0;
  int below = 0;
  for (int i = 0; i < y.size(); ++i) {
    const double z = y[i] - x.row(i).dot(beta);
    loss += (z >= 0 ? tau * z : -(1 - tau) * z) / y.size();
    if (z < -1e-12) ++below;
  }
  Json diag;
  diag["pinball_loss"] = loss;
  diag["fraction_below"] = static_cast<double>(below) / y.size();
  out["diagnostics"] = diag;
  return out;
}

Json handle_vqr(const Json& doc, const Knobs& k) {
  Matrix x = parse_matrix(field(doc, "X", "$"), "X");
  Vector y = parse_vector(field(doc, "Y", "$"), "Y");
  auto data = [&] {
    try {
      return RegressionData(x, y);
    } catch (const std::invalid_argument& e) {
      throw SchemaError("X/Y", e.what());
    }
  }();
  const Json& grid_json = field(doc, "grid", "$");
  auto grid = [&] {
    try {
      if (grid_json.contains("taus"))
        return QuantileGrid(parse_vector(grid_json["taus"], "grid.taus"));
      return QuantileGrid::midpoint(
          static_cast<int>(number(field(grid_json, "m", "grid"), "grid.m")));
    } catch (const std::invalid_argument& e) {
      throw SchemaError("grid", e.what());
    }
  }();

  VqrResult res = vqr_solve(data, grid, k.tol);
  Json out;
  out["taus"] = vec_json(grid.taus);
  out["beta"] = mat_json(res.curve.beta);
  out["b"] = mat_json(res.curve.b);
  out["psi"] = vec_json(res.psi);
  out["coupling"] = mat_json(res.coupling);
  out["crossing_segments"] = res.crossing_segments;
  Json diag;
  diag["lp_pivots"] = res.lp_pivots;
  diag["representation_error"] = res.representation_error;
  diag["mean_independence_residual"] = res.mean_independence_residual;
  out["diagnostics"] = diag;
  return out;
}

Json handle_quantile_transform(const Json& doc, const Knobs& k) {
  const Json& grid_json = field(doc, "grid", "$");
  auto grid = [&] {
    try {
      if (grid_json.contains("taus"))
        return QuantileGrid(parse_vector(grid_json["taus"], "grid.taus"));
      return QuantileGrid::midpoint(
          static_cast<int>(number(field(grid_json, "m", "grid"), "grid.m")));
    } catch (const std::invalid_argument& e) {
      throw SchemaError("grid", e.what());
    }
  }();
  MarginalLaw law = parse_law(field(doc, "law", "$"), "law");
  QuantileTransportResult res = quantile_transform_ot(grid, law, k.tol);
  Json out;
  out["value"] = res.solution.value;
  out["plan"] = mat_json(res.solution.plan.mass);
  out["u"] = vec_json(res.solution.potentials.u);
  out["v"] = vec_json(res.solution.potentials.v);
  out["is_monotone"] = res.check.is_monotone;
  Json diag;
  diag["oracle_value_gap"] = res.check.value - res.check.oracle_value;
  diag["max_crossing_mass"] = res.check.max_crossing_mass;
  out["diagnostics"] = diag;
  return out;
}

Json handle_game(const Json& doc, const Knobs& k) {
  auto game = [&] {
    try {
      return HideSeekGame(parse_matrix(field(doc, "payoff", "$"), "payoff"));
    } catch (const std::invalid_argument& e) {
      throw SchemaError("payoff", e.what());
    }
  }();
  GameSolution sol = hide_and_seek_solve(game, k.tol);
  const double oracle = minimax_oracle(game, k.tol);
  Json out;
  out["game_value"] = sol.game_value;
  out["hider_probs"] = mat_json(sol.hider_probs);
  out["seeker_row_probs"] = vec_json(sol.seeker_row_probs);
  out["seeker_col_probs"] = vec_json(sol.seeker_col_probs);
  out["ot_value"] = sol.ot_value;
  Json diag;
  diag["seeker_guarantee"] = sol.seeker_guarantee;
  diag["hider_exposure"] = sol.hider_exposure;
  diag["minimax_oracle_gap"] = sol.game_value - oracle;
  out["diagnostics"] = diag;
  return out;
}

Json handle_strassen(const Json& doc, const Knobs& k) {
  Matrix g = parse_matrix(field(doc, "gamma", "$"), "gamma");
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> gamma(g.rows(), g.cols());
  for (int x = 0; x < g.rows(); ++x)
    for (int y = 0; y < g.cols(); ++y) {
      if (g(x, y) != 0.0 && g(x, y) != 1.0)
        throw SchemaError("gamma", "entries must be 0 or 1");
      gamma(x, y) = g(x, y) != 0.0;
    }
  auto spec = [&] {
    try {
      return IdentificationSpec(gamma, parse_vector(field(doc, "p", "$"), "p"),
                                parse_vector(field(doc, "q", "$"), "q"));
    } catch (const std::invalid_argument& e) {
      throw SchemaError("p/q", e.what());
    }
  }();
  StrassenResult res = strassen_test(spec, k.tol);
  Json out;
  out["primal"] = res.primal;
  out["dual"] = res.dual;
  out["witness"] = res.witness;
  out["in_identified_set"] = res.in_identified_set;
  Json diag;
  diag["duality_gap"] = res.primal - res.dual;
  out["diagnostics"] = diag;
  return out;
}

const std::set<std::string> kKnownKinds = {
    "ot", "ot_unmatched", "entropic", "inverse", "gravity", "matching", "hedonic",
    "choice_invert", "bounds", "bounds_martingale", "qr", "vqr", "quantile_transform",
    "game", "strassen"};

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool kind_matches_subcommand(const std::string& sub, const std::string& kind) {
  static const std::map<std::string, std::set<std::string>> table = {
      {"solve", {"ot", "ot_unmatched"}},
      {"sinkhorn", {"entropic"}},
      {"invert", {"inverse"}},
      {"gravity", {"gravity"}},
      {"match", {"matching"}},
      {"hedonic", {"hedonic"}},
      {"choice", {"choice_invert"}},
      {"bounds", {"bounds", "bounds_martingale"}},
      {"qr", {"qr"}},
      {"vqr", {"vqr"}},
      {"quantile", {"quantile_transform"}},
      {"game", {"game"}},
      {"identify", {"strassen"}}};
  auto it = table.find(sub);
  return it != table.end() && it->second.count(kind) > 0;
}

std::pair<int, Json> run_problem(const Json& doc, const Overrides& overrides) {
  const Json& kind_json = field(doc, "kind", "$");
  if (!kind_json.is_string()) throw SchemaError("kind", "expected a string");
  const std::string kind = kind_json.get<std::string>();
  if (!kKnownKinds.count(kind)) throw SchemaError("kind", "unknown kind '" + kind + "'");
  Knobs knobs = parse_knobs(doc, overrides);

  Json result;
  result["schema"] = 1;
  result["kind"] = kind;
  const auto start = std::chrono::steady_clock::now();
  int code = 0;
  try {
    Json payload;
    if (kind == "ot") payload = handle_ot(doc, knobs, false);
    else if (kind == "ot_unmatched") payload = handle_ot(doc, knobs, true);
    else if (kind == "entropic") payload = handle_entropic(doc, knobs);
    else if (kind == "inverse") payload = handle_inverse(doc, knobs);
    else if (kind == "gravity") payload = handle_gravity(doc, knobs);
    else if (kind == "matching") payload = handle_matching(doc, knobs);
    else if (kind == "hedonic") payload = handle_hedonic(doc, knobs);
    else if (kind == "choice_invert") payload = handle_choice(doc, knobs);
    else if (kind == "bounds") payload = handle_bounds(doc, knobs, false);
    else if (kind == "bounds_martingale") payload = handle_bounds(doc, knobs, true);
    else if (kind == "qr") payload = handle_qr(doc, knobs);
    else if (kind == "vqr") payload = handle_vqr(doc, knobs);
    else if (kind == "quantile_transform") payload = handle_quantile_transform(doc, knobs);
    else if (kind == "game") payload = handle_game(doc, knobs);
    else if (kind == "strassen") payload = handle_strassen(doc, knobs);
    result["status"] = "ok";
    for (auto& [key, value] : payload.items()) result[key] = std::move(value);
  } catch (const SchemaError&) {
    throw;  // malformed input, exit 2 at the top level
  } catch (const SolverError& e) {
    result["status"] = "error";
    result["error"] = e.what();
    code = 1;
  } catch (const std::invalid_argument& e) {
    // Structurally valid input that the solver rejects (unbalanced masses,
    // zero shares, ...): a diagnostic document, not a schema error.
    result["status"] = "error";
    result["error"] = e.what();
    code = 1;
  }
  const auto stop = std::chrono::steady_clock::now();
  result["wall_clock_ms"] =
      std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(stop - start)
          .count();
  return {code, result};
}

std::pair<int, Json> run_document(const Json& doc, const Overrides& overrides,
                                  const std::string& raw_bytes) {
  if (!doc.is_object()) throw SchemaError("$", "expected a JSON object");
  if (!doc.contains("schema") || !doc["schema"].is_number_integer() ||
      doc["schema"].get<int>() != 1)
    throw SchemaError("schema", "expected the integer 1");

  std::ostringstream hash;
  hash << "fnv1a64:" << std::hex << fnv1a64(raw_bytes);

  if (doc.contains("batch")) {
    const Json& batch = doc["batch"];
    if (!batch.is_array()) throw SchemaError("batch", "expected an array of problems");
    Json out;
    out["schema"] = 1;
    out["input_hash"] = hash.str();
    Json results = Json::array();
    int worst = 0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      auto [code, result] = run_problem(batch[i], overrides);
      worst = std::max(worst, code);
      results.push_back(std::move(result));
    }
    out["results"] = std::move(results);
    return {worst, out};
  }

  auto [code, result] = run_problem(doc, overrides);
  Json out;
  out["schema"] = 1;
  out["input_hash"] = hash.str();
  for (auto& [key, value] : result.items())
    if (key != "schema") out[key] = std::move(value);
  return {code, out};
}

}  // namespace otecon::cli
