#include "otecon/games.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "otecon/errors.hpp"
#include "otecon/linprog.hpp"
#include "otecon/otexact.hpp"

namespace otecon {

HideSeekGame::HideSeekGame(Matrix payoff_in) : payoff(std::move(payoff_in)) {
  if (payoff.rows() != payoff.cols()) throw std::invalid_argument("hide-and-seek: square matrix");
  if (payoff.rows() < 1) throw std::invalid_argument("hide-and-seek: empty game");
  if (!payoff.allFinite() || (payoff.array() <= 0.0).any())
    throw std::invalid_argument("hide-and-seek: payoffs must be strictly positive");
}

GameSolution hide_and_seek_solve(const HideSeekGame& game, const ToleranceConfig& cfg) {
  const int n = game.size();
  const Matrix inv_payoff = game.payoff.cwiseInverse();
  DiscreteMeasure margins =
      DiscreteMeasure::from_weights(Vector::Constant(n, 1.0 / n));
  // The displayed program caps both margins at 1/n with inequalities; with
  // strictly positive surplus they bind, and the unmatched-variant solver
  // returns the matching inequality duals u, v >= 0.
  OtSolution sol = solve_with_unmatched(margins, margins, SurplusMatrix(inv_payoff), cfg);

  GameSolution out;
  out.ot_value = sol.value;
  if (sol.value <= 0.0) throw SolverError("hide-and-seek: transport value must be positive");
  const double big_v = 1.0 / sol.value;
  out.game_value = big_v / n;
  out.hider_probs = big_v * sol.plan.mass.cwiseQuotient(game.payoff);
  out.seeker_row_probs = big_v * sol.potentials.u / n;
  out.seeker_col_probs = big_v * sol.potentials.v / n;

  out.seeker_guarantee = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out.seeker_guarantee =
          std::min(out.seeker_guarantee,
                   (out.seeker_row_probs[i] + out.seeker_col_probs[j]) * game.payoff(i, j));
  out.hider_exposure = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0, col = 0.0;
    for (int j = 0; j < n; ++j) {
      row += game.payoff(i, j) * out.hider_probs(i, j);
      col += game.payoff(j, i) * out.hider_probs(j, i);
    }
    out.hider_exposure = std::max({out.hider_exposure, row, col});
  }
  return out;
}

double minimax_oracle(const HideSeekGame& game, const ToleranceConfig& cfg) {
  const int n = game.size();
  // Variables: x (n*n cell probabilities) and t; minimize t with every row
  // and column line payoff below t. Payoffs are positive so t >= 0 is not
  // binding at the optimum.
  const int vars = n * n + 1;
  const int lines = 2 * n;
  LinearProgram lp;
  lp.objective = Vector::Zero(vars);
  lp.objective[n * n] = -1.0;
  lp.constraints = Matrix::Zero(lines + 1, vars);
  lp.rhs = Vector::Zero(lines + 1);
  lp.sense.assign(lines + 1, RowSense::LessEqual);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      lp.constraints(i, i * n + j) = game.payoff(i, j);          // row line i
      lp.constraints(n + j, i * n + j) = game.payoff(i, j);      // column line j
    }
  lp.constraints.block(0, n * n, lines, 1).setConstant(-1.0);
  lp.constraints.row(lines).head(n * n).setOnes();
  lp.rhs[lines] = 1.0;
  lp.sense[lines] = RowSense::Equal;

  LpSolution sol = solve_lp(lp, cfg);
  if (sol.status != LpStatus::Optimal)
    throw SolverError(std::string("minimax_oracle: simplex returned ") + to_string(sol.status));
  return sol.x[n * n];
}

IdentificationSpec::IdentificationSpec(
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> gamma_in, Vector p_in, Vector q_in)
    : gamma(std::move(gamma_in)), p(std::move(p_in)), q(std::move(q_in)) {
  if (gamma.rows() != p.size() || gamma.cols() != q.size())
    throw std::invalid_argument("identification spec: dimension mismatch");
  if ((p.array() < 0.0).any() || (q.array() < 0.0).any())
    throw std::invalid_argument("identification spec: measures must be nonnegative");
  if (std::abs(p.sum() - 1.0) > 1e-9 || std::abs(q.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("identification spec: measures must be probabilities");
}

StrassenResult strassen_test(const IdentificationSpec& spec, const ToleranceConfig& cfg) {
  const int n = static_cast<int>(spec.gamma.rows());
  const int m = static_cast<int>(spec.gamma.cols());
  if (m > 20)
    throw std::invalid_argument("strassen_test: subset enumeration capped at |Y| <= 20");

  // Primal: minimal mass placed outside the correspondence. Surplus 1 on
  // admissible cells, 0 elsewhere; the optimal value is 1 - V.
  Matrix phi(n, m);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < m; ++y) phi(x, y) = spec.gamma(x, y) ? 1.0 : 0.0;
  OtSolution sol = solve_exact(DiscreteMeasure::from_weights(spec.p),
                               DiscreteMeasure::from_weights(spec.q), SurplusMatrix(phi), cfg);

  StrassenResult out;
  out.primal = 1.0 - sol.value;

  out.dual = -std::numeric_limits<double>::infinity();
  const std::uint32_t subsets = 1u << m;
  for (std::uint32_t bits = 0; bits < subsets; ++bits) {
    double qb = 0.0;
    for (int y = 0; y < m; ++y)
      if (bits & (1u << y)) qb += spec.q[y];
    double p_pre = 0.0;
    for (int x = 0; x < n; ++x) {
      bool hits = false;
      for (int y = 0; y < m && !hits; ++y)
        if ((bits & (1u << y)) && spec.gamma(x, y)) hits = true;
      if (hits) p_pre += spec.p[x];
    }
    const double gap = qb - p_pre;
    if (gap > out.dual) {
      out.dual = gap;
      out.witness.clear();
      for (int y = 0; y < m; ++y)
        if (bits & (1u << y)) out.witness.push_back(y);
    }
  }
  out.in_identified_set = out.primal <= cfg.feasibility_tol;
  return out;
}

}  // namespace otecon
