#pragma once

#include "otecon/types.hpp"

namespace otecon {

/// Square payoff matrix with strictly positive entries: Hider hides in a
/// cell, Seeker names a row or a column, a correct claim pays K_ij.
struct HideSeekGame {
  Matrix payoff;

  explicit HideSeekGame(Matrix payoff);
  int size() const { return static_cast<int>(payoff.rows()); }
};

struct GameSolution {
  double game_value = 0.0;
  Matrix hider_probs;       // n x n, sums to one
  Vector seeker_row_probs;  // a
  Vector seeker_col_probs;  // b, sum a + sum b = 1
  double ot_value = 0.0;    // transport value on the inverted payoffs
  /// Guarantees recomputed from the strategies themselves.
  double seeker_guarantee = 0.0;  // min over cells of (a_i + b_j) K_ij
  double hider_exposure = 0.0;    // max over lines of the line payoff
};

/// Transport route: margins <= 1/n against surplus 1/K; hider and seeker
/// strategies come from the optimal plan and duals, and the value from the
/// reciprocal of the transport value.
GameSolution hide_and_seek_solve(const HideSeekGame& game, const ToleranceConfig& cfg = {});

/// Direct minimax program over the hider simplex (certifies the transport
/// route).
double minimax_oracle(const HideSeekGame& game, const ToleranceConfig& cfg = {});

/// Partial-identification instance: Gamma(x,y) = true iff y is admissible
/// for x; P over X, Q over Y.
struct IdentificationSpec {
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> gamma;
  Vector p;
  Vector q;

  IdentificationSpec(Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> gamma, Vector p,
                     Vector q);
};

struct StrassenResult {
  double primal = 0.0;        // min coupling mass violating Y in Gamma(X)
  double dual = 0.0;          // max over sets B of Q(B) - P(Gamma^{-1}(B))
  std::vector<int> witness;   // maximizing subset of Y
  bool in_identified_set = false;
};

/// Both sides of the set-inclusion duality: 0-1 transport for the primal,
/// subset enumeration (|Y| <= 20) for the dual.
StrassenResult strassen_test(const IdentificationSpec& spec, const ToleranceConfig& cfg = {});

}  // namespace otecon
