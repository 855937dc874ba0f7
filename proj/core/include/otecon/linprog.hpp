#pragma once

#include "otecon/types.hpp"

namespace otecon {

enum class RowSense { Equal, LessEqual };

enum class LpStatus { Optimal, Infeasible, Unbounded, Stalled };

/// maximize objective . x  subject to  constraints x (= | <=) rhs, x >= 0.
struct LinearProgram {
  Vector objective;
  Matrix constraints;
  Vector rhs;
  std::vector<RowSense> sense;  // one entry per row
};

struct LpSolution {
  LpStatus status = LpStatus::Stalled;
  Vector x;                    // primal (original variables only)
  Vector y;                    // one dual multiplier per row
  double objective_value = 0.0;
  int pivots = 0;
};

const char* to_string(LpStatus status);

/// Dense two-phase revised simplex with Bland's rule (deterministic,
/// anti-cycling) and an explicit basis inverse refactored every 50 pivots.
/// Returns primal and dual with zero duality gap (within tolerance) on
/// optimal instances; Stalled when the pivot cap is hit.
LpSolution solve_lp(const LinearProgram& lp, const ToleranceConfig& cfg = {});

}  // namespace otecon
