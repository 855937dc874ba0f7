#pragma once

#include <string>
#include <vector>

namespace otecon::cli {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Solver-side knobs for the bundled acceptance suite. The pass/fail
/// thresholds themselves are pinned in the criteria; loosening a solver
/// tolerance here makes the affected criteria fail honestly.
struct SelfTestConfig {
  double ipfp_marginal_tol = 1e-10;
};

std::vector<CriterionResult> run_acceptance(const SelfTestConfig& cfg = {});

/// Run one criterion by its 1-based id (throws std::invalid_argument for
/// unknown ids).
CriterionResult run_criterion(int id, const SelfTestConfig& cfg = {});

/// One line per criterion, "PASS"/"FAIL" first. Returns 0 when everything
/// passed, 1 otherwise.
int print_acceptance_report(const std::vector<CriterionResult>& results, std::ostream& out);

}  // namespace otecon::cli
