#include "otecon/linprog.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace otecon {

namespace {

constexpr double kPivotTol = 1e-10;   // smallest usable pivot element
constexpr int kRefactorEvery = 50;    // pivots between basis re-inversions

struct Tableau {
  // Columns: original variables, then slacks of <= rows, then artificials.
  Matrix cols;              // m x total
  Vector rhs;               // b, made nonnegative by row flips
  std::vector<int> flip;    // +1 / -1 per row
  int n_orig = 0;
  int n_slack = 0;
  int n_art = 0;
  int total() const { return n_orig + n_slack + n_art; }
};

class RevisedSimplex {
 public:
  RevisedSimplex(const LinearProgram& lp, const ToleranceConfig& cfg) : cfg_(cfg) {
    const int m = static_cast<int>(lp.constraints.rows());
    const int n = static_cast<int>(lp.constraints.cols());
    if (lp.objective.size() != n) throw std::invalid_argument("solve_lp: objective length");
    if (lp.rhs.size() != m) throw std::invalid_argument("solve_lp: rhs length");
    if (static_cast<int>(lp.sense.size()) != m)
      throw std::invalid_argument("solve_lp: sense length");
    if (!lp.constraints.allFinite() || !lp.rhs.allFinite() || !lp.objective.allFinite())
      throw std::invalid_argument("solve_lp: non-finite entries");

    m_ = m;
    t_.n_orig = n;
    for (auto s : lp.sense) t_.n_slack += (s == RowSense::LessEqual) ? 1 : 0;
    t_.n_art = m;
    t_.cols = Matrix::Zero(m, t_.total());
    t_.cols.leftCols(n) = lp.constraints;
    t_.rhs = lp.rhs;
    t_.flip.assign(m, 1);

    int slack = 0;
    for (int i = 0; i < m; ++i)
      if (lp.sense[i] == RowSense::LessEqual) t_.cols(i, n + slack++) = 1.0;
    for (int i = 0; i < m; ++i) {
      if (t_.rhs[i] < 0.0) {
        t_.cols.row(i) *= -1.0;
        t_.rhs[i] *= -1.0;
        t_.flip[i] = -1;
      }
      t_.cols(i, n + t_.n_slack + i) = 1.0;  // artificial, identity after flips
    }

    objective_ = lp.objective;
    scale_c_ = std::max(1.0, objective_.size() ? objective_.cwiseAbs().maxCoeff() : 0.0);
    scale_b_ = std::max(1.0, m > 0 ? t_.rhs.cwiseAbs().maxCoeff() : 0.0);

    // Column nonzero patterns; transportation-style programs are extremely
    // sparse and pricing through the pattern dominates the solve otherwise.
    col_entries_.resize(t_.total());
    for (int j = 0; j < t_.total(); ++j)
      for (int i = 0; i < m; ++i)
        if (t_.cols(i, j) != 0.0) col_entries_[j].push_back({i, t_.cols(i, j)});
  }

  LpSolution run() {
    LpSolution sol;
    if (m_ == 0) {
      // No constraints: optimal at x = 0 unless some objective entry is
      // positive, in which case the ray is unbounded.
      sol.x = Vector::Zero(t_.n_orig);
      sol.y = Vector::Zero(0);
      const bool unbounded = (t_.n_orig > 0) && (objective_.maxCoeff() > rc_tol());
      sol.status = unbounded ? LpStatus::Unbounded : LpStatus::Optimal;
      sol.objective_value = 0.0;
      return sol;
    }

    basis_.resize(m_);
    in_basis_.assign(t_.total(), false);
    for (int i = 0; i < m_; ++i) {
      basis_[i] = t_.n_orig + t_.n_slack + i;
      in_basis_[basis_[i]] = true;
    }
    binv_ = Matrix::Identity(m_, m_);
    xb_ = t_.rhs;
    banned_.assign(t_.total(), false);

    // Phase 1: maximize minus the sum of artificials.
    Vector c1 = Vector::Zero(t_.total());
    for (int j = t_.n_orig + t_.n_slack; j < t_.total(); ++j) c1[j] = -1.0;
    phase_ = 1;
    cost_ = c1;
    LpStatus st = iterate(sol.pivots);
    if (st != LpStatus::Optimal) {
      // Phase 1 is bounded above by zero; anything but Optimal here is a
      // pivot-cap or numerical breakdown.
      sol.status = LpStatus::Stalled;
      return sol;
    }
    const double infeas = -value();
    if (infeas > cfg_.feasibility_tol * scale_b_) {
      sol.status = LpStatus::Infeasible;
      return sol;
    }
    drive_out_artificials();
    for (int j = t_.n_orig + t_.n_slack; j < t_.total(); ++j) banned_[j] = true;

    // Phase 2: the real objective; artificials (cost 0) may linger at value
    // zero on linearly dependent rows and are pushed out by the ratio test.
    Vector c2 = Vector::Zero(t_.total());
    c2.head(t_.n_orig) = objective_;
    phase_ = 2;
    cost_ = c2;
    st = iterate(sol.pivots);
    sol.status = st;
    if (st != LpStatus::Optimal) return sol;

    sol.x = Vector::Zero(t_.n_orig);
    for (int i = 0; i < m_; ++i)
      if (basis_[i] < t_.n_orig) sol.x[basis_[i]] = std::max(0.0, xb_[i]);
    Vector y = dual_row();
    sol.y = Vector(m_);
    for (int i = 0; i < m_; ++i) sol.y[i] = t_.flip[i] * y[i];
    sol.objective_value = objective_.dot(sol.x);
    return sol;
  }

 private:
  double rc_tol() const { return 1e-9 * (phase_ == 1 ? 1.0 : scale_c_); }

  double value() const {
    double v = 0.0;
    for (int i = 0; i < m_; ++i) v += cost_[basis_[i]] * xb_[i];
    return v;
  }

  Vector dual_row() const {
    Vector cb(m_);
    for (int i = 0; i < m_; ++i) cb[i] = cost_[basis_[i]];
    return binv_.transpose() * cb;
  }

  bool is_artificial(int j) const { return j >= t_.n_orig + t_.n_slack; }

  void refactor() {
    Matrix b(m_, m_);
    for (int i = 0; i < m_; ++i) b.col(i) = t_.cols.col(basis_[i]);
    binv_ = b.partialPivLu().inverse();
    xb_ = binv_ * t_.rhs;
  }

  // Replace basis row `leave` by column `enter`; d = binv * column(enter).
  void pivot(int leave, int enter, const Vector& d, double step) {
    xb_ -= step * d;
    xb_[leave] = step;
    const double piv = d[leave];
    Vector row = binv_.row(leave) / piv;
    for (int i = 0; i < m_; ++i) {
      if (i == leave) continue;
      binv_.row(i) -= d[i] * row.transpose();
    }
    binv_.row(leave) = row.transpose();
    in_basis_[basis_[leave]] = false;
    in_basis_[enter] = true;
    basis_[leave] = enter;
    if (++since_refactor_ >= kRefactorEvery) {
      since_refactor_ = 0;
      refactor();
    }
  }

  // After phase 1, try to swap each zero-level basic artificial for a real
  // column (degenerate pivots); dependent rows keep their artificial.
  void drive_out_artificials() {
    for (int i = 0; i < m_; ++i) {
      if (!is_artificial(basis_[i])) continue;
      const Vector brow = binv_.row(i);
      for (int j = 0; j < t_.n_orig + t_.n_slack; ++j) {
        if (banned_[j] || in_basis_[j]) continue;
        const double elem = sparse_dot(brow, j);
        if (std::abs(elem) > kPivotTol) {
          Vector d = apply_binv(j);
          pivot(i, j, d, 0.0);
          break;
        }
      }
    }
  }

  LpStatus iterate(int& pivots) {
    while (true) {
      if (pivots >= cfg_.max_iterations) return LpStatus::Stalled;
      const Vector y = dual_row();
      // Bland's rule: enter the lowest-index column with positive reduced
      // cost. Banned columns are artificials that already left the basis.
      int enter = -1;
      for (int j = 0; j < t_.total(); ++j) {
        if (banned_[j] || in_basis_[j]) continue;
        if (phase_ == 2 && is_artificial(j)) continue;
        if (cost_[j] - sparse_dot(y, j) > rc_tol()) { enter = j; break; }
      }
      if (enter < 0) return LpStatus::Optimal;

      const Vector d = apply_binv(enter);
      // Ratio test, smallest basic index on ties (Bland). Basic artificials
      // in phase 2 sit at value zero and must not move: they leave at step
      // zero for either sign of d.
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m_; ++i) {
        const bool art_guard = phase_ == 2 && is_artificial(basis_[i]);
        double ratio;
        if (d[i] > kPivotTol) ratio = std::max(0.0, xb_[i]) / d[i];
        else if (art_guard && d[i] < -kPivotTol) ratio = 0.0;
        else continue;
        if (ratio < best - 1e-15 ||
            (ratio <= best + 1e-15 && (leave < 0 || basis_[i] < basis_[leave]))) {
          best = ratio;
          leave = i;
        }
      }
      if (leave < 0) return LpStatus::Unbounded;
      if (is_artificial(basis_[leave])) banned_[basis_[leave]] = true;
      pivot(leave, enter, d, best);
      ++pivots;
    }
  }

  double sparse_dot(const Vector& y, int j) const {
    double total = 0.0;
    for (const auto& [row, coeff] : col_entries_[j]) total += y[row] * coeff;
    return total;
  }

  Vector apply_binv(int j) const {
    Vector d = Vector::Zero(m_);
    for (const auto& [row, coeff] : col_entries_[j]) d += coeff * binv_.col(row);
    return d;
  }

  ToleranceConfig cfg_;
  Tableau t_;
  int m_ = 0;
  Vector objective_;
  double scale_c_ = 1.0, scale_b_ = 1.0;

  int phase_ = 1;
  Vector cost_;
  std::vector<int> basis_;
  std::vector<bool> banned_;
  std::vector<bool> in_basis_;
  std::vector<std::vector<std::pair<int, double>>> col_entries_;
  Matrix binv_;
  Vector xb_;
  int since_refactor_ = 0;
};

}  // namespace

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::Stalled: return "stalled";
  }
  return "unknown";
}

LpSolution solve_lp(const LinearProgram& lp, const ToleranceConfig& cfg) {
  RevisedSimplex simplex(lp, cfg);
  return simplex.run();
}

}  // namespace otecon
