#include "otecon/entropic.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "otecon/errors.hpp"

namespace otecon {

namespace {

constexpr double kExpClamp = 700.0;  // exp stays finite below this

double logsumexp(const Vector& t) {
  const double shift = t.maxCoeff();
  if (!std::isfinite(shift)) return shift;
  return shift + std::log((t.array() - shift).exp().sum());
}

void check_inputs(const DiscreteMeasure& p, const DiscreteMeasure& q,
                  const SurplusMatrix& surplus) {
  if (surplus.rows() != p.size() || surplus.cols() != q.size())
    throw std::invalid_argument("entropic: dimension mismatch");
  if ((p.weights.array() <= 0.0).any() || (q.weights.array() <= 0.0).any())
    throw std::invalid_argument(
        "entropic: zero-mass types are not supported; drop empty types first");
  const double scale = std::max(1.0, p.total_mass());
  if (std::abs(p.total_mass() - q.total_mass()) > 1e-9 * scale)
    throw std::invalid_argument("entropic: unbalanced masses");
}

// One full sweep of the scaling iteration in the log domain.
void sweep_log(const Matrix& phi, const Vector& logp, const Vector& logq, double sigma,
               Vector& u, Vector& v) {
  const int n = static_cast<int>(logp.size());
  const int m = static_cast<int>(logq.size());
  for (int x = 0; x < n; ++x) {
    Vector t = (phi.row(x).transpose() - v) / sigma;
    u[x] = sigma * (logsumexp(t) - logp[x]);
  }
  for (int y = 0; y < m; ++y) {
    Vector t = (phi.col(y) - u) / sigma;
    v[y] = sigma * (logsumexp(t) - logq[y]);
  }
}

// Naive scaling sweep; throws NaiveOverflow when the kernel or a scaling
// vector leaves the double range.
void sweep_naive(const Matrix& kernel, const Vector& p, const Vector& q, Vector& a,
                 Vector& b) {
  Vector kb = kernel * b;
  for (int x = 0; x < a.size(); ++x) {
    if (!(kb[x] > 0.0) || !std::isfinite(kb[x]))
      throw NaiveOverflow("ipfp: naive scaling over/underflowed; retry with log_domain");
    a[x] = p[x] / kb[x];
  }
  Vector ka = kernel.transpose() * a;
  for (int y = 0; y < b.size(); ++y) {
    if (!(ka[y] > 0.0) || !std::isfinite(ka[y]))
      throw NaiveOverflow("ipfp: naive scaling over/underflowed; retry with log_domain");
    b[y] = q[y] / ka[y];
  }
}

double marginal_residual_from_potentials(const Matrix& phi, const Vector& u, const Vector& v,
                                         double sigma, const Vector& p, const Vector& q) {
  const int n = static_cast<int>(p.size());
  const int m = static_cast<int>(q.size());
  const double total = p.sum();
  double worst = 0.0;
  for (int x = 0; x < n; ++x) {
    Vector t = (phi.row(x).transpose() - v).array() - u[x];
    worst = std::max(worst, std::abs(std::exp(logsumexp(t / sigma)) - p[x]));
  }
  for (int y = 0; y < m; ++y) {
    Vector t = (phi.col(y) - u).array() - v[y];
    worst = std::max(worst, std::abs(std::exp(logsumexp(t / sigma)) - q[y]));
  }
  return worst / std::max(1e-300, total);
}

}  // namespace

double dual_objective(const Vector& u, const Vector& v, const DiscreteMeasure& p,
                      const DiscreteMeasure& q, const SurplusMatrix& surplus, double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("dual_objective: sigma must be positive");
  if (u.size() != p.size() || v.size() != q.size())
    throw std::invalid_argument("dual_objective: potential lengths");
  Matrix expo = surplus.values;
  expo.colwise() -= u;
  expo.rowwise() -= v.transpose();
  Vector flat = Eigen::Map<const Vector>(expo.data(), expo.size()) / sigma;
  const double lse = logsumexp(flat);
  return p.weights.dot(u) + q.weights.dot(v) + sigma * std::exp(lse) - sigma;
}

TransportPlan plan_from_potentials(const Vector& u, const Vector& v,
                                   const SurplusMatrix& surplus, double sigma,
                                   int* clamped_cells) {
  if (sigma <= 0.0) throw std::invalid_argument("plan_from_potentials: sigma must be positive");
  if (u.size() != surplus.rows() || v.size() != surplus.cols())
    throw std::invalid_argument("plan_from_potentials: potential lengths");
  int clamped = 0;
  Matrix mass(surplus.rows(), surplus.cols());
  for (int x = 0; x < surplus.rows(); ++x)
    for (int y = 0; y < surplus.cols(); ++y) {
      double e = (surplus.values(x, y) - u[x] - v[y]) / sigma;
      if (e > kExpClamp) {
        e = kExpClamp;
        ++clamped;
      }
      mass(x, y) = std::exp(e);
    }
  if (clamped_cells) *clamped_cells = clamped;
  return TransportPlan::from_mass(std::move(mass), surplus);
}

IpfpResult ipfp_solve(const DiscreteMeasure& p, const DiscreteMeasure& q,
                      const SurplusMatrix& surplus, const EntropicConfig& cfg) {
  if (cfg.sigma <= 0.0) throw std::invalid_argument("ipfp: sigma must be positive");
  check_inputs(p, q, surplus);
  if (!cfg.epsilon_scaling_schedule.empty()) {
    double prev = std::numeric_limits<double>::infinity();
    for (double s : cfg.epsilon_scaling_schedule) {
      if (s <= 0.0) throw std::invalid_argument("ipfp: schedule entries must be positive");
      if (s >= prev) throw std::invalid_argument("ipfp: schedule must be strictly decreasing");
      prev = s;
    }
  }

  const Matrix& phi = surplus.values;
  const Vector logp = p.weights.array().log();
  const Vector logq = q.weights.array().log();

  std::vector<double> stages = cfg.epsilon_scaling_schedule;
  stages.push_back(cfg.sigma);

  IpfpResult result;
  Vector u = Vector::Zero(p.size());
  Vector v = Vector::Zero(q.size());
  int sweeps = 0;

  for (std::size_t stage = 0; stage < stages.size(); ++stage) {
    const double sigma = stages[stage];
    const bool final_stage = stage + 1 == stages.size();
    const double tol = final_stage ? cfg.marginal_tol : std::max(cfg.marginal_tol, 1e-8);

    // Naive mode keeps explicit scaling vectors; the log-domain mode works
    // on the potentials directly with max-shifted log-sum-exp.
    Matrix kernel;
    Vector a, b;
    if (!cfg.log_domain) {
      kernel = (phi / sigma).array().exp();
      if (!kernel.allFinite())
        throw NaiveOverflow("ipfp: kernel exp(surplus/sigma) overflowed; retry with log_domain");
      a = (-u / sigma).array().exp();
      b = (-v / sigma).array().exp();
    }

    double residual = std::numeric_limits<double>::infinity();
    while (true) {
      if (sweeps >= cfg.max_iterations)
        throw NonConvergence("ipfp: iteration cap before marginal tolerance", sweeps, residual);
      if (cfg.log_domain) {
        sweep_log(phi, logp, logq, sigma, u, v);
      } else {
        sweep_naive(kernel, p.weights, q.weights, a, b);
        u = -sigma * a.array().log();
        v = -sigma * b.array().log();
      }
      ++sweeps;
      residual = marginal_residual_from_potentials(phi, u, v, sigma, p.weights, q.weights);
      if (cfg.record_history && final_stage)
        result.history.push_back(
            {u, v, dual_objective(u, v, p, q, surplus, sigma), residual});
      if (residual <= tol) break;
    }
    result.marginal_residual = residual;
  }

  result.plan = plan_from_potentials(u, v, surplus, cfg.sigma);
  result.potentials = make_potentials(std::move(u), std::move(v), surplus);
  result.iterations = sweeps;
  return result;
}

LinkFunction LinkFunction::log_link() {
  LinkFunction link;
  link.tag = Tag::Log;
  link.L = [](double z) { return z > 0.0 ? z * (std::log(z) - 1.0) : 0.0; };
  link.Lstar = [](double t) { return std::exp(t); };
  link.Lstar_prime = [](double t) { return std::exp(t); };
  return link;
}

LinkFunction LinkFunction::identity_threshold() {
  LinkFunction link;
  link.tag = Tag::IdentityThreshold;
  link.L = [](double z) { return 0.5 * z * z; };
  link.Lstar = [](double t) { return t > 0.0 ? 0.5 * t * t : 0.0; };
  link.Lstar_prime = [](double t) { return t > 0.0 ? t : 0.0; };
  return link;
}

LinkFunction LinkFunction::custom(std::function<double(double)> L,
                                  std::function<double(double)> Lstar,
                                  std::function<double(double)> Lstar_prime) {
  LinkFunction link;
  link.tag = Tag::Custom;
  link.L = std::move(L);
  link.Lstar = std::move(Lstar);
  link.Lstar_prime = std::move(Lstar_prime);
  return link;
}

namespace {

// Decreasing residual function for one coordinate update of the general
// dual: margin minus sum of Lstar'(design - t - other). Root in t.
template <typename F>
double solve_coordinate(F&& residual, double start, int coordinate) {
  double lo = start - 1.0, hi = start + 1.0;
  double step = 1.0;
  int guard = 0;
  while (residual(lo) < 0.0) {
    lo -= step;
    step *= 2.0;
    if (++guard > 300)
      throw RootFindingError("coordinate update: no lower bracket", coordinate);
  }
  step = 1.0;
  guard = 0;
  while (residual(hi) > 0.0) {
    hi += step;
    step *= 2.0;
    if (++guard > 300)
      throw RootFindingError("coordinate update: no upper bracket", coordinate);
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (residual(mid) >= 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

GeneralRegularizedResult solve_regularized_general(const DiscreteMeasure& p,
                                                   const DiscreteMeasure& q,
                                                   const Matrix& design,
                                                   const LinkFunction& link,
                                                   const EntropicConfig& cfg) {
  if (design.rows() != p.size() || design.cols() != q.size())
    throw std::invalid_argument("solve_regularized_general: design dimensions");
  if (!link.Lstar || !link.Lstar_prime)
    throw std::invalid_argument("solve_regularized_general: link is missing evaluations");
  check_inputs(p, q, SurplusMatrix(design));

  const int n = p.size();
  const int m = q.size();
  const auto& g = link.Lstar_prime;
  Vector u = Vector::Zero(n);
  Vector v = Vector::Zero(m);
  const double total = p.total_mass();

  auto plan_entry = [&](int x, int y) { return g(design(x, y) - u[x] - v[y]); };

  int sweeps = 0;
  double residual = std::numeric_limits<double>::infinity();
  while (true) {
    if (sweeps >= cfg.max_iterations)
      throw NonConvergence("solve_regularized_general: iteration cap", sweeps, residual);
    if (link.tag == LinkFunction::Tag::Log) {
      // Closed form; identical to the sigma = 1 scaling update.
      for (int x = 0; x < n; ++x)
        u[x] = logsumexp(design.row(x).transpose() - v) - std::log(p.weights[x]);
      for (int y = 0; y < m; ++y)
        v[y] = logsumexp(design.col(y) - u) - std::log(q.weights[y]);
    } else {
      for (int x = 0; x < n; ++x) {
        auto res = [&](double t) {
          double s = 0.0;
          for (int y = 0; y < m; ++y) s += g(design(x, y) - t - v[y]);
          return s - p.weights[x];
        };
        u[x] = solve_coordinate(res, u[x], x);
      }
      for (int y = 0; y < m; ++y) {
        auto res = [&](double t) {
          double s = 0.0;
          for (int x = 0; x < n; ++x) s += g(design(x, y) - u[x] - t);
          return s - q.weights[y];
        };
        v[y] = solve_coordinate(res, v[y], n + y);
      }
    }
    ++sweeps;

    double worst = 0.0;
    for (int x = 0; x < n; ++x) {
      double s = 0.0;
      for (int y = 0; y < m; ++y) s += plan_entry(x, y);
      worst = std::max(worst, std::abs(s - p.weights[x]));
    }
    for (int y = 0; y < m; ++y) {
      double s = 0.0;
      for (int x = 0; x < n; ++x) s += plan_entry(x, y);
      worst = std::max(worst, std::abs(s - q.weights[y]));
    }
    residual = worst / std::max(1e-300, total);
    if (residual <= cfg.marginal_tol) break;
  }

  Matrix mass(n, m);
  double wval = p.weights.dot(u) + q.weights.dot(v);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < m; ++y) {
      mass(x, y) = plan_entry(x, y);
      wval += link.Lstar(design(x, y) - u[x] - v[y]);
    }

  GeneralRegularizedResult result;
  result.plan = TransportPlan::from_mass(std::move(mass), SurplusMatrix(design));
  result.potentials = make_potentials(std::move(u), std::move(v), SurplusMatrix(design));
  result.W = wval;
  result.iterations = sweeps;
  result.marginal_residual = residual;
  return result;
}

}  // namespace otecon
