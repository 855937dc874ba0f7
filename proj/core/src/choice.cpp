#include "otecon/choice.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "otecon/otexact.hpp"

namespace otecon {

ChoiceSample::ChoiceSample(Matrix draws_in, double sigma_in)
    : draws(std::move(draws_in)), sigma(sigma_in) {
  if (!draws.allFinite()) throw std::invalid_argument("choice sample: draws must be finite");
  if (draws.rows() < 1) throw std::invalid_argument("choice sample: at least one draw");
  if (sigma < 0.0) throw std::invalid_argument("choice sample: sigma must be >= 0");
}

ShareVector::ShareVector(Vector shares) : q(std::move(shares)) {
  if (!q.allFinite() || (q.array() < 0.0).any())
    throw std::invalid_argument("shares: entries must be finite and nonnegative");
  if (std::abs(q.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("shares: must sum to one");
}

ShareVector simulate_market_shares(const Vector& systematic, const ChoiceSample& sample) {
  const int n = sample.num_draws();
  const int m = sample.num_alternatives();
  if (systematic.size() != m)
    throw std::invalid_argument("simulate_market_shares: utility length");
  if (!systematic.allFinite())
    throw std::invalid_argument("simulate_market_shares: utilities must be finite");

  Vector shares = Vector::Zero(m);
  const double w = 1.0 / n;
  for (int i = 0; i < n; ++i) {
    Vector util = systematic + sample.draws.row(i).transpose();
    if (sample.sigma > 0.0) {
      Vector t = util / sample.sigma;
      const double shift = t.maxCoeff();
      Vector e = (t.array() - shift).exp();
      shares += (w / e.sum()) * e;
    } else {
      int best = 0;
      for (int y = 1; y < m; ++y)
        if (util[y] > util[best]) best = y;  // first max wins ties
      shares[best] += w;
    }
  }
  return ShareVector(shares);
}

Vector invert_pure_logit(const ShareVector& shares, double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("invert_pure_logit: sigma must be positive");
  if ((shares.q.array() <= 0.0).any())
    throw std::invalid_argument("invert_pure_logit: shares must be strictly positive");
  Vector v = sigma * (shares.q.array().log() - std::log(shares.q[0]));
  return v;
}

SampledInversion invert_sampled_lp(const ShareVector& shares, const ChoiceSample& sample,
                                   const ToleranceConfig& cfg) {
  if (sample.sigma != 0.0)
    throw std::invalid_argument("invert_sampled_lp: sample must carry sigma = 0");
  if (sample.num_alternatives() != shares.q.size())
    throw std::invalid_argument("invert_sampled_lp: dimension mismatch");

  const int n = sample.num_draws();
  DiscreteMeasure p = DiscreteMeasure::from_weights(Vector::Constant(n, 1.0 / n));
  DiscreteMeasure q = DiscreteMeasure::from_weights(shares.q);
  OtSolution sol = solve_exact(p, q, SurplusMatrix(sample.draws), cfg);

  SampledInversion inv;
  inv.systematic = -sol.potentials.v;
  inv.systematic.array() -= inv.systematic[0];
  inv.plan = sol.plan;
  inv.potentials = sol.potentials;
  inv.iterations = sol.iterations;
  return inv;
}

MixedLogitInversion invert_mixed_logit(const ShareVector& shares, const ChoiceSample& sample,
                                       const EntropicConfig& cfg) {
  if (sample.sigma <= 0.0)
    throw std::invalid_argument("invert_mixed_logit: sample must carry sigma > 0");
  if (sample.num_alternatives() != shares.q.size())
    throw std::invalid_argument("invert_mixed_logit: dimension mismatch");
  if ((shares.q.array() <= 0.0).any())
    throw std::invalid_argument("invert_mixed_logit: shares must be strictly positive");

  const int n = sample.num_draws();
  DiscreteMeasure p = DiscreteMeasure::from_weights(Vector::Constant(n, 1.0 / n));
  DiscreteMeasure q = DiscreteMeasure::from_weights(shares.q);

  EntropicConfig run_cfg = cfg;
  run_cfg.sigma = sample.sigma;  // the smoothing scale lives on the sample
  run_cfg.record_history = true;
  IpfpResult res = ipfp_solve(p, q, SurplusMatrix(sample.draws), run_cfg);

  MixedLogitInversion inv;
  inv.systematic = -res.potentials.v;
  inv.systematic.array() -= inv.systematic[0];
  inv.plan = res.plan;
  inv.potentials = res.potentials;
  inv.iterations = res.iterations;
  inv.v_history.reserve(res.history.size());
  for (const auto& sweep : res.history) inv.v_history.push_back(sweep.v);
  return inv;
}

}  // namespace otecon
