#pragma once

#include <otecon/rng.hpp>
#include <otecon/types.hpp>

namespace otecon::testing {

inline DiscreteMeasure measure(std::initializer_list<double> weights) {
  Vector w(static_cast<Eigen::Index>(weights.size()));
  int i = 0;
  for (double x : weights) w[i++] = x;
  return DiscreteMeasure::from_weights(w);
}

inline Vector vec(std::initializer_list<double> entries) {
  Vector v(static_cast<Eigen::Index>(entries.size()));
  int i = 0;
  for (double x : entries) v[i++] = x;
  return v;
}

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  const int n = static_cast<int>(rows.size());
  const int m = static_cast<int>(rows.begin()->size());
  Matrix out(n, m);
  int i = 0;
  for (const auto& row : rows) {
    int j = 0;
    for (double x : row) out(i, j++) = x;
    ++i;
  }
  return out;
}

inline Matrix random_matrix(SplitMix64& rng, int n, int m, double lo = -1.0, double hi = 1.0) {
  Matrix out(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) out(i, j) = rng.uniform(lo, hi);
  return out;
}

/// Random probability vector with entries bounded away from zero.
inline Vector random_simplex(SplitMix64& rng, int n, double floor = 0.05) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = floor + rng.uniform01();
  return v / v.sum();
}

}  // namespace otecon::testing
