#pragma once

#include "mesochain/chain.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace testing {

inline double
rel_err(double a, double b)
{
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

inline double
max_abs_diff(const std::vector<double>& a, const std::vector<double>& b)
{
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

inline double
max_abs(const std::vector<double>& a)
{
  double d = 0.0;
  for (double x : a)
    d = std::max(d, std::abs(x));
  return d;
}

/// Random admissible state: gaps drawn from [lo, hi] * h, rescaled to leave a
/// margin to both walls; velocities uniform in [-vmax, vmax].
inline mesochain::ChainState
random_state(const mesochain::ChainConfig& cfg,
             std::uint64_t seed,
             double lo = 0.6,
             double hi = 1.3,
             double vmax = 0.5)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> gap(lo, hi);
  std::uniform_real_distribution<double> vel(-vmax, vmax);
  const double h = cfg.h();
  std::vector<double> g(cfg.n + 1);
  double total = 0.0;
  for (double& x : g) {
    x = gap(rng);
    total += x;
  }
  // fit n + 1 gaps into the domain
  const double scale = cfg.l / (total * h);
  mesochain::ChainState s;
  double pos = 0.0;
  for (std::size_t j = 0; j < cfg.n; ++j) {
    pos += g[j] * h * scale;
    s.q.push_back(pos);
    s.v.push_back(vel(rng));
  }
  return s;
}

} // namespace testing
