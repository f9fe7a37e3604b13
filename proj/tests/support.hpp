#pragma once

#include <complex>
#include <random>
#include <vector>

#include "qwi/model.hpp"

namespace qwi::test {

// Random cascades drawn from the domain the solvers are specified over:
// up to 50 regions, widths in [0.1, 20] nm, |U| <= 2 eV, up to 3 deltas
// with |g| <= 1 eV*nm, zero leads.
inline Staircase random_staircase(std::mt19937_64& rng, int max_regions = 50) {
  std::uniform_int_distribution<int> n_dist(1, max_regions);
  std::uniform_real_distribution<double> w_dist(0.1, 20.0);
  std::uniform_real_distribution<double> u_dist(-2.0, 2.0);
  std::uniform_real_distribution<double> g_dist(-1.0, 1.0);
  std::uniform_int_distribution<int> nd_dist(0, 3);

  Staircase s;
  s.material.m_rel = 1.0;
  s.u_left = s.u_right = 0.0;
  const int n = n_dist(rng);
  double x = -10.0;
  s.x.push_back(x);
  for (int j = 0; j < n; ++j) {
    x += w_dist(rng);
    s.x.push_back(x);
    s.u.push_back(u_dist(rng));
  }
  const int nd = nd_dist(rng);
  std::uniform_int_distribution<std::size_t> idx_dist(0, s.x.size() - 1);
  for (int d = 0; d < nd; ++d) {
    double g = g_dist(rng);
    if (g == 0.0) g = 0.5;
    s.delta_at[idx_dist(rng)] += g;
  }
  return s;
}

inline Complex random_complex(std::mt19937_64& rng, double lo = -10.0,
                              double hi = 10.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  return {d(rng), d(rng)};
}

}  // namespace qwi::test
