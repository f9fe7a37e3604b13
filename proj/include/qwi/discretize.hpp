#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "qwi/model.hpp"

namespace qwi {

enum class Division {
  EqualWidth,         // dx = const within each smooth piece
  EqualArea,          // dx_i * |U(x_i)| = const within each smooth piece
  EqualPhase,         // dx_i * k_i(e_ref) = const within each smooth piece
  WavelengthBounded,  // dx <= fraction * local de Broglie wavelength at e_ref
};

struct DivisionStrategy {
  Division kind = Division::EqualWidth;
  double fraction = 0.125;  // only WavelengthBounded reads this

  static DivisionStrategy equal_width() { return {Division::EqualWidth}; }
  static DivisionStrategy equal_area() { return {Division::EqualArea}; }
  static DivisionStrategy equal_phase() { return {Division::EqualPhase}; }
  static DivisionStrategy wavelength_bounded(double fraction) {
    return {Division::WavelengthBounded, fraction};
  }
};

namespace detail {

inline double piece_min_abs_u(const Piece& p, int probes) {
  double lo = std::abs(p.value_at(p.x_lo));
  for (int i = 1; i <= probes; ++i) {
    const double x = p.x_lo + (p.x_hi - p.x_lo) * i / probes;
    lo = std::min(lo, std::abs(p.value_at(x)));
  }
  return lo;
}

inline double piece_min_u(const Piece& p, int probes) {
  double lo = p.value_at(p.x_lo);
  for (int i = 1; i <= probes; ++i) {
    const double x = p.x_lo + (p.x_hi - p.x_lo) * i / probes;
    lo = std::min(lo, p.value_at(x));
  }
  return lo;
}

// Breakpoints such that step_i * weight(x_i) is the same for every step,
// found by bisecting the per-step constant until n steps land on x_hi.
// weight must be positive on [x_lo, x_hi].
template <class Weight>
std::vector<double> shoot_equal_product(const Piece& p, int n, Weight weight) {
  const double width = p.x_hi - p.x_lo;
  auto landing = [&](double c) {
    double x = p.x_lo;
    for (int i = 0; i < n; ++i) {
      x += c / weight(std::min(x, p.x_hi));
      if (x > p.x_hi + width) return x;  // far overshoot, stop early
    }
    return x;
  };
  double c_lo = 0.0;
  double c_hi = width;
  while (landing(c_hi) < p.x_hi) c_hi *= 2.0;
  for (int it = 0; it < 200 && (c_hi - c_lo) > 1e-16 * c_hi; ++it) {
    const double c = 0.5 * (c_lo + c_hi);
    (landing(c) < p.x_hi ? c_lo : c_hi) = c;
  }
  const double c = 0.5 * (c_lo + c_hi);
  std::vector<double> xs(1, p.x_lo);
  for (int i = 0; i < n - 1; ++i)
    xs.push_back(xs.back() + c / weight(std::min(xs.back(), p.x_hi)));
  xs.push_back(p.x_hi);
  for (std::size_t i = 0; i + 1 < xs.size(); ++i)
    if (!(xs[i] < xs[i + 1]))
      throw InternalError("equal-product division produced a degenerate mesh");
  return xs;
}

inline std::vector<double> piece_breakpoints(const Piece& p, int n,
                                             DivisionStrategy strategy,
                                             std::optional<double> e_ref,
                                             double m_rel) {
  const double width = p.x_hi - p.x_lo;
  auto uniform = [&](int count) {
    std::vector<double> xs(count + 1);
    for (int i = 0; i <= count; ++i) xs[i] = p.x_lo + width * i / count;
    xs.front() = p.x_lo;
    xs.back() = p.x_hi;
    return xs;
  };

  switch (strategy.kind) {
    case Division::EqualWidth:
      return uniform(n);

    case Division::EqualArea: {
      // Degenerate where U crosses zero; fall back to uniform there.
      if (piece_min_abs_u(p, 8 * n + 8) < 1e-9) return uniform(n);
      return shoot_equal_product(
          p, n, [&](double x) { return std::abs(p.value_at(x)); });
    }

    case Division::EqualPhase: {
      if (!e_ref)
        throw InputError("equal_phase division needs a reference energy");
      if (*e_ref <= piece_min_u(p, 8 * n + 8))
        throw PhysicsError(
            "equal_phase is inapplicable: the reference energy lies below "
            "the potential everywhere in a piece, so there is no real local "
            "wavenumber");
      auto k_of = [&](double x) {
        const double dk = m_rel * std::max(*e_ref - p.value_at(x), 0.0) /
                          h2_over_2m0;
        return std::max(std::sqrt(dk), 1e-9);
      };
      return shoot_equal_product(p, n, k_of);
    }

    case Division::WavelengthBounded: {
      if (!e_ref)
        throw InputError(
            "wavelength_bounded division needs a reference energy");
      if (!(strategy.fraction > 0.0 && strategy.fraction < 1.0))
        throw InputError("wavelength_bounded fraction must lie in (0, 1)");
      double k_max = 0.0;
      const int probes = 8 * n + 8;
      for (int i = 0; i <= probes; ++i) {
        const double x = p.x_lo + width * i / probes;
        k_max = std::max(k_max, std::sqrt(m_rel *
                                          std::abs(*e_ref - p.value_at(x)) /
                                          h2_over_2m0));
      }
      int count = n;
      if (k_max > 0.0) {
        const double lambda_min = 2.0 * M_PI / k_max;
        count = std::max(
            count,
            static_cast<int>(std::ceil(width / (strategy.fraction * lambda_min))));
      }
      return uniform(count);
    }
  }
  throw InputError("unknown division strategy");
}

}  // namespace detail

// Approximates the model by a cascade of constant potentials.  Each smooth
// piece is cut into n regions by the chosen strategy; constant pieces are
// kept as single exact regions.  Region values are the edge averages
// (U(x_i) + U(x_{i+1}))/2, which reproduces constants exactly.  Every delta
// term is attached to the breakpoint at its exact position, inserting a new
// breakpoint (and splitting a region) when needed; deltas sharing a
// breakpoint sum their strengths.
inline Staircase build_staircase(const PotentialModel& model, int n,
                                 DivisionStrategy strategy,
                                 std::optional<double> e_ref = {}) {
  model.validate();
  if (n < 1) throw InputError("region count n must be at least 1");

  Staircase stair;
  stair.u_left = model.u_left;
  stair.u_right = model.u_right;
  stair.material = model.material;

  stair.x.push_back(model.support_lo());
  for (const Piece& p : model.pieces) {
    if (p.is_constant()) {
      stair.u.push_back(std::get<ConstantProfile>(p.profile).u);
      stair.x.push_back(p.x_hi);
      continue;
    }
    const std::vector<double> xs =
        detail::piece_breakpoints(p, n, strategy, e_ref, model.material.m_rel);
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      stair.u.push_back(0.5 * (p.value_at(xs[i]) + p.value_at(xs[i + 1])));
      stair.x.push_back(xs[i + 1]);
    }
  }

  // Insert breakpoints for deltas that do not already sit on one, then
  // accumulate strengths per breakpoint.
  for (const DeltaTerm& d : model.deltas) {
    auto it = std::lower_bound(stair.x.begin(), stair.x.end(), d.x);
    if (it != stair.x.end() && *it == d.x) continue;
    const std::size_t j = static_cast<std::size_t>(it - stair.x.begin()) - 1;
    stair.x.insert(it, d.x);
    stair.u.insert(stair.u.begin() + static_cast<std::ptrdiff_t>(j),
                   stair.u[j]);
  }
  for (const DeltaTerm& d : model.deltas) {
    const auto it = std::lower_bound(stair.x.begin(), stair.x.end(), d.x);
    const std::size_t idx = static_cast<std::size_t>(it - stair.x.begin());
    stair.delta_at[idx] += d.g;
  }

  stair.validate();
  return stair;
}

struct StairSource {
  const PotentialModel* model = nullptr;
  DivisionStrategy strategy;
  std::optional<double> e_ref;
};

// One refinement step of the doubling ladder: n -> 2n regions per piece.
inline Staircase refine(const StairSource& source, int n_prev) {
  if (n_prev < 1) throw InputError("n_prev must be at least 1");
  return build_staircase(*source.model, 2 * n_prev, source.strategy,
                         source.e_ref);
}

}  // namespace qwi
