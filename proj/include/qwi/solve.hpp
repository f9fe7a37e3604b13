#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "qwi/discretize.hpp"
#include "qwi/impedance.hpp"

namespace qwi {

struct SweepSpec {
  double e_min = 0.0;
  double e_max = 0.0;
  int n_points = 0;

  void validate() const {
    if (!(e_min < e_max)) throw InputError("sweep needs e_min < e_max");
    if (n_points < 2) throw InputError("sweep needs at least 2 points");
  }

  double energy_at(int j) const {
    return e_min + (e_max - e_min) * j / (n_points - 1);
  }
};

struct ConvergencePolicy {
  int n0 = 8;            // initial regions per smooth piece
  double epsilon = 1e-6; // eV for bound levels
  int n_max = 4096;      // refinement safety cap

  void validate() const {
    if (n0 < 2) throw InputError("convergence needs n0 >= 2");
    if (!(epsilon > 0.0)) throw InputError("convergence needs epsilon > 0");
    if (n_max < n0) throw InputError("convergence needs n_max >= n0");
  }
};

struct SweepPoint {
  double energy = 0.0;
  std::optional<ScatteringResult> result;  // nullopt: pole retry failed (gap)
};

struct TransmissionSweep {
  std::vector<SweepPoint> points;
  int gaps = 0;
  std::size_t n_regions = 0;
};

namespace detail {

inline std::optional<ScatteringResult> scatter_with_retry(
    const Staircase& stair, double energy) {
  try {
    return scattering(stair, energy);
  } catch (const PoleError&) {
  }
  try {
    return scattering(stair, energy * (1.0 + 1e-12));
  } catch (const PoleError&) {
    return std::nullopt;
  }
}

}  // namespace detail

// T(E) over a linear energy grid on one fixed cascade.  Strategies that need
// a reference wavenumber use the top of the sweep window (the conservative
// choice: shortest wavelength, finest mesh).  Isolated pole energies are
// retried once at E(1 + 1e-12) and recorded as gaps if they fail again.
inline TransmissionSweep sweep_transmission(const PotentialModel& model,
                                            const SweepSpec& spec, int n,
                                            DivisionStrategy strategy) {
  spec.validate();
  if (model.u_left != model.u_right)
    throw PhysicsError("transmission sweep needs identical leads");
  if (!(spec.e_min > model.u_left))
    throw PhysicsError("sweep energies must all exceed the lead potential");
  const Staircase stair = build_staircase(model, n, strategy, spec.e_max);

  TransmissionSweep out;
  out.n_regions = stair.regions();
  out.points.reserve(spec.n_points);
  for (int j = 0; j < spec.n_points; ++j) {
    const double e = spec.energy_at(j);
    auto res = detail::scatter_with_retry(stair, e);
    if (!res) ++out.gaps;
    out.points.push_back({e, std::move(res)});
  }
  if (out.gaps == spec.n_points)
    throw InternalError("every sweep energy hit a pole");
  return out;
}

namespace detail {

struct BoundWindow {
  double lo = 0.0;
  double hi = 0.0;
};

// Energies of bound states lie below both leads and above the global
// potential minimum.  Delta wells can bind below the continuous minimum;
// splitting the kinetic term over the wells bounds that reach by
// m_rel (sum |g|)^2 / (4 h2).
inline BoundWindow bound_window(const Staircase& stair) {
  const double hi = std::min(stair.u_left, stair.u_right);
  double cont_min = hi;
  for (double u : stair.u) cont_min = std::min(cont_min, u);
  double g_wells = 0.0;
  for (const auto& [idx, g] : stair.delta_at) {
    (void)idx;
    if (g < 0.0) g_wells += -g;
  }
  const double delta_reach =
      1.001 * stair.material.m_rel * g_wells * g_wells / (4.0 * h2_over_2m0);
  const double eta = 1e-9;
  BoundWindow w{cont_min - delta_reach + eta, hi - eta};
  if (!(w.lo < w.hi))
    throw PhysicsError(
        "no bound window: the potential never dips below the leads");
  return w;
}

inline Staircase mirrored(const Staircase& s) {
  Staircase m;
  m.material = s.material;
  m.u_left = s.u_right;
  m.u_right = s.u_left;
  const double lo = s.x.front(), hi = s.x.back();
  m.x.resize(s.x.size());
  for (std::size_t i = 0; i < s.x.size(); ++i)
    m.x[i] = lo + hi - s.x[s.x.size() - 1 - i];
  m.u.assign(s.u.rbegin(), s.u.rend());
  for (const auto& [idx, g] : s.delta_at)
    m.delta_at[s.x.size() - 1 - idx] += g;
  return m;
}

// Classically deepest breakpoints make good matching points: the decaying
// sweeps from both leads arrive there with full amplitude.  A delta well
// lowers its breakpoint's effective floor by its own binding reach.
inline double breakpoint_floor(const Staircase& s, std::size_t i) {
  double f = std::numeric_limits<double>::infinity();
  if (i > 0) f = std::min(f, s.u[i - 1]);
  if (i < s.regions()) f = std::min(f, s.u[i]);
  if (const auto it = s.delta_at.find(i);
      it != s.delta_at.end() && it->second < 0.0)
    f -= s.material.m_rel * it->second * it->second / (4.0 * h2_over_2m0);
  return f;
}

// The edge form of the bound condition, Z(x0) = -z0, degenerates
// exponentially when a state hides behind a long evanescent tail: the
// backward flow re-attracts to +z and the sign change narrows like
// exp(-2 kappa L).  Matching the two decaying sweeps at an interior
// breakpoint is the same condition with the saturation working for us, and
// F(E) = Z_right(x_m - 0) + Z_mirror(x_m + 0) stays transversal.  The left
// sweep runs over the mirrored cascade (impedances flip sign under x -> -x),
// excluding the matching breakpoint's delta, which the right sweep owns.
inline std::optional<double> match_im(const Staircase& stair,
                                      const Staircase& mirror, double energy,
                                      std::size_t j_match) {
  try {
    const auto noop = [](double, Complex, bool) {};
    const Complex z_right =
        sweep_core(stair, energy, 1, noop, j_match, true);
    const Complex z_mirror =
        sweep_core(mirror, energy, 1, noop,
                   stair.x.size() - 1 - j_match, false);
    const Complex f = z_right + z_mirror;
    if (std::abs(f) > 0.0 && std::abs(f.real()) >= 1e-9 * std::abs(f))
      throw InternalError(
          "bound matching acquired a spurious real part at E = " +
          std::to_string(energy) + " eV");
    return f.imag();
  } catch (const PoleError&) {
    return std::nullopt;
  }
}

}  // namespace detail

// Bound levels of the cascade built from the model at n regions per smooth
// piece: scans the two-sided matching function Im F(E) over the bound
// window, brackets sign changes and bisects each to 1e-12 eV.  Im F also
// flips sign at poles (a wavefunction node on the matching breakpoint); a
// bracket only counts as a root when |F| at the bisection limit drops below
// 1e-6 of the original bracket endpoints' mean |F|.  Two matching
// breakpoints are scanned so a state with a node on one of them is still
// seen by the other; roots closer than 1e-10 eV are merged.
inline std::vector<double> find_bound_states(const PotentialModel& model,
                                             int n, DivisionStrategy strategy,
                                             int scan_points,
                                             std::optional<double> e_ref = {}) {
  if (scan_points < 10) throw InputError("scan needs at least 10 points");
  const Staircase stair = build_staircase(model, n, strategy, e_ref);
  const Staircase mirror = detail::mirrored(stair);
  const auto window = detail::bound_window(stair);

  const std::size_t n_break = stair.x.size();
  std::size_t m1 = 0;
  for (std::size_t i = 1; i < n_break; ++i)
    if (detail::breakpoint_floor(stair, i) <
        detail::breakpoint_floor(stair, m1))
      m1 = i;
  const std::size_t min_gap = std::max<std::size_t>(1, n_break / 5);
  std::size_t m2 = m1 >= min_gap ? m1 - min_gap : m1 + min_gap;
  for (std::size_t i = 0; i < n_break; ++i) {
    const std::size_t gap = i > m1 ? i - m1 : m1 - i;
    if (gap < min_gap) continue;
    if (detail::breakpoint_floor(stair, i) <
        detail::breakpoint_floor(stair, m2))
      m2 = i;
  }

  std::vector<double> roots;
  for (const std::size_t j_match : {m1, m2}) {
    if (j_match >= n_break) continue;
    auto eval = [&](double e) {
      return detail::match_im(stair, mirror, e, j_match);
    };
    std::vector<double> energies(scan_points);
    std::vector<std::optional<double>> vals(scan_points);
    for (int j = 0; j < scan_points; ++j) {
      energies[j] =
          window.lo + (window.hi - window.lo) * j / (scan_points - 1);
      vals[j] = eval(energies[j]);
    }
    for (int j = 0; j + 1 < scan_points; ++j) {
      if (!vals[j] || !vals[j + 1]) continue;
      double fa = *vals[j], fb = *vals[j + 1];
      if (fa == 0.0) {
        roots.push_back(energies[j]);
        continue;
      }
      if (fa * fb > 0.0) continue;
      double a = energies[j], b = energies[j + 1];
      const double pole_gate = 1e-6 * 0.5 * (std::abs(fa) + std::abs(fb));
      while (b - a > 1e-12) {
        const double c = 0.5 * (a + b);
        const auto fc = eval(c);
        if (!fc) {  // pole exactly at the midpoint: nudge once, else give up
          const double c2 = c + (b - a) * 1e-3;
          const auto fc2 = eval(c2);
          if (!fc2) break;
          if ((fa <= 0.0) == (*fc2 <= 0.0)) {
            a = c2;
            fa = *fc2;
          } else {
            b = c2;
          }
          continue;
        }
        if ((fa <= 0.0) == (*fc <= 0.0)) {
          a = c;
          fa = *fc;
        } else {
          b = c;
        }
      }
      const double root = 0.5 * (a + b);
      const auto froot = eval(root);
      if (froot && std::abs(*froot) < pole_gate) roots.push_back(root);
    }
  }

  std::sort(roots.begin(), roots.end());
  std::vector<double> merged;
  for (double r : roots)
    if (merged.empty() || r - merged.back() > 1e-10) merged.push_back(r);
  return merged;
}

// Default scan density: 400 points per eV of bound window, at least 100.
inline int default_scan_points(const PotentialModel& model, int n,
                               DivisionStrategy strategy,
                               std::optional<double> e_ref = {}) {
  const Staircase stair = build_staircase(model, n, strategy, e_ref);
  const auto window = detail::bound_window(stair);
  return std::max(100, static_cast<int>(400.0 * (window.hi - window.lo)));
}

namespace detail {

// Greedy nearest-energy pairing of two equally sized sorted level lists;
// returns the largest pairwise distance.
inline double max_paired_move(const std::vector<double>& a,
                              const std::vector<double>& b) {
  std::vector<bool> used_a(a.size(), false), used_b(b.size(), false);
  double worst = 0.0;
  for (std::size_t pair = 0; pair < a.size(); ++pair) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (used_a[i]) continue;
      for (std::size_t j = 0; j < b.size(); ++j) {
        if (used_b[j]) continue;
        const double d = std::abs(a[i] - b[j]);
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    }
    used_a[bi] = used_b[bj] = true;
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace detail

// The doubling controller: solve at n0, 2 n0, 4 n0, ... until every matched
// level moves less than epsilon between consecutive passes, or n_max is
// reached (converged = false).  A level count still changing at N >= 4 n0
// is reported as an instability with both lists attached.
inline BoundStateReport converge_bound(const PotentialModel& model,
                                       const ConvergencePolicy& policy,
                                       DivisionStrategy strategy,
                                       std::optional<double> e_ref = {}) {
  policy.validate();
  const int scan_points =
      default_scan_points(model, policy.n0, strategy, e_ref);

  BoundStateReport report;
  report.epsilon = policy.epsilon;

  std::vector<double> prev;
  for (int n = policy.n0; n <= policy.n_max; n *= 2) {
    std::vector<double> levels =
        find_bound_states(model, n, strategy, scan_points, e_ref);
    report.trace.emplace_back(n, levels);
    report.terminal_n = n;
    if (n > policy.n0) {
      if (levels.size() != prev.size()) {
        if (n >= 4 * policy.n0)
          throw InstabilityError(
              "bound level count changed between refinements (" +
                  std::to_string(prev.size()) + " -> " +
                  std::to_string(levels.size()) + " at n = " +
                  std::to_string(n) + ")",
              prev, levels);
      } else if (detail::max_paired_move(prev, levels) < policy.epsilon) {
        report.converged = true;
        report.energies = levels;
        report.terminal_regions =
            build_staircase(model, n, strategy, e_ref).regions();
        return report;
      }
    }
    prev = std::move(levels);
  }
  report.converged = false;
  report.energies = prev;
  report.terminal_regions =
      build_staircase(model, report.terminal_n, strategy, e_ref).regions();
  return report;
}

struct AccuracyMetric {
  double eps_bar = 0.0;  // mean |T^(N) - T^(N/2)| over the energy grid
  int gaps = 0;          // energies excluded because either sweep gapped
};

// The doubling diagnostic: average absolute transmission change between the
// N-region and N/2-region cascades on one shared energy grid.  Exactly zero
// for models whose staircase is exact (constant pieces and deltas only).
inline AccuracyMetric accuracy_metric(const PotentialModel& model,
                                      const SweepSpec& spec, int n_regions,
                                      DivisionStrategy strategy) {
  if (n_regions < 4 || n_regions % 2 != 0)
    throw InputError("accuracy metric needs an even region count >= 4");
  const TransmissionSweep full =
      sweep_transmission(model, spec, n_regions, strategy);
  const TransmissionSweep half =
      sweep_transmission(model, spec, n_regions / 2, strategy);

  AccuracyMetric out;
  double sum = 0.0;
  int used = 0;
  for (int j = 0; j < spec.n_points; ++j) {
    const auto& a = full.points[j].result;
    const auto& b = half.points[j].result;
    if (!a || !b) {
      ++out.gaps;
      continue;
    }
    sum += std::abs(a->big_t - b->big_t);
    ++used;
  }
  if (used == 0) throw InternalError("accuracy metric: every energy gapped");
  out.eps_bar = sum / used;
  return out;
}

}  // namespace qwi
