#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "qwi/model.hpp"

namespace qwi {

// Z(x) along the cascade at one energy, sorted ascending in x.  Z is
// continuous across plain interfaces; at a breakpoint carrying a delta the
// profile is discontinuous and both one-sided values are stored (Right is
// the limit from x+0, Left from x-0).
struct ProfileSample {
  enum class Side { Left, Right };
  double x = 0.0;
  ReducedImpedance z{};
  Side side = Side::Right;
};

struct ImpedanceProfile {
  double energy = 0.0;
  std::vector<ProfileSample> samples;
};

// Characteristic impedance of a uniform region: z = k / m_rel (reduced
// units), real positive when propagating, positive imaginary when
// evanescent, zero at the band edge E == U.
inline ReducedImpedance char_impedance(double energy, double potential,
                                       Material m) {
  return {wavenumber(energy, potential, m) / m.m_rel};
}

namespace detail {

constexpr double kPoleRelTol = 1e-14;

[[noreturn]] inline void throw_pole(std::size_t region, double energy) {
  throw PoleError("input-impedance pole in region " + std::to_string(region) +
                      " at E = " + std::to_string(energy) + " eV",
                  region, energy);
}

}  // namespace detail

// Input impedance of a uniform region with characteristic impedance z_char
// and phase thickness w = gamma*dx, loaded with z_load at its right face:
//
//   Z_in = z (Z ch w - z sh w) / (z ch w - Z sh w),   Z = z_load, z = z_char.
//
// Degree-1 homogeneous in (z_load, z_char) at fixed w, with fixed points
// Z = +-z.  Evaluated with the dominant exponential divided out,
// u = exp(-2|Re w| ...), so the impedance mismatches (Z -+ z) enter as exact
// subtractions: the ch/sh products would both overflow for strongly
// evanescent regions and lose the fixed-point direction to cancellation
// once |Re w| > ~18.  |u| is floored at exp(-700) so a saturated region
// still carries the mismatch instead of a hard zero.  Requires z_char != 0;
// the band-edge limit lives in step_back.
inline Complex region_input_impedance(Complex z_load, Complex z_char,
                                      Complex w, std::size_t region = 0,
                                      double energy =
                                          std::numeric_limits<double>::quiet_NaN()) {
  Complex num, den;
  double scale;
  if (w.real() == 0.0) {
    // propagating region: ch = cos, sh = i sin, unit-modulus exponentials.
    // This branch also keeps real and imaginary parts exactly separated,
    // which the bound-state window relies on.
    const Complex a = std::cosh(w);
    const Complex b = std::sinh(w);
    num = z_load * a - z_char * b;
    den = z_char * a - z_load * b;
    scale = std::abs(z_char * a) + std::abs(z_load * b);
  } else if (w.real() > 0.0) {
    const Complex u =
        std::polar(std::exp(-2.0 * std::min(w.real(), 350.0)), -2.0 * w.imag());
    num = (z_load - z_char) + u * (z_load + z_char);
    den = (z_char - z_load) + u * (z_char + z_load);
    scale = std::abs(z_char - z_load) + std::abs(u * (z_char + z_load));
  } else {
    const Complex u =
        std::polar(std::exp(2.0 * std::max(w.real(), -350.0)), 2.0 * w.imag());
    num = (z_load + z_char) + u * (z_load - z_char);
    den = (z_char + z_load) + u * (z_char - z_load);
    scale = std::abs(z_char + z_load) + std::abs(u * (z_char - z_load));
  }
  if (std::abs(den) < detail::kPoleRelTol * scale || scale == 0.0)
    detail::throw_pole(region, energy);
  return z_char * (num / den);
}

// Propagates the load impedance backward (right to left) across one region
// of width dx.  gamma*dx = i k dx with k = m_rel * z_region.  At a band edge
// (z_region == 0) the wavefunction is linear and the map degenerates to
//   Z_in = Z / (1 - i m_rel dx Z).
inline ReducedImpedance step_back(ReducedImpedance z_load,
                                  ReducedImpedance z_region, double dx,
                                  Material m, std::size_t region = 0,
                                  double energy =
                                      std::numeric_limits<double>::quiet_NaN()) {
  if (!(dx > 0.0)) throw InputError("step width dx must be positive");
  const Complex z = z_region.value;
  const Complex load = z_load.value;
  if (z == 0.0) {
    const Complex den = 1.0 - Complex(0.0, 1.0) * (m.m_rel * dx) * load;
    const double scale = 1.0 + std::abs(m.m_rel * dx * load);
    if (std::abs(den) < detail::kPoleRelTol * scale)
      detail::throw_pole(region, energy);
    return {load / den};
  }
  const Complex w = Complex(0.0, 1.0) * (m.m_rel * dx) * z;
  return {region_input_impedance(load, z, w, region, energy)};
}

// Impedance jump across a zero-range term of strength g (eV*nm), applied
// when the backward sweep passes its breakpoint:  Z(x-0) = Z(x+0) + i g/h2.
inline ReducedImpedance apply_delta(ReducedImpedance z, double g) {
  return {z.value + Complex(0.0, g / h2_over_2m0)};
}

namespace detail {

// Shared backward sweep from the right lead down to breakpoint stop (0 for
// the full cascade).  on_sample(x, Z, is_left_side) is invoked in sweep
// order (descending x); pass a no-op to compute the input impedance alone.
// The delta sitting on the stop breakpoint is composed only when
// include_stop_delta is set.
template <class OnSample>
Complex sweep_core(const Staircase& stair, double energy,
                   int samples_per_region, OnSample&& on_sample,
                   std::size_t stop = 0, bool include_stop_delta = true) {
  const std::size_t n = stair.regions();
  Complex z = char_impedance(energy, stair.u_right, stair.material).value;
  on_sample(stair.x.back(), z, false);
  if (auto it = stair.delta_at.find(stair.x.size() - 1);
      it != stair.delta_at.end()) {
    if (stair.x.size() - 1 > stop || include_stop_delta) {
      z = apply_delta({z}, it->second).value;
      on_sample(stair.x.back(), z, true);
    }
  }
  for (std::size_t j = n; j-- > stop;) {
    const ReducedImpedance zc =
        char_impedance(energy, stair.u[j], stair.material);
    const double width = stair.x[j + 1] - stair.x[j];
    const double h = width / samples_per_region;
    for (int s = 1; s <= samples_per_region; ++s) {
      z = step_back({z}, zc, h, stair.material, j, energy).value;
      const double pos =
          (s == samples_per_region) ? stair.x[j] : stair.x[j + 1] - s * h;
      on_sample(pos, z, false);
    }
    if (auto it = stair.delta_at.find(j); it != stair.delta_at.end()) {
      if (j > stop || include_stop_delta) {
        z = apply_delta({z}, it->second).value;
        on_sample(stair.x[j], z, true);
      }
    }
  }
  return z;
}

}  // namespace detail

struct SweepResult {
  ReducedImpedance z0;  // input impedance at the left support edge
  ImpedanceProfile profile;
};

// Backward impedance sweep over the whole cascade: start from the right
// lead's characteristic impedance, step region by region to the left,
// composing the delta jump at every breakpoint that carries one.
// samples_per_region > 1 subdivides each region into equal substeps so the
// profile is sampled inside regions as well as at breakpoints.
inline SweepResult sweep(const Staircase& stair, double energy,
                         int samples_per_region = 1) {
  stair.validate();
  if (samples_per_region < 1)
    throw InputError("samples_per_region must be at least 1");
  SweepResult out;
  out.profile.energy = energy;
  auto record = [&](double x, Complex z, bool left_side) {
    out.profile.samples.push_back(
        {x, ReducedImpedance{z},
         left_side ? ProfileSample::Side::Left : ProfileSample::Side::Right});
  };
  out.z0.value = detail::sweep_core(stair, energy, samples_per_region, record);
  std::reverse(out.profile.samples.begin(), out.profile.samples.end());
  return out;
}

// Wave reflection amplitude seen from the left lead:
//   r = exp(2 i k0 x0) (z0 - Z0) / (z0 + Z0)
// with k0, z0 of the left lead and x0 the left support edge.
inline Complex reflection(ReducedImpedance z0_at_edge, const Staircase& stair,
                          double energy) {
  if (!(energy > stair.u_left))
    throw PhysicsError(
        "no propagating channel: E = " + std::to_string(energy) +
        " eV does not exceed the left lead potential " +
        std::to_string(stair.u_left) + " eV");
  const double k0 = wavenumber(energy, stair.u_left, stair.material).real();
  const Complex z0 = {k0 / stair.material.m_rel, 0.0};
  const Complex phase = std::exp(Complex(0.0, 2.0 * k0 * stair.x.front()));
  return phase * ((z0 - z0_at_edge.value) / (z0 + z0_at_edge.value));
}

// R = |r|^2 and T = 1 - R for identical leads.  The T formula is a flux
// statement that only holds when both leads carry the same wavenumber, so
// asymmetric leads are rejected rather than silently misreported.
inline ScatteringResult scattering(const Staircase& stair, double energy) {
  if (stair.u_left != stair.u_right)
    throw PhysicsError("transmission needs identical leads, got u_left = " +
                       std::to_string(stair.u_left) + " eV, u_right = " +
                       std::to_string(stair.u_right) + " eV");
  stair.validate();
  const Complex z0 =
      detail::sweep_core(stair, energy, 1, [](double, Complex, bool) {});
  const Complex r = reflection({z0}, stair, energy);
  ScatteringResult res;
  res.energy = energy;
  res.r = r;
  res.big_r = std::norm(r);
  res.big_t = 1.0 - res.big_r;
  res.n_regions = stair.regions();
  return res;
}

// Bound-state condition F(E) = Z0(E) + z0(E); bound energies are the zeros.
// Inside the bound window every impedance in the chain is purely imaginary
// for a real cascade, so F must come out purely imaginary; a nonzero real
// part beyond rounding indicates a broken branch rule.
inline Complex bound_condition(const Staircase& stair, double energy) {
  if (!(energy < std::min(stair.u_left, stair.u_right)))
    throw PhysicsError("E = " + std::to_string(energy) +
                       " eV is not below both leads; no bound state there");
  stair.validate();
  const Complex z0 =
      detail::sweep_core(stair, energy, 1, [](double, Complex, bool) {});
  const Complex f =
      z0 + char_impedance(energy, stair.u_left, stair.material).value;
  if (std::abs(f) > 0.0 && std::abs(f.real()) >= 1e-9 * std::abs(f))
    throw InternalError(
        "bound-state condition acquired a spurious real part at E = " +
        std::to_string(energy) + " eV");
  return f;
}

// Largest normalized finite-difference defect of the impedance equation
//
//   Z' + i m_rel Z^2 = i (E - U)/h2_over_2m0
//
// over the profile's interior sample triples, each normalized by
// |i m Z^2| + |i (E-U)/h2|.  Z blows up at wavefunction nodes (the Riccati
// poles); triples with |Z| > 10 |z_region| sit inside a pole's reach where
// centered differences cannot track 1/(x - x_pole) and are excluded.
// Diagnostic for the continuum limit of the cascade recurrence, not a
// production path.
inline double ode_residual(const ImpedanceProfile& profile,
                           const Staircase& stair, double energy) {
  stair.validate();
  const double m_rel = stair.material.m_rel;
  double worst = 0.0;
  std::size_t cursor = 0;
  const auto& samples = profile.samples;
  for (std::size_t j = 0; j < stair.regions(); ++j) {
    const double xl = stair.x[j], xr = stair.x[j + 1];
    // Collect this region's trace: Right-side value at xl, interior samples,
    // and the value at xr seen from inside the region (Left side if a delta
    // splits the profile there).
    std::vector<const ProfileSample*> trace;
    while (cursor < samples.size() && samples[cursor].x < xl) ++cursor;
    std::size_t i = cursor;
    for (; i < samples.size() && samples[i].x <= xr; ++i) {
      const ProfileSample& s = samples[i];
      // A Left-side value at xl is the neighbouring region's (post-delta);
      // at xr the region stepped from the Left-side value when both exist.
      if (s.x == xl && s.side == ProfileSample::Side::Left) continue;
      if (s.x == xr && s.side == ProfileSample::Side::Right && i > 0 &&
          samples[i - 1].x == xr &&
          samples[i - 1].side == ProfileSample::Side::Left)
        continue;
      trace.push_back(&s);
    }
    if (trace.size() < 3)
      throw InputError("ode_residual needs at least 3 samples per region; "
                       "sweep with samples_per_region >= 2");
    const Complex zc = char_impedance(energy, stair.u[j], stair.material).value;
    const double pole_ref =
        std::abs(zc) > 0.0 ? std::abs(zc) : 1.0 / (m_rel * (xr - xl));
    const Complex rhs =
        Complex(0.0, 1.0) * (energy - stair.u[j]) / h2_over_2m0;
    for (std::size_t t = 1; t + 1 < trace.size(); ++t) {
      const auto &lo = *trace[t - 1], &mid = *trace[t], &hi = *trace[t + 1];
      const double reach =
          std::max({std::abs(lo.z.value), std::abs(mid.z.value),
                    std::abs(hi.z.value)});
      if (reach > 10.0 * pole_ref) continue;
      const Complex dz = (hi.z.value - lo.z.value) / (hi.x - lo.x);
      const Complex lhs =
          dz + Complex(0.0, 1.0) * m_rel * mid.z.value * mid.z.value;
      const double scale =
          std::abs(m_rel * mid.z.value * mid.z.value) + std::abs(rhs);
      if (scale == 0.0) {
        worst = std::max(worst, std::abs(lhs - rhs));
        continue;
      }
      worst = std::max(worst, std::abs(lhs - rhs) / scale);
    }
  }
  return worst;
}

}  // namespace qwi
