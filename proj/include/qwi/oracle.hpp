#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "qwi/model.hpp"

// Independent verification backends: a plane-wave transfer-matrix solver
// over the same Staircase, and textbook closed forms for the potential
// step, rectangular barrier, delta well and finite square well.  Nothing
// here calls into the impedance sweep; the local wavenumber is rederived
// so the two routes share no code beyond the domain types.
namespace qwi::oracle {

namespace detail {

inline Complex plane_k(double energy, double potential, double m_rel) {
  const double r = m_rel * (energy - potential) / h2_over_2m0;
  if (r >= 0.0) return {std::sqrt(r), 0.0};
  return {0.0, std::sqrt(-r)};
}

struct Mat2 {
  Complex a11{1.0}, a12{0.0}, a21{0.0}, a22{1.0};
};

inline Mat2 mul(const Mat2& l, const Mat2& r) {
  return {l.a11 * r.a11 + l.a12 * r.a21, l.a11 * r.a12 + l.a12 * r.a22,
          l.a21 * r.a11 + l.a22 * r.a21, l.a21 * r.a12 + l.a22 * r.a22};
}

// Coefficient map across an interface from wavenumber k to k_next with a
// derivative jump J*psi (J = m_rel g / h2_over_2m0 for a delta of
// strength g; J = 0 for a plain step):
//   a' = [(1 + k/k' - iJ/k') u + (1 - k/k' - iJ/k') v] / 2
//   b' = [(1 - k/k' + iJ/k') u + (1 + k/k' + iJ/k') v] / 2
inline Mat2 interface(Complex k, Complex k_next, double jump) {
  const Complex ratio = k / k_next;
  const Complex jj = Complex(0.0, 1.0) * jump / k_next;
  return {0.5 * (1.0 + ratio - jj), 0.5 * (1.0 - ratio - jj),
          0.5 * (1.0 - ratio + jj), 0.5 * (1.0 + ratio + jj)};
}

// Local-frame propagation across a region of width w: the rightward
// coefficient gains e^{ikw}, the leftward one e^{-ikw}.
inline Mat2 propagation(Complex k, double w) {
  const Complex ph = std::exp(Complex(0.0, 1.0) * k * w);
  return {ph, 0.0, 0.0, 1.0 / ph};
}

}  // namespace detail

struct TransferMatrix {
  Complex m11{1.0}, m12{0.0}, m21{0.0}, m22{1.0};
  double log_scale = 0.0;  // entries were divided by exp(log_scale) in total
};

// Accumulates the full chain left lead -> right lead, renormalizing by the
// largest entry magnitude whenever the product grows past 1e150 (long
// evanescent chains overflow naive products; the factor cancels in r and is
// restored in log space for t).
inline TransferMatrix transfer_matrix(const Staircase& stair, double energy) {
  stair.validate();
  const double m_rel = stair.material.m_rel;
  std::vector<Complex> ks(stair.regions() + 2);
  ks.front() = detail::plane_k(energy, stair.u_left, m_rel);
  for (std::size_t j = 0; j < stair.regions(); ++j)
    ks[j + 1] = detail::plane_k(energy, stair.u[j], m_rel);
  ks.back() = detail::plane_k(energy, stair.u_right, m_rel);
  for (const Complex& k : ks)
    if (k == 0.0)
      throw InputError(
          "transfer-matrix oracle cannot handle a zero-wavenumber region "
          "(E equals a region potential)");

  auto jump_at = [&](std::size_t breakpoint) {
    const auto it = stair.delta_at.find(breakpoint);
    return it == stair.delta_at.end() ? 0.0
                                      : m_rel * it->second / h2_over_2m0;
  };

  detail::Mat2 m;
  double log_scale = 0.0;
  auto fold = [&](const detail::Mat2& step) {
    m = detail::mul(step, m);
    const double big =
        std::max({std::abs(m.a11), std::abs(m.a12), std::abs(m.a21),
                  std::abs(m.a22)});
    if (big > 1e150) {
      m.a11 /= big;
      m.a12 /= big;
      m.a21 /= big;
      m.a22 /= big;
      log_scale += std::log(big);
    }
  };

  for (std::size_t j = 0; j <= stair.regions(); ++j) {
    fold(detail::interface(ks[j], ks[j + 1], jump_at(j)));
    if (j < stair.regions())
      fold(detail::propagation(ks[j + 1], stair.x[j + 1] - stair.x[j]));
  }
  return {m.a11, m.a12, m.a21, m.a22, log_scale};
}

// Scattering via the transfer matrix: with (a_R, b_R) = M (a_L, b_L) and no
// incoming wave from the right, r = -m21/m22 (times the lead phase anchored
// at x0) and t = det M / m22 with det M = k_left/k_right.
inline ScatteringResult transfer_matrix_scattering(const Staircase& stair,
                                                   double energy) {
  if (stair.u_left != stair.u_right)
    throw PhysicsError("transfer-matrix transmission needs identical leads");
  if (!(energy > stair.u_left))
    throw PhysicsError("no propagating channel below the lead potential");
  const TransferMatrix tm = transfer_matrix(stair, energy);

  const double entry_scale =
      std::max({std::abs(tm.m11), std::abs(tm.m12), std::abs(tm.m21),
                std::abs(tm.m22)});
  if (std::abs(tm.m22) < 1e-14 * entry_scale)
    throw PoleError("transfer-matrix pole: |m22| vanished", 0, energy);

  // Equal leads make det M = k_left/k_right = 1 factor by factor, so t is
  // 1/m22 with the pulled-out scale restored.  The numerically evaluated
  // determinant checks the assembly, but only where the subtraction is
  // conditioned: entries of an opaque chain grow like exp(+sum kappa dx)
  // while det stays at exp(-2 log_scale), so cancellation eventually eats
  // every digit.  Flux conservation below covers the opaque regime.
  const Complex det = tm.m11 * tm.m22 - tm.m12 * tm.m21;
  const double det_noise =
      std::numeric_limits<double>::epsilon() *
      (std::abs(tm.m11 * tm.m22) + std::abs(tm.m12 * tm.m21));
  const double det_expected = std::exp(-2.0 * tm.log_scale);
  const double det_tol =
      1e-10 * std::max(1.0, std::sqrt(static_cast<double>(stair.regions())));
  if (det_noise < 0.1 * det_expected * det_tol) {
    const double log_det_true = std::log(std::abs(det)) + 2.0 * tm.log_scale;
    if (std::abs(log_det_true) > det_tol)
      throw InternalError("transfer-matrix determinant drifted off modulus 1");
  }

  const double k0 =
      detail::plane_k(energy, stair.u_left, stair.material.m_rel).real();
  const Complex phase = std::exp(Complex(0.0, 2.0 * k0 * stair.x.front()));
  const Complex r = -(tm.m21 / tm.m22) * phase;

  ScatteringResult res;
  res.energy = energy;
  res.r = r;
  res.big_r = std::norm(r);
  if (tm.log_scale == 0.0) {
    res.big_t = 1.0 / std::norm(tm.m22);
  } else {
    res.big_t =
        std::exp(-2.0 * (std::log(std::abs(tm.m22)) + tm.log_scale));
  }
  res.n_regions = stair.regions();
  if (std::abs(res.big_r + res.big_t - 1.0) > 1e-9)
    throw InternalError("transfer matrix lost flux conservation: R + T = " +
                        std::to_string(res.big_r + res.big_t));
  return res;
}

// Reflection probability of the abrupt step 0 -> step_height seen by a wave
// incident with E > 0: R = ((k1 - k2)/(k1 + k2))^2, total reflection below
// the step.
inline double analytic_step_reflection(double energy, double step_height,
                                       Material m) {
  if (!(energy > 0.0))
    throw InputError("step oracle needs a propagating incident wave, E > 0");
  if (energy <= step_height) return 1.0;
  const double k1 = std::sqrt(m.m_rel * energy / h2_over_2m0);
  const double k2 = std::sqrt(m.m_rel * (energy - step_height) / h2_over_2m0);
  const double rho = (k1 - k2) / (k1 + k2);
  return rho * rho;
}

// Transmission through a rectangular barrier of height u0 and width a on a
// zero background:
//   E < u0:  T = [1 + u0^2 sinh^2(kappa a) / (4 E (u0 - E))]^-1
//   E > u0:  T = [1 + u0^2 sin^2(k a)      / (4 E (E - u0))]^-1
//   E == u0: T = [1 + m_rel u0 a^2 / (4 h2_over_2m0)]^-1
// (the band-edge value is the sinh -> kappa*a limit of the first form).
// For kappa*a > 350, sinh^2 overflows and the asymptotic
// T = 16 E (u0 - E) / u0^2 * exp(-2 kappa a) is used instead.
inline double analytic_rect_barrier_transmission(double energy, double u0,
                                                 double width, Material m) {
  if (!(energy > 0.0)) throw InputError("barrier oracle needs E > 0");
  if (!(width > 0.0)) throw InputError("barrier oracle needs width > 0");
  if (energy == u0) {
    return 1.0 / (1.0 + m.m_rel * u0 * width * width / (4.0 * h2_over_2m0));
  }
  if (energy < u0) {
    const double kappa =
        std::sqrt(m.m_rel * (u0 - energy) / h2_over_2m0);
    const double ka = kappa * width;
    const double pref = u0 * u0 / (4.0 * energy * (u0 - energy));
    if (ka > 350.0) return std::exp(-2.0 * ka) / (0.25 * pref);
    const double s = std::sinh(ka);
    return 1.0 / (1.0 + pref * s * s);
  }
  const double k = std::sqrt(m.m_rel * (energy - u0) / h2_over_2m0);
  const double s = std::sin(k * width);
  return 1.0 / (1.0 + u0 * u0 * s * s / (4.0 * energy * (energy - u0)));
}

// The single bound state of an isolated delta well g < 0 between zero leads:
// E = -m_rel g^2 / (4 h2_over_2m0).
inline double delta_well_energy(double g, Material m) {
  if (!(g < 0.0)) throw PhysicsError("a delta barrier binds no state");
  return -m.m_rel * g * g / (4.0 * h2_over_2m0);
}

// All bound levels of the finite square well (bottom at -depth, width L,
// leads at 0), from the even/odd transcendental equations in the angle
// variable theta = k L/2:
//   even:  theta tan(theta) = sqrt(theta_max^2 - theta^2)
//   odd:  -theta cot(theta) = sqrt(theta_max^2 - theta^2)
// with theta_max = (L/2) sqrt(m_rel depth / h2).  One root per branch while
// the branch start lies below theta_max; at least one even level always
// exists.  Returned ascending in (-depth, 0).
inline std::vector<double> square_well_levels(double depth, double width,
                                              Material m) {
  if (!(depth > 0.0)) throw InputError("square well oracle needs depth > 0");
  if (!(width > 0.0)) throw InputError("square well oracle needs width > 0");
  const double theta_max =
      0.5 * width * std::sqrt(m.m_rel * depth / h2_over_2m0);

  auto bisect = [](auto f, double a, double b) -> double {
    double fa = f(a);
    for (int it = 0; it < 200; ++it) {
      const double c = 0.5 * (a + b);
      const double fc = f(c);
      if ((fa <= 0.0) == (fc <= 0.0)) {
        a = c;
        fa = fc;
      } else {
        b = c;
      }
    }
    return 0.5 * (a + b);
  };

  const double nudge = 1e-12;
  std::vector<double> thetas;
  for (int branch = 0; branch * M_PI < theta_max; ++branch) {
    const double base = branch * M_PI;
    {  // even branch [n pi, n pi + pi/2)
      const double a = base + nudge;
      const double b = std::min(base + 0.5 * M_PI - nudge, theta_max - nudge);
      auto f = [&](double th) {
        return th * std::tan(th) -
               std::sqrt(std::max(theta_max * theta_max - th * th, 0.0));
      };
      if (a < b && f(a) * f(b) <= 0.0) thetas.push_back(bisect(f, a, b));
    }
    {  // odd branch (n pi + pi/2, (n+1) pi]
      const double a = base + 0.5 * M_PI + nudge;
      const double b = std::min(base + M_PI - nudge, theta_max - nudge);
      auto f = [&](double th) {
        return -th / std::tan(th) -
               std::sqrt(std::max(theta_max * theta_max - th * th, 0.0));
      };
      if (a < b && f(a) * f(b) <= 0.0) thetas.push_back(bisect(f, a, b));
    }
  }

  std::vector<double> levels;
  for (double th : thetas) {
    const double k = 2.0 * th / width;
    levels.push_back(h2_over_2m0 * k * k / m.m_rel - depth);
  }
  std::sort(levels.begin(), levels.end());
  return levels;
}

}  // namespace qwi::oracle
