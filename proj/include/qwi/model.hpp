#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "qwi/constants.hpp"
#include "qwi/errors.hpp"

namespace qwi {

using Complex = std::complex<double>;

struct Material {
  double m_rel = 1.0;  // effective mass in units of the bare electron mass
};

// U(x) = g * delta(x - position); g in eV*nm.  g > 0 is a barrier, g < 0 a well.
struct DeltaTerm {
  double x = 0.0;
  double g = 0.0;
};

struct ConstantProfile {
  double u = 0.0;  // eV
};

struct SmoothProfile {
  std::function<double(double)> u;  // eV as a function of absolute x in nm
};

using PieceProfile = std::variant<ConstantProfile, SmoothProfile>;

// One finite-support slab of the potential, [x_lo, x_hi] in nm.
struct Piece {
  double x_lo = 0.0;
  double x_hi = 0.0;
  PieceProfile profile{ConstantProfile{}};

  bool is_constant() const {
    return std::holds_alternative<ConstantProfile>(profile);
  }

  double value_at(double x) const {
    if (const auto* c = std::get_if<ConstantProfile>(&profile)) return c->u;
    return std::get<SmoothProfile>(profile).u(x);
  }
};

// Full description of the physical system: two semi-infinite leads, a finite
// stack of contiguous pieces, and zero-range delta terms.
struct PotentialModel {
  double u_left = 0.0;   // lead potential for x < support_lo()
  double u_right = 0.0;  // lead potential for x > support_hi()
  std::vector<Piece> pieces;
  std::vector<DeltaTerm> deltas;
  Material material;

  double support_lo() const { return pieces.front().x_lo; }
  double support_hi() const { return pieces.back().x_hi; }

  void validate() const {
    if (!(material.m_rel > 0.0))
      throw InputError("material.m_rel must be positive");
    if (pieces.empty())
      throw InputError("model needs at least one piece of finite support");
    for (const Piece& p : pieces)
      if (!(p.x_lo < p.x_hi))
        throw InputError("piece must satisfy x_lo < x_hi");
    for (std::size_t i = 0; i + 1 < pieces.size(); ++i) {
      if (pieces[i].x_hi != pieces[i + 1].x_lo)
        throw InputError("pieces must tile a contiguous interval; gap or "
                         "overlap after x = " +
                         std::to_string(pieces[i].x_hi));
    }
    for (const DeltaTerm& d : deltas) {
      if (d.g == 0.0) throw InputError("delta strength must be nonzero");
      if (!(d.x >= support_lo() && d.x <= support_hi()))
        throw InputError("delta position " + std::to_string(d.x) +
                         " lies outside the support interval");
    }
  }
};

// Discretized cascade.  Breakpoints x[0] < ... < x[M]; interior region j
// spans [x[j], x[j+1]] at constant potential u[j], so x.size() == u.size()+1.
// delta_at maps a breakpoint index to the summed delta strength attached
// there.  The leads start beyond x.front() and x.back().
struct Staircase {
  std::vector<double> x;
  std::vector<double> u;
  double u_left = 0.0;
  double u_right = 0.0;
  std::map<std::size_t, double> delta_at;
  Material material;

  std::size_t regions() const { return u.size(); }

  void validate() const {
    if (!(material.m_rel > 0.0))
      throw InputError("material.m_rel must be positive");
    if (u.empty() || x.size() != u.size() + 1)
      throw InputError("staircase needs x.size() == u.size() + 1 with at "
                       "least one region");
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
      if (!(x[i] < x[i + 1]))
        throw InputError("staircase breakpoints must be strictly increasing");
    for (const auto& [idx, g] : delta_at) {
      if (idx >= x.size())
        throw InputError("delta attached to a breakpoint index past the end");
      (void)g;
    }
  }
};

// Impedance in reduced units of nm^-1: physical z * m0/hbar = k / m_rel.
// In a propagating lead (E > U) the value is real positive; in an evanescent
// lead it is purely imaginary with positive imaginary part (decaying to the
// right).
struct ReducedImpedance {
  Complex value{};
};

struct ScatteringResult {
  double energy = 0.0;       // eV
  Complex r{};               // reflection amplitude
  double big_r = 0.0;        // R = |r|^2
  double big_t = 0.0;        // T = 1 - R
  std::size_t n_regions = 0; // cascade size used
};

struct BoundStateReport {
  std::vector<double> energies;  // sorted ascending, eV
  std::vector<std::pair<int, std::vector<double>>> trace;  // (n, levels at n)
  bool converged = false;
  double epsilon = 0.0;          // eV tolerance the controller ran with
  int terminal_n = 0;            // regions per smooth piece at the last pass
  std::size_t terminal_regions = 0;  // actual cascade size at the last pass
};

// k = sqrt(m_rel (E - U) / h2_over_2m0).  E >= U gives the real branch,
// E < U the positive-imaginary branch, so Im(k) >= 0 always and E == U
// gives exactly zero.
inline Complex wavenumber(double energy, double potential, Material m) {
  const double radicand = m.m_rel * (energy - potential) / h2_over_2m0;
  if (radicand >= 0.0) return {std::sqrt(radicand), 0.0};
  return {0.0, std::sqrt(-radicand)};
}

}  // namespace qwi
