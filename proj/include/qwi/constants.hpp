#pragma once

namespace qwi {

// hbar^2 / (2 m0) in eV*nm^2.  Energies are eV and lengths are nm throughout;
// every energy <-> wavenumber conversion goes through this one constant.
inline constexpr double h2_over_2m0 = 0.0380998212;

static_assert(h2_over_2m0 > 0.0);

}  // namespace qwi
