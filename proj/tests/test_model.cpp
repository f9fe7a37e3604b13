#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "qwi/model.hpp"

using namespace qwi;
using Catch::Approx;

TEST_CASE("wavenumber is exactly zero at the band edge") {
  CHECK(wavenumber(1.0, 1.0, {1.0}) == Complex(0.0, 0.0));
  CHECK(wavenumber(-0.3, -0.3, {0.1}) == Complex(0.0, 0.0));
}

TEST_CASE("wavenumber of a 1 eV electron") {
  const Complex k = wavenumber(1.0, 0.0, {1.0});
  CHECK(k.imag() == 0.0);
  CHECK(k.real() == Approx(std::sqrt(1.0 / h2_over_2m0)).epsilon(1e-15));
  // de Broglie wavelength of a 1 eV electron is 1.226 nm
  const double lambda = 2.0 * M_PI / k.real();
  CHECK(lambda == Approx(1.226).margin(5e-3));
}

TEST_CASE("wavenumber below the potential is positive imaginary") {
  const Complex k = wavenumber(0.0, 1.0, {1.0});
  CHECK(k.real() == 0.0);
  CHECK(k.imag() == Approx(std::sqrt(1.0 / h2_over_2m0)).epsilon(1e-15));
}

TEST_CASE("wavenumber squared recovers the radicand on both branches") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> e_dist(-5.0, 5.0);
  std::uniform_real_distribution<double> m_dist(0.05, 2.0);
  for (int i = 0; i < 20000; ++i) {
    const double e = e_dist(rng), u = e_dist(rng), m = m_dist(rng);
    const Complex k = wavenumber(e, u, {m});
    CHECK(k.imag() >= 0.0);
    const double expected = m * (e - u) / h2_over_2m0;
    const Complex k2 = k * k;
    CHECK(k2.imag() == 0.0);
    CHECK(std::abs(k2.real() - expected) <=
          4.0 * std::numeric_limits<double>::epsilon() * std::abs(expected));
  }
}

TEST_CASE("model validation rejects bad geometry") {
  PotentialModel m;
  m.pieces = {{0.0, 1.0, ConstantProfile{1.0}}, {1.0, 2.0, ConstantProfile{0.5}}};
  REQUIRE_NOTHROW(m.validate());

  SECTION("overlapping pieces") {
    m.pieces[1].x_lo = 0.5;
    CHECK_THROWS_AS(m.validate(), InputError);
  }
  SECTION("gap between pieces") {
    m.pieces[1].x_lo = 1.5;
    CHECK_THROWS_AS(m.validate(), InputError);
  }
  SECTION("inverted piece") {
    m.pieces[0] = {2.0, 1.0, ConstantProfile{0.0}};
    CHECK_THROWS_AS(m.validate(), InputError);
  }
  SECTION("delta outside the support") {
    m.deltas.push_back({2.5, 1.0});
    CHECK_THROWS_AS(m.validate(), InputError);
  }
  SECTION("delta exactly on an edge is fine") {
    m.deltas.push_back({2.0, 1.0});
    CHECK_NOTHROW(m.validate());
  }
  SECTION("zero-strength delta") {
    m.deltas.push_back({0.5, 0.0});
    CHECK_THROWS_AS(m.validate(), InputError);
  }
  SECTION("nonpositive mass") {
    m.material.m_rel = 0.0;
    CHECK_THROWS_AS(m.validate(), InputError);
  }
  SECTION("no pieces") {
    m.pieces.clear();
    CHECK_THROWS_AS(m.validate(), InputError);
  }
}

TEST_CASE("staircase validation") {
  Staircase s;
  s.x = {0.0, 1.0, 2.0};
  s.u = {0.5, -0.5};
  REQUIRE_NOTHROW(s.validate());

  SECTION("breakpoints must increase") {
    s.x[1] = 2.5;
    CHECK_THROWS_AS(s.validate(), InputError);
  }
  SECTION("region count must match breakpoints") {
    s.u.push_back(0.0);
    CHECK_THROWS_AS(s.validate(), InputError);
  }
  SECTION("delta index must be in range") {
    s.delta_at[7] = 1.0;
    CHECK_THROWS_AS(s.validate(), InputError);
  }
}
