#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qwi {

// Base of everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad user input: config syntax, invalid geometry, out-of-range arguments.
struct InputError : Error {
  explicit InputError(const std::string& msg, int line = 0)
      : Error(with_line(msg, line)), line(line) {}
  int line;  // 1-based config line; 0 when not tied to a file

 private:
  static std::string with_line(const std::string& msg, int line) {
    if (line <= 0) return msg;
    return "line " + std::to_string(line) + ": " + msg;
  }
};

// Physically inapplicable request: asymmetric leads, no propagating channel,
// no bound window, division strategy without a usable reference wavenumber.
struct PhysicsError : Error {
  using Error::Error;
};

// The homographic-map denominator vanished: the load sits on a
// transmission-line pole at this energy.  Callers may retry with a
// slightly perturbed energy.
struct PoleError : Error {
  PoleError(const std::string& msg, std::size_t region, double energy)
      : Error(msg), region(region), energy(energy) {}
  std::size_t region;
  double energy;
};

// A numerical self-check failed (flux conservation, determinant modulus,
// purity of the bound-state condition).
struct InternalError : Error {
  using Error::Error;
};

// Bound-state level count keeps changing between mesh refinements.
struct InstabilityError : InternalError {
  InstabilityError(const std::string& msg, std::vector<double> before,
                   std::vector<double> after)
      : InternalError(msg),
        levels_before(std::move(before)),
        levels_after(std::move(after)) {}
  std::vector<double> levels_before;
  std::vector<double> levels_after;
};

}  // namespace qwi
