#pragma once

#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qwi/model.hpp"
#include "qwi/solve.hpp"

namespace qwi {

// Scenario configs are a small TOML-like text format: [section] tables,
// repeated [[piece]] / [[delta]] tables, key = value lines, # comments.
// Values are numbers except strategy/kind, which are quoted strings.

struct PieceSpec {
  enum class Kind { Constant, Parabola };
  double x_lo = 0.0;
  double x_hi = 0.0;
  Kind kind = Kind::Constant;
  double u = 0.0;            // Constant: U(x) = u
  double a = 0.0;            // Parabola: U(x) = a (x - xc)^2, xc = midpoint
  std::optional<double> x0;  // optional half-width echo, checked on load
  int line = 0;
};

struct DeltaSpec {
  double x = 0.0;
  double g = 0.0;
  int line = 0;
};

struct DiscretizeSpec {
  int n = 32;
  DivisionStrategy strategy{};
  std::optional<double> e_ref;
};

struct ScenarioDoc {
  Material material;
  double u_left = 0.0;
  double u_right = 0.0;
  std::vector<PieceSpec> pieces;
  std::vector<DeltaSpec> deltas;
  std::optional<SweepSpec> sweep;
  std::optional<DiscretizeSpec> discretize;
  std::optional<ConvergencePolicy> converge;
};

namespace cfg_detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

inline double parse_number(std::string_view v, int line) {
  double out = 0.0;
  const char* first = v.data();
  const char* last = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last)
    throw InputError("expected a number, got '" + std::string(v) + "'", line);
  return out;
}

inline int parse_int(std::string_view v, int line) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw InputError("expected an integer, got '" + std::string(v) + "'", line);
  return out;
}

inline std::string parse_string(std::string_view v, int line) {
  if (v.size() < 2 || v.front() != '"' || v.back() != '"')
    throw InputError("expected a quoted string, got '" + std::string(v) + "'",
                     line);
  return std::string(v.substr(1, v.size() - 2));
}

inline DivisionStrategy parse_strategy(const std::string& name, double fraction,
                                       int line) {
  if (name == "equal_width") return DivisionStrategy::equal_width();
  if (name == "equal_area") return DivisionStrategy::equal_area();
  if (name == "equal_phase") return DivisionStrategy::equal_phase();
  if (name == "wavelength_bounded")
    return DivisionStrategy::wavelength_bounded(fraction);
  throw InputError("unknown strategy '" + name +
                       "' (expected equal_width, equal_area, equal_phase or "
                       "wavelength_bounded)",
                   line);
}

inline const char* strategy_name(DivisionStrategy s) {
  switch (s.kind) {
    case Division::EqualWidth: return "equal_width";
    case Division::EqualArea: return "equal_area";
    case Division::EqualPhase: return "equal_phase";
    case Division::WavelengthBounded: return "wavelength_bounded";
  }
  return "equal_width";
}

inline std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace cfg_detail

inline ScenarioDoc parse_scenario(std::string_view text) {
  using namespace cfg_detail;

  ScenarioDoc doc;
  enum class Section {
    None, Material, Leads, Piece, Delta, Sweep, Discretize, Converge
  };
  Section section = Section::None;
  // raw discretize/sweep/converge keys, materialized at the end
  struct Raw {
    std::optional<double> v;
    int line = 0;
  };
  std::optional<std::string> strategy_name_raw;
  int strategy_line = 0;
  std::optional<double> fraction_raw;
  bool saw_sweep = false, saw_discretize = false, saw_converge = false;
  SweepSpec sweep{};
  DiscretizeSpec discretize{};
  ConvergencePolicy converge{};
  bool sweep_has[3] = {false, false, false};

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    line = trim(strip_comment(line));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.size() >= 4 && line.substr(0, 2) == "[[" &&
          line.substr(line.size() - 2) == "]]") {
        const std::string_view name = trim(line.substr(2, line.size() - 4));
        if (name == "piece") {
          doc.pieces.push_back({});
          doc.pieces.back().line = line_no;
          section = Section::Piece;
        } else if (name == "delta") {
          doc.deltas.push_back({});
          doc.deltas.back().line = line_no;
          section = Section::Delta;
        } else {
          throw InputError("unknown table '" + std::string(name) + "'",
                           line_no);
        }
        continue;
      }
      if (line.back() != ']')
        throw InputError("malformed section header", line_no);
      const std::string_view name = trim(line.substr(1, line.size() - 2));
      if (name == "material") section = Section::Material;
      else if (name == "leads") section = Section::Leads;
      else if (name == "sweep") { section = Section::Sweep; saw_sweep = true; }
      else if (name == "discretize") { section = Section::Discretize; saw_discretize = true; }
      else if (name == "converge") { section = Section::Converge; saw_converge = true; }
      else throw InputError("unknown section '" + std::string(name) + "'", line_no);
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw InputError("expected key = value", line_no);
    const std::string key{trim(line.substr(0, eq))};
    const std::string_view val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw InputError("expected key = value", line_no);

    switch (section) {
      case Section::None:
        throw InputError("key '" + key + "' outside any section", line_no);
      case Section::Material:
        if (key == "m_rel") doc.material.m_rel = parse_number(val, line_no);
        else throw InputError("unknown key '" + key + "' in [material]", line_no);
        break;
      case Section::Leads:
        if (key == "u_left") doc.u_left = parse_number(val, line_no);
        else if (key == "u_right") doc.u_right = parse_number(val, line_no);
        else throw InputError("unknown key '" + key + "' in [leads]", line_no);
        break;
      case Section::Piece: {
        PieceSpec& p = doc.pieces.back();
        if (key == "x_lo") p.x_lo = parse_number(val, line_no);
        else if (key == "x_hi") p.x_hi = parse_number(val, line_no);
        else if (key == "u") p.u = parse_number(val, line_no);
        else if (key == "a") { p.a = parse_number(val, line_no); p.kind = PieceSpec::Kind::Parabola; }
        else if (key == "x0") p.x0 = parse_number(val, line_no);
        else if (key == "kind") {
          const std::string kind = parse_string(val, line_no);
          if (kind == "constant") p.kind = PieceSpec::Kind::Constant;
          else if (kind == "parabola") p.kind = PieceSpec::Kind::Parabola;
          else throw InputError("unknown piece kind '" + kind + "'", line_no);
        } else {
          throw InputError("unknown key '" + key + "' in [[piece]]", line_no);
        }
        break;
      }
      case Section::Delta: {
        DeltaSpec& d = doc.deltas.back();
        if (key == "x") d.x = parse_number(val, line_no);
        else if (key == "g") d.g = parse_number(val, line_no);
        else throw InputError("unknown key '" + key + "' in [[delta]]", line_no);
        break;
      }
      case Section::Sweep:
        if (key == "e_min") { sweep.e_min = parse_number(val, line_no); sweep_has[0] = true; }
        else if (key == "e_max") { sweep.e_max = parse_number(val, line_no); sweep_has[1] = true; }
        else if (key == "points") { sweep.n_points = parse_int(val, line_no); sweep_has[2] = true; }
        else throw InputError("unknown key '" + key + "' in [sweep]", line_no);
        break;
      case Section::Discretize:
        if (key == "n") discretize.n = parse_int(val, line_no);
        else if (key == "strategy") { strategy_name_raw = parse_string(val, line_no); strategy_line = line_no; }
        else if (key == "fraction") fraction_raw = parse_number(val, line_no);
        else if (key == "e_ref") discretize.e_ref = parse_number(val, line_no);
        else throw InputError("unknown key '" + key + "' in [discretize]", line_no);
        break;
      case Section::Converge:
        if (key == "n0") converge.n0 = parse_int(val, line_no);
        else if (key == "epsilon") converge.epsilon = parse_number(val, line_no);
        else if (key == "n_max") converge.n_max = parse_int(val, line_no);
        else throw InputError("unknown key '" + key + "' in [converge]", line_no);
        break;
    }
  }

  if (saw_sweep) {
    if (!(sweep_has[0] && sweep_has[1] && sweep_has[2]))
      throw InputError("[sweep] needs e_min, e_max and points");
    doc.sweep = sweep;
  }
  if (saw_discretize) {
    discretize.strategy = parse_strategy(
        strategy_name_raw.value_or("equal_width"),
        fraction_raw.value_or(DivisionStrategy{}.fraction), strategy_line);
    doc.discretize = discretize;
  }
  if (saw_converge) doc.converge = converge;
  return doc;
}

// Lowers the parsed document to a PotentialModel, with line-numbered
// validation for the geometry.
inline PotentialModel to_model(const ScenarioDoc& doc) {
  PotentialModel model;
  model.material = doc.material;
  model.u_left = doc.u_left;
  model.u_right = doc.u_right;
  if (!(doc.material.m_rel > 0.0))
    throw InputError("material.m_rel must be positive");
  if (doc.pieces.empty())
    throw InputError("config needs at least one [[piece]]");

  std::vector<PieceSpec> specs = doc.pieces;
  std::sort(specs.begin(), specs.end(),
            [](const PieceSpec& l, const PieceSpec& r) { return l.x_lo < r.x_lo; });
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const PieceSpec& s = specs[i];
    if (!(s.x_lo < s.x_hi))
      throw InputError("piece needs x_lo < x_hi", s.line);
    if (i > 0 && specs[i - 1].x_hi != s.x_lo)
      throw InputError("piece does not start where the previous one ends",
                       s.line);
    Piece p;
    p.x_lo = s.x_lo;
    p.x_hi = s.x_hi;
    if (s.kind == PieceSpec::Kind::Constant) {
      p.profile = ConstantProfile{s.u};
    } else {
      const double half = 0.5 * (s.x_hi - s.x_lo);
      if (s.x0 && std::abs(*s.x0 - half) > 1e-9 * std::max(1.0, std::abs(*s.x0)))
        throw InputError("parabola x0 disagrees with the piece half-width",
                         s.line);
      const double a = s.a;
      const double xc = 0.5 * (s.x_lo + s.x_hi);
      p.profile = SmoothProfile{[a, xc](double x) {
        return a * (x - xc) * (x - xc);
      }};
    }
    model.pieces.push_back(std::move(p));
  }

  for (const DeltaSpec& d : doc.deltas) {
    if (d.g == 0.0) throw InputError("delta strength g must be nonzero", d.line);
    if (!(d.x >= model.support_lo() && d.x <= model.support_hi()))
      throw InputError("delta position lies outside the pieces' support",
                       d.line);
    model.deltas.push_back({d.x, d.g});
  }

  model.validate();
  return model;
}

inline std::string serialize_scenario(const ScenarioDoc& doc) {
  using cfg_detail::g17;
  std::string out;
  out += "[material]\nm_rel = " + g17(doc.material.m_rel) + "\n";
  out += "\n[leads]\nu_left = " + g17(doc.u_left) +
         "\nu_right = " + g17(doc.u_right) + "\n";
  for (const PieceSpec& p : doc.pieces) {
    out += "\n[[piece]]\nx_lo = " + g17(p.x_lo) + "\nx_hi = " + g17(p.x_hi) + "\n";
    if (p.kind == PieceSpec::Kind::Constant) {
      out += "u = " + g17(p.u) + "\n";
    } else {
      out += "kind = \"parabola\"\na = " + g17(p.a) + "\n";
      if (p.x0) out += "x0 = " + g17(*p.x0) + "\n";
    }
  }
  for (const DeltaSpec& d : doc.deltas) {
    out += "\n[[delta]]\nx = " + g17(d.x) + "\ng = " + g17(d.g) + "\n";
  }
  if (doc.sweep) {
    out += "\n[sweep]\ne_min = " + g17(doc.sweep->e_min) +
           "\ne_max = " + g17(doc.sweep->e_max) +
           "\npoints = " + std::to_string(doc.sweep->n_points) + "\n";
  }
  if (doc.discretize) {
    out += "\n[discretize]\nn = " + std::to_string(doc.discretize->n) +
           "\nstrategy = \"" +
           cfg_detail::strategy_name(doc.discretize->strategy) + "\"\n";
    if (doc.discretize->strategy.kind == Division::WavelengthBounded)
      out += "fraction = " + g17(doc.discretize->strategy.fraction) + "\n";
    if (doc.discretize->e_ref) out += "e_ref = " + g17(*doc.discretize->e_ref) + "\n";
  }
  if (doc.converge) {
    out += "\n[converge]\nn0 = " + std::to_string(doc.converge->n0) +
           "\nepsilon = " + g17(doc.converge->epsilon) +
           "\nn_max = " + std::to_string(doc.converge->n_max) + "\n";
  }
  return out;
}

// Canned systems, shipped in code so the headline results reproduce from a
// single command.
//   fig1: rectangular double barrier, 0.956 eV x 30 nm each, 100 nm apart,
//         m_rel = 0.1, with an optional delta alpha (eV*nm) centered in the
//         gap.
//   fig2: parabolic barrier U(x) = a x^2 on [-15, 15] nm with a chosen so
//         the edge value is 0.956 eV, m_rel = 0.1.
inline ScenarioDoc builtin_scenario(const std::string& name,
                                    double alpha = 0.0) {
  if (name == "fig1") {
    ScenarioDoc doc;
    doc.material.m_rel = 0.1;
    const double barrier = 0.956, bw = 30.0, gap = 100.0;
    PieceSpec left{-(0.5 * gap + bw), -0.5 * gap, PieceSpec::Kind::Constant,
                   barrier, 0.0, {}, 0};
    PieceSpec mid{-0.5 * gap, 0.5 * gap, PieceSpec::Kind::Constant, 0.0, 0.0,
                  {}, 0};
    PieceSpec right{0.5 * gap, 0.5 * gap + bw, PieceSpec::Kind::Constant,
                    barrier, 0.0, {}, 0};
    doc.pieces = {left, mid, right};
    if (alpha != 0.0) doc.deltas.push_back({0.0, alpha, 0});
    doc.sweep = SweepSpec{0.02, 1.2, 2400};
    doc.discretize = DiscretizeSpec{2, DivisionStrategy::equal_width(), {}};
    doc.converge = ConvergencePolicy{8, 1e-6, 4096};
    return doc;
  }
  if (name == "fig2") {
    if (alpha != 0.0)
      throw InputError("alpha applies only to the fig1 scenario");
    ScenarioDoc doc;
    doc.material.m_rel = 0.1;
    PieceSpec par{-15.0, 15.0, PieceSpec::Kind::Parabola, 0.0,
                  0.956 / (15.0 * 15.0), 15.0, 0};
    doc.pieces = {par};
    doc.sweep = SweepSpec{0.05, 2.0, 100};
    doc.discretize = DiscretizeSpec{64, DivisionStrategy::equal_width(), {}};
    doc.converge = ConvergencePolicy{8, 1e-6, 1024};
    return doc;
  }
  throw InputError("unknown scenario '" + name + "' (have: fig1, fig2)");
}

// Structural identity; smooth profiles are compared by dense sampling.
inline bool model_equal(const PotentialModel& a, const PotentialModel& b) {
  if (a.u_left != b.u_left || a.u_right != b.u_right) return false;
  if (a.material.m_rel != b.material.m_rel) return false;
  if (a.pieces.size() != b.pieces.size() || a.deltas.size() != b.deltas.size())
    return false;
  for (std::size_t i = 0; i < a.deltas.size(); ++i)
    if (a.deltas[i].x != b.deltas[i].x || a.deltas[i].g != b.deltas[i].g)
      return false;
  for (std::size_t i = 0; i < a.pieces.size(); ++i) {
    const Piece& p = a.pieces[i];
    const Piece& q = b.pieces[i];
    if (p.x_lo != q.x_lo || p.x_hi != q.x_hi) return false;
    if (p.is_constant() != q.is_constant()) return false;
    if (p.is_constant()) {
      if (std::get<ConstantProfile>(p.profile).u !=
          std::get<ConstantProfile>(q.profile).u)
        return false;
    } else {
      for (int s = 0; s <= 64; ++s) {
        const double x = p.x_lo + (p.x_hi - p.x_lo) * s / 64;
        if (p.value_at(x) != q.value_at(x)) return false;
      }
    }
  }
  return true;
}

}  // namespace qwi
