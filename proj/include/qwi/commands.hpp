#pragma once

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "qwi/oracle.hpp"
#include "qwi/scenario.hpp"

// Command bodies shared between the CLI binary and the test suite.
// Exit codes: 0 success, 1 input error, 2 physics/configuration error,
// 3 internal numerical failure.
namespace qwi::cmd {

struct CommonOptions {
  std::string config_path;  // empty when a built-in scenario is used
  std::string scenario;     // "fig1" or "fig2", empty when a config is used
  double alpha = 0.0;       // fig1 delta strength, eV*nm
  std::optional<int> n;     // override [discretize] n
  std::optional<std::string> strategy;  // override [discretize] strategy
  std::optional<double> e_min, e_max;   // override [sweep] window
  std::optional<int> points;            // override [sweep] points
  std::string out = "-";    // CSV path, "-" = stdout
};

struct TransmitOptions : CommonOptions {
  bool with_oracle = false;
};

struct BoundOptions : CommonOptions {};
struct ConvergeOptions : CommonOptions {};

struct ProfileOptions : CommonOptions {
  double energy = 0.0;
  int samples = 32;  // substeps per region
};

namespace detail {

using cfg_detail::g17;

inline ScenarioDoc load_doc(const CommonOptions& opt) {
  if (!opt.scenario.empty() && !opt.config_path.empty())
    throw InputError("give either a config file or --scenario, not both");
  if (opt.scenario.empty() && opt.config_path.empty())
    throw InputError("need a config file or --scenario");
  ScenarioDoc doc;
  if (!opt.scenario.empty()) {
    doc = builtin_scenario(opt.scenario, opt.alpha);
  } else {
    if (opt.alpha != 0.0)
      throw InputError("--alpha applies only to --scenario fig1");
    std::ifstream in(opt.config_path);
    if (!in) throw InputError("cannot open config '" + opt.config_path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    doc = parse_scenario(text.str());
  }
  if (opt.n || opt.strategy) {
    if (!doc.discretize) doc.discretize = DiscretizeSpec{};
    if (opt.n) doc.discretize->n = *opt.n;
    if (opt.strategy)
      doc.discretize->strategy = cfg_detail::parse_strategy(
          *opt.strategy, doc.discretize->strategy.fraction, 0);
  }
  if (opt.e_min || opt.e_max || opt.points) {
    if (!doc.sweep) throw InputError("no [sweep] section to override");
    if (opt.e_min) doc.sweep->e_min = *opt.e_min;
    if (opt.e_max) doc.sweep->e_max = *opt.e_max;
    if (opt.points) doc.sweep->n_points = *opt.points;
  }
  return doc;
}

inline DiscretizeSpec discretize_of(const ScenarioDoc& doc) {
  if (!doc.discretize)
    throw InputError("config is missing the [discretize] section");
  return *doc.discretize;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path != "-") {
      file_.open(path);
      if (!file_) throw InputError("cannot open output '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

// A rectangular barrier/well on a zero background has a closed form; other
// shapes fall back to the transfer-matrix backend.
inline bool has_closed_form(const PotentialModel& model) {
  return model.pieces.size() == 1 && model.pieces.front().is_constant() &&
         model.u_left == 0.0 && model.u_right == 0.0 && model.deltas.empty();
}

inline std::optional<double> oracle_t(const PotentialModel& model,
                                      const Staircase& stair, double energy) {
  try {
    if (has_closed_form(model)) {
      const Piece& p = model.pieces.front();
      return oracle::analytic_rect_barrier_transmission(
          energy, std::get<ConstantProfile>(p.profile).u, p.x_hi - p.x_lo,
          model.material);
    }
    return oracle::transfer_matrix_scattering(stair, energy).big_t;
  } catch (const Error&) {
    return std::nullopt;
  }
}

template <class Fn>
int guarded(Fn&& fn, std::ostream& err) {
  try {
    fn();
    return 0;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const PhysicsError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {  // poles, internal checks, instability
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace detail

inline int run_transmit(const TransmitOptions& opt,
                        std::ostream& err = std::cerr) {
  return detail::guarded(
      [&] {
        const ScenarioDoc doc = detail::load_doc(opt);
        const PotentialModel model = to_model(doc);
        if (!doc.sweep) throw InputError("config is missing the [sweep] section");
        const DiscretizeSpec dis = detail::discretize_of(doc);
        const TransmissionSweep sweep = sweep_transmission(
            model, *doc.sweep, dis.n, dis.strategy);

        std::optional<Staircase> oracle_stair;
        if (opt.with_oracle)
          oracle_stair = build_staircase(model, dis.n, dis.strategy,
                                         dis.e_ref ? dis.e_ref
                                                   : std::optional<double>(
                                                         doc.sweep->e_max));

        detail::Output out(opt.out);
        std::ostream& os = out.stream();
        os << "energy_eV,r_re,r_im,R,T,n_regions";
        if (opt.with_oracle) os << ",T_oracle";
        os << "\n";
        for (const SweepPoint& p : sweep.points) {
          os << detail::g17(p.energy) << ",";
          if (p.result) {
            os << detail::g17(p.result->r.real()) << ","
               << detail::g17(p.result->r.imag()) << ","
               << detail::g17(p.result->big_r) << ","
               << detail::g17(p.result->big_t) << ",";
          } else {
            os << ",,,,";
          }
          os << sweep.n_regions;
          if (opt.with_oracle) {
            os << ",";
            const auto t = detail::oracle_t(model, *oracle_stair, p.energy);
            if (t) os << detail::g17(*t);
          }
          os << "\n";
        }
        os << "# gaps: " << sweep.gaps << "\n";
      },
      err);
}

inline int run_bound(const BoundOptions& opt, std::ostream& err = std::cerr) {
  return detail::guarded(
      [&] {
        const ScenarioDoc doc = detail::load_doc(opt);
        const PotentialModel model = to_model(doc);
        const DiscretizeSpec dis = detail::discretize_of(doc);
        if (!doc.converge)
          throw InputError("config is missing the [converge] section");
        const BoundStateReport report =
            converge_bound(model, *doc.converge, dis.strategy, dis.e_ref);

        detail::Output out(opt.out);
        std::ostream& os = out.stream();
        os << "level,energy_eV,n_regions,converged\n";
        for (std::size_t i = 0; i < report.energies.size(); ++i) {
          os << (i + 1) << "," << detail::g17(report.energies[i]) << ","
             << report.terminal_regions << ","
             << (report.converged ? "true" : "false") << "\n";
        }
        if (opt.out != "-") {
          std::ofstream trace(opt.out + ".trace.csv");
          if (!trace)
            throw InputError("cannot open '" + opt.out + ".trace.csv'");
          trace << "N,level,energy_eV\n";
          for (const auto& [n, levels] : report.trace)
            for (std::size_t i = 0; i < levels.size(); ++i)
              trace << n << "," << (i + 1) << "," << detail::g17(levels[i])
                    << "\n";
        }
      },
      err);
}

inline int run_converge(const ConvergeOptions& opt,
                        std::ostream& err = std::cerr) {
  return detail::guarded(
      [&] {
        const ScenarioDoc doc = detail::load_doc(opt);
        const PotentialModel model = to_model(doc);
        if (!doc.sweep) throw InputError("config is missing the [sweep] section");
        if (!doc.converge)
          throw InputError("config is missing the [converge] section");
        const DiscretizeSpec dis = detail::discretize_of(doc);
        const ConvergencePolicy& policy = *doc.converge;
        policy.validate();
        if (policy.n0 % 2 != 0)
          throw InputError("the accuracy ladder needs an even n0");

        detail::Output out(opt.out);
        std::ostream& os = out.stream();
        os << "N,log2_N,eps_bar\n";
        for (int n = policy.n0; n <= policy.n_max; n *= 2) {
          const AccuracyMetric m =
              accuracy_metric(model, *doc.sweep, n, dis.strategy);
          os << n << "," << detail::g17(std::log2(double(n))) << ","
             << detail::g17(m.eps_bar) << "\n";
        }
      },
      err);
}

inline int run_profile(const ProfileOptions& opt,
                       std::ostream& err = std::cerr) {
  return detail::guarded(
      [&] {
        const ScenarioDoc doc = detail::load_doc(opt);
        const PotentialModel model = to_model(doc);
        const DiscretizeSpec dis = detail::discretize_of(doc);
        if (opt.samples < 1)
          throw InputError("--samples must be at least 1");
        const Staircase stair =
            build_staircase(model, dis.n, dis.strategy,
                            dis.e_ref ? dis.e_ref
                                      : std::optional<double>(opt.energy));
        const SweepResult res = sweep(stair, opt.energy, opt.samples);

        detail::Output out(opt.out);
        std::ostream& os = out.stream();
        os << "x_nm,Z_re,Z_im,side\n";
        for (const ProfileSample& s : res.profile.samples) {
          os << detail::g17(s.x) << "," << detail::g17(s.z.value.real()) << ","
             << detail::g17(s.z.value.imag()) << ","
             << (s.side == ProfileSample::Side::Left ? "L" : "R") << "\n";
        }
      },
      err);
}

}  // namespace qwi::cmd
