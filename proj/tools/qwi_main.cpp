// qwi: 1-D quantum scattering and bound states via backward wave-impedance
// sweeps over piecewise-constant cascades, with delta terms.

#include <CLI11.hpp>

#include "qwi/commands.hpp"

namespace {

void add_common(CLI::App* sub, qwi::cmd::CommonOptions& opt) {
  sub->add_option("config", opt.config_path,
                  "scenario config file (see README for the format)");
  sub->add_option("--scenario", opt.scenario,
                  "built-in scenario: fig1 (double barrier + delta) or "
                  "fig2 (parabolic barrier)");
  sub->add_option("--alpha", opt.alpha,
                  "fig1 delta strength in eV*nm (0 disables the delta)");
  auto* n = sub->add_option("--n", "regions per smooth piece");
  n->each([&opt](const std::string& v) { opt.n = std::stoi(v); });
  auto* strat = sub->add_option(
      "--strategy",
      "division strategy: equal_width, equal_area, equal_phase, "
      "wavelength_bounded");
  strat->each([&opt](const std::string& v) { opt.strategy = v; });
  auto* emin = sub->add_option("--emin", "override sweep e_min (eV)");
  emin->each([&opt](const std::string& v) { opt.e_min = std::stod(v); });
  auto* emax = sub->add_option("--emax", "override sweep e_max (eV)");
  emax->each([&opt](const std::string& v) { opt.e_max = std::stod(v); });
  auto* pts = sub->add_option("--points", "override sweep point count");
  pts->each([&opt](const std::string& v) { opt.points = std::stoi(v); });
  sub->add_option("--out", opt.out, "output CSV path ('-' = stdout)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "1-D quantum scattering and bound states from backward "
      "wave-impedance sweeps"};
  app.require_subcommand(1);

  qwi::cmd::TransmitOptions transmit_opt;
  auto* transmit =
      app.add_subcommand("transmit", "transmission and reflection vs energy");
  add_common(transmit, transmit_opt);
  transmit->add_flag("--with-oracle", transmit_opt.with_oracle,
                     "append an independently computed T column");

  qwi::cmd::BoundOptions bound_opt;
  auto* bound = app.add_subcommand(
      "bound", "bound-state energies with doubling convergence");
  add_common(bound, bound_opt);

  qwi::cmd::ConvergeOptions converge_opt;
  auto* converge = app.add_subcommand(
      "converge", "average transmission accuracy vs cascade size");
  add_common(converge, converge_opt);

  qwi::cmd::ProfileOptions profile_opt;
  auto* profile =
      app.add_subcommand("profile", "impedance profile Z(x) at one energy");
  add_common(profile, profile_opt);
  profile->add_option("--energy", profile_opt.energy, "probe energy in eV")
      ->required();
  profile->add_option("--samples", profile_opt.samples,
                      "substeps per region in the profile");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  if (transmit->parsed()) return qwi::cmd::run_transmit(transmit_opt);
  if (bound->parsed()) return qwi::cmd::run_bound(bound_opt);
  if (converge->parsed()) return qwi::cmd::run_converge(converge_opt);
  if (profile->parsed()) return qwi::cmd::run_profile(profile_opt);
  return 1;
}
