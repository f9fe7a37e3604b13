#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qwi/oracle.hpp"

namespace fs = std::filesystem;
using Catch::Approx;

namespace {

const std::string kCli = QWI_CLI_PATH;
const std::string kConfigs = QWI_CONFIG_DIR;

struct RunResult {
  int exit_code;
};

RunResult run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return {WEXITSTATUS(status)};
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "qwi_cli_tests";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> comments;
};

Csv parse_csv(const std::string& text) {
  Csv out;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      out.comments.push_back(line);
      continue;
    }
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.push_back("");
    if (first) {
      out.header = cells;
      first = false;
    } else {
      out.rows.push_back(cells);
    }
  }
  return out;
}

int column(const Csv& csv, const std::string& name) {
  for (std::size_t i = 0; i < csv.header.size(); ++i)
    if (csv.header[i] == name) return static_cast<int>(i);
  return -1;
}

}  // namespace

TEST_CASE("transmit: free particle emits T = 1 rows and a gap count") {
  const fs::path out = scratch_dir() / "free.csv";
  const auto r = run("transmit " + kConfigs + "/free.toml --out " + out.string());
  REQUIRE(r.exit_code == 0);
  const Csv csv = parse_csv(slurp(out));
  REQUIRE(csv.header ==
          std::vector<std::string>{"energy_eV", "r_re", "r_im", "R", "T",
                                   "n_regions"});
  REQUIRE(csv.rows.size() == 20);
  const int t_col = column(csv, "T");
  for (const auto& row : csv.rows) CHECK(std::stod(row[t_col]) == 1.0);
  REQUIRE(csv.comments.size() == 1);
  CHECK(csv.comments[0] == "# gaps: 0");
}

TEST_CASE("transmit: oracle column agrees with T for the rectangular barrier") {
  const fs::path out = scratch_dir() / "rect.csv";
  const auto r = run("transmit " + kConfigs + "/rect_barrier.toml --with-oracle --out " +
                     out.string());
  REQUIRE(r.exit_code == 0);
  const Csv csv = parse_csv(slurp(out));
  const int t_col = column(csv, "T");
  const int o_col = column(csv, "T_oracle");
  REQUIRE(t_col >= 0);
  REQUIRE(o_col >= 0);
  REQUIRE(csv.rows.size() == 100);
  for (const auto& row : csv.rows) {
    REQUIRE(!row[o_col].empty());
    CHECK(std::abs(std::stod(row[t_col]) - std::stod(row[o_col])) < 1e-10);
  }
}

TEST_CASE("transmit output is byte-identical across runs") {
  const fs::path a = scratch_dir() / "det_a.csv";
  const fs::path b = scratch_dir() / "det_b.csv";
  REQUIRE(run("transmit --scenario fig2 --out " + a.string()).exit_code == 0);
  REQUIRE(run("transmit --scenario fig2 --out " + b.string()).exit_code == 0);
  CHECK(slurp(a) == slurp(b));
}

TEST_CASE("bound: delta well lands on the closed form") {
  const fs::path out = scratch_dir() / "delta.csv";
  const auto r = run("bound " + kConfigs + "/delta_well.toml --out " + out.string());
  REQUIRE(r.exit_code == 0);
  const Csv csv = parse_csv(slurp(out));
  REQUIRE(csv.header ==
          std::vector<std::string>{"level", "energy_eV", "n_regions",
                                   "converged"});
  REQUIRE(csv.rows.size() == 1);
  const double e = std::stod(csv.rows[0][1]);
  const double expect = qwi::oracle::delta_well_energy(-1.0, {1.0});
  CHECK(e == Approx(expect).epsilon(1e-8));
  CHECK(csv.rows[0][3] == "true");
  // trace ladder file sits next to the main output
  const Csv trace = parse_csv(slurp(out.string() + ".trace.csv"));
  REQUIRE(trace.header ==
          std::vector<std::string>{"N", "level", "energy_eV"});
  CHECK(trace.rows.size() >= 2);
}

TEST_CASE("bound: square well matches the transcendental oracle") {
  const fs::path out = scratch_dir() / "well.csv";
  const auto r = run("bound " + kConfigs + "/square_well.toml --out " + out.string());
  REQUIRE(r.exit_code == 0);
  const Csv csv = parse_csv(slurp(out));
  const auto expect = qwi::oracle::square_well_levels(0.3, 10.0, {0.067});
  REQUIRE(csv.rows.size() == expect.size());
  for (std::size_t i = 0; i < expect.size(); ++i)
    CHECK(std::stod(csv.rows[i][1]) == Approx(expect[i]).margin(1e-6));
}

TEST_CASE("bound without a bound window exits 2") {
  const auto r = run("bound " + kConfigs + "/free.toml --out -");
  CHECK(r.exit_code == 2);
}

TEST_CASE("input errors exit 1") {
  CHECK(run("transmit /nonexistent.toml --out -").exit_code == 1);
  CHECK(run("transmit --out -").exit_code == 1);  // no config, no scenario
  CHECK(run("transmit --scenario fig9 --out -").exit_code == 1);
  CHECK(run("bogus_subcommand").exit_code == 1);
  CHECK(run("--help").exit_code == 0);

  const fs::path bad = scratch_dir() / "bad.toml";
  std::ofstream(bad) << "[material]\nm_rel = oops\n";
  CHECK(run("transmit " + bad.string() + " --out -").exit_code == 1);
}

TEST_CASE("asymmetric leads exit 2 with a message naming the fields") {
  const fs::path cfg = scratch_dir() / "asym.toml";
  std::ofstream(cfg) << "[leads]\nu_left = 0.0\nu_right = 0.5\n"
                        "[[piece]]\nx_lo = 0.0\nx_hi = 1.0\nu = 0.0\n"
                        "[sweep]\ne_min = 0.1\ne_max = 1.0\npoints = 5\n"
                        "[discretize]\nn = 2\nstrategy = \"equal_width\"\n";
  CHECK(run("transmit " + cfg.string() + " --out -").exit_code == 2);
}

TEST_CASE("profile: free particle gives flat impedance columns") {
  const fs::path out = scratch_dir() / "prof.csv";
  const auto r = run("profile " + kConfigs + "/free.toml --energy 0.8 --samples 8 --out " +
                     out.string());
  REQUIRE(r.exit_code == 0);
  const Csv csv = parse_csv(slurp(out));
  REQUIRE(csv.header ==
          std::vector<std::string>{"x_nm", "Z_re", "Z_im", "side"});
  REQUIRE(csv.rows.size() >= 3);
  const double z0 = std::stod(csv.rows[0][1]);
  for (const auto& row : csv.rows) {
    CHECK(std::stod(row[1]) == Approx(z0).epsilon(1e-12));
    CHECK(std::abs(std::stod(row[2])) < 1e-12);
    CHECK((row[3] == "L" || row[3] == "R"));
  }
}

TEST_CASE("profile at a delta keeps both one-sided rows") {
  const fs::path out = scratch_dir() / "prof_delta.csv";
  const auto r = run("profile " + kConfigs + "/delta_well.toml --energy 0.5 --samples 4 --out " +
                     out.string());
  REQUIRE(r.exit_code == 0);
  const Csv csv = parse_csv(slurp(out));
  int left_rows = 0;
  for (const auto& row : csv.rows)
    if (row[3] == "L") ++left_rows;
  CHECK(left_rows == 1);
}

TEST_CASE("converge: fig2 ladder decreases and ends at N = 1024") {
  const fs::path out = scratch_dir() / "conv.csv";
  const auto r = run("converge --scenario fig2 --out " + out.string());
  REQUIRE(r.exit_code == 0);
  const Csv csv = parse_csv(slurp(out));
  REQUIRE(csv.header ==
          std::vector<std::string>{"N", "log2_N", "eps_bar"});
  REQUIRE(csv.rows.size() == 8);  // 8, 16, ..., 1024
  CHECK(csv.rows.front()[0] == "8");
  CHECK(csv.rows.back()[0] == "1024");
  double prev = 1e9;
  for (std::size_t i = 2; i < csv.rows.size(); ++i) {  // from N = 32 on
    const double eb = std::stod(csv.rows[i][2]);
    CHECK(eb < prev);
    prev = eb;
  }
}

TEST_CASE("alpha is rejected outside fig1") {
  CHECK(run("transmit --scenario fig2 --alpha 0.25 --out -").exit_code == 1);
  CHECK(run("transmit " + kConfigs + "/free.toml --alpha 1 --out -").exit_code == 1);
}
