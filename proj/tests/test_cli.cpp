#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "deltaball/cli.hpp"

using namespace deltaball;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "deltaball");
  std::vector<const char *> argv;
  for (const auto &a : args)
    argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::vector<std::string>> parse_csv(const std::string &text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ','))
      cells.push_back(cell);
    if (!line.empty() && line.back() == ',')
      cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

std::string read_file(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path temp_dir() {
  const auto dir = fs::temp_directory_path() / ("deltaball_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path &p, const std::string &text) {
  std::ofstream out(p);
  out << text;
}

} // namespace

TEST(Cli, SpectrumAtZeroStrength) {
  const auto r = run_cli({"spectrum", "--alpha", "0", "--radius", "1", "--energy-cutoff", "300"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_FALSE(rows.empty());
  EXPECT_EQ(rows[0], (std::vector<std::string>{"kind", "n", "k", "index", "value", "multiplicity",
                                               "residual"}));
  int j = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    ASSERT_EQ(rows[i].size(), 7u);
    if (rows[i][0] != "s_wave_root")
      continue;
    ++j;
    EXPECT_EQ(std::stoi(rows[i][3]), j);
    const double expect = std::pow((2 * j - 1) * pi / 2.0, 2);
    EXPECT_NEAR(std::stod(rows[i][4]), expect, 1e-12 * expect);
  }
  EXPECT_EQ(j, 6);
}

TEST(Cli, FigureDataMatchesRoots) {
  const auto r = run_cli({"figure-data", "--alpha-4pi", "0.2", "--radius", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"kind", "x", "lhs", "rhs"}));
  std::vector<double> xs;
  for (const auto &row : rows)
    if (row[0] == "intersection")
      xs.push_back(std::stod(row[1]));
  const auto roots = spectrum::s_wave_roots(0.2 / (4.0 * pi), 1.0, static_cast<int>(xs.size()));
  ASSERT_GE(xs.size(), 25u);
  for (std::size_t i = 0; i < xs.size(); ++i)
    EXPECT_NEAR(xs[i], std::sqrt(roots[i].value), 1e-9);
}

TEST(Cli, FigureDataBranches) {
  auto r = run_cli({"figure-data", "--alpha-4pi", "-2", "--samples", "10"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto rows = parse_csv(r.out);
  int n = 0;
  for (const auto &row : rows)
    if (row[0] == "intersection") {
      ++n;
      EXPECT_NEAR(std::stod(row[1]), spectrum::bound_state_kappa(*spectrum::bound_state(-2.0 / (4 * pi), 1.0)), 1e-12);
      EXPECT_NEAR(std::stod(row[2]), std::stod(row[3]), 1e-12);
    }
  EXPECT_EQ(n, 1);

  r = run_cli({"figure-data", "--alpha", "0", "--x-max", "20"});
  ASSERT_EQ(r.code, 0) << r.err;
  rows = parse_csv(r.out);
  n = 0;
  for (const auto &row : rows)
    if (row[0] == "intersection") {
      ++n;
      EXPECT_NEAR(std::stod(row[1]), (2 * n - 1) * pi / 2.0, 1e-12);
      EXPECT_NEAR(std::stod(row[2]), 0.0, 1e-12);
    }
  EXPECT_EQ(n, 6);
  EXPECT_EQ(run_cli({"figure-data", "--alpha", "0.1", "--branch", "zero"}).code, 1);
}

TEST(Cli, EvolveEqualStrengthsConstantCoherence) {
  const auto r = run_cli({"evolve", "--alpha", "0.2", "--time-grid", "0:20:41"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 42u);
  EXPECT_EQ(rows[0].back(), "coherence_arg");
  const double c0 = std::stod(rows[1][7]);
  for (std::size_t i = 1; i < rows.size(); ++i)
    EXPECT_NEAR(std::stod(rows[i][7]), c0, 1e-10);
}

TEST(Cli, DeterministicOutputFiles) {
  const auto dir = temp_dir();
  for (const auto &cmd : std::vector<std::vector<std::string>>{
           {"spectrum", "--alpha", "-0.3", "--energy-cutoff", "200"},
           {"evolve", "--alpha-plus", "1", "--alpha-minus", "-0.5", "--time-grid", "0:5:11"},
           {"krein-gamma", "--centers", "[[0.1,0,0],[0,0.4,0.2]]", "--z", "3,1"}}) {
    auto a = cmd, b = cmd;
    a.insert(a.end(), {"--out", (dir / "a.out").string()});
    b.insert(b.end(), {"--out", (dir / "b.out").string()});
    ASSERT_EQ(run_cli(a).code, 0);
    ASSERT_EQ(run_cli(b).code, 0);
    const auto ta = read_file(dir / "a.out");
    EXPECT_FALSE(ta.empty());
    EXPECT_EQ(ta, read_file(dir / "b.out"));
  }
  fs::remove_all(dir);
}

TEST(Cli, SeventeenSignificantDigits) {
  const auto r = run_cli({"dirichlet", "--cutoff-n", "0", "--cutoff-k", "1"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "n,k,lambda,zero\n0,1,9.869604401089358,3.1415926535897931\n");
}

TEST(Cli, ConfigFileMatchesFlagsAndFlagsOverride) {
  const auto dir = temp_dir();
  write_file(dir / "cfg.json", R"({"radius": 1.5, "alpha-4pi": -2.0, "energy-cutoff": 40,
                                   "format": "csv", "z": "9,9"})");
  const auto from_file = run_cli({"spectrum", "--config", (dir / "cfg.json").string()});
  const auto from_flags =
      run_cli({"spectrum", "--radius", "1.5", "--alpha-4pi", "-2", "--energy-cutoff", "40"});
  ASSERT_EQ(from_file.code, 0) << from_file.err;
  EXPECT_EQ(from_file.out, from_flags.out);
  const auto overridden =
      run_cli({"spectrum", "--config", (dir / "cfg.json").string(), "--radius", "1"});
  EXPECT_EQ(overridden.out,
            run_cli({"spectrum", "--radius", "1", "--alpha-4pi", "-2", "--energy-cutoff", "40"}).out);
  // A strength flag in the other unit replaces the file's strength.
  const auto other_unit =
      run_cli({"spectrum", "--config", (dir / "cfg.json").string(), "--alpha", "0.1"});
  EXPECT_EQ(other_unit.code, 0) << other_unit.err;
  EXPECT_EQ(other_unit.out,
            run_cli({"spectrum", "--radius", "1.5", "--alpha", "0.1", "--energy-cutoff", "40"}).out);
  fs::remove_all(dir);
}

TEST(Cli, EveryOptionHasConfigEquivalent) {
  const auto dir = temp_dir();
  write_file(dir / "evolve.json", R"({"radius": 1, "alpha": 0.1, "alpha-plus": 0.5,
      "alpha-minus": -0.4, "energy-plus": 0.2, "energy-minus": -0.1, "c-plus": [0.6, 0],
      "c-minus": "0,0.8", "profile-width": 0.25, "s-wave-count": 50, "time-grid": [0, 2, 5],
      "format": "json"})");
  const auto a = run_cli({"evolve", "--config", (dir / "evolve.json").string()});
  const auto b = run_cli({"evolve", "--radius", "1", "--alpha", "0.1", "--alpha-plus", "0.5",
                          "--alpha-minus", "-0.4", "--energy-plus", "0.2", "--energy-minus",
                          "-0.1", "--c-plus", "0.6,0", "--c-minus", "0,0.8", "--profile-width",
                          "0.25", "--s-wave-count", "50", "--time-grid", "0:2:5", "--format",
                          "json"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_TRUE(cli::json::accept(a.out));

  write_file(dir / "res.json", R"({"radius": 1, "centers": [[0,0,0],[0.3,0.1,0]],
      "matrix-a": [[0.2, [0.1, 0.05]], [[0.1, -0.05], -0.3]], "matrix-b": [[1,0],[0,1]],
      "cutoff-n": 3, "cutoff-k": 10, "z": [2, 0.5], "input": [[0,0,1,1],[1,0,2,0.5,0.5]],
      "gamma": "catalog"})");
  const auto c = run_cli({"resolvent", "--config", (dir / "res.json").string()});
  const auto d = run_cli({"resolvent", "--radius", "1", "--centers", "[[0,0,0],[0.3,0.1,0]]",
                          "--matrix-a", "[[0.2,[0.1,0.05]],[[0.1,-0.05],-0.3]]", "--matrix-b",
                          "[[1,0],[0,1]]", "--cutoff-n", "3", "--cutoff-k", "10", "--z", "2,0.5",
                          "--input", "[[0,0,1,1],[1,0,2,0.5,0.5]]", "--gamma", "catalog"});
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_EQ(c.out, d.out);

  for (const auto &spec : cli::option_specs())
    EXPECT_NO_THROW((void)cli::find_option(spec.name));
  fs::remove_all(dir);
}

TEST(Cli, ResolventOutputLayout) {
  const auto r = run_cli({"resolvent", "--alpha", "0.1", "--cutoff-n", "2", "--cutoff-k", "4",
                          "--centers", "[[0,0,0],[0.2,0.2,0]]"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"kind", "n", "m", "k", "index", "re", "im"}));
  int coeffs = 0, charges = 0;
  for (std::size_t i = 1; i < rows.size(); ++i)
    (rows[i][0] == "coefficient" ? coeffs : charges)++;
  EXPECT_EQ(coeffs, 9 * 4);
  EXPECT_EQ(charges, 2);
}

TEST(Cli, KreinGammaJson) {
  const auto r = run_cli({"krein-gamma", "--z", "1,0"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = cli::json::parse(r.out);
  const double expect = 2.0 / (4.0 * pi * (std::exp(2.0) - 1.0)) + 1.0 / (4.0 * pi);
  EXPECT_NEAR(j["re"][0][0].get<double>(), expect, 1e-15);
  EXPECT_EQ(j["im"][0][0].get<double>(), 0.0);
  const auto csv = run_cli({"krein-gamma", "--format", "csv", "--centers", "[[0,0,0],[0.5,0,0]]"});
  EXPECT_EQ(parse_csv(csv.out).size(), 5u);
}

TEST(Cli, ConfigErrorsExitOne) {
  EXPECT_EQ(run_cli({"spectrum", "--alpha", "1", "--alpha-4pi", "2"}).code, 1);
  EXPECT_EQ(run_cli({"spectrum", "--alpha", "abc"}).code, 1);
  EXPECT_EQ(run_cli({"spectrum", "--alpha", "0", "--radius", "-1"}).code, 1);
  EXPECT_EQ(run_cli({"spectrum"}).code, 1);
  EXPECT_EQ(run_cli({"resolvent", "--alpha", "0", "--z", "1;2"}).code, 1);
  EXPECT_EQ(run_cli({"evolve", "--time-grid", "0:1"}).code, 1);
  EXPECT_EQ(run_cli({"nosuch"}).code, 1);
  EXPECT_EQ(run_cli({}).code, 1);
  EXPECT_EQ(run_cli({"dirichlet", "--format", "xml"}).code, 1);
  EXPECT_EQ(run_cli({"resolvent", "--matrix-a", "[[0]]", "--matrix-b", "[[0]]"}).code, 1);
  EXPECT_EQ(run_cli({"dirichlet", "--config", "/nonexistent/cfg.json"}).code, 1);
  const auto dir = temp_dir();
  write_file(dir / "bad.json", R"({"radius": 1, "typo": 3})");
  const auto r = run_cli({"dirichlet", "--config", (dir / "bad.json").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("typo"), std::string::npos);
  write_file(dir / "both.json", R"({"alpha": 1, "alpha-4pi": 2})");
  EXPECT_EQ(run_cli({"spectrum", "--config", (dir / "both.json").string()}).code, 1);
  fs::remove_all(dir);
}

TEST(Cli, HelpExitsZero) {
  const auto r = run_cli({"spectrum", "--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("--alpha-4pi"), std::string::npos);
}

TEST(Cli, NumericalErrorsExitTwoWithModuleMessage) {
  const auto r = run_cli({"resolvent", "--alpha", "0", "--z", "-9.869604401089358,0", "--cutoff-n",
                          "2", "--cutoff-k", "5"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("spectral-collision"), std::string::npos) << r.err;
  const auto e = run_cli({"evolve", "--alpha", "0.1", "--s-wave-count", "1"});
  EXPECT_EQ(e.code, 2);
  EXPECT_NE(e.err.find("insufficient-cutoff"), std::string::npos) << e.err;
}

TEST(Cli, ToleranceFromEnvironment) {
  const std::vector<std::string> near{"resolvent", "--alpha", "0", "--z", "-9.86,0",
                                      "--cutoff-n", "1", "--cutoff-k", "3"};
  ::unsetenv("DELTA_BALL_TOL");
  EXPECT_EQ(run_cli(near).code, 0);
  ::setenv("DELTA_BALL_TOL", "0.1", 1);
  const auto r = run_cli(near);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("spectral-collision"), std::string::npos);
  ::setenv("DELTA_BALL_TOL", "nope", 1);
  EXPECT_EQ(run_cli(near).code, 1);
  ::setenv("DELTA_BALL_TOL", "-1", 1);
  EXPECT_EQ(run_cli(near).code, 1);
  ::unsetenv("DELTA_BALL_TOL");
}

TEST(Cli, EigfunProfiles) {
  auto r = run_cli({"eigfun", "--alpha", "0.1", "--index", "2", "--grid", "0.25:1:4"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"r", "value"}));
  const auto u = eigen::s_wave_eigenfunction(spectrum::s_wave_roots(0.1, 1.0, 2)[1], 0.1, 1.0);
  EXPECT_EQ(std::stod(rows[2][1]), u.value(0.5));
  EXPECT_EQ(rows[4][1], "0");
  r = run_cli({"eigfun", "--alpha-4pi", "-2", "--index", "0"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(run_cli({"eigfun", "--alpha", "0.1", "--index", "0"}).code, 1);
  EXPECT_EQ(run_cli({"eigfun", "--alpha", "0.1", "--grid", "0:1:3"}).code, 1);
}
