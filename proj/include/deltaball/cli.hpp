#pragma once
//
// Command-line front end. Every option can also be given in a JSON config
// file (--config) under the option's long name; flags override file values.
//
//   deltaball <command> [options]
//
//   dirichlet     Dirichlet catalog: n,k,lambda,zero
//   spectrum      point spectrum of H_alpha: kind,n,k,index,value,multiplicity,residual
//   eigfun        radial eigenfunction on a grid: r,value
//   figure-data   both sides of the eigenvalue equation and their intersections: kind,x,lhs,rhs
//   resolvent     R^{AB}_z applied to a mode vector: kind,n,m,k,index,re,im
//   evolve        particle (x) qubit trajectory: t,norm_plus,...,coherence_arg
//   krein-gamma   Gamma(z) (JSON by default)
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure.
//

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "deltaball/ball_laplacian.hpp"
#include "deltaball/dynamics.hpp"
#include "deltaball/eigenfunctions.hpp"
#include "deltaball/errors.hpp"
#include "deltaball/green.hpp"
#include "deltaball/krein.hpp"
#include "deltaball/spectrum.hpp"

namespace deltaball::cli {

using json = nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumerical = 2;

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Output

/// "%.17g"; the fixed format keeps repeated runs byte-identical. Negative
/// zero prints as 0.
inline std::string format_number(double v) {
  if (v == 0.0)
    v = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string json_number(double v) {
  return std::isfinite(v) ? format_number(v) : "null";
}

using Cell = std::variant<std::monostate, long long, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) { rows.push_back(std::move(row)); }
};

inline std::string cell_text(const Cell &c, bool as_json) {
  if (std::holds_alternative<std::monostate>(c))
    return as_json ? "null" : "";
  if (const auto *i = std::get_if<long long>(&c))
    return std::to_string(*i);
  if (const auto *d = std::get_if<double>(&c))
    return as_json ? json_number(*d) : format_number(*d);
  const auto &s = std::get<std::string>(c);
  return as_json ? json(s).dump() : s;
}

inline void write_csv(std::ostream &os, const Table &t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto &row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      os << (i ? "," : "") << cell_text(row[i], false);
    os << '\n';
  }
}

inline void write_json(std::ostream &os, const Table &t) {
  os << "[\n";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    os << "  {";
    for (std::size_t i = 0; i < t.columns.size(); ++i)
      os << (i ? ", " : "") << json(t.columns[i]).dump() << ": " << cell_text(t.rows[r][i], true);
    os << (r + 1 < t.rows.size() ? "},\n" : "}\n");
  }
  os << "]\n";
}

// ---------------------------------------------------------------------------
// Options

enum class Kind { number, integer, text, json_value, strength, complex, grid };

struct OptionSpec {
  const char *name;
  Kind kind;
  const char *help;
  std::set<std::string> commands;
};

inline const std::vector<std::string> &command_names() {
  static const std::vector<std::string> names{"dirichlet", "spectrum",  "eigfun",     "figure-data",
                                              "resolvent", "evolve", "krein-gamma"};
  return names;
}

inline const char *command_help(const std::string &name) {
  static const std::map<std::string, const char *> help{
      {"dirichlet", "Dirichlet catalog: n,k,lambda,zero"},
      {"spectrum", "point spectrum of H_alpha below --energy-cutoff"},
      {"eigfun", "radial eigenfunction on a grid: r,value"},
      {"figure-data", "both sides of the s-wave equation and their intersections"},
      {"resolvent", "Krein resolvent applied to a mode vector"},
      {"evolve", "particle (x) qubit trajectory on --time-grid"},
      {"krein-gamma", "Gamma(z) for --centers"},
  };
  return help.at(name);
}

inline const std::vector<OptionSpec> &option_specs() {
  static const std::set<std::string> all(command_names().begin(), command_names().end());
  static const std::vector<OptionSpec> specs{
      {"radius", Kind::number, "ball radius R > 0 (default 1)", all},
      {"alpha", Kind::strength, "strength alpha, or a JSON list with one per center",
       {"spectrum", "eigfun", "figure-data", "resolvent", "evolve"}},
      {"alpha-4pi", Kind::strength, "strength given as 4 pi alpha",
       {"spectrum", "eigfun", "figure-data", "resolvent", "evolve"}},
      {"centers", Kind::json_value, "JSON list of [x,y,z] centers (default [[0,0,0]])",
       {"resolvent", "krein-gamma"}},
      {"matrix-a", Kind::json_value, "boundary matrix A (JSON rows; entries re or [re,im])",
       {"resolvent"}},
      {"matrix-b", Kind::json_value, "boundary matrix B (JSON rows; default identity)",
       {"resolvent"}},
      {"cutoff-n", Kind::integer, "angular mode cutoff (default 8)", {"dirichlet", "resolvent"}},
      {"cutoff-k", Kind::integer, "radial mode cutoff (default 60)", {"dirichlet", "resolvent"}},
      {"z", Kind::complex, "spectral parameter \"re,im\" (default 1,0)",
       {"resolvent", "krein-gamma"}},
      {"time-grid", Kind::grid, "\"t0:t1:samples\" (default 0:100:200)", {"evolve"}},
      {"out", Kind::text, "output file (default stdout)", all},
      {"format", Kind::text, "csv or json", all},
      {"energy-cutoff", Kind::number, "largest energy listed (default 100)", {"spectrum"}},
      {"index", Kind::integer, "s-wave root index j >= 1, or 0 for the bound state (default 1)",
       {"eigfun"}},
      {"grid", Kind::grid, "radial grid \"r0:r1:samples\" with r0 > 0 (default R/100:R:100)",
       {"eigfun"}},
      {"branch", Kind::text, "positive, negative or zero (default from the sign of alpha)",
       {"figure-data"}},
      {"x-max", Kind::number, "largest abscissa (default 80/R)", {"figure-data"}},
      {"samples", Kind::integer, "curve samples (default 4000)", {"figure-data"}},
      {"input", Kind::json_value, "JSON list of [n,m,k,re] or [n,m,k,re,im] (default [[0,0,1,1]])",
       {"resolvent"}},
      {"gamma", Kind::text, "exact or catalog (default exact)", {"resolvent"}},
      {"alpha-plus", Kind::number, "strength in the + channel (default alpha)", {"evolve"}},
      {"alpha-minus", Kind::number, "strength in the - channel (default alpha)", {"evolve"}},
      {"energy-plus", Kind::number, "qubit energy E_+ (default 0)", {"evolve"}},
      {"energy-minus", Kind::number, "qubit energy E_- (default 0)", {"evolve"}},
      {"c-plus", Kind::complex, "qubit amplitude c_+ (default 1/sqrt 2)", {"evolve"}},
      {"c-minus", Kind::complex, "qubit amplitude c_- (default 1/sqrt 2)", {"evolve"}},
      {"profile-width", Kind::number, "width w of exp(-(r/w)^2) (default 0.3 R)", {"evolve"}},
      {"s-wave-count", Kind::integer, "s-wave eigenfunctions per channel (default 60)", {"evolve"}},
  };
  return specs;
}

inline const OptionSpec *find_option(const std::string &name) {
  for (const auto &s : option_specs())
    if (name == s.name)
      return &s;
  return nullptr;
}

namespace detail {

inline double parse_double(const std::string &text, const std::string &what) {
  double v = 0.0;
  const char *b = text.data();
  const char *e = b + text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(*b)))
    ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(e[-1])))
    --e;
  if (b < e && *b == '+')
    ++b;
  const auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e || b == e)
    throw ConfigError(what + ": cannot parse '" + text + "' as a number");
  if (!std::isfinite(v))
    throw ConfigError(what + ": value must be finite");
  return v;
}

inline long long parse_integer(const std::string &text, const std::string &what) {
  long long v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty())
    throw ConfigError(what + ": cannot parse '" + text + "' as an integer");
  return v;
}

// Flag text to the JSON value a config file would hold.
inline json flag_value(const OptionSpec &spec, const std::string &text) {
  const std::string what = std::string("--") + spec.name;
  switch (spec.kind) {
  case Kind::number: return parse_double(text, what);
  case Kind::integer: return parse_integer(text, what);
  case Kind::strength:
    if (!text.empty() && text.find('[') != std::string::npos) {
      try {
        return json::parse(text);
      } catch (const json::exception &e) {
        throw ConfigError(what + ": " + e.what());
      }
    }
    return parse_double(text, what);
  case Kind::json_value:
    try {
      return json::parse(text);
    } catch (const json::exception &e) {
      throw ConfigError(what + ": " + e.what());
    }
  case Kind::text:
  case Kind::complex:
  case Kind::grid: return text;
  }
  return text;
}

inline double as_number(const json &v, const std::string &key) {
  if (v.is_number()) {
    const double d = v.get<double>();
    if (!std::isfinite(d))
      throw ConfigError(key + ": value must be finite");
    return d;
  }
  if (v.is_string())
    return parse_double(v.get<std::string>(), key);
  throw ConfigError(key + ": expected a number");
}

inline long long as_integer(const json &v, const std::string &key) {
  if (v.is_number_integer())
    return v.get<long long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d == std::floor(d) && std::abs(d) < 1e15)
      return static_cast<long long>(d);
  }
  if (v.is_string())
    return parse_integer(v.get<std::string>(), key);
  throw ConfigError(key + ": expected an integer");
}

inline std::string as_text(const json &v, const std::string &key) {
  if (!v.is_string())
    throw ConfigError(key + ": expected a string");
  return v.get<std::string>();
}

inline std::vector<std::string> split(const std::string &s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep))
    out.push_back(cur);
  if (!s.empty() && s.back() == sep)
    out.emplace_back();
  return out;
}

/// "re,im", "re", a number, or [re, im].
inline cplx as_complex(const json &v, const std::string &key) {
  if (v.is_number())
    return as_number(v, key);
  if (v.is_array()) {
    if (v.size() != 2)
      throw ConfigError(key + ": complex value needs [re, im]");
    return {as_number(v[0], key), as_number(v[1], key)};
  }
  if (v.is_string()) {
    const auto parts = split(v.get<std::string>(), ',');
    if (parts.size() == 1)
      return parse_double(parts[0], key);
    if (parts.size() == 2)
      return {parse_double(parts[0], key), parse_double(parts[1], key)};
  }
  throw ConfigError(key + ": expected \"re,im\"");
}

struct Grid {
  double start = 0.0;
  double stop = 0.0;
  long long samples = 0;

  /// samples equally spaced points from start to stop inclusive.
  double at(long long i) const {
    return samples == 1 ? start : start + (stop - start) * static_cast<double>(i) / (samples - 1);
  }
};

/// "a:b:samples" or [a, b, samples].
inline Grid as_grid(const json &v, const std::string &key) {
  Grid g;
  if (v.is_array() && v.size() == 3) {
    g = {as_number(v[0], key), as_number(v[1], key), as_integer(v[2], key)};
  } else if (v.is_string()) {
    const auto parts = split(v.get<std::string>(), ':');
    if (parts.size() != 3)
      throw ConfigError(key + ": expected \"start:stop:samples\"");
    g = {parse_double(parts[0], key), parse_double(parts[1], key), parse_integer(parts[2], key)};
  } else {
    throw ConfigError(key + ": expected \"start:stop:samples\"");
  }
  if (g.samples < 1 || g.samples > 10'000'000)
    throw ConfigError(key + ": sample count must be in [1, 1e7]");
  if (g.samples > 1 && !(g.stop > g.start))
    throw ConfigError(key + ": stop must exceed start");
  return g;
}

inline Point3 as_point(const json &v, const std::string &key) {
  if (!v.is_array() || v.size() != 3)
    throw ConfigError(key + ": each center must be [x, y, z]");
  return {as_number(v[0], key), as_number(v[1], key), as_number(v[2], key)};
}

inline krein::Matrix as_matrix(const json &v, const std::string &key) {
  if (!v.is_array() || v.empty())
    throw ConfigError(key + ": expected a JSON list of rows");
  const auto n = static_cast<Eigen::Index>(v.size());
  krein::Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto &row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
      throw ConfigError(key + ": matrix must be square");
    for (Eigen::Index j = 0; j < n; ++j)
      m(i, j) = as_complex(row[static_cast<std::size_t>(j)], key);
  }
  return m;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Configuration

/// Validated run parameters. Absent optional values fall back to per-command
/// defaults.
struct RunConfig {
  std::string command;
  BallDomain domain{};
  std::optional<std::vector<double>> alphas; // in units of alpha
  std::vector<Point3> centers{Point3::Zero()};
  std::optional<krein::Matrix> matrix_a;
  std::optional<krein::Matrix> matrix_b;
  cplx z = 1.0;
  detail::Grid time_grid{0.0, 100.0, 200};
  std::string out;
  std::string format;
  double energy_cutoff = 100.0;
  long long index = 1;
  std::optional<detail::Grid> grid;
  std::string branch;
  std::optional<double> x_max;
  long long samples = 4000;
  json input = json::array({json::array({0, 0, 1, 1.0})});
  krein::GammaEvaluation gamma = krein::GammaEvaluation::exact;
  std::optional<double> alpha_plus;
  std::optional<double> alpha_minus;
  double energy_plus = 0.0;
  double energy_minus = 0.0;
  cplx c_plus = 1.0 / std::sqrt(2.0);
  cplx c_minus = 1.0 / std::sqrt(2.0);
  std::optional<double> profile_width;
  long long s_wave_count = 60;

  double radius() const { return domain.radius; }

  /// The single strength; error if absent or given per center.
  double alpha() const {
    if (!alphas)
      throw ConfigError(command + " needs --alpha or --alpha-4pi");
    if (alphas->size() != 1)
      throw ConfigError(command + " takes a single strength");
    return alphas->front();
  }
};

/// Tolerance from DELTA_BALL_TOL, or the default.
inline double tolerance_from_env() {
  const char *v = std::getenv("DELTA_BALL_TOL");
  if (v == nullptr || *v == '\0')
    return kDefaultTolerance;
  const double t = detail::parse_double(v, "DELTA_BALL_TOL");
  if (!(t > 0.0))
    throw ConfigError("DELTA_BALL_TOL must be > 0");
  return t;
}

inline RunConfig build_config(const std::string &command, const json &merged) {
  using namespace detail;
  RunConfig c;
  c.command = command;
  c.domain.tol = tolerance_from_env();
  for (auto it = merged.begin(); it != merged.end(); ++it)
    if (find_option(it.key()) == nullptr)
      throw ConfigError("unknown config key '" + it.key() + "'");

  auto has = [&](const char *k) { return merged.contains(k) && !merged.at(k).is_null(); };
  if (has("radius"))
    c.domain.radius = as_number(merged["radius"], "radius");
  if (!(c.domain.radius > 0.0))
    throw ConfigError("radius must be > 0");
  if (has("cutoff-n"))
    c.domain.n_max = static_cast<int>(as_integer(merged["cutoff-n"], "cutoff-n"));
  if (has("cutoff-k"))
    c.domain.k_max = static_cast<int>(as_integer(merged["cutoff-k"], "cutoff-k"));
  if (c.domain.n_max < 0 || c.domain.n_max > specfun::kMaxOrder)
    throw ConfigError("cutoff-n must be in [0, 60]");
  if (c.domain.k_max < 1 || c.domain.k_max > specfun::kMaxZeroIndex)
    throw ConfigError("cutoff-k must be in [1, 500]");

  if (has("alpha") && has("alpha-4pi"))
    throw ConfigError("--alpha and --alpha-4pi are mutually exclusive");
  for (const char *key : {"alpha", "alpha-4pi"}) {
    if (!has(key))
      continue;
    const double scale = std::string(key) == "alpha" ? 1.0 : 1.0 / (4.0 * pi);
    std::vector<double> a;
    const json &v = merged[key];
    if (v.is_array()) {
      if (v.empty())
        throw ConfigError(std::string(key) + ": empty strength list");
      for (const auto &x : v)
        a.push_back(as_number(x, key) * scale);
    } else {
      a.push_back(as_number(v, key) * scale);
    }
    c.alphas = std::move(a);
  }

  if (has("centers")) {
    const json &v = merged["centers"];
    if (!v.is_array() || v.empty())
      throw ConfigError("centers: expected a non-empty JSON list of [x, y, z]");
    c.centers.clear();
    for (const auto &p : v)
      c.centers.push_back(as_point(p, "centers"));
  }
  if (has("matrix-a"))
    c.matrix_a = as_matrix(merged["matrix-a"], "matrix-a");
  if (has("matrix-b"))
    c.matrix_b = as_matrix(merged["matrix-b"], "matrix-b");
  if (has("z"))
    c.z = as_complex(merged["z"], "z");
  if (has("time-grid"))
    c.time_grid = as_grid(merged["time-grid"], "time-grid");
  if (has("out"))
    c.out = as_text(merged["out"], "out");
  c.format = command == "krein-gamma" ? "json" : "csv";
  if (has("format"))
    c.format = as_text(merged["format"], "format");
  if (c.format != "csv" && c.format != "json")
    throw ConfigError("format must be csv or json");
  if (has("energy-cutoff"))
    c.energy_cutoff = as_number(merged["energy-cutoff"], "energy-cutoff");
  if (has("index"))
    c.index = as_integer(merged["index"], "index");
  if (has("grid"))
    c.grid = as_grid(merged["grid"], "grid");
  if (has("branch"))
    c.branch = as_text(merged["branch"], "branch");
  if (!c.branch.empty() && c.branch != "positive" && c.branch != "negative" && c.branch != "zero")
    throw ConfigError("branch must be positive, negative or zero");
  if (has("x-max"))
    c.x_max = as_number(merged["x-max"], "x-max");
  if (has("samples"))
    c.samples = as_integer(merged["samples"], "samples");
  if (has("input"))
    c.input = merged["input"];
  if (has("gamma")) {
    const auto g = as_text(merged["gamma"], "gamma");
    if (g == "exact")
      c.gamma = krein::GammaEvaluation::exact;
    else if (g == "catalog")
      c.gamma = krein::GammaEvaluation::catalog;
    else
      throw ConfigError("gamma must be exact or catalog");
  }
  if (has("alpha-plus"))
    c.alpha_plus = as_number(merged["alpha-plus"], "alpha-plus");
  if (has("alpha-minus"))
    c.alpha_minus = as_number(merged["alpha-minus"], "alpha-minus");
  if (has("energy-plus"))
    c.energy_plus = as_number(merged["energy-plus"], "energy-plus");
  if (has("energy-minus"))
    c.energy_minus = as_number(merged["energy-minus"], "energy-minus");
  if (has("c-plus"))
    c.c_plus = as_complex(merged["c-plus"], "c-plus");
  if (has("c-minus"))
    c.c_minus = as_complex(merged["c-minus"], "c-minus");
  if (has("profile-width"))
    c.profile_width = as_number(merged["profile-width"], "profile-width");
  if (has("s-wave-count"))
    c.s_wave_count = as_integer(merged["s-wave-count"], "s-wave-count");
  return c;
}

// ---------------------------------------------------------------------------
// Commands

namespace commands {

inline Table dirichlet(const RunConfig &c) {
  c.domain.validate();
  const ModeCatalog cat(c.domain);
  Table t{{"n", "k", "lambda", "zero"}, {}};
  for (const auto &lv : cat.levels())
    t.add({static_cast<long long>(lv.n), static_cast<long long>(lv.k), lv.eigenvalue,
           specfun::bessel_zero(lv.n, lv.k)});
  return t;
}

inline Table spectrum(const RunConfig &c) {
  if (!(c.energy_cutoff > 0.0))
    throw ConfigError("energy-cutoff must be > 0");
  Table t{{"kind", "n", "k", "index", "value", "multiplicity", "residual"}, {}};
  for (const auto &p : spectrum::full_spectrum(c.alpha(), c.radius(), c.energy_cutoff)) {
    const bool inh = p.kind == spectrum::PointKind::inherited;
    t.add({std::string(spectrum::to_string(p.kind)), inh ? Cell(static_cast<long long>(p.n)) : Cell(),
           inh ? Cell(static_cast<long long>(p.k)) : Cell(),
           p.kind == spectrum::PointKind::s_wave_root ? Cell(static_cast<long long>(p.index)) : Cell(),
           p.value, static_cast<long long>(p.multiplicity), p.residual});
  }
  return t;
}

inline Table eigfun(const RunConfig &c) {
  const double alpha = c.alpha();
  const double R = c.radius();
  eigen::RadialEigenfunction u;
  if (c.index == 0) {
    const auto b = spectrum::bound_state(alpha, R);
    if (!b)
      throw ConfigError("no bound state: alpha must be below -1/(4 pi R)");
    u = eigen::bound_state_eigenfunction(*b, alpha, R);
  } else {
    if (c.index < 0 || c.index > spectrum::kMaxRootCount)
      throw ConfigError("index must be in [0, 200]");
    const auto roots = spectrum::s_wave_roots(alpha, R, static_cast<int>(c.index));
    u = eigen::s_wave_eigenfunction(roots.back(), alpha, R);
  }
  const detail::Grid g = c.grid.value_or(detail::Grid{R / 100.0, R, 100});
  if (!(g.start > 0.0) || g.at(g.samples - 1) > R)
    throw ConfigError("grid must lie in (0, R]");
  Table t{{"r", "value"}, {}};
  for (long long i = 0; i < g.samples; ++i) {
    const double r = g.at(i);
    t.add({r, u.value(r)});
  }
  return t;
}

/// Curves of the eigenvalue equation written as lhs(x) = rhs(x):
///   positive (E = x^2):  x/(4 pi alpha) = (cos 2xR - 1)/sin 2xR
///   negative (E = -x^2): x/(4 pi alpha) = (1 - e^{2xR})/(1 + e^{2xR})
///   zero (alpha = 0):    x sin 2xR/(1 - cos 2xR) = 0
struct FigureCurves {
  spectrum::Branch branch;
  double alpha;
  double radius;

  double lhs(double x) const {
    if (branch == spectrum::Branch::zero_strength)
      return x * std::sin(2.0 * x * radius) / (1.0 - std::cos(2.0 * x * radius));
    return x / (4.0 * pi * alpha);
  }
  double rhs(double x) const {
    switch (branch) {
    case spectrum::Branch::positive:
      return (std::cos(2.0 * x * radius) - 1.0) / std::sin(2.0 * x * radius);
    case spectrum::Branch::negative: return -std::tanh(x * radius);
    case spectrum::Branch::zero_strength: return 0.0;
    }
    return 0.0;
  }
};

inline Table figure_data(const RunConfig &c) {
  const double alpha = c.alpha();
  const double R = c.radius();
  spectrum::Branch branch = spectrum::EigenvalueEquation{alpha, R}.branch();
  if (c.branch == "positive")
    branch = spectrum::Branch::positive;
  else if (c.branch == "negative")
    branch = spectrum::Branch::negative;
  else if (c.branch == "zero")
    branch = spectrum::Branch::zero_strength;
  if (branch == spectrum::Branch::zero_strength && alpha != 0.0)
    throw ConfigError("the zero branch needs alpha = 0");
  if (branch != spectrum::Branch::zero_strength && alpha == 0.0)
    throw ConfigError("alpha = 0 has only the zero branch");
  const double x_max = c.x_max.value_or(80.0 / R);
  if (!(x_max > 0.0))
    throw ConfigError("x-max must be > 0");
  if (c.samples < 1 || c.samples > 10'000'000)
    throw ConfigError("samples must be in [1, 1e7]");

  const FigureCurves f{branch, alpha, R};
  Table t{{"kind", "x", "lhs", "rhs"}, {}};
  for (long long i = 0; i < c.samples; ++i) {
    const double x = x_max * (static_cast<double>(i) + 0.5) / static_cast<double>(c.samples);
    t.add({std::string("curve"), x, f.lhs(x), f.rhs(x)});
  }
  std::vector<double> roots;
  if (branch == spectrum::Branch::negative) {
    if (auto b = spectrum::bound_state(alpha, R))
      roots.push_back(spectrum::bound_state_kappa(*b));
  } else {
    const int count = static_cast<int>(
        std::min<double>(spectrum::kMaxRootCount, std::floor(x_max * R / pi) + 2.0));
    for (const auto &p : spectrum::s_wave_roots(alpha, R, count))
      roots.push_back(std::sqrt(p.value));
  }
  for (double x : roots)
    if (x <= x_max)
      t.add({std::string("intersection"), x, f.lhs(x), f.rhs(x)});
  return t;
}

inline krein::ExtensionSpec extension_spec(const RunConfig &c) {
  const auto n = static_cast<Eigen::Index>(c.centers.size());
  if (c.matrix_a || c.matrix_b) {
    if (c.alphas)
      throw ConfigError("give either strengths or matrices, not both");
    if (!c.matrix_a)
      throw ConfigError("--matrix-b needs --matrix-a");
    const krein::Matrix B = c.matrix_b.value_or(krein::Matrix::Identity(n, n));
    if (c.matrix_a->rows() != n || B.rows() != n)
      throw ConfigError("matrix size must equal the number of centers");
    return {c.centers, *c.matrix_a, B};
  }
  if (!c.alphas)
    throw ConfigError(c.command + " needs --alpha, --alpha-4pi or --matrix-a");
  std::vector<double> a = *c.alphas;
  if (a.size() == 1)
    a.assign(c.centers.size(), a.front());
  if (a.size() != c.centers.size())
    throw ConfigError("one strength per center");
  return krein::ExtensionSpec::local(c.centers, a);
}

inline ModeCoefficients input_vector(const ModeCatalog &cat, const json &input) {
  if (!input.is_array())
    throw ConfigError("input: expected a JSON list of [n,m,k,re] or [n,m,k,re,im]");
  ModeCoefficients phi = cat.zero_coefficients();
  for (const auto &e : input) {
    if (!e.is_array() || (e.size() != 4 && e.size() != 5))
      throw ConfigError("input: each entry is [n,m,k,re] or [n,m,k,re,im]");
    const ModeIndex idx{static_cast<int>(detail::as_integer(e[0], "input")),
                        static_cast<int>(detail::as_integer(e[1], "input")),
                        static_cast<int>(detail::as_integer(e[2], "input"))};
    if (idx.n < 0 || idx.n > cat.domain().n_max || std::abs(idx.m) > idx.n || idx.k < 1 ||
        idx.k > cat.domain().k_max)
      throw ConfigError("input: mode (" + std::to_string(idx.n) + "," + std::to_string(idx.m) + "," +
                        std::to_string(idx.k) + ") outside the catalog");
    const double re = detail::as_number(e[3], "input");
    const double im = e.size() == 5 ? detail::as_number(e[4], "input") : 0.0;
    phi[cat.index_of(idx)] += cplx(re, im);
  }
  return phi;
}

inline Table resolvent(const RunConfig &c) {
  c.domain.validate();
  const auto spec = extension_spec(c);
  const auto report = krein::validate_pair(spec.A, spec.B);
  if (!report.ok)
    throw ConfigError("boundary pair rejected: " + report.message);
  const ModeCatalog cat(c.domain);
  const auto phi = input_vector(cat, c.input);
  krein::ResolventOptions opt;
  opt.gamma = c.gamma;
  const auto res = krein::krein_resolvent_apply(cat, spec, c.z, phi, opt);
  Table t{{"kind", "n", "m", "k", "index", "re", "im"}, {}};
  for (std::size_t i = 0; i < cat.size(); ++i) {
    const auto &idx = cat.mode(i).index;
    t.add({std::string("coefficient"), static_cast<long long>(idx.n), static_cast<long long>(idx.m),
           static_cast<long long>(idx.k), static_cast<long long>(i), res.result[i].real(),
           res.result[i].imag()});
  }
  for (Eigen::Index j = 0; j < res.charges.size(); ++j)
    t.add({std::string("charge"), Cell(), Cell(), Cell(), static_cast<long long>(j),
           res.charges(j).real(), res.charges(j).imag()});
  return t;
}

inline Table evolve(const RunConfig &c) {
  const double R = c.radius();
  const double base = c.alphas ? c.alpha() : 0.0;
  const dynamics::QubitCoupling coupling{c.alpha_plus.value_or(base), c.alpha_minus.value_or(base),
                                         c.energy_plus, c.energy_minus};
  const double width = c.profile_width.value_or(0.3 * R);
  if (!(width > 0.0))
    throw ConfigError("profile-width must be > 0");
  if (c.s_wave_count < 1 || c.s_wave_count > spectrum::kMaxRootCount)
    throw ConfigError("s-wave-count must be in [1, 200]");
  if (std::abs(std::norm(c.c_plus) + std::norm(c.c_minus) - 1.0) > 1e-10)
    throw ConfigError("|c-plus|^2 + |c-minus|^2 must equal 1");
  dynamics::PrepareOptions opt;
  opt.radius = R;
  opt.s_wave_count = static_cast<int>(c.s_wave_count);
  const auto state = dynamics::prepare([&](double r) { return std::exp(-(r / width) * (r / width)); },
                                       c.c_plus, c.c_minus, coupling, opt);
  Table t{{"t", "norm_plus", "norm_minus", "energy_plus", "energy_minus", "pop_plus", "pop_minus",
           "coherence_abs", "coherence_arg"},
          {}};
  for (long long i = 0; i < c.time_grid.samples; ++i) {
    const double time = c.time_grid.at(i);
    const auto o = dynamics::observables(dynamics::evolve(state, time));
    t.add({time, o.norm_plus, o.norm_minus, o.energy_plus, o.energy_minus, o.pop_plus, o.pop_minus,
           o.coherence_abs, o.coherence_arg});
  }
  return t;
}

inline void krein_gamma(const RunConfig &c, std::ostream &os) {
  const std::vector<double> zeros(c.centers.size(), 0.0);
  const auto spec = krein::ExtensionSpec::local(c.centers, zeros);
  krein::validate_spec(c.domain, spec);
  const auto g = krein::gamma_matrix(c.domain, spec, c.z);
  const auto n = g.entries.rows();
  if (c.format == "csv") {
    Table t{{"k", "j", "re", "im"}, {}};
    for (Eigen::Index k = 0; k < n; ++k)
      for (Eigen::Index j = 0; j < n; ++j)
        t.add({static_cast<long long>(k), static_cast<long long>(j), g.entries(k, j).real(),
               g.entries(k, j).imag()});
    write_csv(os, t);
    return;
  }
  auto matrix = [&](auto part) {
    std::string s = "[";
    for (Eigen::Index k = 0; k < n; ++k) {
      s += k ? ", [" : "[";
      for (Eigen::Index j = 0; j < n; ++j)
        s += (j ? ", " : "") + json_number(part(g.entries(k, j)));
      s += "]";
    }
    return s + "]";
  };
  os << "{\n";
  os << "  \"radius\": " << json_number(c.radius()) << ",\n";
  os << "  \"z\": [" << json_number(c.z.real()) << ", " << json_number(c.z.imag()) << "],\n";
  os << "  \"centers\": [";
  for (std::size_t i = 0; i < c.centers.size(); ++i) {
    const auto &p = c.centers[i];
    os << (i ? ", [" : "[") << json_number(p.x()) << ", " << json_number(p.y()) << ", "
       << json_number(p.z()) << "]";
  }
  os << "],\n";
  os << "  \"re\": " << matrix([](cplx v) { return v.real(); }) << ",\n";
  os << "  \"im\": " << matrix([](cplx v) { return v.imag(); }) << ",\n";
  os << "  \"asymmetry\": " << json_number(g.asymmetry()) << "\n";
  os << "}\n";
}

} // namespace commands

inline void execute(const RunConfig &c, std::ostream &os) {
  if (c.command == "krein-gamma") {
    commands::krein_gamma(c, os);
    return;
  }
  Table t;
  if (c.command == "dirichlet")
    t = commands::dirichlet(c);
  else if (c.command == "spectrum")
    t = commands::spectrum(c);
  else if (c.command == "eigfun")
    t = commands::eigfun(c);
  else if (c.command == "figure-data")
    t = commands::figure_data(c);
  else if (c.command == "resolvent")
    t = commands::resolvent(c);
  else if (c.command == "evolve")
    t = commands::evolve(c);
  else
    throw ConfigError("unknown command '" + c.command + "'");
  if (c.format == "json")
    write_json(os, t);
  else
    write_csv(os, t);
}

inline json read_config_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception &e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  if (!j.is_object())
    throw ConfigError("config file '" + path + "' must hold a JSON object");
  return j;
}

/// Parses argv, runs one command and writes its output to --out or `out`.
inline int run(int argc, const char *const *argv, std::ostream &out = std::cout,
               std::ostream &err = std::cerr) {
  CLI::App app{"Point interactions in a ball: spectra, Green's functions, Krein resolvents and "
               "particle-qubit dynamics",
               "deltaball"};
  app.require_subcommand(1);
  std::map<std::string, std::string> config_path;
  std::map<std::string, std::map<std::string, std::string>> values;
  std::map<std::string, CLI::App *> subs;
  for (const auto &name : command_names()) {
    auto *sub = app.add_subcommand(name, command_help(name));
    subs[name] = sub;
    sub->add_option("--config", config_path[name], "JSON config file; flags override its values");
    for (const auto &spec : option_specs())
      if (spec.commands.count(name))
        sub->add_option(std::string("--") + spec.name, values[name][spec.name], spec.help);
    auto *a = sub->get_option_no_throw("--alpha");
    auto *a4 = sub->get_option_no_throw("--alpha-4pi");
    if (a != nullptr && a4 != nullptr)
      a->excludes(a4);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    out << o.str();
    err << er.str();
    return code == 0 ? kExitOk : kExitConfig;
  }

  std::string command;
  for (const auto &[name, sub] : subs)
    if (sub->parsed())
      command = name;

  try {
    json merged = json::object();
    if (!config_path[command].empty())
      merged = read_config_file(config_path[command]);
    for (const auto &spec : option_specs()) {
      if (!spec.commands.count(command))
        continue;
      const auto *opt = subs[command]->get_option(std::string("--") + spec.name);
      if (opt->count() == 0)
        continue;
      merged[spec.name] = detail::flag_value(spec, values[command][spec.name]);
      // A strength flag replaces a strength from the file in either unit.
      if (std::string(spec.name) == "alpha")
        merged.erase("alpha-4pi");
      if (std::string(spec.name) == "alpha-4pi")
        merged.erase("alpha");
    }
    const RunConfig cfg = build_config(command, merged);
    if (cfg.out.empty() || cfg.out == "-") {
      execute(cfg, out);
    } else {
      std::ostringstream buffer;
      execute(cfg, buffer);
      std::ofstream file(cfg.out, std::ios::binary);
      if (!file)
        throw ConfigError("cannot open output file '" + cfg.out + "'");
      file << buffer.str();
      if (!file)
        throw ConfigError("failed writing '" + cfg.out + "'");
    }
    return kExitOk;
  } catch (const NumericalError &e) {
    err << "deltaball: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ConfigError &e) {
    err << "deltaball: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument &e) {
    err << "deltaball: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception &e) {
    err << "deltaball: " << e.what() << '\n';
    return kExitNumerical;
  }
}

} // namespace deltaball::cli
