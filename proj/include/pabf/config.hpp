#ifndef PABF_CONFIG_HPP
#define PABF_CONFIG_HPP

// Run configuration: a flat text file of `key = value` lines. `#` starts a
// comment, blank lines are ignored, keys carry a section prefix
// (`run.dt`, `grid.n_bins`, ...). `system` is applied first and selects the
// defaults for every key that the file leaves out.

#include "pabf/core.hpp"
#include "pabf/grid.hpp"
#include "pabf/helmholtz.hpp"
#include "pabf/langevin.hpp"
#include "pabf/potentials.hpp"
#include "pabf/toy.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace pabf {

enum class SystemKind { trimer, toy_a, toy_b };

inline std::string to_string(SystemKind s) {
  switch (s) {
  case SystemKind::trimer: return "trimer";
  case SystemKind::toy_a: return "toy_a";
  case SystemKind::toy_b: return "toy_b";
  }
  return "?";
}

inline std::string to_string(Boundary b) { return b == Boundary::periodic ? "periodic" : "neumann"; }

inline std::string to_string(LinearSolver s) { return s == LinearSolver::direct ? "direct" : "cg"; }

/// Shortest decimal string that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct RunConfig {
  SystemKind system = SystemKind::trimer;
  BiasMode mode = BiasMode::pabf;
  std::uint64_t seed = 1;
  double beta = 1.0;

  double dt = 2.5e-4;
  double total_time = 1.0;
  std::size_t replicas = 100;

  std::size_t n_particles = 100;
  double box_length = 15.0;
  PairPotentialParams potential;

  ToySystem toy;

  Grid2 grid;
  double wall_stiffness = 1000.0;

  int projection_stride = 10;
  bool weighted = false;
  LinearSolver solver = LinearSolver::direct;
  double solver_tolerance = 1e-12;

  /// Number of equally spaced diagnostic times after t = 0.
  int diagnostics_points = 20;
  /// Steps between samples of the monitored distances of replica 0.
  int trajectory_stride = 40;
  bool snapshots = true;
  double transitions_low = 0.0;
  double transitions_high = 0.0;

  /// Optional reference mean force (field CSV) for the error columns.
  std::string reference_file;
  std::string output_dir = "out";

  std::int64_t total_steps() const { return std::llround(total_time / dt); }

  DynamicsParams dynamics() const {
    DynamicsParams d;
    d.beta = beta;
    d.dt = dt;
    d.mode = mode;
    d.wall_stiffness = wall_stiffness;
    return d;
  }

  SimulationParams simulation() const {
    SimulationParams p;
    p.dynamics = dynamics();
    p.grid = grid;
    p.projection_stride = projection_stride;
    p.weighted = weighted;
    p.projection.solver = solver;
    p.projection.cg_tolerance = solver_tolerance;
    return p;
  }

  ToySystem toy_system() const {
    ToySystem t = toy;
    t.kind = system == SystemKind::toy_b ? ToyKind::toy_b : ToyKind::toy_a;
    t.beta = beta;
    return t;
  }

  void validate() const;
};

inline RunConfig defaults_for(SystemKind system) {
  RunConfig c;
  c.system = system;
  if (system == SystemKind::trimer) {
    c.grid = Grid2(-0.2, 1.2, 50);
    c.transitions_low = c.potential.d1 + 0.5 * c.potential.omega;
    c.transitions_high = c.potential.d1 + 1.5 * c.potential.omega;
    return c;
  }
  c.dt = 5e-4;
  c.replicas = 32;
  c.n_particles = 0;
  c.box_length = 0.0;
  c.trajectory_stride = 10;
  c.transitions_low = 0.375;
  c.transitions_high = 0.625;
  c.grid = system == SystemKind::toy_a ? Grid2(0.0, 1.0, 32, Boundary::periodic) : Grid2(0.0, 1.0, 32);
  return c;
}

inline void RunConfig::validate() const {
  auto positive = [](double v, const char *key) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(key) + " must be positive");
  };
  positive(beta, "beta");
  positive(dt, "run.dt");
  if (!(total_time >= 0.0) || !std::isfinite(total_time)) throw ConfigError("run.total_time must be >= 0");
  if (replicas < 1) throw ConfigError("run.replicas must be at least 1");
  if (!(grid.xi_max > grid.xi_min)) throw ConfigError("grid.xi_max must exceed grid.xi_min");
  if (grid.n_bins < 2) throw ConfigError("grid.n_bins must be at least 2");
  if (!(wall_stiffness >= 0.0)) throw ConfigError("confinement.stiffness must be >= 0");
  if (projection_stride < 1) throw ConfigError("projection.stride must be at least 1");
  positive(solver_tolerance, "projection.tolerance");
  if (diagnostics_points < 1) throw ConfigError("diagnostics.points must be at least 1");
  if (trajectory_stride < 1) throw ConfigError("diagnostics.trajectory_stride must be at least 1");
  if (!(transitions_low < transitions_high)) throw ConfigError("transitions.low must be below transitions.high");

  if (system == SystemKind::trimer) {
    if (n_particles < 3) throw ConfigError("trimer.n_particles must be at least 3");
    positive(box_length, "trimer.box_length");
    if (grid.periodic()) throw ConfigError("the trimer coordinate is not periodic: use grid.boundary = neumann");
    try {
      potential.validate();
    } catch (const DomainError &e) {
      throw ConfigError(std::string("potential: ") + e.what());
    }
    if (!(potential.epsilon_prime > 0.0)) throw ConfigError("potential.epsilon_prime must be positive");
  } else {
    try {
      toy_system().validate();
    } catch (const DomainError &e) {
      throw ConfigError(std::string("toy: ") + e.what());
    }
    if (system == SystemKind::toy_a) {
      if (!grid.periodic()) throw ConfigError("toy_a lives on the torus: use grid.boundary = periodic");
      if (std::abs(grid.length() - 1.0) > 1e-12) throw ConfigError("toy_a needs a grid of period 1");
    } else if (grid.periodic()) {
      throw ConfigError("toy_b has a non-periodic coordinate: use grid.boundary = neumann");
    }
  }
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct ConfigEntry {
  std::string value;
  int line = 0;
};

inline ConfigError config_error(const std::string &origin, int line, const std::string &msg) {
  return ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
}

template <class T>
T parse_number(const std::string &origin, const std::string &key, const ConfigEntry &e) {
  T v{};
  const char *first = e.value.data(), *last = e.value.data() + e.value.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw config_error(origin, e.line, "key '" + key + "': cannot parse '" + e.value + "' as a number");
  return v;
}

inline bool parse_bool(const std::string &origin, const std::string &key, const ConfigEntry &e) {
  if (e.value == "true" || e.value == "1") return true;
  if (e.value == "false" || e.value == "0") return false;
  throw config_error(origin, e.line, "key '" + key + "': expected true or false, got '" + e.value + "'");
}

} // namespace detail

inline BiasMode parse_mode(const std::string &s) {
  if (s == "none") return BiasMode::none;
  if (s == "abf") return BiasMode::abf;
  if (s == "pabf") return BiasMode::pabf;
  throw ConfigError("unknown mode '" + s + "' (expected none, abf or pabf)");
}

/// Parses configuration text; `origin` names the source in error messages.
inline RunConfig parse_config(const std::string &text, const std::string &origin = "config") {
  using detail::ConfigEntry;
  std::map<std::string, ConfigEntry> entries;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string content = detail::trim(std::string_view(raw).substr(0, hash));
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) throw detail::config_error(origin, line, "expected 'key = value'");
    const std::string key = detail::trim(std::string_view(content).substr(0, eq));
    const std::string value = detail::trim(std::string_view(content).substr(eq + 1));
    if (key.empty()) throw detail::config_error(origin, line, "missing key");
    if (value.empty()) throw detail::config_error(origin, line, "key '" + key + "' has no value");
    if (entries.contains(key))
      throw detail::config_error(origin, line, "key '" + key + "' repeated (first on line " +
                                                   std::to_string(entries[key].line) + ")");
    entries[key] = {value, line};
  }

  SystemKind system = SystemKind::trimer;
  if (auto it = entries.find("system"); it != entries.end()) {
    const std::string &v = it->second.value;
    if (v == "trimer") system = SystemKind::trimer;
    else if (v == "toy_a") system = SystemKind::toy_a;
    else if (v == "toy_b") system = SystemKind::toy_b;
    else throw detail::config_error(origin, it->second.line, "unknown system '" + v + "' (expected trimer, toy_a or toy_b)");
    entries.erase(it);
  }
  RunConfig c = defaults_for(system);

  using Setter = std::function<void(const std::string &, const ConfigEntry &)>;
  auto num = [&](double &target) -> Setter {
    return [&origin, &target](const std::string &k, const ConfigEntry &e) { target = detail::parse_number<double>(origin, k, e); };
  };
  auto integer = [&](int &target) -> Setter {
    return [&origin, &target](const std::string &k, const ConfigEntry &e) { target = detail::parse_number<int>(origin, k, e); };
  };
  auto size = [&](std::size_t &target) -> Setter {
    return [&origin, &target](const std::string &k, const ConfigEntry &e) { target = detail::parse_number<std::size_t>(origin, k, e); };
  };
  auto flag = [&](bool &target) -> Setter {
    return [&origin, &target](const std::string &k, const ConfigEntry &e) { target = detail::parse_bool(origin, k, e); };
  };
  auto text_value = [](std::string &target) -> Setter {
    return [&target](const std::string &, const ConfigEntry &e) { target = e.value; };
  };

  const std::map<std::string, Setter> setters{
      {"mode", [&](const std::string &, const ConfigEntry &e) {
         try {
           c.mode = parse_mode(e.value);
         } catch (const ConfigError &err) {
           throw detail::config_error(origin, e.line, err.what());
         }
       }},
      {"seed", [&](const std::string &k, const ConfigEntry &e) { c.seed = detail::parse_number<std::uint64_t>(origin, k, e); }},
      {"beta", num(c.beta)},
      {"run.dt", num(c.dt)},
      {"run.total_time", num(c.total_time)},
      {"run.replicas", size(c.replicas)},
      {"trimer.n_particles", size(c.n_particles)},
      {"trimer.box_length", num(c.box_length)},
      {"potential.sigma", num(c.potential.sigma)},
      {"potential.epsilon", num(c.potential.epsilon)},
      {"potential.sigma_prime", num(c.potential.sigma_prime)},
      {"potential.epsilon_prime", num(c.potential.epsilon_prime)},
      {"potential.d1", num(c.potential.d1)},
      {"potential.omega", num(c.potential.omega)},
      {"potential.h", num(c.potential.h)},
      {"potential.k_theta", num(c.potential.k_theta)},
      {"potential.cos_theta0", num(c.potential.cos_theta0)},
      {"toy.h", num(c.toy.h)},
      {"toy.kappa", num(c.toy.kappa)},
      {"toy.a", num(c.toy.a)},
      {"toy.c", num(c.toy.c)},
      {"grid.xi_min", num(c.grid.xi_min)},
      {"grid.xi_max", num(c.grid.xi_max)},
      {"grid.n_bins", integer(c.grid.n_bins)},
      {"grid.boundary", [&](const std::string &, const ConfigEntry &e) {
         if (e.value == "neumann") c.grid.boundary = Boundary::neumann;
         else if (e.value == "periodic") c.grid.boundary = Boundary::periodic;
         else throw detail::config_error(origin, e.line, "grid.boundary must be neumann or periodic");
       }},
      {"confinement.stiffness", num(c.wall_stiffness)},
      {"projection.stride", integer(c.projection_stride)},
      {"projection.weighted", flag(c.weighted)},
      {"projection.solver", [&](const std::string &, const ConfigEntry &e) {
         if (e.value == "direct") c.solver = LinearSolver::direct;
         else if (e.value == "cg") c.solver = LinearSolver::conjugate_gradient;
         else throw detail::config_error(origin, e.line, "projection.solver must be direct or cg");
       }},
      {"projection.tolerance", num(c.solver_tolerance)},
      {"diagnostics.points", integer(c.diagnostics_points)},
      {"diagnostics.trajectory_stride", integer(c.trajectory_stride)},
      {"diagnostics.snapshots", flag(c.snapshots)},
      {"transitions.low", num(c.transitions_low)},
      {"transitions.high", num(c.transitions_high)},
      {"reference.file", text_value(c.reference_file)},
      {"output.dir", text_value(c.output_dir)},
  };

  for (const auto &[key, entry] : entries) {
    auto it = setters.find(key);
    if (it == setters.end()) throw detail::config_error(origin, entry.line, "unknown key '" + key + "'");
    it->second(key, entry);
  }
  c.validate();
  return c;
}

inline RunConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

/// Every key with its resolved value, in the file format.
inline std::string to_text(const RunConfig &c) {
  std::ostringstream o;
  auto put = [&](const char *k, const std::string &v) { o << k << " = " << v << '\n'; };
  auto num = [&](const char *k, double v) { put(k, format_double(v)); };
  put("system", to_string(c.system));
  put("mode", to_string(c.mode));
  put("seed", std::to_string(c.seed));
  num("beta", c.beta);
  num("run.dt", c.dt);
  num("run.total_time", c.total_time);
  put("run.replicas", std::to_string(c.replicas));
  if (c.system == SystemKind::trimer) {
    put("trimer.n_particles", std::to_string(c.n_particles));
    num("trimer.box_length", c.box_length);
    num("potential.sigma", c.potential.sigma);
    num("potential.epsilon", c.potential.epsilon);
    num("potential.sigma_prime", c.potential.sigma_prime);
    num("potential.epsilon_prime", c.potential.epsilon_prime);
    num("potential.d1", c.potential.d1);
    num("potential.omega", c.potential.omega);
    num("potential.h", c.potential.h);
    num("potential.k_theta", c.potential.k_theta);
    num("potential.cos_theta0", c.potential.cos_theta0);
  } else {
    num("toy.h", c.toy.h);
    num("toy.kappa", c.toy.kappa);
    if (c.system == SystemKind::toy_b) {
      num("toy.a", c.toy.a);
      num("toy.c", c.toy.c);
    }
  }
  num("grid.xi_min", c.grid.xi_min);
  num("grid.xi_max", c.grid.xi_max);
  put("grid.n_bins", std::to_string(c.grid.n_bins));
  put("grid.boundary", to_string(c.grid.boundary));
  num("confinement.stiffness", c.wall_stiffness);
  put("projection.stride", std::to_string(c.projection_stride));
  put("projection.weighted", c.weighted ? "true" : "false");
  put("projection.solver", to_string(c.solver));
  num("projection.tolerance", c.solver_tolerance);
  put("diagnostics.points", std::to_string(c.diagnostics_points));
  put("diagnostics.trajectory_stride", std::to_string(c.trajectory_stride));
  put("diagnostics.snapshots", c.snapshots ? "true" : "false");
  num("transitions.low", c.transitions_low);
  num("transitions.high", c.transitions_high);
  if (!c.reference_file.empty()) put("reference.file", c.reference_file);
  put("output.dir", c.output_dir);
  return o.str();
}

} // namespace pabf

#endif // PABF_CONFIG_HPP
