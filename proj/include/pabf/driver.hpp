#ifndef PABF_DRIVER_HPP
#define PABF_DRIVER_HPP

// Run orchestration behind the command-line tool.
//
// run      one simulation; writes into the output directory
//            config.resolved        every key with its resolved value
//            trajectory.csv         time + monitored pair of replica 0
//                                   (d01,d12 for the trimer, xi1,xi2 for toys)
//            diagnostics.csv        one row per diagnostic time
//            marginals/marginals_NNNN.csv   bin,center,marginal1,marginal2
//            snapshots/{F,A,gradA}_NNNN.csv (F: current estimate, A: its
//                                   projection, gradA: grad A at bin centers)
// compare  K realizations per mode (seed + k) -> compare.csv
// project  standalone projection of a field file -> A.csv, gradA.csv
// oracle   reference free energy and mean force of a toy system

#include "pabf/config.hpp"
#include "pabf/diagnostics.hpp"
#include "pabf/helmholtz.hpp"
#include "pabf/io.hpp"
#include "pabf/langevin.hpp"
#include "pabf/oracle.hpp"
#include "pabf/systems.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace pabf {

/// A simulation failure, tagged with the step at which it happened.
class RunError : public std::runtime_error {
public:
  RunError(std::int64_t step, double time, const std::string &what)
      : std::runtime_error("run aborted at step " + std::to_string(step) + " (t = " + format_double(time) +
                           "): " + what) {}
};

inline std::string diagnostics_header() {
  return "time,var_F,var_gradA,l2_error_F,l2_error_gradA,sup_marginal1,sup_marginal2,transitions1,transitions2";
}

inline std::string to_csv(const DiagnosticsRow &r) {
  auto sup = [](const std::vector<double> &m) { return m.empty() ? NAN : sup_distance_to_uniform(m); };
  return format_double(r.time) + ',' + format_double(r.var_f) + ',' + format_double(r.var_grad_a) + ',' +
         format_double(r.l2_error_f) + ',' + format_double(r.l2_error_grad_a) + ',' +
         format_double(sup(r.marginals.first)) + ',' + format_double(sup(r.marginals.second)) + ',' +
         std::to_string(r.transitions1) + ',' + std::to_string(r.transitions2);
}

/// Steps at which diagnostics are taken: `points` equal intervals plus t = 0.
inline std::vector<std::int64_t> diagnostic_steps(std::int64_t total, int points) {
  std::vector<std::int64_t> s{0};
  for (int k = 1; k <= points; ++k) {
    const std::int64_t v = (total * k + points / 2) / points;
    if (v > s.back()) s.push_back(v);
  }
  return s;
}

/// Reference mean force: the file named in the config, else the quadrature
/// oracle for toys, else nothing.
inline std::optional<VectorField2> load_reference(const RunConfig &c) {
  if (!c.reference_file.empty()) {
    VectorField2 ref = load_vector_field(c.reference_file).field;
    if (!(ref.grid == c.grid)) throw ConfigError("reference field grid differs from the run grid");
    for (auto &v : ref.valid) v = 1;
    return ref;
  }
  if (c.system == SystemKind::trimer) return std::nullopt;
  return reference_mean_force(c.toy_system(), c.grid);
}

/// Calls fn(system) with the sampler described by the config.
template <class Fn>
decltype(auto) with_system(const RunConfig &c, Fn &&fn) {
  if (c.system == SystemKind::trimer) return fn(TrimerSystem(c.potential, c.n_particles, c.box_length));
  return fn(ToySampler(c.toy_system()));
}

/// Everything observed at one diagnostic time.
struct Observation {
  std::int64_t step = 0;
  DiagnosticsRow row;
  VectorField2 force;
  std::vector<double> counts;
  ProjectionResult projection;
  VectorField2 grad_a;
};

struct RunResult {
  std::vector<Observation> observations; // fields are dropped unless kept
  std::vector<std::array<double, 3>> trajectory;
  std::int64_t steps = 0;
  double wall_seconds = 0.0;
};

/// Runs the configured simulation and calls `observe` at every diagnostic
/// time. With `keep_fields` false only the diagnostics rows are retained.
inline RunResult simulate(const RunConfig &c, const std::function<void(const Observation &)> &observe = {},
                          bool keep_fields = false) {
  c.validate();
  const auto reference = load_reference(c);
  const auto start = std::chrono::steady_clock::now();
  return with_system(c, [&](auto system) {
    using System = decltype(system);
    AbfSimulation<System> sim(std::move(system), c.simulation(), c.replicas, c.seed);
    const std::int64_t total = c.total_steps();
    const auto schedule = diagnostic_steps(total, c.diagnostics_points);
    HysteresisCounter bond1(c.transitions_low, c.transitions_high), bond2(c.transitions_low, c.transitions_high);
    RunResult result;
    std::size_t next = 0;

    auto sample_trajectory = [&] {
      const Vec2 m = sim.system().monitored(sim.ensemble().replicas.front());
      result.trajectory.push_back({sim.time(), m.x, m.y});
      bond1.push(m.x);
      bond2.push(m.y);
    };

    auto diagnose = [&] {
      Observation o;
      o.step = sim.steps();
      o.row.time = sim.time();
      o.force = sim.mean_force();
      o.counts = sim.accumulator().counts_as_double();
      o.projection = sim.project_mean_force();
      o.grad_a = gradient_at_bins(o.projection.potential);
      if (reference) {
        std::vector<unsigned char> mask(o.force.valid.begin(), o.force.valid.end());
        try {
          o.row.l2_error_f = l2_gradient_error(o.force, *reference, mask);
          o.row.l2_error_grad_a = l2_gradient_error(o.grad_a, *reference, mask);
        } catch (const DomainError &) {
          // nothing visited yet
        }
      }
      try {
        o.row.marginals = marginal_histograms(c.grid, sim.current_xi());
      } catch (const DomainError &) {
        // every replica outside the domain
      }
      o.row.transitions1 = bond1.count();
      o.row.transitions2 = bond2.count();
      if (observe) observe(o);
      if (!keep_fields) {
        o.force = {};
        o.grad_a = {};
        o.projection = {};
        o.counts = {};
      }
      result.observations.push_back(std::move(o));
    };

    sample_trajectory();
    diagnose();
    ++next;
    for (std::int64_t s = 1; s <= total; ++s) {
      try {
        sim.advance();
      } catch (const std::exception &e) {
        throw RunError(sim.steps() + 1, sim.time(), e.what());
      }
      if (s % c.trajectory_stride == 0) sample_trajectory();
      if (next < schedule.size() && s == schedule[next]) {
        diagnose();
        ++next;
      }
    }
    result.steps = sim.steps();
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
  });
}

inline std::string numbered(const std::string &stem, std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%04zu.csv", k);
  return stem + buf;
}

struct RunSummary {
  std::int64_t steps = 0;
  double time = 0.0;
  double wall_seconds = 0.0;
  DiagnosticsRow last;
};

/// The `run` command: simulate and write every artifact into `c.output_dir`.
inline RunSummary cmd_run(const RunConfig &c) {
  namespace fs = std::filesystem;
  const fs::path dir(c.output_dir);
  fs::create_directories(dir / "marginals");
  if (c.snapshots) fs::create_directories(dir / "snapshots");
  save_file((dir / "config.resolved").string(), [&](std::ostream &o) { o << to_text(c); });

  std::ofstream diag((dir / "diagnostics.csv").string());
  if (!diag) throw ConfigError("cannot write into '" + dir.string() + "'");
  diag << diagnostics_header() << '\n';
  std::size_t index = 0;
  auto observe = [&](const Observation &o) {
    diag << to_csv(o.row) << '\n';
    if (!o.row.marginals.first.empty()) {
      save_file((dir / "marginals" / numbered("marginals", index)).string(), [&](std::ostream &out) {
        out << "bin,center,marginal1,marginal2\n";
        for (int k = 0; k < c.grid.n_bins; ++k)
          out << k << ',' << format_double(c.grid.bin_center(k)) << ',' << format_double(o.row.marginals.first[k])
              << ',' << format_double(o.row.marginals.second[k]) << '\n';
      });
    }
    if (c.snapshots) {
      save_file((dir / "snapshots" / numbered("F", index)).string(),
                [&](std::ostream &out) { write_vector_field(out, o.force, o.counts); });
      save_file((dir / "snapshots" / numbered("A", index)).string(),
                [&](std::ostream &out) { write_scalar_field(out, o.projection.potential); });
      save_file((dir / "snapshots" / numbered("gradA", index)).string(),
                [&](std::ostream &out) { write_vector_field(out, o.grad_a, o.counts); });
    }
    ++index;
  };
  const RunResult r = simulate(c, observe);
  diag.close();

  const char *names = c.system == SystemKind::trimer ? "time,d01,d12\n" : "time,xi1,xi2\n";
  save_file((dir / "trajectory.csv").string(), [&](std::ostream &out) {
    out << names;
    for (const auto &t : r.trajectory)
      out << format_double(t[0]) << ',' << format_double(t[1]) << ',' << format_double(t[2]) << '\n';
  });

  RunSummary s;
  s.steps = r.steps;
  s.time = r.observations.back().row.time;
  s.wall_seconds = r.wall_seconds;
  s.last = r.observations.back().row;
  return s;
}

struct CompareRow {
  double time = 0.0;
  BiasMode mode = BiasMode::abf;
  double var_f = 0.0;
  double var_grad_a = 0.0;
  double mean_error_f = NAN;
  double mean_error_grad_a = NAN;
};

/// K realizations per mode with seeds seed, seed + 1, ..., seed + K - 1.
/// Rows come grouped by mode, in time order.
inline std::vector<CompareRow> compare(const RunConfig &base, int realizations, const std::vector<BiasMode> &modes) {
  if (realizations < 2) throw ConfigError("compare needs at least 2 realizations");
  if (modes.empty()) throw ConfigError("compare needs at least one mode");
  std::vector<CompareRow> rows;
  for (BiasMode mode : modes) {
    std::vector<RealizationMoments> mf, mg;
    std::vector<double> err_f, err_g, times;
    for (int k = 0; k < realizations; ++k) {
      RunConfig c = base;
      c.mode = mode;
      c.seed = base.seed + static_cast<std::uint64_t>(k);
      std::size_t t = 0;
      auto observe = [&](const Observation &o) {
        if (k == 0) {
          mf.emplace_back(c.grid);
          mg.emplace_back(c.grid);
          err_f.push_back(0.0);
          err_g.push_back(0.0);
          times.push_back(o.row.time);
        }
        mf[t].add(o.force);
        mg[t].add(o.grad_a);
        err_f[t] += o.row.l2_error_f / realizations;
        err_g[t] += o.row.l2_error_grad_a / realizations;
        ++t;
      };
      try {
        simulate(c, observe);
      } catch (const std::exception &e) {
        throw std::runtime_error("realization " + std::to_string(k) + " (seed " + std::to_string(c.seed) +
                                 ") of mode " + to_string(mode) + " failed; no compare.csv written: " + e.what());
      }
    }
    for (std::size_t t = 0; t < times.size(); ++t)
      rows.push_back({times[t], mode, mf[t].variance().total(), mg[t].variance().total(), err_f[t], err_g[t]});
  }
  return rows;
}

inline void write_compare(std::ostream &out, const std::vector<CompareRow> &rows) {
  out << "time,mode,var_F,var_gradA,mean_error_F,mean_error_gradA\n";
  for (const auto &r : rows)
    out << format_double(r.time) << ',' << to_string(r.mode) << ',' << format_double(r.var_f) << ','
        << format_double(r.var_grad_a) << ',' << format_double(r.mean_error_f) << ','
        << format_double(r.mean_error_grad_a) << '\n';
}

struct ProjectReport {
  double residual = 0.0;
  double norm2_f = 0.0;        ///< |F|^2
  double norm2_grad_a = 0.0;   ///< |grad A|^2
  double norm2_remainder = 0.0; ///< |F - grad A|^2
};

/// The `project` command. Unvisited bins (count 0) enter as F = 0. With
/// `weighted`, the counts define the weight.
inline ProjectReport cmd_project(const std::string &input, const std::string &out_dir, bool weighted,
                                 ProjectionOptions options = {}) {
  namespace fs = std::filesystem;
  FieldFile in = load_vector_field(input);
  for (std::size_t k = 0; k < in.field.size(); ++k)
    if (!in.field.is_valid(k)) in.field.values[k] = {};
  const HelmholtzProjector projector(in.field.grid, options);
  std::optional<WeightField> phi;
  if (weighted) phi = WeightField::from_counts(in.field.grid, in.counts);
  const ProjectionResult res = projector.solve(in.field, phi ? &*phi : nullptr);
  const VectorField2 grad = gradient_at_bins(res.potential);

  fs::create_directories(out_dir);
  save_file((fs::path(out_dir) / "A.csv").string(), [&](std::ostream &o) { write_scalar_field(o, res.potential); });
  save_file((fs::path(out_dir) / "gradA.csv").string(),
            [&](std::ostream &o) { write_vector_field(o, grad, in.counts); });

  // Norms on the Gauss-point embedding, where F = grad A + R is orthogonal.
  const WeightField *w = phi ? &*phi : nullptr;
  const QuadratureField fq = QuadratureField::from_bins(in.field);
  const QuadratureField gq = gradient_at_quadrature(res.potential);
  ProjectReport r;
  r.residual = res.residual;
  r.norm2_f = weighted_norm2(fq, w);
  r.norm2_grad_a = weighted_norm2(gq, w);
  r.norm2_remainder = weighted_norm2(fq - gq, w);
  return r;
}

/// The `oracle` command: reference_A.csv and reference_F.csv for a toy system.
inline void cmd_oracle(const RunConfig &c, const std::string &out_dir) {
  namespace fs = std::filesystem;
  if (c.system == SystemKind::trimer)
    throw ConfigError("no quadrature reference for the trimer; use a long run's gradA snapshot instead");
  fs::create_directories(out_dir);
  const ToySystem toy = c.toy_system();
  save_file((fs::path(out_dir) / "reference_A.csv").string(),
            [&](std::ostream &o) { write_scalar_field(o, reference_free_energy(toy, c.grid)); });
  save_file((fs::path(out_dir) / "reference_F.csv").string(),
            [&](std::ostream &o) { write_vector_field(o, reference_mean_force(toy, c.grid)); });
}

} // namespace pabf

#endif // PABF_DRIVER_HPP
