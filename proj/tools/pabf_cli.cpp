// Command-line front end. Exit status: 0 success, 2 bad configuration or
// input file, 3 failure during a run.

#include "pabf/config.hpp"
#include "pabf/driver.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

using namespace pabf;

namespace {

struct Overrides {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> modes;
};

RunConfig resolve(const Overrides &o, bool single_mode) {
  RunConfig c = load_config(o.config);
  if (!o.out.empty()) c.output_dir = o.out;
  if (o.seed) c.seed = *o.seed;
  if (single_mode && !o.modes.empty()) {
    if (o.modes.size() > 1) throw ConfigError("run takes a single --mode");
    c.mode = parse_mode(o.modes.front());
  }
  c.validate();
  return c;
}

void print_error_line(const char *label, double v) {
  if (std::isfinite(v)) std::printf("  %-22s %s\n", label, format_double(v).c_str());
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Adaptive biasing force sampler with Helmholtz-projected bias"};
  app.require_subcommand(1);

  Overrides run_opts, cmp_opts, oracle_opts;
  int realizations = 20;

  auto *run = app.add_subcommand("run", "run one simulation and write its artifacts");
  run->add_option("--config", run_opts.config, "configuration file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", run_opts.out, "output directory (overrides output.dir)");
  run->add_option("--seed-override", run_opts.seed, "seed (overrides the config)");
  run->add_option("--mode", run_opts.modes, "none, abf or pabf (overrides the config)");

  auto *cmp = app.add_subcommand("compare", "K seeded realizations per mode -> compare.csv");
  cmp->add_option("--config", cmp_opts.config, "base configuration file")->required()->check(CLI::ExistingFile);
  cmp->add_option("--out", cmp_opts.out, "output directory (overrides output.dir)");
  cmp->add_option("--seed-override", cmp_opts.seed, "base seed; realization k uses seed + k");
  cmp->add_option("--mode", cmp_opts.modes, "modes to compare (repeatable; default abf and pabf)");
  cmp->add_option("--realizations", realizations, "realizations per mode (K >= 2)")->capture_default_str();

  std::string field_path, project_out, solver = "direct";
  bool weighted = false;
  auto *proj = app.add_subcommand("project", "project a vector-field CSV onto a gradient");
  proj->add_option("field", field_path, "vector field CSV")->required()->check(CLI::ExistingFile);
  proj->add_option("--out", project_out, "output directory")->required();
  proj->add_flag("--weighted", weighted, "weight the projection by the count column");
  proj->add_option("--solver", solver, "direct or cg")->check(CLI::IsMember({"direct", "cg"}))->capture_default_str();

  auto *oracle = app.add_subcommand("oracle", "reference free energy and mean force of a toy system");
  oracle->add_option("--config", oracle_opts.config, "configuration file")->required()->check(CLI::ExistingFile);
  oracle->add_option("--out", oracle_opts.out, "output directory (overrides output.dir)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const RunConfig c = resolve(run_opts, true);
      std::cout << to_text(c) << std::flush;
      const RunSummary s = cmd_run(c);
      std::printf("run finished: %lld steps, t = %s, wall time %.2f s\n", static_cast<long long>(s.steps),
                  format_double(s.time).c_str(), s.wall_seconds);
      print_error_line("l2 error F:", s.last.l2_error_f);
      print_error_line("l2 error grad A:", s.last.l2_error_grad_a);
      std::printf("  transitions (bond 1, bond 2): %lld, %lld\n", static_cast<long long>(s.last.transitions1),
                  static_cast<long long>(s.last.transitions2));
      std::printf("  output: %s\n", c.output_dir.c_str());
    } else if (*cmp) {
      const RunConfig c = resolve(cmp_opts, false);
      std::vector<BiasMode> modes;
      for (const auto &m : cmp_opts.modes) modes.push_back(parse_mode(m));
      if (modes.empty()) modes = {BiasMode::abf, BiasMode::pabf};
      std::cout << to_text(c) << std::flush;
      const auto rows = compare(c, realizations, modes);
      std::filesystem::create_directories(c.output_dir);
      save_file((std::filesystem::path(c.output_dir) / "compare.csv").string(),
                [&](std::ostream &o) { write_compare(o, rows); });
      save_file((std::filesystem::path(c.output_dir) / "config.resolved").string(),
                [&](std::ostream &o) { o << to_text(c); });
      std::printf("compare finished: %d realizations x %zu modes, %zu rows in %s/compare.csv\n", realizations,
                  modes.size(), rows.size(), c.output_dir.c_str());
    } else if (*proj) {
      ProjectionOptions opt;
      opt.solver = solver == "cg" ? LinearSolver::conjugate_gradient : LinearSolver::direct;
      const ProjectReport r = cmd_project(field_path, project_out, weighted, opt);
      std::printf("relative residual  %s\n", format_double(r.residual).c_str());
      std::printf("|F|^2              %s\n", format_double(r.norm2_f).c_str());
      std::printf("|grad A|^2         %s\n", format_double(r.norm2_grad_a).c_str());
      std::printf("|F - grad A|^2     %s\n", format_double(r.norm2_remainder).c_str());
    } else if (*oracle) {
      const RunConfig c = resolve(oracle_opts, false);
      cmd_oracle(c, c.output_dir);
      std::printf("reference written to %s\n", c.output_dir.c_str());
    }
  } catch (const ConfigError &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
