#ifndef PABF_LANGEVIN_HPP
#define PABF_LANGEVIN_HPP

// Euler-Maruyama integration of the biased overdamped Langevin dynamics
//
//   dX = -grad(V + W o xi)(X) dt + sum_i B_i(xi(X)) grad xi_i(X) dt + sqrt(2/beta) dW,
//
// with B = F_t (ABF), B = grad A_t (projected ABF) or no bias and no wall
// (plain dynamics). B is read per bin; outside the domain the boundary bin's
// value is used and the wall W pulls the coordinate back.

#include "pabf/core.hpp"
#include "pabf/fields.hpp"
#include "pabf/force_estimator.hpp"
#include "pabf/grid.hpp"
#include "pabf/helmholtz.hpp"
#include "pabf/systems.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace pabf {

enum class BiasMode { none, abf, pabf };

inline std::string to_string(BiasMode m) {
  switch (m) {
  case BiasMode::none: return "none";
  case BiasMode::abf: return "abf";
  case BiasMode::pabf: return "pabf";
  }
  return "?";
}

/// W(z) = k sum_i [ (z_i - hi)^2 1{z_i >= hi} + (z_i - lo)^2 1{z_i <= lo} ].
inline double confining_energy(const Vec2 &z, double lo, double hi, double stiffness = 1.0) {
  double w = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    if (z[i] >= hi) w += (z[i] - hi) * (z[i] - hi);
    if (z[i] <= lo) w += (z[i] - lo) * (z[i] - lo);
  }
  return stiffness * w;
}

inline Vec2 confining_gradient(const Vec2 &z, double lo, double hi, double stiffness = 1.0) {
  Vec2 g;
  for (std::size_t i = 0; i < 2; ++i) {
    if (z[i] >= hi) g[i] += 2.0 * (z[i] - hi);
    if (z[i] <= lo) g[i] += 2.0 * (z[i] - lo);
  }
  return g * stiffness;
}

struct ReplicaStream {
  std::mt19937_64 engine;
  std::normal_distribution<double> normal;
};

/// One independent random stream per replica, derived from (seed, replica),
/// so the order in which replicas are advanced never changes the numbers.
inline ReplicaStream make_stream(std::uint64_t seed, std::size_t replica) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replica), static_cast<std::uint32_t>(replica >> 32)};
  return {std::mt19937_64(seq), std::normal_distribution<double>(0.0, 1.0)};
}

struct ReplicaEnsemble {
  std::vector<std::vector<double>> replicas;
  std::vector<ReplicaStream> streams;
  double time = 0.0;
  std::int64_t steps = 0;

  std::size_t size() const { return replicas.size(); }

  template <SamplerSystem System>
  static ReplicaEnsemble create(const System &system, std::size_t count, std::uint64_t seed) {
    if (count == 0) throw DomainError("ensemble needs at least one replica");
    ReplicaEnsemble e;
    e.replicas.reserve(count);
    e.streams.reserve(count);
    for (std::size_t r = 0; r < count; ++r) {
      e.replicas.push_back(system.initial_state(seed, r));
      e.streams.push_back(make_stream(seed, r));
    }
    return e;
  }
};

struct DynamicsParams {
  double beta = 1.0;
  double dt = 2.5e-4;
  BiasMode mode = BiasMode::abf;
  double wall_stiffness = 1.0;
};

/// Advances every replica by one time step. `work` receives the evaluation of
/// each replica at its pre-step position (and so the local mean force
/// samples of this step).
template <SamplerSystem System>
void step(const System &system, ReplicaEnsemble &ensemble, const VectorField2 &bias,
          const DynamicsParams &params, std::vector<Evaluation> &work) {
  if (!(params.dt > 0.0)) throw DomainError("time step must be positive");
  const Grid2 &grid = bias.grid;
  const double noise = std::isinf(params.beta) ? 0.0 : std::sqrt(2.0 * params.dt / params.beta);
  work.resize(ensemble.size());

  for (std::size_t r = 0; r < ensemble.size(); ++r) {
    auto &x = ensemble.replicas[r];
    Evaluation &ev = work[r];
    system.evaluate(x, params.beta, ev);

    Vec2 coeff; // multiplies grad xi_i in the drift
    if (params.mode != BiasMode::none) {
      const BinIndex b = grid.clamped_bin(ev.z);
      coeff = bias.values[grid.bin_flat(b.i, b.j)];
      if (!grid.periodic()) coeff -= confining_gradient(ev.z, grid.xi_min, grid.xi_max, params.wall_stiffness);
    }

    auto &stream = ensemble.streams[r];
    for (std::size_t k = 0; k < x.size(); ++k) x[k] -= ev.grad_v[k] * params.dt;
    for (std::size_t i = 0; i < 2; ++i) {
      const auto &g = ev.grad_xi[i];
      for (std::size_t n = 0; n < g.count; ++n) x[g.index[n]] += coeff[i] * g.value[n] * params.dt;
    }
    if (noise > 0.0)
      for (auto &v : x) v += noise * stream.normal(stream.engine);
    system.wrap(x);
    for (double v : x)
      if (!std::isfinite(v)) throw UnstableStepError(r, ensemble.time + params.dt);
  }
  ensemble.time += params.dt;
  ++ensemble.steps;
}

struct SimulationParams {
  DynamicsParams dynamics;
  Grid2 grid;
  /// Steps between bias refreshes (averaging for ABF, Poisson solve for PABF).
  int projection_stride = 10;
  /// Weight the projection by the visit histogram.
  bool weighted = false;
  ProjectionOptions projection;
};

/// ABF / projected ABF driver: integrate, deposit local mean force samples,
/// refresh the bias every `projection_stride` steps.
template <SamplerSystem System>
class AbfSimulation {
public:
  AbfSimulation(System system, SimulationParams params, std::size_t replicas, std::uint64_t seed)
      : system_(std::move(system)), params_(params), projector_(params.grid, params.projection),
        accumulator_(params.grid), bias_(params.grid), ensemble_(ReplicaEnsemble::create(system_, replicas, seed)) {
    if (params_.projection_stride < 1) throw DomainError("projection stride must be at least 1");
    for (auto &v : bias_.valid) v = 0;
  }

  const System &system() const { return system_; }
  const SimulationParams &params() const { return params_; }
  const ReplicaEnsemble &ensemble() const { return ensemble_; }
  const BinnedForceAccumulator &accumulator() const { return accumulator_; }
  const HelmholtzProjector &projector() const { return projector_; }
  double time() const { return static_cast<double>(ensemble_.steps) * params_.dynamics.dt; }
  std::int64_t steps() const { return ensemble_.steps; }

  /// Bias currently applied to the dynamics.
  const VectorField2 &bias() const { return bias_; }

  VectorField2 mean_force() const { return accumulator_.mean_force_field(); }

  /// Latest projected free energy (PABF only; empty before the first refresh).
  const std::optional<ScalarField> &free_energy() const { return free_energy_; }

  /// Projection of the current force estimate, computed on demand.
  ProjectionResult project_mean_force() const {
    const VectorField2 f = mean_force();
    if (params_.weighted) {
      const WeightField phi = WeightField::from_counts(params_.grid, accumulator_.counts_as_double());
      return projector_.solve(f, &phi);
    }
    return projector_.solve(f);
  }

  /// Current reaction-coordinate value of every replica.
  std::vector<Vec2> current_xi() const {
    std::vector<Vec2> z;
    z.reserve(ensemble_.size());
    for (const auto &x : ensemble_.replicas) z.push_back(system_.xi(x));
    return z;
  }

  void advance() {
    step(system_, ensemble_, bias_, params_.dynamics, work_);
    for (const auto &ev : work_) accumulator_.deposit(ev.z, ev.f);
    if (ensemble_.steps % params_.projection_stride == 0) refresh_bias();
  }

  /// Calls observer(*this) once before the first step and after every step.
  template <class Observer>
  void run(std::int64_t n_steps, Observer &&observer) {
    observer(static_cast<const AbfSimulation &>(*this));
    for (std::int64_t s = 0; s < n_steps; ++s) {
      advance();
      observer(static_cast<const AbfSimulation &>(*this));
    }
  }

  void run(std::int64_t n_steps) {
    run(n_steps, [](const AbfSimulation &) {});
  }

  void refresh_bias() {
    switch (params_.dynamics.mode) {
    case BiasMode::none: return;
    case BiasMode::abf: bias_ = mean_force(); return;
    case BiasMode::pabf: {
      ProjectionResult res = project_mean_force();
      bias_ = gradient_at_bins(res.potential);
      free_energy_ = std::move(res.potential);
      return;
    }
    }
  }

private:
  System system_;
  SimulationParams params_;
  HelmholtzProjector projector_;
  BinnedForceAccumulator accumulator_;
  VectorField2 bias_;
  std::optional<ScalarField> free_energy_;
  ReplicaEnsemble ensemble_;
  std::vector<Evaluation> work_;
};

} // namespace pabf

#endif // PABF_LANGEVIN_HPP
