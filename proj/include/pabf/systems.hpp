#ifndef PABF_SYSTEMS_HPP
#define PABF_SYSTEMS_HPP

// Samplable systems. A system owns the potential and the reaction coordinate
// and works on a flat coordinate vector. The Langevin engine needs:
//
//   std::size_t dof() const;
//   void evaluate(std::span<const double> x, double beta, Evaluation &out) const;
//   void wrap(std::span<double> x) const;
//   Vec2 xi(std::span<const double> x) const;
//   Vec2 monitored(std::span<const double> x) const;
//   std::vector<double> initial_state(std::uint64_t seed, std::size_t replica) const;

#include "pabf/core.hpp"
#include "pabf/potentials.hpp"
#include "pabf/reaction_coordinate.hpp"
#include "pabf/toy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

namespace pabf {

/// Everything the integrator needs from one configuration.
struct Evaluation {
  std::vector<double> grad_v;
  Vec2 z;
  std::array<SparseGradient, 2> grad_xi;
  Vec2 f; // local mean force
};

template <class S>
concept SamplerSystem = requires(const S &s, std::span<const double> x, std::span<double> xm,
                                 double beta, Evaluation &e, std::uint64_t seed, std::size_t r) {
  { s.dof() } -> std::convertible_to<std::size_t>;
  s.evaluate(x, beta, e);
  s.wrap(xm);
  { s.xi(x) } -> std::convertible_to<Vec2>;
  { s.monitored(x) } -> std::convertible_to<Vec2>;
  { s.initial_state(seed, r) } -> std::convertible_to<std::vector<double>>;
};

class TrimerSystem {
public:
  TrimerSystem(const PairPotentialParams &params, std::size_t n_particles, double box_length)
      : params_(params), coordinate_(params), n_(n_particles), box_(box_length) {
    params_.validate();
    if (n_ < 3) throw DomainError("trimer system needs N >= 3");
    if (!(box_ > 0.0)) throw DomainError("box length must be positive");
  }

  const PairPotentialParams &params() const { return params_; }
  const TrimerBondCoordinate &coordinate() const { return coordinate_; }
  std::size_t particles() const { return n_; }
  double box_length() const { return box_; }
  std::size_t dof() const { return 2 * n_; }

  ParticleConfiguration configuration(std::span<const double> x) const {
    ParticleConfiguration c;
    c.box_length = box_;
    c.positions.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) c.positions[i] = {x[2 * i], x[2 * i + 1]};
    return c;
  }

  void evaluate(std::span<const double> x, double beta, Evaluation &out) const {
    thread_local ParticleConfiguration conf;
    thread_local std::vector<Vec2> grad;
    conf.box_length = box_;
    conf.positions.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) conf.positions[i] = {x[2 * i], x[2 * i + 1]};
    grad.resize(n_);
    energy_and_gradient(conf, params_, grad);
    out.grad_v.resize(dof());
    for (std::size_t i = 0; i < n_; ++i) {
      out.grad_v[2 * i] = grad[i].x;
      out.grad_v[2 * i + 1] = grad[i].y;
    }
    out.z = coordinate_.value(conf);
    out.grad_xi = coordinate_.gradient(conf);
    out.f = coordinate_.local_mean_force(conf, std::span<const Vec2>(grad.data(), 3), beta);
  }

  void wrap(std::span<double> x) const {
    for (auto &v : x) v = wrap_coordinate(v, box_);
  }

  Vec2 xi(std::span<const double> x) const {
    const Vec2 d = monitored(x);
    return {(d.x - coordinate_.d0()) / (2.0 * coordinate_.omega()), (d.y - coordinate_.d0()) / (2.0 * coordinate_.omega())};
  }

  /// Bond lengths |q0 q1| and |q1 q2|.
  Vec2 monitored(std::span<const double> x) const {
    const Vec2 q0{x[0], x[1]}, q1{x[2], x[3]}, q2{x[4], x[5]};
    return {norm(separation(q0, q1, box_)), norm(separation(q1, q2, box_))};
  }

  /// Compact trimer (both bonds at d0, angle theta0) centered in the box,
  /// solvent on a randomly perturbed square lattice with no pair closer than
  /// 0.9 sigma.
  std::vector<double> initial_state(std::uint64_t seed, std::size_t replica) const {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(replica), static_cast<std::uint32_t>(replica >> 32), 0x1a77u};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    const double d0 = params_.d0();
    const double sin0 = std::sqrt(std::max(0.0, 1.0 - params_.cos_theta0 * params_.cos_theta0));
    std::vector<Vec2> placed;
    const Vec2 q1{0.5 * box_, 0.5 * box_};
    placed.push_back(wrap_position(q1 + Vec2{d0, 0.0}, box_));
    placed.push_back(q1);
    placed.push_back(wrap_position(q1 + Vec2{d0 * params_.cos_theta0, d0 * sin0}, box_));

    const double min_d = 0.9 * params_.sigma;
    const std::size_t solvent = n_ - 3;
    for (std::size_t m = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(solvent))));
         placed.size() < n_; ++m) {
      placed.resize(3);
      const double spacing = box_ / static_cast<double>(m);
      if (spacing < min_d) throw DomainError("box too small for the requested number of particles");
      std::vector<std::size_t> order(m * m);
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t site : order) {
        if (placed.size() == n_) break;
        const Vec2 p = wrap_position({(static_cast<double>(site / m) + 0.5) * spacing + 0.1 * spacing * unit(rng),
                                      (static_cast<double>(site % m) + 0.5) * spacing + 0.1 * spacing * unit(rng)},
                                     box_);
        const bool clash = std::any_of(placed.begin(), placed.end(), [&](const Vec2 &q) {
          return norm(separation(p, q, box_)) < min_d;
        });
        if (!clash) placed.push_back(p);
      }
    }
    std::vector<double> x(dof());
    for (std::size_t i = 0; i < n_; ++i) {
      x[2 * i] = placed[i].x;
      x[2 * i + 1] = placed[i].y;
    }
    return x;
  }

private:
  PairPotentialParams params_;
  TrimerBondCoordinate coordinate_;
  std::size_t n_;
  double box_;
};

class ToySampler {
public:
  explicit ToySampler(const ToySystem &toy) : toy_(toy) { toy_.validate(); }

  const ToySystem &toy() const { return toy_; }
  std::size_t dof() const { return toy_.dimension(); }

  void evaluate(std::span<const double> x, double, Evaluation &out) const {
    out.grad_v.assign(dof(), 0.0);
    toy_.gradient(x, out.grad_v);
    out.z = coordinate_.value(x);
    out.grad_xi = coordinate_.gradient(x);
    out.f = coordinate_.local_mean_force(out.grad_v);
  }

  void wrap(std::span<double> x) const {
    if (toy_.periodic_coordinate()) {
      x[0] = wrap_coordinate(x[0], 1.0);
      x[1] = wrap_coordinate(x[1], 1.0);
    }
    if (toy_.kind == ToyKind::toy_b) x[2] = wrap_coordinate(x[2], 1.0);
  }

  Vec2 xi(std::span<const double> x) const { return coordinate_.value(x); }
  Vec2 monitored(std::span<const double> x) const { return {x[0], x[1]}; }

  /// Every replica starts in the deepest well of U.
  std::vector<double> initial_state(std::uint64_t, std::size_t) const {
    std::vector<double> x{0.25, 0.75};
    if (toy_.kind == ToyKind::toy_b) x.push_back(0.5);
    return x;
  }

private:
  ToySystem toy_;
  IdentityCoordinate coordinate_;
};

} // namespace pabf

#endif // PABF_SYSTEMS_HPP
