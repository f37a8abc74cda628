#ifndef PABF_TESTS_SUPPORT_HPP
#define PABF_TESTS_SUPPORT_HPP

// Shared helpers for the unit and acceptance tests: random configurations,
// central finite differences and random fields.

#include "pabf/fields.hpp"
#include "pabf/potentials.hpp"
#include "pabf/reaction_coordinate.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace pabf::test {

/// Random trimer (bond lengths in [0.95, 6], any angle away from collinear)
/// plus solvent placed uniformly with no pair closer than `min_gap`.
inline ParticleConfiguration random_configuration(std::mt19937_64 &rng, std::size_t n, double box,
                                                  double min_gap = 0.85) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ParticleConfiguration c;
  c.box_length = box;
  const double ra = 0.95 + 5.05 * u(rng), rb = 0.95 + 5.05 * u(rng);
  const double phi0 = 2 * std::numbers::pi * u(rng);
  const double theta = 0.3 + (std::numbers::pi - 0.6) * u(rng);
  const Vec2 q1{box * u(rng), box * u(rng)};
  const Vec2 q0 = q1 + Vec2{ra * std::cos(phi0), ra * std::sin(phi0)};
  const Vec2 q2 = q1 + Vec2{rb * std::cos(phi0 + theta), rb * std::sin(phi0 + theta)};
  c.positions = {wrap_position(q0, box), q1, wrap_position(q2, box)};
  while (c.positions.size() < n) {
    const Vec2 p{box * u(rng), box * u(rng)};
    bool ok = true;
    for (const auto &q : c.positions)
      if (norm(separation(p, q, box)) < min_gap) ok = false;
    if (ok) c.positions.push_back(p);
  }
  return c;
}

/// Central-difference gradient of f over the flattened positions.
template <class F>
std::vector<Vec2> fd_gradient(const ParticleConfiguration &c, F &&f, double h = 1e-6) {
  std::vector<Vec2> g(c.size());
  ParticleConfiguration w = c;
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t a = 0; a < 2; ++a) {
      const double x = c.positions[i][a];
      w.positions[i][a] = x + h;
      const double fp = f(w);
      w.positions[i][a] = x - h;
      const double fm = f(w);
      w.positions[i][a] = x;
      g[i][a] = (fp - fm) / (2 * h);
    }
  }
  return g;
}

inline double relative_difference(const std::vector<Vec2> &a, const std::vector<Vec2> &b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += norm2(a[i] - b[i]);
    den += norm2(b[i]);
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

/// Local mean force assembled numerically: xi, V and every derivative by
/// finite differences, G inverted explicitly, divergence of G^{-1} grad xi by
/// differencing the assembled vector fields.
inline Vec2 fd_local_mean_force(const ParticleConfiguration &c, const PairPotentialParams &p, double beta,
                                double h = 1e-4) {
  const TrimerBondCoordinate rc(p);
  auto xi_j = [&](int j) { return [&rc, j](const ParticleConfiguration &w) { return rc.value(w)[j]; }; };
  // Only the trimer particles matter for xi.
  auto trimer_only = [&](const ParticleConfiguration &w) {
    ParticleConfiguration t;
    t.box_length = w.box_length;
    t.positions = {w.positions[0], w.positions[1], w.positions[2]};
    return t;
  };
  // Vector field u_i(x) = sum_j Ginv_ij(x) grad xi_j(x) over the 6 trimer coordinates.
  auto field = [&](const ParticleConfiguration &w) {
    const ParticleConfiguration t = trimer_only(w);
    const auto g1 = fd_gradient(t, xi_j(0), 1e-6);
    const auto g2 = fd_gradient(t, xi_j(1), 1e-6);
    double g11 = 0, g12 = 0, g22 = 0;
    for (int k = 0; k < 3; ++k) {
      g11 += dot(g1[k], g1[k]);
      g12 += dot(g1[k], g2[k]);
      g22 += dot(g2[k], g2[k]);
    }
    const double det = g11 * g22 - g12 * g12;
    const double i11 = g22 / det, i12 = -g12 / det, i22 = g11 / det;
    std::array<std::array<Vec2, 3>, 2> u;
    for (int k = 0; k < 3; ++k) {
      u[0][k] = g1[k] * i11 + g2[k] * i12;
      u[1][k] = g1[k] * i12 + g2[k] * i22;
    }
    return u;
  };
  const auto u = field(c);
  const auto gv = fd_gradient(c, [&](const ParticleConfiguration &w) { return total_energy(w, p); }, 1e-6);
  Vec2 f;
  for (int i = 0; i < 2; ++i) {
    double drift = 0, div = 0;
    for (int k = 0; k < 3; ++k) drift += dot(u[i][k], gv[k]);
    ParticleConfiguration w = c;
    for (int k = 0; k < 3; ++k) {
      for (int a = 0; a < 2; ++a) {
        const double x = c.positions[k][a];
        w.positions[k][a] = x + h;
        const double up = field(w)[i][k][a];
        w.positions[k][a] = x - h;
        const double um = field(w)[i][k][a];
        w.positions[k][a] = x;
        div += (up - um) / (2 * h);
      }
    }
    f[i] = drift - div / beta;
  }
  return f;
}

/// Smooth random field: a few random Fourier modes, optionally with a
/// rotational part added.
inline VectorField2 random_smooth_field(const Grid2 &grid, std::mt19937_64 &rng, int modes = 4) {
  std::normal_distribution<double> n(0.0, 1.0);
  VectorField2 f(grid);
  const double L = grid.length();
  for (int m = 0; m < modes; ++m) {
    const double kx = 2 * std::numbers::pi * (1 + m % 3) / L, ky = 2 * std::numbers::pi * (1 + (m + 1) % 3) / L;
    const double a = n(rng), b = n(rng), c = n(rng), d = n(rng);
    for (std::size_t k = 0; k < grid.bin_count(); ++k) {
      const Vec2 z = grid.bin_center(BinIndex{static_cast<int>(k / grid.n_bins), static_cast<int>(k % grid.n_bins)});
      const double s = std::sin(kx * z.x + ky * z.y), co = std::cos(kx * z.x - ky * z.y);
      f.values[k] += Vec2{a * s + c * co, b * co + d * s};
    }
  }
  return f;
}

inline VectorField2 random_field(const Grid2 &grid, std::mt19937_64 &rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  VectorField2 f(grid);
  for (auto &v : f.values) v = {n(rng), n(rng)};
  return f;
}

inline double max_abs_difference(const ScalarField &a, const ScalarField &b) {
  double m = 0;
  for (std::size_t k = 0; k < a.nodes.size(); ++k) m = std::max(m, std::abs(a.nodes[k] - b.nodes[k]));
  return m;
}

inline double max_abs(const ScalarField &a) {
  double m = 0;
  for (double v : a.nodes) m = std::max(m, std::abs(v));
  return m;
}

} // namespace pabf::test

#endif // PABF_TESTS_SUPPORT_HPP
