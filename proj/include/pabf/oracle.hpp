#ifndef PABF_ORACLE_HPP
#define PABF_ORACLE_HPP

// Independent reference computations used to check the production code:
// quadrature free energies of the toy systems, a dense assembly of the
// projection problem and a brute-force binned average.

#include "pabf/core.hpp"
#include "pabf/fields.hpp"
#include "pabf/grid.hpp"
#include "pabf/reaction_coordinate.hpp"
#include "pabf/toy.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <algorithm>
#include <numbers>
#include <span>
#include <vector>

namespace pabf {

/// Free energy and mean force of a toy system at single points, computed by
/// trapezoidal quadrature over the orthogonal coordinate (spectrally accurate
/// since the integrand is periodic in x3).
class ToyReference {
public:
  explicit ToyReference(const ToySystem &toy, int points = 256) : toy_(toy), points_(points) {
    toy_.validate();
    if (points_ < 2) throw DomainError("quadrature needs at least two points");
  }

  /// A(z) = -1/beta ln int exp(-beta V(z, x3)) dx3, unshifted.
  double free_energy_at(const Vec2 &z) const {
    if (toy_.kind == ToyKind::toy_a) return toy_.reduced_energy(z);
    // log-sum-exp over the quadrature nodes
    std::vector<double> e(points_);
    double emin = INFINITY;
    for (int k = 0; k < points_; ++k) {
      e[k] = toy_.orthogonal_energy(z.x, node(k));
      emin = std::min(emin, e[k]);
    }
    double s = 0.0;
    for (double v : e) s += std::exp(-toy_.beta * (v - emin));
    s /= points_;
    return toy_.reduced_energy(z) + emin - std::log(s) / toy_.beta;
  }

  /// grad A(z) as the conditional average of the local mean force.
  Vec2 mean_force_at(const Vec2 &z) const {
    Vec2 g = toy_.reduced_gradient(z);
    if (toy_.kind == ToyKind::toy_a) return g;
    using std::numbers::pi;
    std::vector<double> e(points_);
    double emin = INFINITY;
    for (int k = 0; k < points_; ++k) {
      e[k] = toy_.orthogonal_energy(z.x, node(k));
      emin = std::min(emin, e[k]);
    }
    double num = 0.0, den = 0.0;
    for (int k = 0; k < points_; ++k) {
      const double w = std::exp(-toy_.beta * (e[k] - emin));
      num += w * toy_.c * std::sin(2 * pi * node(k));
      den += w;
    }
    g.x += num / den;
    return g;
  }

private:
  double node(int k) const { return static_cast<double>(k) / points_; }

  ToySystem toy_;
  int points_;
};

/// Nodal reference free energy on the grid, shifted to zero nodal mean.
inline ScalarField reference_free_energy(const ToySystem &toy, const Grid2 &grid, int points = 256) {
  const ToyReference ref(toy, points);
  ScalarField a(grid);
  for (int i = 0; i <= grid.n_bins; ++i)
    for (int j = 0; j <= grid.n_bins; ++j)
      a.at(i, j) = ref.free_energy_at({grid.node_coordinate(i), grid.node_coordinate(j)});
  a.remove_mean();
  return a;
}

/// Reference mean force at the bin centers.
inline VectorField2 reference_mean_force(const ToySystem &toy, const Grid2 &grid, int points = 256) {
  const ToyReference ref(toy, points);
  VectorField2 f(grid);
  for (int i = 0; i < grid.n_bins; ++i)
    for (int j = 0; j < grid.n_bins; ++j) f.at(i, j) = ref.mean_force_at(grid.bin_center(BinIndex{i, j}));
  return f;
}

/// Dense assembly and direct solve of the projection weak form. Element
/// matrices are written out in closed form rather than integrated.
inline ScalarField dense_projection_solve(const VectorField2 &f, const WeightField *phi = nullptr) {
  const Grid2 &g = f.grid;
  const int n = g.n_bins;
  if ((n + 1) * (n + 1) > 60 * 60) throw DomainError("grid too large for the dense oracle");
  if (phi && phi->weights.size() != g.bin_count()) throw DomainError("weight field does not match the grid");

  const int m = g.periodic() ? n : n + 1;
  const int dofs = m * m;
  auto id = [&](int i, int j) { return g.periodic() ? (i % n) * n + (j % n) : i * (n + 1) + j; };

  // Bilinear-element Laplacian (independent of the mesh size in 2D), node
  // order (0,0), (1,0), (0,1), (1,1).
  static constexpr double ke[4][4] = {{4, -1, -1, -2}, {-1, 4, -2, -1}, {-1, -2, 4, -1}, {-2, -1, -1, 4}};
  // int_element grad N_a = delta * (sx, sy) / 2
  static constexpr double sx[4] = {-1, 1, -1, 1};
  static constexpr double sy[4] = {-1, -1, 1, 1};

  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(dofs + 1, dofs + 1);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(dofs + 1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::size_t bin = g.bin_flat(i, j);
      const double w = phi ? phi->weights[bin] : 1.0;
      const int nodes[4] = {id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1)};
      const Vec2 v = f.is_valid(bin) ? f.values[bin] : Vec2{};
      for (int a = 0; a < 4; ++a) {
        for (int c = 0; c < 4; ++c) k(nodes[a], nodes[c]) += w * ke[a][c] / 6.0;
        b[nodes[a]] += w * 0.5 * g.delta() * (v.x * sx[a] + v.y * sy[a]);
      }
    }
  }
  // zero mean over the stored nodes
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      k(id(i, j), dofs) += 1.0;
      k(dofs, id(i, j)) += 1.0;
    }
  }

  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(k);
  if (!(lu.rcond() > 1e-13)) throw SolverError("dense projection matrix is singular beyond the gauge", NAN);
  const Eigen::VectorXd x = lu.solve(b);

  ScalarField a(g);
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) a.at(i, j) = x[id(i, j)];
  a.remove_mean();
  return a;
}

/// Per-bin average recomputed from a deposit log, one bin at a time, with the
/// same compensated summation in log order as the production accumulator so
/// the two agree bit for bit.
inline VectorField2 brute_force_mean_force(const Grid2 &grid, std::span<const LocalMeanForceSample> log) {
  auto add = [](double &sum, double &carry, double v) {
    const double t = sum + v;
    carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  };
  VectorField2 out(grid);
  for (int i = 0; i < grid.n_bins; ++i) {
    for (int j = 0; j < grid.n_bins; ++j) {
      double sx = 0, cx = 0, sy = 0, cy = 0;
      std::size_t count = 0;
      for (const auto &d : log) {
        const auto b = grid.bin_index(d.z);
        if (b && b->i == i && b->j == j) {
          add(sx, cx, d.f.x);
          add(sy, cy, d.f.y);
          ++count;
        }
      }
      const std::size_t k = grid.bin_flat(i, j);
      out.valid[k] = count > 0;
      if (count) out.values[k] = {(sx + cx) / static_cast<double>(count), (sy + cy) / static_cast<double>(count)};
    }
  }
  return out;
}

} // namespace pabf

#endif // PABF_ORACLE_HPP
