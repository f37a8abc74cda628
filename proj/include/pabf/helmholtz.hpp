#ifndef PABF_HELMHOLTZ_HPP
#define PABF_HELMHOLTZ_HPP

// Projection of a binned vector field F onto a gradient: find the Q1 function
// A with zero nodal mean such that
//
//   int phi grad A . grad v  =  int phi F . grad v     for every Q1 test v,
//
// on the rectangle (natural Neumann condition dA/dn = F.n) or on the torus.
// phi is piecewise constant per bin (phi = 1 for the standard problem).
// Stiffness uses 2x2 Gauss quadrature, which is exact for Q1. The right-hand
// side of a piecewise-constant F reduces to one bin-center evaluation per
// element, again exactly. Fields sampled at the Gauss points (QuadratureField)
// are accepted as well, which makes the discrete projection an exact
// orthogonal projector on that space.
//
// The singular system is bordered with the zero-mean constraint.

#include "pabf/core.hpp"
#include "pabf/fields.hpp"
#include "pabf/grid.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <mutex>
#include <numeric>
#include <span>
#include <vector>

namespace pabf {

enum class LinearSolver { direct, conjugate_gradient };

struct ProjectionOptions {
  LinearSolver solver = LinearSolver::direct;
  double cg_tolerance = 1e-12;
  int cg_max_iterations = 100000;
  /// Relative residual above which a solve is reported as failed.
  double max_residual = 1e-10;
};

struct ProjectionResult {
  ScalarField potential;
  double residual = 0.0;
  int iterations = 0;
};

namespace detail {

/// Gradient of the four bilinear shape functions at local (s, t), in units of
/// 1/delta. Local node order: (0,0), (1,0), (0,1), (1,1).
inline std::array<Vec2, 4> q1_shape_gradients(double s, double t) {
  return {{{-(1.0 - t), -(1.0 - s)}, {1.0 - t, -s}, {-t, 1.0 - s}, {t, s}}};
}

} // namespace detail

class HelmholtzProjector {
public:
  using SparseMatrix = Eigen::SparseMatrix<double>;

  explicit HelmholtzProjector(const Grid2 &grid, ProjectionOptions options = {})
      : grid_(grid), options_(options) {
    grid_.validate();
    const int n = grid_.n_bins;
    const int m = grid_.periodic() ? n : n + 1;
    dofs_ = static_cast<std::size_t>(m) * m;
    gauge_.assign(dofs_, 0.0);
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j) gauge_[dof(i, j)] += 1.0;
  }

  const Grid2 &grid() const { return grid_; }
  const ProjectionOptions &options() const { return options_; }
  std::size_t dof_count() const { return dofs_; }

  /// Unknown index of grid node (i, j); periodic grids identify opposite sides.
  std::size_t dof(int i, int j) const {
    if (grid_.periodic()) {
      const int n = grid_.n_bins;
      return static_cast<std::size_t>(i % n) * n + (j % n);
    }
    return grid_.node_flat(i, j);
  }

  ProjectionResult solve(const VectorField2 &f, const WeightField *phi = nullptr) const {
    check_grid(f.grid);
    double scale = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k)
      if (f.is_valid(k)) scale += weight(phi, k) * weight(phi, k) * norm2(f.values[k]);
    return solve_rhs(rhs(f, phi), phi, grid_.delta() * std::sqrt(scale));
  }

  ProjectionResult solve(const QuadratureField &f, const WeightField *phi = nullptr) const {
    check_grid(f.grid);
    double scale = 0.0;
    for (std::size_t k = 0; k < f.values.size(); ++k)
      scale += weight(phi, k / QuadratureField::kPoints) * weight(phi, k / QuadratureField::kPoints) *
               norm2(f.values[k]) / QuadratureField::kPoints;
    return solve_rhs(rhs(f, phi), phi, grid_.delta() * std::sqrt(scale));
  }

  /// Stiffness matrix of the weighted problem (phi == nullptr for phi = 1).
  SparseMatrix stiffness(const WeightField *phi = nullptr) const {
    const auto gp = gauss_points_2x2();
    // Reference element matrix; delta cancels for the 2D Laplacian.
    std::array<std::array<double, 4>, 4> ke{};
    for (const auto &q : gp) {
      const auto g = detail::q1_shape_gradients(q[0], q[1]);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) ke[a][b] += 0.25 * dot(g[a], g[b]);
    }
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(grid_.bin_count() * 16);
    for (int i = 0; i < grid_.n_bins; ++i) {
      for (int j = 0; j < grid_.n_bins; ++j) {
        const double w = phi ? phi->weights[grid_.bin_flat(i, j)] : 1.0;
        const auto local = element_dofs(i, j);
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) trip.emplace_back(local[a], local[b], w * ke[a][b]);
      }
    }
    SparseMatrix k(static_cast<Eigen::Index>(dofs_), static_cast<Eigen::Index>(dofs_));
    k.setFromTriplets(trip.begin(), trip.end());
    return k;
  }

  Eigen::VectorXd rhs(const VectorField2 &f, const WeightField *phi = nullptr) const {
    check_grid(f.grid);
    if (phi) phi->validate();
    const auto g = detail::q1_shape_gradients(0.5, 0.5);
    const double delta = grid_.delta();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dofs_));
    for (int i = 0; i < grid_.n_bins; ++i) {
      for (int j = 0; j < grid_.n_bins; ++j) {
        const std::size_t k = grid_.bin_flat(i, j);
        if (!f.is_valid(k)) continue;
        const Vec2 &v = f.values[k];
        if (!is_finite(v)) throw DomainError("vector field has a non-finite entry");
        const double w = (phi ? phi->weights[k] : 1.0) * delta;
        const auto local = element_dofs(i, j);
        for (int a = 0; a < 4; ++a) b[local[a]] += w * dot(v, g[a]);
      }
    }
    return b;
  }

  Eigen::VectorXd rhs(const QuadratureField &f, const WeightField *phi = nullptr) const {
    check_grid(f.grid);
    if (phi) phi->validate();
    const auto gp = gauss_points_2x2();
    const double delta = grid_.delta();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dofs_));
    for (int i = 0; i < grid_.n_bins; ++i) {
      for (int j = 0; j < grid_.n_bins; ++j) {
        const std::size_t k = grid_.bin_flat(i, j);
        const double w = (phi ? phi->weights[k] : 1.0) * delta * 0.25;
        const auto local = element_dofs(i, j);
        for (int p = 0; p < QuadratureField::kPoints; ++p) {
          const Vec2 &v = f.at(k, p);
          if (!is_finite(v)) throw DomainError("vector field has a non-finite entry");
          const auto g = detail::q1_shape_gradients(gp[p][0], gp[p][1]);
          for (int a = 0; a < 4; ++a) b[local[a]] += w * dot(v, g[a]);
        }
      }
    }
    return b;
  }

  /// Expands unknowns into the stored nodal layout and fixes the gauge.
  ScalarField to_field(const Eigen::VectorXd &x) const {
    ScalarField a(grid_);
    for (int i = 0; i <= grid_.n_bins; ++i)
      for (int j = 0; j <= grid_.n_bins; ++j) a.at(i, j) = x[static_cast<Eigen::Index>(dof(i, j))];
    a.remove_mean();
    return a;
  }

private:
  using Factorization = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

  void check_grid(const Grid2 &g) const {
    if (!(g == grid_)) throw DomainError("field grid does not match the projector grid");
  }

  std::array<Eigen::Index, 4> element_dofs(int i, int j) const {
    return {static_cast<Eigen::Index>(dof(i, j)), static_cast<Eigen::Index>(dof(i + 1, j)),
            static_cast<Eigen::Index>(dof(i, j + 1)), static_cast<Eigen::Index>(dof(i + 1, j + 1))};
  }

  SparseMatrix bordered(const SparseMatrix &k) const {
    const auto n = static_cast<Eigen::Index>(dofs_);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(k.nonZeros()) + 2 * dofs_);
    for (Eigen::Index c = 0; c < k.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(k, c); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
    for (Eigen::Index r = 0; r < n; ++r) {
      trip.emplace_back(r, n, gauge_[static_cast<std::size_t>(r)]);
      trip.emplace_back(n, r, gauge_[static_cast<std::size_t>(r)]);
    }
    SparseMatrix out(n + 1, n + 1);
    out.setFromTriplets(trip.begin(), trip.end());
    out.makeCompressed();
    return out;
  }

  std::shared_ptr<const Factorization> factorize(const SparseMatrix &k) const {
    auto lu = std::make_shared<Factorization>();
    lu->compute(bordered(k));
    if (lu->info() != Eigen::Success) throw SolverError("sparse factorization failed", NAN);
    return lu;
  }

  std::shared_ptr<const Factorization> unweighted_factorization() const {
    std::call_once(cache_->once, [&] { cache_->lu = factorize(stiffness(nullptr)); });
    return cache_->lu;
  }

  static double weight(const WeightField *phi, std::size_t bin) { return phi ? phi->weights[bin] : 1.0; }

  /// `scale` is the size the right-hand side would have without cancellation;
  /// residuals are measured against it so that fields the projection
  /// annihilates (b at roundoff level) are not reported as failures.
  ProjectionResult solve_rhs(const Eigen::VectorXd &b, const WeightField *phi, double scale) const {
    ProjectionResult out;
    const double bnorm = std::max(b.norm(), scale);
    if (b.norm() == 0.0) {
      out.potential = ScalarField(grid_);
      return out;
    }
    const SparseMatrix k = stiffness(phi);
    Eigen::VectorXd x;
    if (options_.solver == LinearSolver::direct) {
      std::shared_ptr<const Factorization> lu = phi ? factorize(k) : unweighted_factorization();
      Eigen::VectorXd bb(b.size() + 1);
      bb.head(b.size()) = b;
      bb[b.size()] = 0.0;
      Eigen::VectorXd xx = lu->solve(bb);
      x = xx.head(b.size());
    } else {
      x = conjugate_gradient(k, b, bnorm, out.iterations);
    }
    out.residual = (k * x - b).norm() / bnorm;
    if (!(out.residual <= options_.max_residual))
      throw SolverError("Helmholtz projection did not converge", out.residual);
    out.potential = to_field(x);
    return out;
  }

  /// Jacobi-preconditioned CG on the semidefinite system; the right-hand side
  /// is orthogonal to the constants, so iterates stay in the range of K.
  Eigen::VectorXd conjugate_gradient(const SparseMatrix &k, const Eigen::VectorXd &b, double bnorm,
                                     int &iterations) const {
    const Eigen::VectorXd inv_diag = k.diagonal().cwiseInverse();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
    Eigen::VectorXd r = b;
    Eigen::VectorXd z = inv_diag.cwiseProduct(r);
    Eigen::VectorXd p = z;
    double rz = r.dot(z);
    const double target = options_.cg_tolerance * bnorm;
    iterations = 0;
    while (r.norm() > target && iterations < options_.cg_max_iterations) {
      const Eigen::VectorXd kp = k * p;
      const double alpha = rz / p.dot(kp);
      x += alpha * p;
      r -= alpha * kp;
      z = inv_diag.cwiseProduct(r);
      const double rz_next = r.dot(z);
      p = z + (rz_next / rz) * p;
      rz = rz_next;
      ++iterations;
    }
    return x;
  }

  struct Cache {
    std::once_flag once;
    std::shared_ptr<const Factorization> lu;
  };

  Grid2 grid_;
  ProjectionOptions options_;
  std::size_t dofs_ = 0;
  std::vector<double> gauge_; // multiplicity of each unknown among stored nodes
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

/// grad A at bin centers; constant per element and direction for Q1.
inline VectorField2 gradient_at_bins(const ScalarField &a) {
  const Grid2 &g = a.grid;
  VectorField2 out(g);
  const double inv = 0.5 / g.delta();
  for (int i = 0; i < g.n_bins; ++i) {
    for (int j = 0; j < g.n_bins; ++j) {
      const double a00 = a.at(i, j), a10 = a.at(i + 1, j), a01 = a.at(i, j + 1), a11 = a.at(i + 1, j + 1);
      out.at(i, j) = {((a10 - a00) + (a11 - a01)) * inv, ((a01 - a00) + (a11 - a10)) * inv};
    }
  }
  return out;
}

/// Exact grad A of the Q1 interpolant at every Gauss point.
inline QuadratureField gradient_at_quadrature(const ScalarField &a) {
  const Grid2 &g = a.grid;
  QuadratureField out(g);
  const auto gp = gauss_points_2x2();
  const double inv = 1.0 / g.delta();
  for (int i = 0; i < g.n_bins; ++i) {
    for (int j = 0; j < g.n_bins; ++j) {
      const std::array<double, 4> v{a.at(i, j), a.at(i + 1, j), a.at(i, j + 1), a.at(i + 1, j + 1)};
      const std::size_t k = g.bin_flat(i, j);
      for (int p = 0; p < QuadratureField::kPoints; ++p) {
        const auto sg = detail::q1_shape_gradients(gp[p][0], gp[p][1]);
        Vec2 s;
        for (int n = 0; n < 4; ++n) s += sg[n] * v[n];
        out.at(k, p) = s * inv;
      }
    }
  }
  return out;
}

/// Neumann projection of a binned field on a rectangle grid.
inline ScalarField project_neumann(const VectorField2 &f, ProjectionOptions options = {}) {
  if (f.grid.periodic()) throw DomainError("project_neumann needs a non-periodic grid");
  return HelmholtzProjector(f.grid, options).solve(f).potential;
}

/// Weighted projection on the torus.
inline ScalarField project_periodic_weighted(const VectorField2 &f, const WeightField &phi,
                                             ProjectionOptions options = {}) {
  if (!f.grid.periodic()) throw DomainError("project_periodic_weighted needs a periodic grid");
  return HelmholtzProjector(f.grid, options).solve(f, &phi).potential;
}

/// The one-dimensional periodic projection: subtract the average.
inline std::vector<double> project_1d(std::span<const double> f) {
  std::vector<double> out(f.begin(), f.end());
  if (out.empty()) return out;
  const double mean = std::accumulate(out.begin(), out.end(), 0.0) / static_cast<double>(out.size());
  for (auto &v : out) v -= mean;
  return out;
}

} // namespace pabf

#endif // PABF_HELMHOLTZ_HPP
