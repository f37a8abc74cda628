#ifndef PABF_FIELDS_HPP
#define PABF_FIELDS_HPP

#include "pabf/core.hpp"
#include "pabf/grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace pabf {

/// One 2-vector per bin, located at the bin center. The validity mask marks
/// bins that carry data (visited bins for an estimated force).
struct VectorField2 {
  Grid2 grid;
  std::vector<Vec2> values;
  std::vector<unsigned char> valid;

  VectorField2() = default;
  explicit VectorField2(const Grid2 &g) : grid(g), values(g.bin_count()), valid(g.bin_count(), 1) {}

  Vec2 &at(int i, int j) { return values[grid.bin_flat(i, j)]; }
  const Vec2 &at(int i, int j) const { return values[grid.bin_flat(i, j)]; }
  bool is_valid(std::size_t k) const { return valid.empty() || valid[k] != 0; }

  std::size_t size() const { return values.size(); }
};

/// Nodal values on the (n_bins + 1)^2 grid nodes. On a periodic grid the last
/// row and column repeat the first ones.
struct ScalarField {
  Grid2 grid;
  std::vector<double> nodes;

  ScalarField() = default;
  explicit ScalarField(const Grid2 &g) : grid(g), nodes(g.node_count(), 0.0) {}

  double &at(int i, int j) { return nodes[grid.node_flat(i, j)]; }
  double at(int i, int j) const { return nodes[grid.node_flat(i, j)]; }

  double mean() const {
    return std::accumulate(nodes.begin(), nodes.end(), 0.0) / static_cast<double>(nodes.size());
  }

  /// Shifts to the zero-mean representative.
  void remove_mean() {
    const double m = mean();
    for (auto &v : nodes) v -= m;
  }
};

/// Positive per-bin weight phi, normalized so that sum_bins phi * delta^2 = 1.
struct WeightField {
  Grid2 grid;
  std::vector<double> weights;

  WeightField() = default;

  static WeightField uniform(const Grid2 &g) {
    WeightField w;
    w.grid = g;
    w.weights.assign(g.bin_count(), 1.0 / (g.length() * g.length()));
    return w;
  }

  /// Density estimate from visit counts. Bin probabilities are floored at
  /// `floor` before normalization so the weight stays strictly positive.
  static WeightField from_counts(const Grid2 &g, std::span<const double> counts,
                                 double floor = 1e-6) {
    if (counts.size() != g.bin_count()) throw std::invalid_argument("count array size mismatch");
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    if (!(total > 0.0)) return uniform(g);
    WeightField w;
    w.grid = g;
    w.weights.resize(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) w.weights[k] = std::max(counts[k] / total, floor);
    w.normalize();
    return w;
  }

  void normalize() {
    const double d2 = grid.delta() * grid.delta();
    const double mass = std::accumulate(weights.begin(), weights.end(), 0.0) * d2;
    for (auto &v : weights) v /= mass;
  }

  void validate() const {
    if (weights.size() != grid.bin_count()) throw DomainError("weight field does not match the grid");
    for (double v : weights)
      if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("weights must be strictly positive");
  }
};

/// A vector field sampled at the 2x2 Gauss points of every bin. This is the
/// space in which the Q1 projection is an exact orthogonal projection: the
/// gradient of a Q1 function is bilinear-free per direction, so its Gauss
/// samples integrate products with test gradients exactly.
struct QuadratureField {
  static constexpr int kPoints = 4;

  Grid2 grid;
  std::vector<Vec2> values; // bin-major, then Gauss point

  QuadratureField() = default;
  explicit QuadratureField(const Grid2 &g) : grid(g), values(g.bin_count() * kPoints) {}

  /// Embeds a piecewise-constant bin field.
  static QuadratureField from_bins(const VectorField2 &f) {
    QuadratureField q(f.grid);
    for (std::size_t k = 0; k < f.size(); ++k)
      for (int p = 0; p < kPoints; ++p) q.values[k * kPoints + p] = f.values[k];
    return q;
  }

  Vec2 &at(std::size_t bin, int point) { return values[bin * kPoints + point]; }
  const Vec2 &at(std::size_t bin, int point) const { return values[bin * kPoints + point]; }
};

/// Local coordinates (in [0, 1]) of the 2x2 Gauss points, in the order
/// (lo,lo), (hi,lo), (lo,hi), (hi,hi).
inline std::array<std::array<double, 2>, 4> gauss_points_2x2() {
  const double a = 0.5 - 0.5 / std::sqrt(3.0);
  const double b = 0.5 + 0.5 / std::sqrt(3.0);
  return {{{a, a}, {b, a}, {a, b}, {b, b}}};
}

inline QuadratureField operator-(const QuadratureField &a, const QuadratureField &b) {
  QuadratureField out = a;
  for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] -= b.values[k];
  return out;
}

inline VectorField2 operator-(const VectorField2 &a, const VectorField2 &b) {
  VectorField2 out = a;
  for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] -= b.values[k];
  return out;
}

/// sum_bins phi |F|^2 delta^2; phi == nullptr means phi = 1.
inline double weighted_norm2(const VectorField2 &f, const WeightField *phi = nullptr) {
  const double d2 = f.grid.delta() * f.grid.delta();
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) s += (phi ? phi->weights[k] : 1.0) * norm2(f.values[k]);
  return s * d2;
}

/// Exact L2(phi) norm of a Gauss-sampled field whose components are at most
/// linear per direction within each bin.
inline double weighted_norm2(const QuadratureField &f, const WeightField *phi = nullptr) {
  const double w = f.grid.delta() * f.grid.delta() / QuadratureField::kPoints;
  double s = 0.0;
  for (std::size_t k = 0; k < f.grid.bin_count(); ++k) {
    double local = 0.0;
    for (int p = 0; p < QuadratureField::kPoints; ++p) local += norm2(f.at(k, p));
    s += (phi ? phi->weights[k] : 1.0) * local;
  }
  return s * w;
}

} // namespace pabf

#endif // PABF_FIELDS_HPP
