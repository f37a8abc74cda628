#ifndef PABF_GRID_HPP
#define PABF_GRID_HPP

#include "pabf/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>

namespace pabf {

enum class Boundary {
  neumann,  ///< rectangle [xi_min, xi_max]^2, confined by a wall potential outside
  periodic, ///< torus; bin indices wrap around
};

struct BinIndex {
  int i = 0;
  int j = 0;
  friend constexpr bool operator==(const BinIndex &, const BinIndex &) = default;
};

/// Square reaction-coordinate domain [xi_min, xi_max]^2 cut into n_bins x n_bins
/// equal bins. Nodes sit at xi_min + k * delta, k = 0..n_bins.
struct Grid2 {
  double xi_min = -0.2;
  double xi_max = 1.2;
  int n_bins = 50;
  Boundary boundary = Boundary::neumann;

  Grid2() = default;
  Grid2(double lo, double hi, int bins, Boundary b = Boundary::neumann)
      : xi_min(lo), xi_max(hi), n_bins(bins), boundary(b) {
    validate();
  }

  void validate() const {
    if (!(xi_max > xi_min)) throw DomainError("grid requires xi_max > xi_min");
    if (n_bins < 2) throw DomainError("grid requires at least 2 bins per axis");
  }

  double delta() const { return (xi_max - xi_min) / n_bins; }
  double length() const { return xi_max - xi_min; }
  bool periodic() const { return boundary == Boundary::periodic; }

  std::size_t bin_count() const { return static_cast<std::size_t>(n_bins) * n_bins; }
  std::size_t node_count() const { return static_cast<std::size_t>(n_bins + 1) * (n_bins + 1); }

  std::size_t bin_flat(int i, int j) const { return static_cast<std::size_t>(i) * n_bins + j; }
  std::size_t node_flat(int i, int j) const { return static_cast<std::size_t>(i) * (n_bins + 1) + j; }

  double node_coordinate(int k) const { return xi_min + k * delta(); }
  double bin_center(int k) const { return xi_min + (k + 0.5) * delta(); }
  Vec2 bin_center(const BinIndex &b) const { return {bin_center(b.i), bin_center(b.j)}; }

  /// Maps a periodic coordinate into [xi_min, xi_max).
  double wrap(double z) const {
    const double L = length();
    double w = z - L * std::floor((z - xi_min) / L);
    if (w >= xi_max) w -= L;
    return w;
  }

  /// Bin holding z, or nothing when z lies outside the domain (only possible
  /// on a Neumann grid).
  std::optional<BinIndex> bin_index(const Vec2 &z) const {
    const double d = delta();
    if (periodic()) {
      int i = static_cast<int>(std::floor((wrap(z.x) - xi_min) / d));
      int j = static_cast<int>(std::floor((wrap(z.y) - xi_min) / d));
      return BinIndex{std::min(i, n_bins - 1), std::min(j, n_bins - 1)};
    }
    const double fi = std::floor((z.x - xi_min) / d);
    const double fj = std::floor((z.y - xi_min) / d);
    if (fi < 0.0 || fj < 0.0 || fi >= n_bins || fj >= n_bins) return std::nullopt;
    return BinIndex{static_cast<int>(fi), static_cast<int>(fj)};
  }

  /// Nearest bin: the containing bin inside the domain, the boundary bin
  /// outside it.
  BinIndex clamped_bin(const Vec2 &z) const {
    if (auto b = bin_index(z)) return *b;
    const double d = delta();
    auto clamp_axis = [&](double v) {
      const double f = std::floor((v - xi_min) / d);
      if (!(f >= 0.0)) return 0;
      if (f >= n_bins) return n_bins - 1;
      return static_cast<int>(f);
    };
    return BinIndex{clamp_axis(z.x), clamp_axis(z.y)};
  }

  friend bool operator==(const Grid2 &, const Grid2 &) = default;
};

} // namespace pabf

#endif // PABF_GRID_HPP
