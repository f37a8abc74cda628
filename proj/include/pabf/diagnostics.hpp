#ifndef PABF_DIAGNOSTICS_HPP
#define PABF_DIAGNOSTICS_HPP

#include "pabf/core.hpp"
#include "pabf/fields.hpp"
#include "pabf/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace pabf {

struct VarianceSummary {
  double component1 = 0.0;
  double component2 = 0.0;
  double total() const { return component1 + component2; }
};

/// Streaming first and second moments across independent realizations of a
/// binned field.
class RealizationMoments {
public:
  RealizationMoments() = default;
  explicit RealizationMoments(const Grid2 &grid) : grid_(grid), sum_(grid.bin_count()), sum_sq_(grid.bin_count()) {}

  void add(const VectorField2 &f) {
    if (realizations_ == 0 && sum_.empty()) *this = RealizationMoments(f.grid);
    if (!(f.grid == grid_)) throw DomainError("realizations live on different grids");
    for (std::size_t k = 0; k < f.size(); ++k) {
      sum_[k] += f.values[k];
      sum_sq_[k] += Vec2{f.values[k].x * f.values[k].x, f.values[k].y * f.values[k].y};
    }
    ++realizations_;
  }

  std::size_t realizations() const { return realizations_; }

  /// (1/bins) sum_ij (1/K) sum_k F^k(i,j)^2 - (1/bins) sum_ij ((1/K) sum_k F^k(i,j))^2,
  /// per component.
  VarianceSummary variance() const {
    if (realizations_ < 2) throw DomainError("variance needs at least two realizations");
    const double k = static_cast<double>(realizations_);
    const double bins = static_cast<double>(sum_.size());
    double second1 = 0, second2 = 0, mean1 = 0, mean2 = 0;
    for (std::size_t b = 0; b < sum_.size(); ++b) {
      second1 += sum_sq_[b].x / k;
      second2 += sum_sq_[b].y / k;
      mean1 += (sum_[b].x / k) * (sum_[b].x / k);
      mean2 += (sum_[b].y / k) * (sum_[b].y / k);
    }
    return {std::max(0.0, (second1 - mean1) / bins), std::max(0.0, (second2 - mean2) / bins)};
  }

private:
  Grid2 grid_;
  std::vector<Vec2> sum_;
  std::vector<Vec2> sum_sq_;
  std::size_t realizations_ = 0;
};

inline VarianceSummary realization_variance(std::span<const VectorField2> fields) {
  if (fields.size() < 2) throw DomainError("variance needs at least two realizations");
  RealizationMoments m(fields.front().grid);
  for (const auto &f : fields) m.add(f);
  return m.variance();
}

/// sqrt( sum |est - ref|^2 / sum |ref|^2 ) over the bins flagged in `mask`
/// (an empty mask selects every bin).
inline double l2_gradient_error(const VectorField2 &est, const VectorField2 &ref,
                                std::span<const unsigned char> mask = {}) {
  if (!(est.grid == ref.grid)) throw DomainError("fields live on different grids");
  if (!mask.empty() && mask.size() != est.size()) throw DomainError("mask does not match the grid");
  double num = 0.0, den = 0.0;
  std::size_t used = 0;
  for (std::size_t k = 0; k < est.size(); ++k) {
    if (!mask.empty() && !mask[k]) continue;
    num += norm2(est.values[k] - ref.values[k]);
    den += norm2(ref.values[k]);
    ++used;
  }
  if (used == 0) throw DomainError("no valid bins to compare");
  if (!(den > 0.0)) throw DomainError("reference field vanishes on the compared bins");
  return std::sqrt(num / den);
}

struct Marginals {
  std::vector<double> first;  ///< distribution of xi_1 (summed over xi_2)
  std::vector<double> second; ///< distribution of xi_2
};

/// Marginals of a 2D occupancy histogram, normalized to sum to one.
inline Marginals marginal_histograms(const Grid2 &grid, std::span<const double> counts) {
  if (counts.size() != grid.bin_count()) throw DomainError("histogram does not match the grid");
  Marginals m{std::vector<double>(grid.n_bins, 0.0), std::vector<double>(grid.n_bins, 0.0)};
  double total = 0.0;
  for (int i = 0; i < grid.n_bins; ++i) {
    for (int j = 0; j < grid.n_bins; ++j) {
      const double c = counts[grid.bin_flat(i, j)];
      m.first[i] += c;
      m.second[j] += c;
      total += c;
    }
  }
  if (!(total > 0.0)) throw DomainError("marginals need at least one sample inside the domain");
  for (auto &v : m.first) v /= total;
  for (auto &v : m.second) v /= total;
  return m;
}

/// Marginals of the instantaneous occupancy of the given reaction-coordinate
/// values; samples outside the domain are ignored.
inline Marginals marginal_histograms(const Grid2 &grid, std::span<const Vec2> xi) {
  std::vector<double> counts(grid.bin_count(), 0.0);
  for (const auto &z : xi)
    if (auto b = grid.bin_index(z)) counts[grid.bin_flat(b->i, b->j)] += 1.0;
  return marginal_histograms(grid, counts);
}

inline double sup_distance_to_uniform(std::span<const double> p) {
  if (p.empty()) return 0.0;
  const double u = 1.0 / static_cast<double>(p.size());
  double d = 0.0;
  for (double v : p) d = std::max(d, std::abs(v - u));
  return d;
}

/// Two-threshold crossing counter: a transition is counted when the signal,
/// last seen below `low`, rises above `high`, or the reverse. Chatter between
/// the thresholds does not count.
class HysteresisCounter {
public:
  HysteresisCounter(double low, double high) : low_(low), high_(high) {
    if (!(low < high)) throw DomainError("hysteresis thresholds need low < high");
  }

  void push(double v) {
    if (v < low_) {
      if (state_ == State::high) ++count_;
      state_ = State::low;
    } else if (v > high_) {
      if (state_ == State::low) ++count_;
      state_ = State::high;
    }
  }

  std::int64_t count() const { return count_; }

private:
  enum class State { unknown, low, high };
  double low_, high_;
  State state_ = State::unknown;
  std::int64_t count_ = 0;
};

inline std::int64_t transition_count(std::span<const double> series, double low, double high) {
  HysteresisCounter c(low, high);
  for (double v : series) c.push(v);
  return c.count();
}

/// One time-stamped diagnostics record of a single run. Realization
/// variances need several runs and are filled in by the comparison driver.
struct DiagnosticsRow {
  double time = 0.0;
  double var_f = NAN;
  double var_grad_a = NAN;
  double l2_error_f = NAN;
  double l2_error_grad_a = NAN;
  Marginals marginals;
  std::int64_t transitions1 = 0;
  std::int64_t transitions2 = 0;
};

} // namespace pabf

#endif // PABF_DIAGNOSTICS_HPP
