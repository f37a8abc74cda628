#ifndef PABF_FORCE_ESTIMATOR_HPP
#define PABF_FORCE_ESTIMATOR_HPP

#include "pabf/core.hpp"
#include "pabf/fields.hpp"
#include "pabf/grid.hpp"
#include "pabf/reaction_coordinate.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace pabf {

/// Running per-bin sums of local mean force samples. The estimate in bin
/// (i, j) is the flat average of every sample deposited there so far, over
/// all replicas and all past times.
class BinnedForceAccumulator {
public:
  explicit BinnedForceAccumulator(const Grid2 &grid)
      : grid_(grid), sum_(grid.bin_count()), carry_(grid.bin_count()), count_(grid.bin_count(), 0) {
    grid_.validate();
  }

  const Grid2 &grid() const { return grid_; }

  /// Adds f to the bin of z. Returns false (and leaves every bin untouched)
  /// when z lies outside the domain.
  bool deposit(const Vec2 &z, const Vec2 &f) {
    if (!is_finite(f)) throw DomainError("non-finite local mean force sample");
    if (keep_log_) log_.push_back({z, f});
    const auto bin = grid_.bin_index(z);
    if (!bin) {
      ++outside_;
      return false;
    }
    const std::size_t k = grid_.bin_flat(bin->i, bin->j);
    add(sum_[k].x, carry_[k].x, f.x);
    add(sum_[k].y, carry_[k].y, f.y);
    ++count_[k];
    return true;
  }

  /// Deposits a batch in order; callers pass samples sorted by replica index.
  void deposit(std::span<const LocalMeanForceSample> samples) {
    for (const auto &s : samples) deposit(s.z, s.f);
  }

  /// Per-bin sum / count; unvisited bins report zero and are masked invalid.
  VectorField2 mean_force_field() const {
    VectorField2 out(grid_);
    for (std::size_t k = 0; k < count_.size(); ++k) {
      if (count_[k] == 0) {
        out.valid[k] = 0;
        continue;
      }
      const double n = static_cast<double>(count_[k]);
      out.values[k] = {(sum_[k].x + carry_[k].x) / n, (sum_[k].y + carry_[k].y) / n};
    }
    return out;
  }

  std::uint64_t count(int i, int j) const { return count_[grid_.bin_flat(i, j)]; }
  std::span<const std::uint64_t> counts() const { return count_; }
  std::vector<double> counts_as_double() const { return {count_.begin(), count_.end()}; }

  std::uint64_t inside_total() const {
    std::uint64_t s = 0;
    for (auto c : count_) s += c;
    return s;
  }
  std::uint64_t outside_total() const { return outside_; }
  std::uint64_t attempted() const { return inside_total() + outside_; }

  /// Keeps every deposited sample (for brute-force checks in tests).
  void retain_log(bool on) { keep_log_ = on; }
  std::span<const LocalMeanForceSample> log() const { return log_; }

private:
  // Neumaier compensated summation; counts reach 1e7 per bin at desk scale.
  static void add(double &sum, double &carry, double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      carry += (sum - t) + v;
    else
      carry += (v - t) + sum;
    sum = t;
  }

  Grid2 grid_;
  std::vector<Vec2> sum_;
  std::vector<Vec2> carry_;
  std::vector<std::uint64_t> count_;
  std::uint64_t outside_ = 0;
  bool keep_log_ = false;
  std::vector<LocalMeanForceSample> log_;
};

} // namespace pabf

#endif // PABF_FORCE_ESTIMATOR_HPP
