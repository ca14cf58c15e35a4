#pragma once

// Binned estimators of m(p), s(p) and w(p) from simulation output.
//
// The unit interval is cut into N half-open bins [i/N, (i+1)/N). The density
// estimate at bin i is N times the average snapshot count in the bin (PASTA
// sampling). Sojourn and waiting estimates are per-bin averages over
// customers. Accumulators are (sum, count) monoids, so replications can be
// estimated independently and merged.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "prioq/extended_real.hpp"
#include "prioq/registry.hpp"
#include "prioq/simulate.hpp"

namespace prioq {

class BinGrid {
public:
  /// delta must be the reciprocal of an integer >= 2.
  explicit BinGrid(double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("BinGrid: delta must lie in (0, 1)");
    const double n = std::round(1.0 / delta);
    if (std::abs(n * delta - 1.0) > 1e-12)
      throw std::invalid_argument("BinGrid: delta must be the reciprocal of an integer");
    bins_ = static_cast<std::size_t>(n);
  }

  static BinGrid with_bins(std::size_t n) {
    if (n < 2) throw std::invalid_argument("BinGrid: need at least two bins");
    return BinGrid(n, 0);
  }

  std::size_t size() const { return bins_; }
  double delta() const { return 1.0 / static_cast<double>(bins_); }
  double lower(std::size_t i) const { return static_cast<double>(i) / static_cast<double>(bins_); }
  double upper(std::size_t i) const { return static_cast<double>(i + 1) / static_cast<double>(bins_); }
  double center(std::size_t i) const { return (static_cast<double>(i) + 0.5) / static_cast<double>(bins_); }
  std::vector<double> centers() const {
    std::vector<double> out(bins_);
    for (std::size_t i = 0; i < bins_; ++i) out[i] = center(i);
    return out;
  }

  /// Bin holding p. A priority of exactly 1 folds into the last bin.
  std::size_t bin_of(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("BinGrid::bin_of: p outside [0, 1]");
    auto i = static_cast<std::size_t>(p * static_cast<double>(bins_));
    if (i >= bins_) i = bins_ - 1;
    // Agree with lower()/upper() at floating-point edges.
    if (i > 0 && p < lower(i)) --i;
    else if (i + 1 < bins_ && p >= upper(i)) ++i;
    return i;
  }

  friend bool operator==(const BinGrid&, const BinGrid&) = default;

private:
  BinGrid(std::size_t n, int) : bins_(n) {}
  std::size_t bins_ = 0;
};

/// Per-bin values with piecewise-linear interpolation between centers.
struct CurveEstimate {
  BinGrid grid;
  std::vector<CurveValue> values;

  friend bool operator==(const CurveEstimate&, const CurveEstimate&) = default;
};

enum class CensoredPolicy {
  Infinite,  // any censored customer makes its bin +inf
  Exclude,   // censored customers are dropped
};

// ----------------------------------------------------------------------------
// Density

class DensityAccumulator {
public:
  explicit DensityAccumulator(BinGrid grid) : grid_(grid), sums_(grid.size(), 0.0) {}

  /// One observation from a sorted-or-not list of priorities.
  void observe(std::span<const double> priorities) {
    for (double p : priorities) sums_[grid_.bin_of(p)] += 1.0;
    ++observations_;
  }

  /// One observation straight from the live registry.
  void observe(const PriorityRegistry& registry) {
    const std::size_t n = grid_.size();
    std::size_t below = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const std::size_t upto = registry.count_lt(grid_.upper(i));
      sums_[i] += static_cast<double>(upto - below);
      below = upto;
    }
    sums_[n - 1] += static_cast<double>(registry.size() - below);
    ++observations_;
  }

  void operator()(double, const PriorityRegistry& registry) { observe(registry); }

  void merge(const DensityAccumulator& other) {
    if (!(other.grid_ == grid_)) throw std::invalid_argument("DensityAccumulator::merge: grid mismatch");
    for (std::size_t i = 0; i < sums_.size(); ++i) sums_[i] += other.sums_[i];
    observations_ += other.observations_;
  }

  std::uint64_t observations() const { return observations_; }
  const BinGrid& grid() const { return grid_; }
  /// Average count in bin i (before scaling by N).
  double bin_average(std::size_t i) const { return sums_[i] / static_cast<double>(observations_); }

  CurveEstimate curve() const {
    if (observations_ == 0) throw std::invalid_argument("density estimate needs at least one snapshot");
    CurveEstimate out{grid_, std::vector<CurveValue>(grid_.size())};
    const double scale = static_cast<double>(grid_.size());
    for (std::size_t i = 0; i < grid_.size(); ++i) out.values[i] = ExtendedReal::finite(scale * bin_average(i));
    return out;
  }

private:
  BinGrid grid_;
  std::vector<double> sums_;
  std::uint64_t observations_ = 0;
};

// ----------------------------------------------------------------------------
// Sojourn and waiting

enum class DelayKind { Sojourn, Waiting };

class DelayAccumulator {
public:
  DelayAccumulator(BinGrid grid, DelayKind kind)
      : grid_(grid), kind_(kind), sums_(grid.size(), 0.0), counts_(grid.size(), 0),
        censored_(grid.size(), 0) {}

  void add(const CustomerRecord& r) {
    const std::size_t i = grid_.bin_of(r.priority);
    if (r.censored()) {
      ++censored_[i];
      return;
    }
    sums_[i] += kind_ == DelayKind::Sojourn ? *r.sojourn() : *r.waiting();
    ++counts_[i];
  }

  void add(std::span<const CustomerRecord> records) {
    for (const auto& r : records) add(r);
  }

  void merge(const DelayAccumulator& other) {
    if (!(other.grid_ == grid_) || other.kind_ != kind_)
      throw std::invalid_argument("DelayAccumulator::merge: mismatched accumulators");
    for (std::size_t i = 0; i < sums_.size(); ++i) {
      sums_[i] += other.sums_[i];
      counts_[i] += other.counts_[i];
      censored_[i] += other.censored_[i];
    }
  }

  const BinGrid& grid() const { return grid_; }
  std::uint64_t count(std::size_t i) const { return counts_[i]; }
  std::uint64_t censored(std::size_t i) const { return censored_[i]; }

  CurveEstimate curve(CensoredPolicy policy) const {
    CurveEstimate out{grid_, std::vector<CurveValue>(grid_.size())};
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      if (policy == CensoredPolicy::Infinite && censored_[i] > 0)
        out.values[i] = ExtendedReal::infinity();
      else if (counts_[i] > 0)
        out.values[i] = ExtendedReal::finite(sums_[i] / static_cast<double>(counts_[i]));
    }
    return out;
  }

private:
  BinGrid grid_;
  DelayKind kind_;
  std::vector<double> sums_;
  std::vector<std::uint64_t> counts_;
  std::vector<std::uint64_t> censored_;
};

// ----------------------------------------------------------------------------
// One-shot estimators

inline CurveEstimate estimate_density(const SnapshotSeries& snapshots, const BinGrid& grid) {
  if (snapshots.empty()) throw std::invalid_argument("estimate_density: empty snapshot series");
  DensityAccumulator acc(grid);
  for (const auto& s : snapshots) acc.observe(s.priorities);
  return acc.curve();
}

inline CurveEstimate estimate_sojourn(std::span<const CustomerRecord> records, const BinGrid& grid,
                                      CensoredPolicy policy = CensoredPolicy::Infinite) {
  DelayAccumulator acc(grid, DelayKind::Sojourn);
  acc.add(records);
  return acc.curve(policy);
}

inline CurveEstimate estimate_waiting(std::span<const CustomerRecord> records, const BinGrid& grid,
                                      CensoredPolicy policy = CensoredPolicy::Infinite) {
  DelayAccumulator acc(grid, DelayKind::Waiting);
  acc.add(records);
  return acc.curve(policy);
}

/// Linear interpolation between neighbouring centers, constant beyond the
/// outermost centers. Undefined if a neighbour is undefined, +inf if a
/// neighbour is +inf.
inline CurveValue evaluate(const CurveEstimate& curve, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("evaluate: p outside [0, 1]");
  const auto& grid = curve.grid;
  const std::size_t n = grid.size();
  if (p <= grid.center(0)) return curve.values.front();
  if (p >= grid.center(n - 1)) return curve.values.back();

  auto i = static_cast<std::size_t>(std::floor(p * static_cast<double>(n) - 0.5));
  if (i > n - 2) i = n - 2;
  if (p < grid.center(i)) --i;
  else if (p >= grid.center(i + 1)) ++i;
  if (p == grid.center(i)) return curve.values[i];

  const auto& left = curve.values[i];
  const auto& right = curve.values[i + 1];
  if (!left || !right) return std::nullopt;
  if (left->is_infinite() || right->is_infinite()) return ExtendedReal::infinity();
  const double t = (p - grid.center(i)) / (grid.center(i + 1) - grid.center(i));
  return ExtendedReal::finite(left->value() + t * (right->value() - left->value()));
}

}  // namespace prioq
