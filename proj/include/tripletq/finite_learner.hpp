#pragma once

#include "tripletq/core.hpp"

#include <cstdint>
#include <vector>

namespace tripletq {

/// Ascending order of `others` by distance from a pivot. Elements whose
/// comparison returned an equal label share one group.
struct Ranking {
  std::vector<std::vector<std::size_t>> groups;  // indices into `others`
  std::uint64_t comparisons = 0;

  std::vector<std::size_t> flat_order() const;
};

/// Top-down mergesort over equivalence groups; one triplet query per
/// comparison (pivot, a, b).
Ranking learn_ranking(const Point& pivot, const std::vector<Point>& others,
                      CountingOracle& oracle);

/// Per-pivot dense ranks over a finite set. d_hat(i, j) = rank of j among
/// the points sorted by distance from i, starting at 1; d_hat(i, i) = 0.
class RankTable {
 public:
  RankTable() = default;
  RankTable(std::vector<Point> points, std::vector<std::vector<int>> ranks);

  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<Point>& points() const noexcept { return points_; }
  const std::vector<std::vector<int>>& ranks() const noexcept { return ranks_; }

  /// Groups of two or more indices sharing a rank, per pivot.
  std::vector<std::vector<std::vector<std::size_t>>> tie_groups() const;

  double rank_distance(std::size_t i, std::size_t j) const;
  int rank_unchecked(std::size_t i, std::size_t j) const noexcept {
    return ranks_[i][j];
  }

  /// sign(d_hat(i, j) - d_hat(i, k)).
  Label label(std::size_t i, std::size_t j, std::size_t k) const;

  std::uint64_t query_count = 0;

 private:
  std::vector<Point> points_;
  std::vector<std::vector<int>> ranks_;
};

/// Learns a rank table triplet-equivalent to the oracle on `points`.
/// Throws InvalidInput for n < 2 or duplicate points.
RankTable learn_finite_distance(const std::vector<Point>& points,
                                CountingOracle& oracle);

double rank_distance(const RankTable& table, std::size_t i, std::size_t j);

/// Worst-case comparisons of top-down mergesort on m elements.
std::uint64_t mergesort_comparison_bound(std::uint64_t m) noexcept;

/// n * (ceil((n-1) log2(n-1)) + (n-1)).
std::uint64_t finite_query_ceiling(std::uint64_t n) noexcept;

}  // namespace tripletq
