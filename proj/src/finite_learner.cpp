#include "tripletq/finite_learner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tripletq {

namespace {

using Group = std::vector<std::size_t>;

class GroupSorter {
 public:
  GroupSorter(const Point& pivot, const std::vector<Point>& pool,
              CountingOracle& oracle)
      : pivot_(pivot), pool_(pool), oracle_(oracle) {}

  std::vector<Group> sort(std::vector<Group> items) {
    if (items.size() <= 1) return items;
    const auto mid = items.begin() + static_cast<std::ptrdiff_t>(items.size() / 2);
    std::vector<Group> left = sort({items.begin(), mid});
    std::vector<Group> right = sort({mid, items.end()});
    return merge(std::move(left), std::move(right));
  }

  std::uint64_t comparisons() const noexcept { return comparisons_; }

 private:
  Label compare(const Group& a, const Group& b) {
    ++comparisons_;
    return oracle_.label(pivot_, pool_[a.front()], pool_[b.front()]);
  }

  std::vector<Group> merge(std::vector<Group> left, std::vector<Group> right) {
    std::vector<Group> out;
    out.reserve(left.size() + right.size());
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < left.size() && j < right.size()) {
      switch (compare(left[i], right[j])) {
        case Label::kLess:
          out.push_back(std::move(left[i++]));
          break;
        case Label::kGreater:
          out.push_back(std::move(right[j++]));
          break;
        case Label::kEqual: {
          Group joined = std::move(left[i++]);
          joined.insert(joined.end(), right[j].begin(), right[j].end());
          ++j;
          out.push_back(std::move(joined));
          break;
        }
      }
    }
    for (; i < left.size(); ++i) out.push_back(std::move(left[i]));
    for (; j < right.size(); ++j) out.push_back(std::move(right[j]));
    return out;
  }

  const Point& pivot_;
  const std::vector<Point>& pool_;
  CountingOracle& oracle_;
  std::uint64_t comparisons_ = 0;
};

}  // namespace

std::vector<std::size_t> Ranking::flat_order() const {
  std::vector<std::size_t> out;
  for (const auto& g : groups) out.insert(out.end(), g.begin(), g.end());
  return out;
}

Ranking learn_ranking(const Point& pivot, const std::vector<Point>& others,
                      CountingOracle& oracle) {
  if (others.empty()) throw InvalidInput("learn_ranking: no points to rank");
  require_dimension(pivot, oracle.dimension(), "learn_ranking pivot");
  for (const auto& o : others) {
    require_dimension(o, oracle.dimension(), "learn_ranking point");
  }
  std::vector<Group> items;
  items.reserve(others.size());
  for (std::size_t k = 0; k < others.size(); ++k) items.push_back({k});

  GroupSorter sorter(pivot, others, oracle);
  Ranking r;
  r.groups = sorter.sort(std::move(items));
  for (auto& g : r.groups) std::sort(g.begin(), g.end());
  r.comparisons = sorter.comparisons();
  return r;
}

RankTable::RankTable(std::vector<Point> points,
                     std::vector<std::vector<int>> ranks)
    : points_(std::move(points)), ranks_(std::move(ranks)) {
  if (ranks_.size() != points_.size()) {
    throw InvalidInput("RankTable: rank rows must match point count");
  }
  for (std::size_t i = 0; i < ranks_.size(); ++i) {
    if (ranks_[i].size() != points_.size() || ranks_[i][i] != 0) {
      throw InvalidInput("RankTable: malformed rank row");
    }
  }
}

std::vector<std::vector<std::vector<std::size_t>>> RankTable::tie_groups()
    const {
  std::vector<std::vector<std::vector<std::size_t>>> out(size());
  for (std::size_t i = 0; i < size(); ++i) {
    std::vector<std::vector<std::size_t>> by_rank(size());
    for (std::size_t j = 0; j < size(); ++j) {
      if (j != i) by_rank[static_cast<std::size_t>(ranks_[i][j])].push_back(j);
    }
    for (auto& g : by_rank) {
      if (g.size() > 1) out[i].push_back(std::move(g));
    }
  }
  return out;
}

double RankTable::rank_distance(std::size_t i, std::size_t j) const {
  if (i >= size() || j >= size()) {
    std::ostringstream os;
    os << "rank_distance: index out of range (" << i << ", " << j
       << ") for table of size " << size();
    throw InvalidInput(os.str());
  }
  return ranks_[i][j];
}

Label RankTable::label(std::size_t i, std::size_t j, std::size_t k) const {
  return label_from_sign(rank_distance(i, j) - rank_distance(i, k));
}

RankTable learn_finite_distance(const std::vector<Point>& points,
                                CountingOracle& oracle) {
  const std::size_t n = points.size();
  if (n < 2) throw InvalidInput("learn_finite_distance: need at least 2 points");
  for (const auto& x : points) {
    require_dimension(x, oracle.dimension(), "learn_finite_distance");
    require_finite(x, "learn_finite_distance");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (points[i] == points[j]) {
        std::ostringstream os;
        os << "learn_finite_distance: duplicate points at indices " << i
           << " and " << j;
        throw InvalidInput(os.str());
      }
    }
  }

  const std::uint64_t start = oracle.query_count();
  std::vector<std::vector<int>> ranks(n, std::vector<int>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Group> items;
    items.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) items.push_back({j});
    }
    GroupSorter sorter(points[i], points, oracle);
    int rank = 1;
    for (const auto& g : sorter.sort(std::move(items))) {
      for (std::size_t k : g) ranks[i][k] = rank;
      ++rank;
    }
  }
  RankTable table(points, std::move(ranks));
  table.query_count = oracle.query_count() - start;
  return table;
}

double rank_distance(const RankTable& table, std::size_t i, std::size_t j) {
  return table.rank_distance(i, j);
}

std::uint64_t mergesort_comparison_bound(std::uint64_t m) noexcept {
  if (m <= 1) return 0;
  // C(m) = C(floor(m/2)) + C(ceil(m/2)) + m - 1
  return mergesort_comparison_bound(m / 2) +
         mergesort_comparison_bound(m - m / 2) + (m - 1);
}

std::uint64_t finite_query_ceiling(std::uint64_t n) noexcept {
  if (n < 2) return 0;
  const double m = double(n - 1);
  const auto sort_part =
      static_cast<std::uint64_t>(std::ceil(m * std::log2(std::max(m, 1.0))));
  return n * (sort_part + (n - 1));
}

}  // namespace tripletq
