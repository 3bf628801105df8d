#pragma once

#include "tripletq/core.hpp"

#include <optional>
#include <vector>

namespace tripletq {

/// A bounded region of R^p: an axis-aligned box or a finite point set.
class Domain {
 public:
  enum class Kind { kBox, kFiniteSet };

  static Domain box(Point lo, Point hi);
  static Domain unit_box(Eigen::Index p);
  static Domain finite_set(std::vector<Point> points);

  Kind kind() const noexcept { return kind_; }
  Eigen::Index dimension() const noexcept { return p_; }
  const Point& lo() const noexcept { return lo_; }
  const Point& hi() const noexcept { return hi_; }
  const std::vector<Point>& points() const noexcept { return points_; }

  double diameter() const;
  /// Box shrunk (or grown) by `factor` about its center.
  Domain scaled(double factor) const;
  bool contains(const Point& x, double slack = 0.0) const;

 private:
  Kind kind_ = Kind::kBox;
  Eigen::Index p_ = 0;
  Point lo_, hi_;
  std::vector<Point> points_;
};

enum class CoverMethod { kGrid, kGreedy };

struct CoverOptions {
  CoverMethod method = CoverMethod::kGrid;
  std::size_t max_centers = 1'000'000;
  /// Greedy on a box runs over a grid sample whose own covering radius is
  /// this fraction of eps; the selection threshold is eps minus that.
  double greedy_sample_fraction = 0.25;
};

struct EpsCover {
  std::vector<Point> centers;
  double radius = 0.0;
  /// Pairwise center separation guaranteed by greedy construction (0 for
  /// grids).
  double packing_radius = 0.0;
  CoverMethod method = CoverMethod::kGrid;
  Domain domain;

  std::size_t size() const noexcept { return centers.size(); }
};

/// Number of centers a grid cover of `domain` at radius eps would use:
/// ceil(side_i sqrt(p) / (2 eps)) per axis.
std::size_t grid_cover_size(const Domain& domain, double eps);

/// Throws ResourceError (carrying the required count) past the cap.
EpsCover build_cover(const Domain& domain, double eps,
                     const CoverOptions& options = {});

struct NearestCenter {
  std::size_t index = 0;
  const Point* center = nullptr;
};

/// argmin_c ||x - c||_2, smallest index among exact ties.
NearestCenter nearest_center(const EpsCover& cover, const Point& x);
std::size_t nearest_center_index(const std::vector<Point>& centers,
                                 const Point& x);

}  // namespace tripletq
