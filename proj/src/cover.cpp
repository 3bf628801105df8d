#include "tripletq/cover.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tripletq {

Domain Domain::box(Point lo, Point hi) {
  if (lo.size() == 0 || lo.size() != hi.size()) {
    throw InvalidInput("Domain::box: bounds must be nonempty and equal length");
  }
  require_finite(lo, "Domain::box lo");
  require_finite(hi, "Domain::box hi");
  if (!(lo.array() < hi.array()).all()) {
    throw InvalidInput("Domain::box: need lo < hi on every axis");
  }
  Domain d;
  d.kind_ = Kind::kBox;
  d.p_ = lo.size();
  d.lo_ = std::move(lo);
  d.hi_ = std::move(hi);
  return d;
}

Domain Domain::unit_box(Eigen::Index p) {
  return box(Point::Zero(p), Point::Ones(p));
}

Domain Domain::finite_set(std::vector<Point> points) {
  if (points.empty()) throw InvalidInput("Domain::finite_set: no points");
  const Eigen::Index p = points.front().size();
  for (const auto& x : points) {
    require_dimension(x, p, "Domain::finite_set");
    require_finite(x, "Domain::finite_set");
  }
  Domain d;
  d.kind_ = Kind::kFiniteSet;
  d.p_ = p;
  d.points_ = std::move(points);
  d.lo_ = d.points_.front();
  d.hi_ = d.points_.front();
  for (const auto& x : d.points_) {
    d.lo_ = d.lo_.cwiseMin(x);
    d.hi_ = d.hi_.cwiseMax(x);
  }
  return d;
}

double Domain::diameter() const {
  if (kind_ == Kind::kBox) return (hi_ - lo_).norm();
  double best = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    for (std::size_t j = i + 1; j < points_.size(); ++j) {
      best = std::max(best, (points_[i] - points_[j]).norm());
    }
  }
  return best;
}

Domain Domain::scaled(double factor) const {
  if (kind_ != Kind::kBox) throw InvalidInput("Domain::scaled: box only");
  if (!(factor > 0.0)) throw InvalidInput("Domain::scaled: factor must be > 0");
  const Point mid = 0.5 * (lo_ + hi_);
  const Point half = 0.5 * factor * (hi_ - lo_);
  return box(mid - half, mid + half);
}

bool Domain::contains(const Point& x, double slack) const {
  if (x.size() != p_) return false;
  if (kind_ == Kind::kBox) {
    return ((x.array() >= lo_.array() - slack) &&
            (x.array() <= hi_.array() + slack))
        .all();
  }
  return std::any_of(points_.begin(), points_.end(), [&](const Point& q) {
    return (q - x).norm() <= slack;
  });
}

namespace {

std::vector<long> grid_counts(const Domain& domain, double eps) {
  const double root_p = std::sqrt(double(domain.dimension()));
  std::vector<long> counts(static_cast<std::size_t>(domain.dimension()));
  for (Eigen::Index i = 0; i < domain.dimension(); ++i) {
    const double side = domain.hi()[i] - domain.lo()[i];
    const double k = std::ceil(side * root_p / (2.0 * eps));
    counts[static_cast<std::size_t>(i)] =
        static_cast<long>(std::min(std::max(k, 1.0), 1e15));
  }
  return counts;
}

double product(const std::vector<long>& counts) {
  double n = 1.0;
  for (long c : counts) n *= double(c);
  return n;
}

// Cell-centered lattice points, first axis fastest.
std::vector<Point> lattice(const Domain& domain, const std::vector<long>& counts) {
  const Eigen::Index p = domain.dimension();
  const auto total = static_cast<std::size_t>(product(counts));
  std::vector<Point> out;
  out.reserve(total);
  std::vector<long> idx(static_cast<std::size_t>(p), 0);
  for (std::size_t n = 0; n < total; ++n) {
    Point c(p);
    for (Eigen::Index i = 0; i < p; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const double step = (domain.hi()[i] - domain.lo()[i]) / double(counts[ui]);
      c[i] = domain.lo()[i] + (double(idx[ui]) + 0.5) * step;
    }
    out.push_back(std::move(c));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (++idx[i] < counts[i]) break;
      idx[i] = 0;
    }
  }
  return out;
}

// Farthest-first traversal from sample[0], stopping once every sample is
// within `threshold` of a chosen center.
std::vector<Point> farthest_first(const std::vector<Point>& sample,
                                  double threshold, std::size_t cap) {
  std::vector<Point> centers;
  std::vector<double> dist(sample.size(), kInf);
  std::size_t next = 0;
  while (true) {
    if (centers.size() >= cap) {
      std::ostringstream os;
      os << "build_cover: greedy cover exceeds the cap of " << cap
         << " centers";
      throw ResourceError(os.str(), cap + 1);
    }
    centers.push_back(sample[next]);
    const Point& c = centers.back();
    double far = -1.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
      dist[i] = std::min(dist[i], (sample[i] - c).norm());
      if (dist[i] > far) {
        far = dist[i];
        next = i;
      }
    }
    if (far <= threshold) break;
  }
  return centers;
}

}  // namespace

std::size_t grid_cover_size(const Domain& domain, double eps) {
  if (!(eps > 0.0)) throw InvalidInput("grid_cover_size: eps must be > 0");
  const double n = product(grid_counts(domain, eps));
  return n >= 1e18 ? static_cast<std::size_t>(1e18) : static_cast<std::size_t>(n);
}

EpsCover build_cover(const Domain& domain, double eps,
                     const CoverOptions& options) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw InvalidInput("build_cover: eps must be finite and > 0");
  }
  EpsCover cover;
  cover.radius = eps;
  cover.domain = domain;

  if (domain.kind() == Domain::Kind::kFiniteSet) {
    cover.method = CoverMethod::kGreedy;
    cover.centers = farthest_first(domain.points(), eps, options.max_centers);
    cover.packing_radius = eps;
    return cover;
  }

  cover.method = options.method;
  if (options.method == CoverMethod::kGrid) {
    const auto counts = grid_counts(domain, eps);
    const double n = product(counts);
    if (n > double(options.max_centers)) {
      std::ostringstream os;
      os << "build_cover: grid cover at eps=" << eps << " needs " << n
         << " centers, cap is " << options.max_centers;
      throw ResourceError(os.str(), static_cast<std::size_t>(std::min(n, 1e18)));
    }
    cover.centers = lattice(domain, counts);
    return cover;
  }

  const double f = options.greedy_sample_fraction;
  if (!(f > 0.0 && f < 1.0)) {
    throw InvalidInput("build_cover: greedy_sample_fraction must be in (0,1)");
  }
  const auto counts = grid_counts(domain, f * eps);
  const double sample_size = product(counts);
  if (sample_size > 64.0 * double(options.max_centers) || sample_size > 5e7) {
    std::ostringstream os;
    os << "build_cover: greedy sample of " << sample_size
       << " points is too large";
    throw ResourceError(os.str(), static_cast<std::size_t>(std::min(sample_size, 1e18)));
  }
  const double threshold = (1.0 - f) * eps;
  cover.centers = farthest_first(lattice(domain, counts), threshold,
                                 options.max_centers);
  cover.packing_radius = threshold;
  return cover;
}

std::size_t nearest_center_index(const std::vector<Point>& centers,
                                 const Point& x) {
  if (centers.empty()) throw InvalidInput("nearest_center: empty cover");
  const Eigen::Index p = centers.front().size();
  require_dimension(x, p, "nearest_center");
  std::size_t best = 0;
  double best_d = kInf;
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const double* c = centers[k].data();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < p; ++i) {
      const double t = x[i] - c[i];
      acc += t * t;
    }
    if (acc < best_d) {
      best_d = acc;
      best = k;
    }
  }
  return best;
}

NearestCenter nearest_center(const EpsCover& cover, const Point& x) {
  const std::size_t k = nearest_center_index(cover.centers, x);
  return {k, &cover.centers[k]};
}

}  // namespace tripletq
