#include <doctest.h>

#include "tripletq/cover.hpp"
#include "tripletq/evaluation.hpp"

#include <random>

using namespace tripletq;

namespace {

Point p1(double v) { return Point::Constant(1, v); }

double brute_min_dist(const EpsCover& c, const Point& x) {
  double best = kInf;
  for (const Point& y : c.centers) best = std::min(best, (x - y).norm());
  return best;
}

double sampled_covering_radius(const EpsCover& c, const Domain& box,
                               std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (const Point& x : random_points(n, box, rng)) {
    worst = std::max(worst, brute_min_dist(c, x));
  }
  // Box vertices.
  const Eigen::Index p = box.dimension();
  for (std::uint64_t mask = 0; mask < (1ULL << p); ++mask) {
    Point v(p);
    for (Eigen::Index i = 0; i < p; ++i) {
      v[i] = (mask >> i) & 1 ? box.hi()[i] : box.lo()[i];
    }
    worst = std::max(worst, brute_min_dist(c, v));
  }
  return worst;
}

}  // namespace

TEST_CASE("1-D grid cover") {
  const Domain box = Domain::unit_box(1);
  // Spacing 2 eps / sqrt(p): radius 0.25 needs two cells.
  const EpsCover c = build_cover(box, 0.25);
  REQUIRE(c.size() == 2);
  CHECK(c.centers[0][0] == doctest::Approx(0.25));
  CHECK(c.centers[1][0] == doctest::Approx(0.75));
  CHECK(sampled_covering_radius(c, box, 1000, 1) <= 0.25 + 1e-12);

  const EpsCover fine = build_cover(box, 0.125);
  REQUIRE(fine.size() == 4);
  const double expect[] = {0.125, 0.375, 0.625, 0.875};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(fine.centers[i][0] == doctest::Approx(expect[i]));
  }
  CHECK(grid_cover_size(box, 0.125) == 4);
}

TEST_CASE("grid covers in several dimensions") {
  for (Eigen::Index p : {2, 3}) {
    Point lo = Point::Constant(p, -1.0);
    Point hi = Point::Constant(p, 0.5);
    hi[0] = 2.0;
    const Domain box = Domain::box(lo, hi);
    for (double eps : {0.3, 0.17}) {
      const EpsCover c = build_cover(box, eps);
      CHECK(c.size() == grid_cover_size(box, eps));
      CHECK(sampled_covering_radius(c, box, 100000 / (p * 4), 3) <= eps + 1e-12);
    }
  }
}

TEST_CASE("single-point finite set") {
  const Domain d = Domain::finite_set({Point(Eigen::Vector2d(0.3, 0.4))});
  for (double eps : {1e-3, 1.0, 10.0}) {
    const EpsCover c = build_cover(d, eps);
    REQUIRE(c.size() == 1);
    CHECK(c.centers[0].isApprox(Eigen::Vector2d(0.3, 0.4)));
  }
}

TEST_CASE("greedy cover of the unit square") {
  const Domain box = Domain::unit_box(2);
  CoverOptions opt;
  opt.method = CoverMethod::kGreedy;
  const EpsCover c = build_cover(box, 0.3, opt);
  CHECK(c.method == CoverMethod::kGreedy);
  CHECK(sampled_covering_radius(c, box, 10000, 4) <= 0.3);
  // Packing: pairwise distances exceed the selection threshold.
  double closest = kInf;
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      closest = std::min(closest, (c.centers[i] - c.centers[j]).norm());
    }
  }
  CHECK(closest > c.packing_radius);
}

TEST_CASE("greedy cover of a finite set is exhaustive and packs at eps") {
  std::mt19937_64 rng(8);
  const std::vector<Point> pts = random_points(400, Domain::unit_box(3), rng);
  const Domain d = Domain::finite_set(pts);
  const EpsCover c = build_cover(d, 0.2);
  for (const Point& x : pts) CHECK(brute_min_dist(c, x) <= 0.2);
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      CHECK((c.centers[i] - c.centers[j]).norm() > 0.2);
    }
  }
}

TEST_CASE("cap exceeded reports the required count") {
  CoverOptions opt;
  opt.max_centers = 100;
  try {
    build_cover(Domain::unit_box(2), 0.01, opt);
    FAIL("expected ResourceError");
  } catch (const ResourceError& e) {
    CHECK(e.required() == grid_cover_size(Domain::unit_box(2), 0.01));
    CHECK(e.required() > 100);
  }
  CHECK_THROWS_AS(build_cover(Domain::unit_box(2), 0.0), InvalidInput);
}

TEST_CASE("nearest_center") {
  EpsCover c;
  c.centers = {p1(0), p1(1)};
  CHECK(nearest_center(c, p1(0.4)).index == 0);
  CHECK(nearest_center(c, p1(0.5)).index == 0);
  CHECK(nearest_center(c, p1(0.6)).index == 1);
  CHECK(*nearest_center(c, p1(0.6)).center == p1(1));
  EpsCover empty;
  CHECK_THROWS_AS(nearest_center(empty, p1(0)), InvalidInput);
  CHECK_THROWS_AS(nearest_center(c, Point::Zero(2)), InvalidInput);
}

TEST_CASE("nearest_center agrees with a linear scan and is idempotent") {
  const Domain box = Domain::unit_box(2);
  CoverOptions opt;
  opt.method = CoverMethod::kGreedy;
  const EpsCover c = build_cover(box, 0.15, opt);
  std::mt19937_64 rng(12);
  for (const Point& x : random_points(1000, box, rng)) {
    const std::size_t k = nearest_center(c, x).index;
    CHECK((x - c.centers[k]).norm() == doctest::Approx(brute_min_dist(c, x)));
  }
  for (std::size_t k = 0; k < c.size(); ++k) {
    CHECK(nearest_center(c, c.centers[k]).index == k);
  }
}

TEST_CASE("domain helpers") {
  const Domain box = Domain::box(Eigen::Vector2d(0, 0), Eigen::Vector2d(2, 4));
  const Domain half = box.scaled(0.5);
  CHECK(half.lo().isApprox(Eigen::Vector2d(0.5, 1.0)));
  CHECK(half.hi().isApprox(Eigen::Vector2d(1.5, 3.0)));
  CHECK(box.contains(Eigen::Vector2d(1, 1)));
  CHECK_FALSE(box.contains(Eigen::Vector2d(3, 1)));
  CHECK(box.diameter() == doctest::Approx(std::sqrt(20.0)));
  CHECK_THROWS_AS(Domain::box(Eigen::Vector2d(0, 0), Eigen::Vector2d(0, 1)),
                  InvalidInput);
}
