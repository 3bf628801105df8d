#include <doctest.h>

#include "tripletq/evaluation.hpp"
#include "tripletq/maha_learner.hpp"

#include <cmath>
#include <random>

using namespace tripletq;

namespace {

Matrix diag(std::initializer_list<double> v) {
  Eigen::VectorXd d(Eigen::Index(v.size()));
  Eigen::Index i = 0;
  for (double x : v) d[i++] = x;
  return d.asDiagonal();
}

CountingOracle maha_oracle(const Matrix& m) {
  return CountingOracle(GroundTruth::sqrt_mahalanobis(m));
}

Eigen::VectorXd exact_coefficients(const Matrix& m, const ExtendedBasis& b) {
  const double yy = b.anchor_vector().dot(m * b.anchor_vector());
  Eigen::VectorXd c(Eigen::Index(b.vectors.size()));
  for (std::size_t i = 0; i < b.vectors.size(); ++i) {
    c[Eigen::Index(i)] = b.vectors[i].dot(m * b.vectors[i]) / yy;
  }
  return c;
}

}  // namespace

TEST_CASE("symmetric vectorization preserves the Frobenius product") {
  std::mt19937_64 rng(1);
  const Matrix a = random_psd(4, 3.0, rng);
  const Matrix b = random_psd(4, 7.0, rng);
  CHECK(sym_vec(a).dot(sym_vec(b)) ==
        doctest::Approx((a.array() * b.array()).sum()));
  CHECK(sym_unvec(sym_vec(a), 4).isApprox(a));
  CHECK(sym_dim(5) == 15);
  CHECK_THROWS_AS(sym_unvec(Eigen::VectorXd::Zero(4), 3), InvalidInput);
}

TEST_CASE("extended basis") {
  const ExtendedBasis b = ExtendedBasis::build(4, 2);
  CHECK(b.vectors.size() == 10);
  for (const Point& u : b.vectors) CHECK(u.norm() == doctest::Approx(1.0));
  CHECK(b.anchor_vector() == Point::Unit(4, 2));
  CHECK_THROWS_AS(ExtendedBasis::build(3, 3), InvalidInput);
}

TEST_CASE("design matrix rank and conditioning") {
  for (Eigen::Index p = 2; p <= 20; ++p) {
    const Matrix d = design_matrix(p);
    CHECK(d.rows() == sym_dim(p));
    Eigen::JacobiSVD<Matrix> svd(d);
    const Eigen::VectorXd s = svd.singularValues();
    const double smin = s.minCoeff();
    CHECK(smin * smin >= design_conditioning_floor(p) - 1e-12);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) rank += s[i] > 1e-10;
    CHECK(rank == sym_dim(p));
  }
  CHECK(design_conditioning_floor(2) == doctest::Approx(0.25));
  CHECK(design_conditioning_floor(5) == doctest::Approx(1.0 / 9.0));
}

TEST_CASE("find_anchor") {
  {
    CountingOracle o = maha_oracle(diag({1, 0.25}));
    CHECK(find_anchor(o, 2, Point::Zero(2)) == 0);
    CHECK(o.query_count() == 1);
  }
  {
    CountingOracle o = maha_oracle(Matrix::Identity(3, 3));
    CHECK(find_anchor(o, 3, Point::Zero(3)) == 0);
    CHECK(o.query_count() == 2);
  }
  {
    CountingOracle o = maha_oracle(diag({0.2, 0.9, 0.5}));
    CHECK(find_anchor(o, 3, Point::Zero(3)) == 1);
  }
}

TEST_CASE("binary_search_coeff") {
  const QueryFrame frame{Point::Zero(2), 1.0};
  {
    CountingOracle o = maha_oracle(diag({1, 0.25}));
    const auto c = binary_search_coeff(o, frame, Point::Unit(2, 0),
                                       Point::Unit(2, 1), 0.01);
    CHECK(c.value >= 0.24);
    CHECK(c.value <= 0.26);
    CHECK(c.queries == o.query_count());
  }
  {
    CountingOracle o = maha_oracle(diag({1, 0.25}));
    const auto c = binary_search_coeff(o, frame, Point::Unit(2, 0),
                                       Point::Unit(2, 0), 0.01);
    CHECK(c.value == 1.0);
    CHECK(c.exact);
    CHECK(c.queries == 1);
  }
  {
    CountingOracle o = maha_oracle(Matrix::Identity(2, 2));
    const Point u = Point::Ones(2) / std::sqrt(2.0);
    const auto c = binary_search_coeff(o, frame, Point::Unit(2, 0), u, 1e-3);
    CHECK(std::abs(c.value - 1.0) <= 1e-3);
  }
  CountingOracle o = maha_oracle(Matrix::Identity(2, 2));
  CHECK_THROWS_AS(binary_search_coeff(o, frame, Point::Unit(2, 0),
                                      Point::Unit(2, 1), 0.0),
                  InvalidInput);
}

TEST_CASE("binary search keeps c* bracketed") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix m = random_psd(3, 10.0, rng);
    CountingOracle o = maha_oracle(m);
    const ExtendedBasis b = ExtendedBasis::build(3, 0);
    const Point& y = b.anchor_vector();
    for (const Point& u : b.vectors) {
      const double cstar = u.dot(m * u) / y.dot(m * y);
      bool bracketed = true;
      BinarySearchOptions opts;
      opts.observer = [&](const BinarySearchState& s) {
        if (std::isfinite(s.hi)) bracketed &= s.lo <= cstar && cstar <= s.hi;
      };
      const auto c = binary_search_coeff(o, QueryFrame{Point::Zero(3), 1.0}, y,
                                         u, 1e-6, opts);
      CHECK(bracketed);
      CHECK(std::abs(c.value - cstar) <= 1e-6);
    }
  }
}

TEST_CASE("binary search iteration cap") {
  CountingOracle o = maha_oracle(diag({1, 0.3}));
  BinarySearchOptions opts;
  opts.max_iterations = 5;
  CHECK_THROWS_AS(binary_search_coeff(o, QueryFrame{Point::Zero(2), 1.0},
                                      Point::Unit(2, 0), Point::Unit(2, 1),
                                      1e-9, opts),
                  NumericError);
}

TEST_CASE("solve_model") {
  const Matrix star = diag({2, 3}) / 3.0;
  const ExtendedBasis b = ExtendedBasis::build(2, 1);
  const MahaModel m = solve_model(exact_coefficients(star, b), b);
  CHECK((m.M - star).norm() <= 1e-10);

  const ExtendedBasis b3 = ExtendedBasis::build(3, 0);
  const MahaModel id =
      solve_model(exact_coefficients(Matrix::Identity(3, 3), b3), b3);
  CHECK((id.M - Matrix::Identity(3, 3)).norm() <= 1e-12);
  // Anchor row pinned before projection.
  CHECK(id.M_unprojected(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("solve_model error amplification is bounded by conditioning") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1e-3, 1e-3);
  for (Eigen::Index p : {2, 3, 5}) {
    const Matrix star = random_psd(p, 5.0, rng);
    const ExtendedBasis b = ExtendedBasis::build(p, 0);
    const double tau = 1.0 / star(0, 0);
    Eigen::VectorXd delta(sym_dim(p));
    for (Eigen::Index i = 0; i < delta.size(); ++i) delta[i] = i == 0 ? 0 : u(rng);
    const MahaModel m = solve_model(exact_coefficients(star, b) + delta, b);
    const double bound =
        std::sqrt(1.0 / design_conditioning_floor(p)) * delta.norm();
    CHECK((m.M_unprojected - tau * star).norm() <= bound + 1e-12);
    CHECK((m.M - tau * star).norm() <= bound + 1e-12);
  }
}

TEST_CASE("PSD projection") {
  Matrix a(2, 2);
  a << 1, 2, 2, 1;  // eigenvalues 3, -1
  const Matrix p = project_psd(a);
  Eigen::SelfAdjointEigenSolver<Matrix> es(p);
  CHECK(es.eigenvalues().minCoeff() >= -1e-14);
  CHECK(p.isApprox(Matrix::Constant(2, 2, 1.5)));
  std::mt19937_64 rng(2);
  const Matrix psd = random_psd(4, 8.0, rng);
  CHECK((project_psd(psd) - psd).norm() <= 1e-12);
}

TEST_CASE("learn_mahalanobis on the identity") {
  CountingOracle o = maha_oracle(Matrix::Identity(3, 3));
  const MahaModel m = learn_mahalanobis(o, 3, 1e-3);
  CHECK((m.M - Matrix::Identity(3, 3)).norm() <= 1e-3);
  CHECK(m.query_count == o.query_count());
  CHECK(m.eps_alg == doctest::Approx(1e-3 / 18.0));
}

TEST_CASE("learn_mahalanobis random targets within error and budget") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix star = random_psd(4, 10.0, rng);
    CountingOracle o = maha_oracle(star);
    const MahaModel m = learn_mahalanobis(o, 4, 1e-3);
    const ScaledError err =
        frobenius_error(m.M, star, ScaleConvention::kMaxDiagonal);
    CHECK(err.error <= 1e-3);
    CHECK(double(m.query_count) <= mahalanobis_query_budget(4, 10.0, 1e-3));
  }
  CHECK(mahalanobis_query_budget(4, 10.0, 1e-3) ==
        doctest::Approx(10.0 * std::log2(2.0 * 16.0 * 100.0 / 1e-3) + 4.0));
}

TEST_CASE("rank-deficient target") {
  CountingOracle o = maha_oracle(diag({1, 0}));
  const MahaModel m = learn_mahalanobis(o, 2, 1e-3);
  CHECK(frobenius_error(m.M, diag({1, 0}), ScaleConvention::kMaxDiagonal)
            .error <= 1e-3);
  CHECK(condition_number(diag({1, 0})) == doctest::Approx(1.0));
  CHECK(condition_number(diag({4, 1, 0})) == doctest::Approx(4.0));
}

TEST_CASE("scale invariance of the query sequence") {
  std::mt19937_64 rng(5);
  const Matrix star = random_psd(3, 6.0, rng);
  CountingOracle a = maha_oracle(star);
  CountingOracle b = maha_oracle(7.5 * star);
  const MahaModel ma = learn_mahalanobis(a, 3, 1e-4);
  const MahaModel mb = learn_mahalanobis(b, 3, 1e-4);
  CHECK(ma.query_count == mb.query_count);
  CHECK(ma.M == mb.M);
  CHECK(ma.coefficients == mb.coefficients);
}

TEST_CASE("learn_local_hessian on exact quadratics") {
  const Matrix h = diag({1, 0.5});
  SmoothnessParams sp;
  sp.eig_lo = 0.5;
  sp.eig_hi = 1.0;
  sp.M_third = 0.0;
  sp.L_hess = 0.0;
  CountingOracle o(GroundTruth::squared_mahalanobis(h));
  const MahaModel m = learn_local_hessian(o, Point::Zero(2), 1e-2, sp);
  CHECK(m.rho == doctest::Approx(1e-4));
  const ScaledError err = frobenius_error(m.M, h, ScaleConvention::kMaxDiagonal);
  CHECK(err.error <= 1.5e-2);
  CHECK(double(m.query_count) <= hessian_query_budget(2, 0.5, 1.0, 1e-2));
}

TEST_CASE("flat varying-hessian matches the noiseless path") {
  std::mt19937_64 rng(6);
  const Matrix a = random_rotation_of(Eigen::Vector3d(0.5, 0.7, 1.0), rng);
  const GroundTruth flat = GroundTruth::varying_hessian(a, 0.0);
  SmoothnessParams sp;
  sp.eig_lo = 0.5;
  sp.eig_hi = 1.0;
  sp.M_third = 0.0;
  sp.L_hess = 0.0;
  CountingOracle noisy(flat);
  const MahaModel local =
      learn_local_hessian(noisy, Point::Constant(3, 0.4), 1e-3, sp);
  CountingOracle clean(GroundTruth::sqrt_mahalanobis(a));
  const MahaModel global = learn_mahalanobis(clean, 3, 1e-3);
  CHECK((local.M - global.M).norm() <= 1e-3);
}

TEST_CASE("learn_local_hessian with curvature variation") {
  std::mt19937_64 rng(10);
  const Matrix a = random_rotation_of(Eigen::Vector2d(0.5, 1.0), rng);
  const GroundTruth t = GroundTruth::varying_hessian(a, 0.1, 1.0, 0.2);
  const SmoothnessParams sp = fixture_params(t, Domain::unit_box(2));
  for (double eps : {1e-2, 3e-3}) {
    REQUIRE(eps < hessian_eps_limit(sp, 2));
    for (int trial = 0; trial < 5; ++trial) {
      const Point x = random_points(1, Domain::unit_box(2), rng).front();
      CountingOracle o(t);
      const MahaModel m = learn_local_hessian(o, x, eps, sp);
      const ScaledError err = frobenius_error(m.M, t.hessian(x),
                                              ScaleConvention::kAnchor, m.anchor);
      CHECK(err.error <= eps);
      CHECK(err.tau >= 1.0 / sp.eig_hi);
      CHECK(err.tau <= 1.0 / sp.eig_lo);
    }
  }
}

TEST_CASE("admissible range for local recovery") {
  SmoothnessParams sp;
  sp.eig_lo = 0.5;
  sp.eig_hi = 1.0;
  sp.M_third = 2.0;
  const double limit = hessian_eps_limit(sp, 2);
  CHECK(limit == doctest::Approx(3.0 * 0.125 / (2.0 * 2.0 * std::pow(2.0, 1.5))));
  CountingOracle o(GroundTruth::squared_mahalanobis(Matrix::Identity(2, 2)));
  CHECK_THROWS_AS(learn_local_hessian(o, Point::Zero(2), 2.0 * limit, sp),
                  ParameterError);
  HessianOptions opts;
  opts.rho = 1e-3;
  CHECK_NOTHROW(learn_local_hessian(o, Point::Zero(2), 2.0 * limit, sp, opts));
}
