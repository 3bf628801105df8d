#include "tripletq/smooth_learners.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tripletq {

double additive_radius(AdditiveRadiusRule rule, double omega,
                       const SmoothnessParams& params, Eigen::Index p) {
  if (!(omega > 0.0)) throw ParameterError("additive_radius: omega must be > 0");
  params.validate();
  switch (rule) {
    case AdditiveRadiusRule::kHolder:
      return std::min(1.0, std::pow(omega / (4.0 * params.L_smooth),
                                    1.0 / params.alpha));
    case AdditiveRadiusRule::kSecondOrder: {
      const double k = params.M_third * std::pow(double(p), 1.5) / 6.0;
      return std::sqrt(std::min(1.0, omega) / (2.0 * params.eig_hi + 4.0 * k));
    }
  }
  return 0.0;
}

double NNDistance::eval(const Point& x, const Point& y) const {
  const std::size_t cx = nearest_center_index(cover.centers, x);
  const std::size_t cy = nearest_center_index(cover.centers, y);
  return table.rank_distance(cx, cy);
}

Label NNDistance::answer(const Point& x, const Point& y, const Point& z) const {
  const std::size_t cx = nearest_center_index(cover.centers, x);
  const std::size_t cy = nearest_center_index(cover.centers, y);
  const std::size_t cz = nearest_center_index(cover.centers, z);
  return table.label(cx, cy, cz);
}

namespace {

// A single center needs no queries: d_hat is identically zero.
RankTable learn_table(const std::vector<Point>& centers, CountingOracle& oracle) {
  if (centers.size() == 1) {
    return RankTable(centers, {{0}});
  }
  return learn_finite_distance(centers, oracle);
}

}  // namespace

NNDistance learn_additive(const Domain& domain, CountingOracle& oracle,
                          double omega, const SmoothnessParams& params,
                          const AdditiveOptions& options) {
  if (domain.dimension() != oracle.dimension()) {
    throw InvalidInput("learn_additive: domain and oracle dimensions differ");
  }
  const double eps =
      options.eps_override
          ? *options.eps_override
          : additive_radius(options.rule, omega, params, domain.dimension());
  NNDistance d;
  d.rule = options.rule;
  d.cover = build_cover(domain, eps, options.cover);
  const std::uint64_t start = oracle.query_count();
  d.table = learn_table(d.cover.centers, oracle);
  d.query_count = oracle.query_count() - start;
  return d;
}

double eval_nn(const NNDistance& d, const Point& x, const Point& y) {
  return d.eval(x, y);
}

MultiplicativeThresholds compute_thresholds(const SmoothnessParams& params,
                                            double omega, Eigen::Index p) {
  params.validate();
  if (!(omega > 0.0)) {
    throw ParameterError("compute_thresholds: omega must be > 0");
  }
  const double e = params.eig_lo;
  const double big_e = params.eig_hi;
  const double m = params.M_third;
  const double pp = double(p);
  const double p15 = std::pow(pp, 1.5);

  MultiplicativeThresholds t;
  t.kappa0 = params.kappa0;
  t.beta_curvature =
      m > 0.0 ? (e / (8.0 * big_e)) * (9.0 * e * e / (4.0 * m * m * pp * pp * pp))
              : kInf;
  t.beta_separation =
      4.0 * params.delta_floor * big_e / (e * e * params.kappa0);
  const double denom =
      m * p15 / 6.0 * std::sqrt(8.0 * params.kappa0 * big_e / e) +
      params.L_hess / 2.0 * std::sqrt(omega);
  if (denom > 0.0) {
    const double r = e * omega / (8.0 * (omega + 2.0) * denom);
    t.beta_taylor = r * r;
  } else {
    t.beta_taylor = kInf;
  }
  t.beta_hat = std::min({t.beta_curvature, t.beta_separation, t.beta_taylor});
  if (!std::isfinite(t.beta_hat) || !(t.beta_hat > 0.0)) {
    std::ostringstream os;
    os << "compute_thresholds: beta_hat=" << t.beta_hat
       << " is not a positive finite value; check delta_floor and kappa0";
    throw ParameterError(os.str());
  }
  t.eps = std::sqrt(e * e * t.beta_hat * omega /
                    (16.0 * big_e * big_e * (1.0 + omega)));
  t.xi = e * omega / (4.0 * big_e * (omega + 2.0));
  t.theta = 4.0 * t.beta_hat;
  return t;
}

double HybridDistance::local_quadratic(std::size_t center, const Point& x,
                                       const Point& y) const {
  const Matrix& h = locals[center].M;
  const Eigen::Index p = h.rows();
  double acc = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    double row = 0.0;
    for (Eigen::Index i = 0; i < p; ++i) row += h(i, j) * (y[i] - x[i]);
    acc += row * (y[j] - x[j]);
  }
  return acc;
}

double fit_box_to_cap(const Domain& domain, double eps, std::size_t cap) {
  if (grid_cover_size(domain, eps) <= cap) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (grid_cover_size(domain.scaled(mid), eps) <= cap) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (!(lo > 0.0)) {
    throw ResourceError("fit_box_to_cap: no positive scaling fits the cap", cap);
  }
  return lo;
}

HybridDistance learn_multiplicative(const Domain& domain,
                                    CountingOracle& oracle, double omega,
                                    const SmoothnessParams& params,
                                    const ThresholdOverrides& overrides,
                                    const MultiplicativeOptions& options) {
  const Eigen::Index p = oracle.dimension();
  if (domain.dimension() != p) {
    throw InvalidInput("learn_multiplicative: domain and oracle dimensions differ");
  }
  HybridDistance d;
  d.params = params;
  d.thresholds = compute_thresholds(params, omega, p);
  const double eps = overrides.eps.value_or(d.thresholds.eps);
  const double xi = overrides.xi.value_or(d.thresholds.xi);
  d.theta = overrides.theta.value_or(d.thresholds.theta);
  if (!(eps > 0.0) || !(xi > 0.0) || !(d.theta >= 0.0)) {
    throw ParameterError("learn_multiplicative: eps, xi must be > 0, theta >= 0");
  }

  Domain effective = domain;
  if (domain.kind() == Domain::Kind::kBox &&
      options.cover.method == CoverMethod::kGrid && options.downscale_on_cap) {
    d.domain_scale = fit_box_to_cap(domain, eps, options.cover.max_centers);
    if (d.domain_scale < 1.0) effective = domain.scaled(d.domain_scale);
  }
  d.cover = build_cover(effective, eps, options.cover);

  std::uint64_t start = oracle.query_count();
  d.table = learn_table(d.cover.centers, oracle);
  d.global_queries = oracle.query_count() - start;

  // Outside the admissible range the offset scale is pinned explicitly.
  HessianOptions hopts;
  if (!(xi < hessian_eps_limit(params, p))) {
    hopts.rho = xi * xi;
    d.rho_override = true;
  }
  start = oracle.query_count();
  d.locals.reserve(d.cover.size());
  for (const Point& c : d.cover.centers) {
    d.locals.push_back(learn_local_hessian(oracle, c, xi, params, hopts));
  }
  d.local_queries = oracle.query_count() - start;
  return d;
}

double eval_hybrid(const HybridDistance& d, const Point& x, const Point& y) {
  const std::size_t cx = nearest_center_index(d.cover.centers, x);
  require_dimension(y, x.size(), "eval_hybrid");
  const double l = d.local_quadratic(cx, x, y);
  if (l > d.theta) {
    const std::size_t cy = nearest_center_index(d.cover.centers, y);
    return d.table.rank_distance(cx, cy) + d.theta;
  }
  return l;
}

Label answer_triplet_hybrid(const HybridDistance& d, const Point& x,
                            const Point& y, const Point& z) {
  const std::size_t cx = nearest_center_index(d.cover.centers, x);
  require_dimension(y, x.size(), "answer_triplet_hybrid");
  require_dimension(z, x.size(), "answer_triplet_hybrid");
  const double lxy = d.local_quadratic(cx, x, y);
  const double lxz = d.local_quadratic(cx, x, z);
  const bool far_y = lxy > d.theta;
  const bool far_z = lxz > d.theta;
  if (far_y && far_z) {
    const std::size_t cy = nearest_center_index(d.cover.centers, y);
    const std::size_t cz = nearest_center_index(d.cover.centers, z);
    return d.table.label(cx, cy, cz);
  }
  if (!far_y && !far_z) return label_from_sign(lxy - lxz);
  return far_y ? Label::kGreater : Label::kLess;
}

}  // namespace tripletq
