#include "tripletq/evaluation.hpp"

#include <algorithm>
#include <cmath>

namespace tripletq {

namespace {

constexpr std::size_t kMaxExemplars = 10;

void record(AgreementReport& r, const Triplet& t, double dxy, double dxz,
            Label expected, Label answered) {
  ++r.violations;
  if (r.violation_exemplars.size() < kMaxExemplars) {
    r.violation_exemplars.push_back({t, dxy, dxz, expected, answered});
  }
}

void require_box(const Domain& d, const char* what) {
  if (d.kind() != Domain::Kind::kBox) {
    throw InvalidInput(std::string(what) + ": a box domain is required");
  }
}

}  // namespace

TripletAnswer answer_of(const NNDistance& d) {
  return [&d](const Point& x, const Point& y, const Point& z) {
    return d.answer(x, y, z);
  };
}

TripletAnswer answer_of(const HybridDistance& d) {
  return [&d](const Point& x, const Point& y, const Point& z) {
    return answer_triplet_hybrid(d, x, y, z);
  };
}

TripletAnswer answer_of(const GroundTruth& truth, double tolerance) {
  return [&truth, tolerance](const Point& x, const Point& y, const Point& z) {
    return label_from_sign(truth.eval(x, y) - truth.eval(x, z), tolerance);
  };
}

TripletSampler::TripletSampler(Domain box, std::uint64_t seed)
    : box_(std::move(box)), rng_(seed) {
  require_box(box_, "TripletSampler");
}

Point TripletSampler::uniform_point() {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Point x(box_.dimension());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x[i] = box_.lo()[i] + u(rng_) * (box_.hi()[i] - box_.lo()[i]);
  }
  return x;
}

Point TripletSampler::unit_direction() {
  std::normal_distribution<double> g(0.0, 1.0);
  Point v(box_.dimension());
  double n = 0.0;
  do {
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = g(rng_);
    n = v.norm();
  } while (n < 1e-12);
  return v / n;
}

Point TripletSampler::clamp(Point x) const {
  return x.cwiseMax(box_.lo()).cwiseMin(box_.hi());
}

Point TripletSampler::offset(const Point& x, double radius) {
  std::uniform_real_distribution<double> u(0.0, 2.0);
  return clamp(x + radius * u(rng_) * unit_direction());
}

std::vector<Triplet> TripletSampler::uniform(std::size_t n) {
  std::vector<Triplet> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Point x = uniform_point();
    Point y = uniform_point();
    Point z = uniform_point();
    out.push_back({std::move(x), std::move(y), std::move(z)});
  }
  return out;
}

std::vector<Triplet> TripletSampler::near_pairs(
    std::size_t n, const std::vector<double>& scales) {
  if (scales.empty()) throw InvalidInput("near_pairs: no scales given");
  std::uniform_real_distribution<double> t(0.3, 1.7);
  std::vector<Triplet> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = scales[i % scales.size()];
    Point x = uniform_point();
    Point y = offset(x, s);
    Point z = (i / scales.size()) % 2 == 0 ? offset(x, s)
                                          : clamp(x + t(rng_) * (y - x));
    out.push_back({std::move(x), std::move(y), std::move(z)});
  }
  return out;
}

void AgreementReport::merge(const AgreementReport& other) {
  total_triplets += other.total_triplets;
  eligible += other.eligible;
  violations += other.violations;
  for (const auto& e : other.violation_exemplars) {
    if (violation_exemplars.size() >= kMaxExemplars) break;
    violation_exemplars.push_back(e);
  }
}

AgreementReport check_additive(const GroundTruth& truth,
                               const TripletAnswer& answer, double omega,
                               const std::vector<Triplet>& triplets,
                               std::uint64_t learner_queries) {
  if (!(omega > 0.0)) throw InvalidInput("check_additive: omega must be > 0");
  AgreementReport r;
  r.criterion = "additive";
  r.threshold = omega;
  r.query_count_of_learner = learner_queries;
  for (const Triplet& t : triplets) {
    ++r.total_triplets;
    const double dxy = truth.eval(t.x, t.y);
    const double dxz = truth.eval(t.x, t.z);
    if (!(std::abs(dxy - dxz) > omega)) continue;
    ++r.eligible;
    const Label expected = dxy > dxz ? Label::kGreater : Label::kLess;
    const Label got = answer(t.x, t.y, t.z);
    if (got != expected) record(r, t, dxy, dxz, expected, got);
  }
  return r;
}

AgreementReport check_multiplicative(const GroundTruth& truth,
                                     const TripletAnswer& answer, double omega,
                                     const std::vector<Triplet>& triplets,
                                     std::uint64_t learner_queries) {
  if (!(omega > 0.0)) {
    throw InvalidInput("check_multiplicative: omega must be > 0");
  }
  AgreementReport r;
  r.criterion = "multiplicative";
  r.threshold = omega;
  r.query_count_of_learner = learner_queries;
  for (const Triplet& t : triplets) {
    ++r.total_triplets;
    const double dxy = truth.eval(t.x, t.y);
    const double dxz = truth.eval(t.x, t.z);
    Label expected;
    if (dxy > (1.0 + omega) * dxz) {
      expected = Label::kGreater;
    } else if (dxz > (1.0 + omega) * dxy) {
      expected = Label::kLess;
    } else {
      continue;
    }
    ++r.eligible;
    const Label got = answer(t.x, t.y, t.z);
    if (got != expected) record(r, t, dxy, dxz, expected, got);
  }
  return r;
}

ScaledError frobenius_error(const Matrix& learned, const Matrix& target,
                            ScaleConvention convention, std::size_t anchor) {
  if (learned.rows() != target.rows() || learned.cols() != target.cols()) {
    throw InvalidInput("frobenius_error: shape mismatch");
  }
  const double norm2 = target.squaredNorm();
  if (!(norm2 > 0.0)) throw InvalidInput("frobenius_error: zero target");
  ScaledError out;
  switch (convention) {
    case ScaleConvention::kMaxDiagonal: {
      const double m = target.diagonal().maxCoeff();
      if (!(m > 0.0)) throw InvalidInput("frobenius_error: zero diagonal");
      out.tau = 1.0 / m;
      break;
    }
    case ScaleConvention::kAnchor: {
      if (anchor >= static_cast<std::size_t>(target.rows())) {
        throw InvalidInput("frobenius_error: anchor out of range");
      }
      const double m = target(Eigen::Index(anchor), Eigen::Index(anchor));
      if (!(m > 0.0)) throw InvalidInput("frobenius_error: zero anchor entry");
      out.tau = 1.0 / m;
      break;
    }
    case ScaleConvention::kBestFit:
      out.tau = (learned.array() * target.array()).sum() / norm2;
      break;
  }
  out.error = (out.tau * target - learned).norm();
  return out;
}

TaylorAudit audit_taylor(const GroundTruth& truth, const Domain& box,
                         double M_third, std::size_t n_samples, double radius,
                         std::uint64_t seed) {
  require_box(box, "audit_taylor");
  if (!truth.has_hessian()) {
    throw InvalidInput("audit_taylor: truth has no Hessian");
  }
  if (!(radius > 0.0)) throw InvalidInput("audit_taylor: radius must be > 0");
  if (!(M_third >= 0.0)) throw InvalidInput("audit_taylor: M must be >= 0");
  const Eigen::Index p = truth.dimension();
  const double k = M_third * std::pow(double(p), 1.5) / 6.0;
  TripletSampler s(box, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  TaylorAudit a;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Point x = s.uniform_point();
    std::normal_distribution<double> g(0.0, 1.0);
    Point h(p);
    for (Eigen::Index j = 0; j < p; ++j) h[j] = g(rng);
    const double hn = h.norm();
    if (hn < 1e-12) continue;
    const double len = radius * std::max(u(rng), 1e-3);
    h *= len / hn;
    const Matrix hess = truth.hessian(x);
    const double residual =
        std::abs(truth.eval(x, x + h) - 0.5 * h.dot(hess * h));
    const double bound = k * len * len * len;
    const double ratio =
        bound > 0.0 ? residual / bound : (residual > 1e-14 ? kInf : 0.0);
    a.max_ratio = std::max(a.max_ratio, ratio);
    a.max_residual = std::max(a.max_residual, residual);
    ++a.samples;
  }
  return a;
}

SandwichAudit audit_sandwich(const GroundTruth& truth, const Domain& box,
                             const SmoothnessParams& params,
                             std::size_t n_samples, std::uint64_t seed,
                             double max_radius) {
  require_box(box, "audit_sandwich");
  const Eigen::Index p = truth.dimension();
  SandwichAudit a;
  a.radius = std::min(
      max_radius, strong_convexity_radius(params.eig_lo, params.M_third, p));
  TripletSampler s(box, seed);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Point x = s.uniform_point();
    // offset() draws radius * U(0, 2), so halve to stay inside the zone.
    const Point y = s.offset(x, 0.5 * a.radius);
    const Point h = y - x;
    const double n2 = h.squaredNorm();
    if (n2 < 1e-16) continue;
    const double d = truth.eval(x, y);
    const double lower = d / (0.25 * params.eig_lo * n2);
    const double upper = d / (params.eig_hi * n2);
    a.min_lower_ratio = std::min(a.min_lower_ratio, lower);
    a.max_upper_ratio = std::max(a.max_upper_ratio, upper);
    if (lower < 1.0 || upper > 1.0) ++a.violations;
    ++a.samples;
  }
  return a;
}

EigenBandAudit audit_eigen_band(const GroundTruth& truth,
                                const HybridDistance& d) {
  EigenBandAudit a;
  const double e = d.params.eig_lo;
  const double big_e = d.params.eig_hi;
  for (std::size_t c = 0; c < d.locals.size(); ++c) {
    const MahaModel& m = d.locals[c];
    const Matrix star = truth.hessian(d.cover.centers[c]);
    const auto k = Eigen::Index(m.anchor);
    const double tau = 1.0 / star(k, k);
    Eigen::SelfAdjointEigenSolver<Matrix> es(m.M, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff() / (tau * e / 2.0);
    const double hi = es.eigenvalues().maxCoeff() / (2.0 * tau * big_e);
    a.worst_low_ratio = std::min(a.worst_low_ratio, lo);
    a.worst_high_ratio = std::max(a.worst_high_ratio, hi);
    if (lo < 1.0 || hi > 1.0) ++a.violations;
    ++a.checked;
  }
  return a;
}

SmallDistanceAudit audit_small_distance(const GroundTruth& truth,
                                        const HybridDistance& d,
                                        const Domain& box,
                                        std::size_t n_samples,
                                        std::uint64_t seed) {
  require_box(box, "audit_small_distance");
  SmallDistanceAudit a;
  const double e = d.params.eig_lo;
  const double big_e = d.params.eig_hi;
  const double beta = d.thresholds.beta_hat;
  const double kappa0 = d.thresholds.kappa0;
  // Offsets spanning the switch scale up to the largest t.
  const double base = std::sqrt(beta / big_e);
  const std::vector<double> scales = {base, 4.0 * base,
                                      std::sqrt(kappa0) * base, box.diameter()};
  TripletSampler s(box, seed);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Point x0 = s.uniform_point();
    const Point y = s.offset(x0, scales[i % scales.size()]);
    const std::size_t c = nearest_center_index(d.cover.centers, x0);
    const double l = d.local_quadratic(c, x0, y);
    const double t = std::min(kappa0, l / (2.0 * beta));
    if (!(t > 0.0)) continue;
    const double floor = e * e * t * beta / (4.0 * big_e);
    const double margin = truth.eval(x0, y) / floor;
    a.min_margin = std::min(a.min_margin, margin);
    if (margin < 1.0) ++a.violations;
    ++a.checked;
  }
  return a;
}

double query_budget(BudgetFormula formula, const BudgetInputs& in) {
  auto finite = [](double n) {
    if (n < 2.0) return 0.0;
    const double m = n - 1.0;
    return n * m * (std::log2(m) + 1.0);
  };
  switch (formula) {
    case BudgetFormula::kFinite:
      return finite(double(in.n));
    case BudgetFormula::kMahalanobis:
      return mahalanobis_query_budget(in.p, in.kappa, in.eps);
    case BudgetFormula::kHessian:
      return hessian_query_budget(in.p, in.eig_lo, in.eig_hi, in.eps);
    case BudgetFormula::kMultiplicative:
      return finite(double(in.n)) +
             double(in.n) *
                 hessian_query_budget(in.p, in.eig_lo, in.eig_hi, in.eps);
  }
  return 0.0;
}

BudgetCheck assert_query_budget(std::uint64_t measured, BudgetFormula formula,
                                const BudgetInputs& in) {
  BudgetCheck c;
  c.measured = measured;
  c.budget = query_budget(formula, in);
  c.slack = formula == BudgetFormula::kMultiplicative ? 2.0 : 1.0;
  c.pass = double(measured) <= c.slack * c.budget;
  return c;
}

Matrix random_rotation_of(const Eigen::VectorXd& eigenvalues,
                          std::mt19937_64& rng) {
  const Eigen::Index p = eigenvalues.size();
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix a(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) a(i, j) = g(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(a);
  const Matrix q = qr.householderQ();
  Matrix m = q * eigenvalues.asDiagonal() * q.transpose();
  return 0.5 * (m + m.transpose());
}

Matrix random_psd(Eigen::Index p, double kappa, std::mt19937_64& rng) {
  if (p < 1) throw InvalidInput("random_psd: p must be >= 1");
  if (!(kappa >= 1.0)) throw InvalidInput("random_psd: kappa must be >= 1");
  Eigen::VectorXd ev(p);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Eigen::Index i = 0; i < p; ++i) {
    ev[i] = std::pow(kappa, u(rng));
  }
  ev[0] = 1.0;
  if (p > 1) ev[p - 1] = kappa;
  Matrix m = random_rotation_of(ev, rng);
  return m / m.diagonal().maxCoeff();
}

std::vector<Point> random_points(std::size_t n, const Domain& box,
                                 std::mt19937_64& rng) {
  require_box(box, "random_points");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Point x(box.dimension());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      x[i] = box.lo()[i] + u(rng) * (box.hi()[i] - box.lo()[i]);
    }
    out.push_back(std::move(x));
  }
  return out;
}

SmoothnessParams fixture_params(const GroundTruth& truth, const Domain& domain) {
  const Eigen::Index p = truth.dimension();
  const double diam = domain.diameter();
  SmoothnessParams sp;
  sp.alpha = 1.0;
  switch (truth.kind()) {
    case TruthKind::kSqrtMahalanobis: {
      Eigen::SelfAdjointEigenSolver<Matrix> es(truth.matrix(),
                                               Eigen::EigenvaluesOnly);
      sp.eig_lo = std::max(es.eigenvalues().minCoeff(), 1e-12);
      sp.eig_hi = es.eigenvalues().maxCoeff();
      sp.L_smooth = std::sqrt(sp.eig_hi);
      sp.M_third = 0.0;
      sp.L_hess = 0.0;
      sp.delta_floor = 1.0;
      sp.kappa0 = default_kappa0(sp.eig_lo, sp.eig_hi);
      return sp;
    }
    case TruthKind::kSquaredMahalanobis:
    case TruthKind::kVaryingHessian: {
      const auto [lo, hi] = truth.hessian_eigen_band();
      sp.eig_lo = lo;
      sp.eig_hi = hi;
      sp.M_third = truth.third_derivative_bound(diam);
      sp.L_hess = truth.hessian_lipschitz();
      // grad_y of 1/2 h'H h is bounded by E |h| plus, for the varying
      // kind, 1/4 |1'h| s w (1'h)^2 / p <= 1/4 sqrt(p) s w |h|^2.
      sp.L_smooth = hi * diam;
      if (truth.kind() == TruthKind::kVaryingHessian) {
        sp.L_smooth += 0.25 * std::sqrt(double(p)) * truth.amplitude() *
                       std::abs(truth.frequency()) * diam * diam;
      }
      if (!(sp.L_smooth > 0.0)) sp.L_smooth = hi;
      // d >= 1/2 e |h|^2 everywhere, so pairs at least delta apart are at
      // least 1/2 e delta^2 apart.
      const double delta = std::min(
          strong_convexity_radius(lo, sp.M_third, p), 0.5 * diam);
      sp.delta_floor = 0.5 * lo * delta * delta;
      sp.kappa0 = default_kappa0(lo, hi);
      return sp;
    }
    case TruthKind::kGaussianKl:
      break;
  }
  throw InvalidInput("fixture_params: unsupported truth kind " +
                     std::string(to_string(truth.kind())));
}

}  // namespace tripletq
