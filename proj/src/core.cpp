#include "tripletq/core.hpp"

#include <cmath>
#include <sstream>

namespace tripletq {

Label label_from_sign(double diff, double tolerance) noexcept {
  if (std::abs(diff) <= tolerance) return Label::kEqual;
  return diff < 0.0 ? Label::kLess : Label::kGreater;
}

std::string_view to_string(Label l) noexcept {
  switch (l) {
    case Label::kLess: return "<";
    case Label::kEqual: return "=";
    case Label::kGreater: return ">";
  }
  return "?";
}

void require_finite(const Point& x, std::string_view what) {
  if (!x.allFinite()) {
    throw InvalidInput(std::string(what) + ": non-finite coordinate");
  }
}

void require_dimension(const Point& x, Eigen::Index p, std::string_view what) {
  if (x.size() != p) {
    std::ostringstream os;
    os << what << ": expected dimension " << p << ", got " << x.size();
    throw InvalidInput(os.str());
  }
}

std::string_view to_string(TruthKind kind) noexcept {
  switch (kind) {
    case TruthKind::kSqrtMahalanobis: return "sqrt-mahalanobis";
    case TruthKind::kSquaredMahalanobis: return "squared-mahalanobis";
    case TruthKind::kVaryingHessian: return "varying-hessian-quadratic";
    case TruthKind::kGaussianKl: return "diagonal-gaussian-kl";
  }
  return "unknown";
}

TruthKind truth_kind_from_string(std::string_view name) {
  if (name == "sqrt-mahalanobis" || name == "sqrt-maha") {
    return TruthKind::kSqrtMahalanobis;
  }
  if (name == "squared-mahalanobis" || name == "sq-maha") {
    return TruthKind::kSquaredMahalanobis;
  }
  if (name == "varying-hessian-quadratic" || name == "varying-hessian") {
    return TruthKind::kVaryingHessian;
  }
  if (name == "diagonal-gaussian-kl" || name == "kl") {
    return TruthKind::kGaussianKl;
  }
  throw InvalidInput("unknown ground-truth kind: " + std::string(name));
}

namespace {

void require_square_symmetric(const Matrix& m, std::string_view what) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw InvalidInput(std::string(what) + ": matrix must be square");
  }
  if (!m.allFinite()) {
    throw InvalidInput(std::string(what) + ": non-finite matrix entry");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidInput(std::string(what) + ": matrix must be symmetric");
  }
}

void require_psd(const Matrix& m, double floor, std::string_view what) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < floor) {
    throw InvalidInput(std::string(what) + ": matrix is not positive enough");
  }
}

// Stack storage for small dimensions, heap beyond.
class Scratch {
 public:
  explicit Scratch(Eigen::Index p) {
    if (p > kStack) heap_.reset(new double[static_cast<std::size_t>(p)]);
  }
  double* data() noexcept { return heap_ ? heap_.get() : stack_; }

 private:
  static constexpr Eigen::Index kStack = 64;
  double stack_[kStack];
  std::unique_ptr<double[]> heap_;
};

double quad_form(const Matrix& m, const double* h, Eigen::Index p) noexcept {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    double row = 0.0;
    for (Eigen::Index i = 0; i < p; ++i) row += m(i, j) * h[i];
    acc += row * h[j];
  }
  return acc;
}

}  // namespace

GroundTruth GroundTruth::sqrt_mahalanobis(Matrix m) {
  require_square_symmetric(m, "sqrt-mahalanobis");
  require_psd(m, -1e-12, "sqrt-mahalanobis");
  GroundTruth t(TruthKind::kSqrtMahalanobis, m.rows());
  t.m_ = std::move(m);
  return t;
}

GroundTruth GroundTruth::squared_mahalanobis(Matrix m) {
  require_square_symmetric(m, "squared-mahalanobis");
  require_psd(m, -1e-12, "squared-mahalanobis");
  GroundTruth t(TruthKind::kSquaredMahalanobis, m.rows());
  t.m_ = std::move(m);
  return t;
}

GroundTruth GroundTruth::varying_hessian(Matrix base, double amplitude,
                                         double frequency, double phase) {
  require_square_symmetric(base, "varying-hessian");
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude) ||
      !std::isfinite(frequency) || !std::isfinite(phase)) {
    throw InvalidInput("varying-hessian: bad perturbation parameters");
  }
  // H(m) >= lambda_min(A) - s must stay positive for d >= 0.
  Eigen::SelfAdjointEigenSolver<Matrix> es(base, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() - amplitude <= 0.0) {
    throw InvalidInput(
        "varying-hessian: amplitude must be below the smallest eigenvalue "
        "of the base matrix");
  }
  GroundTruth t(TruthKind::kVaryingHessian, base.rows());
  t.m_ = std::move(base);
  t.amplitude_ = amplitude;
  t.frequency_ = frequency;
  t.phase_ = phase;
  return t;
}

GroundTruth GroundTruth::gaussian_kl(Eigen::Index p) {
  if (p < 2 || p % 2 != 0) {
    throw InvalidInput("diagonal-gaussian-kl: dimension must be even and >= 2");
  }
  return GroundTruth(TruthKind::kGaussianKl, p);
}

double GroundTruth::eval_unchecked(const double* x,
                                   const double* y) const noexcept {
  const Eigen::Index p = p_;
  switch (kind_) {
    case TruthKind::kSqrtMahalanobis:
    case TruthKind::kSquaredMahalanobis: {
      Scratch buf(p);
      double* hp = buf.data();
      for (Eigen::Index i = 0; i < p; ++i) hp[i] = y[i] - x[i];
      const double q = std::max(0.0, quad_form(m_, hp, p));
      return kind_ == TruthKind::kSqrtMahalanobis ? std::sqrt(q) : 0.5 * q;
    }
    case TruthKind::kVaryingHessian: {
      Scratch buf(p);
      double* hp = buf.data();
      double sum_h = 0.0;
      double sum_mid = 0.0;
      for (Eigen::Index i = 0; i < p; ++i) {
        hp[i] = y[i] - x[i];
        sum_h += hp[i];
        sum_mid += 0.5 * (x[i] + y[i]);
      }
      const double pert =
          amplitude_ * std::sin(frequency_ * sum_mid + phase_) / double(p);
      return std::max(0.0, 0.5 * (quad_form(m_, hp, p) + pert * sum_h * sum_h));
    }
    case TruthKind::kGaussianKl: {
      const Eigen::Index k = p / 2;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < k; ++i) {
        const double dmu = x[i] - y[i];
        const double ls_x = x[k + i];
        const double ls_y = y[k + i];
        acc += (ls_y - ls_x) +
               (std::exp(2.0 * (ls_x - ls_y)) + dmu * dmu * std::exp(-2.0 * ls_y)) /
                   2.0 -
               0.5;
      }
      return std::max(0.0, acc);
    }
  }
  return 0.0;
}

double GroundTruth::eval(const Point& x, const Point& y) const {
  require_dimension(x, p_, "eval_ground_truth x");
  require_dimension(y, p_, "eval_ground_truth y");
  return eval_unchecked(x.data(), y.data());
}

Matrix GroundTruth::hessian(const Point& x) const {
  require_dimension(x, p_, "analytic_hessian");
  switch (kind_) {
    case TruthKind::kSqrtMahalanobis:
      throw InvalidInput(
          "analytic_hessian: sqrt-mahalanobis is not twice differentiable "
          "on the diagonal");
    case TruthKind::kSquaredMahalanobis:
      return m_;
    case TruthKind::kVaryingHessian: {
      const double t = frequency_ * x.sum() + phase_;
      return m_ + Matrix::Constant(p_, p_, amplitude_ * std::sin(t) / p_);
    }
    case TruthKind::kGaussianKl: {
      const Eigen::Index k = p_ / 2;
      Matrix h = Matrix::Zero(p_, p_);
      for (Eigen::Index i = 0; i < k; ++i) {
        h(i, i) = std::exp(-2.0 * x[k + i]);
        h(k + i, k + i) = 2.0;
      }
      return h;
    }
  }
  return {};
}

double GroundTruth::third_derivative_bound(double radius) const {
  switch (kind_) {
    case TruthKind::kSquaredMahalanobis:
      return 0.0;
    case TruthKind::kVaryingHessian: {
      // Product rule on 1/2 h' H(x + h/2) h with |d^k H_ij| <= s w^k / p
      // and |1'h| <= sqrt(p) r.
      const double s = amplitude_;
      const double w = std::abs(frequency_);
      const double p = double(p_);
      return 1.5 * s * w / p + 0.75 * s * w * w * radius / std::sqrt(p) +
             s * w * w * w * radius * radius / 16.0;
    }
    default:
      throw InvalidInput("third_derivative_bound: unsupported truth kind " +
                         std::string(to_string(kind_)));
  }
}

double GroundTruth::hessian_lipschitz() const {
  switch (kind_) {
    case TruthKind::kSquaredMahalanobis:
      return 0.0;
    case TruthKind::kVaryingHessian:
      return amplitude_ * std::abs(frequency_) * std::sqrt(double(p_));
    default:
      throw InvalidInput("hessian_lipschitz: unsupported truth kind " +
                         std::string(to_string(kind_)));
  }
}

std::pair<double, double> GroundTruth::hessian_eigen_band() const {
  if (kind_ == TruthKind::kGaussianKl) {
    throw InvalidInput("hessian_eigen_band: unbounded for the KL fixture");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (kind_ == TruthKind::kVaryingHessian) {
    return {lo - amplitude_, hi + amplitude_};
  }
  return {lo, hi};
}

CountingOracle::CountingOracle(GroundTruth truth, double equality_tolerance)
    : truth_(std::move(truth)), tolerance_(equality_tolerance) {
  if (!(equality_tolerance >= 0.0)) {
    throw InvalidInput("equality tolerance must be >= 0");
  }
}

Label CountingOracle::label(const Point& x, const Point& y, const Point& z) {
  const Eigen::Index p = truth_.dimension();
  require_dimension(x, p, "label_triplet x");
  require_dimension(y, p, "label_triplet y");
  require_dimension(z, p, "label_triplet z");
  ++queries_;
  const double dxy = truth_.eval_unchecked(x.data(), y.data());
  const double dxz = truth_.eval_unchecked(x.data(), z.data());
  return label_from_sign(dxy - dxz, tolerance_);
}

Label label_triplet(CountingOracle& oracle, const Point& x, const Point& y,
                    const Point& z) {
  return oracle.label(x, y, z);
}

double eval_ground_truth(const GroundTruth& truth, const Point& x,
                         const Point& y) {
  return truth.eval(x, y);
}

Matrix analytic_hessian(const GroundTruth& truth, const Point& x) {
  return truth.hessian(x);
}

void SmoothnessParams::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  auto nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!positive(alpha)) throw ParameterError("alpha must be > 0");
  if (!positive(L_smooth)) throw ParameterError("L_smooth must be > 0");
  if (!nonneg(M_third)) throw ParameterError("M_third must be >= 0");
  if (!positive(eig_lo)) throw ParameterError("eig_lo must be > 0");
  if (!(eig_hi >= eig_lo) || !std::isfinite(eig_hi)) {
    throw ParameterError("eig_hi must be >= eig_lo");
  }
  if (!nonneg(L_hess)) throw ParameterError("L_hess must be >= 0");
  if (!(delta_floor > 0.0)) throw ParameterError("delta_floor must be > 0");
  if (!(kappa0 >= 1.0) || !std::isfinite(kappa0)) {
    throw ParameterError("kappa0 must be >= 1");
  }
}

double default_kappa0(double eig_lo, double eig_hi) noexcept {
  const double r = eig_hi / eig_lo;
  return 40.0 * r * r * r;
}

double strong_convexity_radius(double eig_lo, double M_third,
                               Eigen::Index p) noexcept {
  if (M_third <= 0.0) return kInf;
  return 3.0 * eig_lo / (2.0 * M_third * std::pow(double(p), 1.5));
}

}  // namespace tripletq
