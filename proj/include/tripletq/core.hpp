#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tripletq {

using Point = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Rejected input: dimension mismatch, duplicate points, bad parameters.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A threshold or constant set that cannot produce a valid learner.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative routine failed to terminate or a solve degenerated.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested structure would exceed a configured size limit.
class ResourceError : public std::runtime_error {
 public:
  ResourceError(const std::string& what, std::size_t required)
      : std::runtime_error(what), required_(required) {}
  std::size_t required() const noexcept { return required_; }

 private:
  std::size_t required_;
};

/// sign(d(x,y) - d(x,z)).
enum class Label : int { kLess = -1, kEqual = 0, kGreater = 1 };

inline int to_int(Label l) noexcept { return static_cast<int>(l); }
Label label_from_sign(double diff, double tolerance = 0.0) noexcept;
std::string_view to_string(Label l) noexcept;

void require_finite(const Point& x, std::string_view what);
void require_dimension(const Point& x, Eigen::Index p, std::string_view what);

enum class TruthKind {
  kSqrtMahalanobis,
  kSquaredMahalanobis,
  kVaryingHessian,
  kGaussianKl,
};

std::string_view to_string(TruthKind kind) noexcept;
TruthKind truth_kind_from_string(std::string_view name);

/// Hidden ground-truth distance. Evaluation is pure and safe to share.
///
/// - sqrt-mahalanobis:    d(x,y) = sqrt((y-x)' M (y-x))
/// - squared-mahalanobis: d(x,y) = 1/2 (y-x)' M (y-x)
/// - varying-hessian:     d(x,y) = 1/2 (y-x)' H((x+y)/2) (y-x),
///                        H(m) = A + s sin(w 1'm + phi) 11'/p
/// - diagonal-gaussian-kl: x = (mu_1..mu_k, log sigma_1..log sigma_k),
///                        d(x,y) = KL(N_x || N_y)
class GroundTruth {
 public:
  static GroundTruth sqrt_mahalanobis(Matrix m);
  static GroundTruth squared_mahalanobis(Matrix m);
  static GroundTruth varying_hessian(Matrix base, double amplitude,
                                     double frequency = 1.0,
                                     double phase = 0.0);
  static GroundTruth gaussian_kl(Eigen::Index p);

  TruthKind kind() const noexcept { return kind_; }
  Eigen::Index dimension() const noexcept { return p_; }
  const Matrix& matrix() const noexcept { return m_; }
  double amplitude() const noexcept { return amplitude_; }
  double frequency() const noexcept { return frequency_; }
  double phase() const noexcept { return phase_; }

  /// d(x,y). Checks dimensions; learners must go through CountingOracle.
  double eval(const Point& x, const Point& y) const;
  /// Hessian of d(x, .) at x. Throws InvalidInput for sqrt-mahalanobis.
  Matrix hessian(const Point& x) const;

  bool has_hessian() const noexcept {
    return kind_ != TruthKind::kSqrtMahalanobis;
  }

  /// Bound on third partials of d(x, .) over a ball of `radius` around x.
  /// Zero for the quadratic kind; unsupported for sqrt and KL.
  double third_derivative_bound(double radius) const;
  /// Frobenius Lipschitz constant of x -> H*_x.
  double hessian_lipschitz() const;
  /// [lo, hi] enclosing every eigenvalue of H*_x. Unsupported for KL.
  std::pair<double, double> hessian_eigen_band() const;

  // Unchecked evaluation on raw buffers of length dimension().
  double eval_unchecked(const double* x, const double* y) const noexcept;

 private:
  GroundTruth(TruthKind kind, Eigen::Index p) : kind_(kind), p_(p) {}

  TruthKind kind_;
  Eigen::Index p_;
  Matrix m_;
  double amplitude_ = 0.0;
  double frequency_ = 1.0;
  double phase_ = 0.0;
};

/// Answers triplet queries against a hidden truth and counts them.
/// Single-writer: one learner run owns one oracle.
class CountingOracle {
 public:
  explicit CountingOracle(GroundTruth truth, double equality_tolerance = 0.0);

  Label label(const Point& x, const Point& y, const Point& z);

  std::uint64_t query_count() const noexcept { return queries_; }
  void reset_count() noexcept { queries_ = 0; }
  Eigen::Index dimension() const noexcept { return truth_.dimension(); }
  double equality_tolerance() const noexcept { return tolerance_; }

  /// Validator access only. Learners never read the truth.
  const GroundTruth& truth() const noexcept { return truth_; }

 private:
  GroundTruth truth_;
  double tolerance_;
  std::uint64_t queries_ = 0;
};

Label label_triplet(CountingOracle& oracle, const Point& x, const Point& y,
                    const Point& z);
double eval_ground_truth(const GroundTruth& truth, const Point& x,
                         const Point& y);
Matrix analytic_hessian(const GroundTruth& truth, const Point& x);

/// Constants the learners assume known. Zero is accepted for the
/// third-derivative and Hessian-Lipschitz bounds of exactly quadratic truths.
struct SmoothnessParams {
  double alpha = 2.0;
  double L_smooth = 1.0;
  double M_third = 1.0;
  double eig_lo = 1.0;
  double eig_hi = 1.0;
  double L_hess = 1.0;
  double delta_floor = 1.0;
  double kappa0 = 40.0;

  void validate() const;
};

double default_kappa0(double eig_lo, double eig_hi) noexcept;

/// Radius of the zone where d(x, .) is sandwiched by quadratics:
/// 3 e / (2 M p^{3/2}); infinite when M = 0.
double strong_convexity_radius(double eig_lo, double M_third,
                               Eigen::Index p) noexcept;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace tripletq
