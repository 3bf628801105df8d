#pragma once

#include "tripletq/core.hpp"
#include "tripletq/cover.hpp"
#include "tripletq/maha_learner.hpp"
#include "tripletq/smooth_learners.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace tripletq {

struct Triplet {
  Point x, y, z;
};

/// The learner under test, seen only through its answers.
using TripletAnswer =
    std::function<Label(const Point&, const Point&, const Point&)>;

TripletAnswer answer_of(const NNDistance& d);
TripletAnswer answer_of(const HybridDistance& d);
/// Answers with the truth itself (self-agreement baseline).
TripletAnswer answer_of(const GroundTruth& truth, double tolerance = 0.0);

/// Deterministic triplet streams over a box domain.
class TripletSampler {
 public:
  TripletSampler(Domain box, std::uint64_t seed);

  std::vector<Triplet> uniform(std::size_t n);
  /// x uniform; y and z offset from x at each scale in turn (radius
  /// scale * U(0, 2)), half of them collinear with y. Clamped to the box.
  std::vector<Triplet> near_pairs(std::size_t n,
                                  const std::vector<double>& scales);

  Point uniform_point();
  Point offset(const Point& x, double radius);

 private:
  Point clamp(Point x) const;
  Point unit_direction();

  Domain box_;
  std::mt19937_64 rng_;
};

struct ViolationExemplar {
  Triplet triplet;
  double d_xy = 0.0;
  double d_xz = 0.0;
  Label expected = Label::kEqual;
  Label answered = Label::kEqual;
};

struct AgreementReport {
  std::string criterion;  // "additive" or "multiplicative"
  double threshold = 0.0;
  std::uint64_t total_triplets = 0;
  std::uint64_t eligible = 0;
  std::uint64_t violations = 0;
  std::vector<ViolationExemplar> violation_exemplars;  // at most 10
  std::uint64_t query_count_of_learner = 0;

  void merge(const AgreementReport& other);
};

/// Eligible when |d(x,y) - d(x,z)| > omega; a violation is an answer whose
/// sign differs from the truth's.
AgreementReport check_additive(const GroundTruth& truth,
                               const TripletAnswer& answer, double omega,
                               const std::vector<Triplet>& triplets,
                               std::uint64_t learner_queries = 0);

/// Eligible when d(x,y) > (1+omega) d(x,z) (expect >) or
/// d(x,z) > (1+omega) d(x,y) (expect <).
AgreementReport check_multiplicative(const GroundTruth& truth,
                                     const TripletAnswer& answer, double omega,
                                     const std::vector<Triplet>& triplets,
                                     std::uint64_t learner_queries = 0);

enum class ScaleConvention {
  kMaxDiagonal,  // tau = 1 / max_i M*_ii
  kAnchor,       // tau = 1 / M*_kk for the learner's anchor k
  kBestFit,      // tau = <M, M*> / ||M*||^2
};

struct ScaledError {
  double tau = 0.0;
  double error = 0.0;
};

ScaledError frobenius_error(const Matrix& learned, const Matrix& target,
                            ScaleConvention convention,
                            std::size_t anchor = 0);

struct TaylorAudit {
  double max_ratio = 0.0;  // max |d - 1/2 h'Hh| / ((M p^1.5 / 6) |h|^3)
  double max_residual = 0.0;
  std::size_t samples = 0;
};

/// x uniform in `box`, h uniform in the ball of `radius`.
TaylorAudit audit_taylor(const GroundTruth& truth, const Domain& box,
                         double M_third, std::size_t n_samples, double radius,
                         std::uint64_t seed);

struct SandwichAudit {
  double radius = 0.0;
  double min_lower_ratio = kInf;  // min d / ((e/4)|h|^2), must be >= 1
  double max_upper_ratio = 0.0;   // max d / (E |h|^2), must be <= 1
  std::size_t violations = 0;
  std::size_t samples = 0;
};

/// e/4 |h|^2 <= d(x, x+h) <= E |h|^2 for |h| <= 3e / (2 M p^1.5), capped
/// at `max_radius`.
SandwichAudit audit_sandwich(const GroundTruth& truth, const Domain& box,
                             const SmoothnessParams& params,
                             std::size_t n_samples, std::uint64_t seed,
                             double max_radius = 1.0);

struct EigenBandAudit {
  std::size_t checked = 0;
  std::size_t violations = 0;
  double worst_low_ratio = kInf;  // min lambda_min / (tau e / 2)
  double worst_high_ratio = 0.0;  // max lambda_max / (2 tau E)
};

/// lambda_min(H_c) >= tau_c e / 2 and lambda_max(H_c) <= 2 tau_c E, with
/// tau_c = 1 / (H*_c)_kk at the learner's anchor k.
EigenBandAudit audit_eigen_band(const GroundTruth& truth,
                                const HybridDistance& d);

struct SmallDistanceAudit {
  std::size_t checked = 0;
  std::size_t violations = 0;
  double min_margin = kInf;  // min d(x0,y) / (e^2 t beta / (4E))
};

/// (x0-y)' H_c (x0-y) >= 2 t beta  =>  d(x0,y) >= e^2 t beta / (4E),
/// t in [0, kappa0], for sampled centers c and pairs (x0, y) in the box.
SmallDistanceAudit audit_small_distance(const GroundTruth& truth,
                                        const HybridDistance& d,
                                        const Domain& box,
                                        std::size_t n_samples,
                                        std::uint64_t seed);

enum class BudgetFormula { kFinite, kMahalanobis, kHessian, kMultiplicative };

struct BudgetInputs {
  std::uint64_t n = 0;  // finite set size or cover size
  Eigen::Index p = 0;
  double kappa = 1.0;
  double eps = 0.0;     // eps for Mahalanobis/Hessian, xi for multiplicative
  double eig_lo = 1.0;
  double eig_hi = 1.0;
};

struct BudgetCheck {
  std::uint64_t measured = 0;
  double budget = 0.0;
  double slack = 1.0;
  bool pass = false;
};

/// Budgets use log2. Finite: n(n-1)(log2(n-1) + 1). Mahalanobis and
/// Hessian: per-recovery formulas. Multiplicative: finite(N) +
/// N * Hessian(xi), with a factor 2 slack.
double query_budget(BudgetFormula formula, const BudgetInputs& in);
BudgetCheck assert_query_budget(std::uint64_t measured, BudgetFormula formula,
                                const BudgetInputs& in);

// ---------------------------------------------------------------------------
// Fixtures

/// Random symmetric PD matrix with condition number exactly `kappa` and
/// largest diagonal entry 1.
Matrix random_psd(Eigen::Index p, double kappa, std::mt19937_64& rng);
/// Rotation of diag(eigenvalues) by a random orthogonal matrix.
Matrix random_rotation_of(const Eigen::VectorXd& eigenvalues,
                          std::mt19937_64& rng);
std::vector<Point> random_points(std::size_t n, const Domain& box,
                                 std::mt19937_64& rng);

/// Constants a fixture satisfies on `domain`, derived analytically.
/// Lipschitz-type smoothness (alpha = 1) is used for the additive radius:
/// squared kinds break the plain triangle inequality, but satisfy
/// |d(x,y) - d(x,y')| <= L |y - y'| on a bounded domain.
SmoothnessParams fixture_params(const GroundTruth& truth, const Domain& domain);

}  // namespace tripletq
