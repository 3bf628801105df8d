#pragma once

#include "tripletq/core.hpp"
#include "tripletq/cover.hpp"
#include "tripletq/finite_learner.hpp"
#include "tripletq/maha_learner.hpp"

#include <optional>
#include <vector>

namespace tripletq {

// ---------------------------------------------------------------------------
// Additive learner: cover + finite learner + nearest-center extension.

enum class AdditiveRadiusRule {
  /// min(1, (omega / 4L)^(1/alpha)) for an (alpha, L)-smooth truth.
  kHolder,
  /// sqrt(min(1, omega) / (2 gamma + 4K)), K = M p^1.5 / 6, gamma = eig_hi.
  kSecondOrder,
};

double additive_radius(AdditiveRadiusRule rule, double omega,
                       const SmoothnessParams& params, Eigen::Index p);

struct AdditiveOptions {
  AdditiveRadiusRule rule = AdditiveRadiusRule::kHolder;
  CoverOptions cover;
  std::optional<double> eps_override;
};

/// d'(x, y) = d_hat(c(x), c(y)).
struct NNDistance {
  EpsCover cover;
  RankTable table;
  AdditiveRadiusRule rule = AdditiveRadiusRule::kHolder;
  std::uint64_t query_count = 0;

  double eval(const Point& x, const Point& y) const;
  Label answer(const Point& x, const Point& y, const Point& z) const;
};

NNDistance learn_additive(const Domain& domain, CountingOracle& oracle,
                          double omega, const SmoothnessParams& params,
                          const AdditiveOptions& options = {});

double eval_nn(const NNDistance& d, const Point& x, const Point& y);

// ---------------------------------------------------------------------------
// Multiplicative learner: cover + finite learner on centers + local Hessians.

struct MultiplicativeThresholds {
  double beta_hat = 0.0;
  double beta_curvature = 0.0;   // e/(8E) * 9e^2/(4 M^2 p^3)
  double beta_separation = 0.0;  // 4 Delta E / (e^2 kappa0)
  double beta_taylor = 0.0;      // (e w / (8 (w+2) (...)))^2
  double eps = 0.0;              // cover radius
  double xi = 0.0;               // local Hessian error threshold
  double theta = 0.0;            // 4 beta_hat
  double kappa0 = 0.0;
};

/// Switch scale, cover radius, and local error threshold from the
/// smoothness constants. Infinite terms (M = 0 or L_hess = 0) drop out of
/// the minimum. Throws ParameterError when beta_hat is not finite and > 0.
MultiplicativeThresholds compute_thresholds(const SmoothnessParams& params,
                                            double omega, Eigen::Index p);

struct ThresholdOverrides {
  std::optional<double> eps;
  std::optional<double> xi;
  std::optional<double> theta;
};

struct MultiplicativeOptions {
  CoverOptions cover{CoverMethod::kGrid, 2500, 0.25};
  /// Shrink a box domain about its center until the cover fits the cap.
  bool downscale_on_cap = true;
};

/// d'(x,y) = d_f(c(x), c(y)) + theta  if (y-x)' H_c(x) (y-x) > theta,
///           (y-x)' H_c(x) (y-x)      otherwise.
struct HybridDistance {
  EpsCover cover;
  RankTable table;
  std::vector<MahaModel> locals;  // one per center
  double theta = 0.0;
  MultiplicativeThresholds thresholds;  // as computed, before overrides
  SmoothnessParams params;
  double domain_scale = 1.0;            // < 1 when the domain was shrunk
  std::uint64_t global_queries = 0;
  std::uint64_t local_queries = 0;
  bool rho_override = false;

  std::uint64_t query_count() const noexcept {
    return global_queries + local_queries;
  }
  double local_quadratic(std::size_t center, const Point& x,
                         const Point& y) const;
};

HybridDistance learn_multiplicative(const Domain& domain,
                                    CountingOracle& oracle, double omega,
                                    const SmoothnessParams& params,
                                    const ThresholdOverrides& overrides = {},
                                    const MultiplicativeOptions& options = {});

double eval_hybrid(const HybridDistance& d, const Point& x, const Point& y);

/// Both above theta: label of (c(x), c(y), c(z)) under d_f. Both at or below:
/// sign(l_xy - l_xz). Mixed: the side above theta is the larger.
Label answer_triplet_hybrid(const HybridDistance& d, const Point& x,
                            const Point& y, const Point& z);

/// Largest box-scaling factor in (0, 1] whose grid cover at eps fits `cap`.
double fit_box_to_cap(const Domain& domain, double eps, std::size_t cap);

}  // namespace tripletq
