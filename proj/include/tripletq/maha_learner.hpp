#pragma once

#include "tripletq/core.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace tripletq {

/// Size of the symmetric vectorization of a p x p matrix.
inline Eigen::Index sym_dim(Eigen::Index p) noexcept { return p * (p + 1) / 2; }

/// vec(A): diagonal entries A_ii first, then (A_ij + A_ji)/sqrt(2) for i < j
/// in row-major order, so vec(A) . vec(B) = <A, B>_F for symmetric A, B.
Eigen::VectorXd sym_vec(const Matrix& a);
Matrix sym_unvec(const Eigen::VectorXd& v, Eigen::Index p);

/// e_1..e_p followed by (e_i + e_j)/sqrt(2) for i < j.
struct ExtendedBasis {
  Eigen::Index p = 0;
  std::vector<Point> vectors;
  std::size_t anchor = 0;  // index of the coordinate vector y

  static ExtendedBasis build(Eigen::Index p, std::size_t anchor = 0);
  const Point& anchor_vector() const { return vectors.at(anchor); }
};

/// Rows vec(u_i u_i') over the extended basis.
Matrix design_matrix(const ExtendedBasis& basis);
Matrix design_matrix(Eigen::Index p);

/// 1 / max(2p - 1, 4): lower bound on sigma_min(D)^2.
double design_conditioning_floor(Eigen::Index p) noexcept;

/// Where triplet queries are placed. Abstract query (0, a, b) is asked as
/// (origin, origin + scale a, origin + scale b).
struct QueryFrame {
  Point origin;
  double scale = 1.0;

  Label ask(CountingOracle& oracle, const Point& a, const Point& b) const;
};

/// Index of argmax_i e_i' M e_i by a knockout tournament (p - 1 queries).
/// An equal label keeps the incumbent.
std::size_t find_anchor(CountingOracle& oracle, const QueryFrame& frame);
std::size_t find_anchor(CountingOracle& oracle, Eigen::Index p,
                        const Point& origin);

struct BinarySearchState {
  double lo = 0.0;
  double hi = kInf;
  double c = 1.0;
  double tolerance = 0.0;
  int iteration = 0;
};

struct BinarySearchOptions {
  int max_iterations = 200;
  /// Observer called after each update; tests use it to check bracketing.
  std::function<void(const BinarySearchState&)> observer;
};

struct CoefficientEstimate {
  double value = 0.0;
  std::uint64_t queries = 0;
  bool exact = false;  // terminated on an equal label
};

/// Estimates c* = u'Mu / y'My by querying (0, sqrt(c) y, u): a greater label
/// means c y'My > u'Mu. Doubles c while no upper bracket exists, then
/// bisects until hi - lo <= eps_alg.
CoefficientEstimate binary_search_coeff(CountingOracle& oracle,
                                        const QueryFrame& frame,
                                        const Point& y, const Point& u,
                                        double eps_alg,
                                        const BinarySearchOptions& options = {});

/// Symmetric PSD matrix recovered up to scale.
struct MahaModel {
  Matrix M;                   // after PSD projection
  Matrix M_unprojected;       // symmetric solution of the linear system
  Eigen::VectorXd coefficients;
  std::size_t anchor = 0;
  std::uint64_t query_count = 0;
  double eps = 0.0;
  double eps_alg = 0.0;
  double rho = 1.0;           // query offset scale (1 in noiseless mode)

  Eigen::Index dimension() const noexcept { return M.rows(); }
  /// (b-a)' M (b-a).
  double quadratic(const Point& a, const Point& b) const;
};

/// Projection onto the PSD cone in Frobenius norm: clamp negative
/// eigenvalues of the symmetric part to zero.
Matrix project_psd(const Matrix& m);

/// Solves D vec(M) = c with the anchor row pinned to 1, then projects.
MahaModel solve_model(const Eigen::VectorXd& coefficients,
                      const ExtendedBasis& basis);

struct MahaOptions {
  std::optional<double> eps_alg;  // default eps / (2 p^2)
  Point origin;                   // default 0
  BinarySearchOptions search;
};

/// Noiseless recovery: ||tau M* - M||_F <= eps with tau set so that the
/// largest diagonal of tau M* is 1.
MahaModel learn_mahalanobis(CountingOracle& oracle, Eigen::Index p, double eps,
                            const MahaOptions& options = {});

struct HessianOptions {
  std::optional<double> rho;      // query offset scale, default eps^2
  std::optional<double> eps_alg;  // default eps / (2 p^2)
  BinarySearchOptions search;
};

/// Admissible error bound for local Hessian recovery without a rho override:
/// 3 e^3 / (2 M p^1.5 E^2).
double hessian_eps_limit(const SmoothnessParams& params, Eigen::Index p);

/// Local recovery at x: queries (x, x + rho sqrt(c) y, x + rho u).
/// Throws ParameterError when eps is outside the admissible range and no
/// rho override is given.
MahaModel learn_local_hessian(CountingOracle& oracle, const Point& x,
                              double eps, const SmoothnessParams& params,
                              const HessianOptions& options = {});

/// p(p+1)/2 log2(2 p^2 kappa^2 / eps) + p.
double mahalanobis_query_budget(Eigen::Index p, double kappa, double eps);
/// p(p+1)/2 log2(2 p^2 E^2 / (e^2 eps)) + p.
double hessian_query_budget(Eigen::Index p, double eig_lo, double eig_hi,
                            double eps);

/// Ratio of largest to smallest nonzero eigenvalue (relative cutoff 1e-12).
double condition_number(const Matrix& m);

}  // namespace tripletq
