#pragma once

#include "tripletq/evaluation.hpp"
#include "tripletq/serialize.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace tripletq {

/// Fixture description. Random matrices are drawn from the point seed.
struct FixtureSpec {
  std::string kind = "sq-maha";
  double kappa = 4.0;               // condition number of a random matrix
  std::optional<Matrix> matrix;     // explicit matrix, overrides kappa
  double base_lo = 0.5;             // eigenvalue range of the varying base A
  double base_hi = 1.0;
  double amplitude = 0.1;
  double frequency = 1.0;
  double phase = 0.0;
  double box_lo = 0.0;
  double box_hi = 1.0;
};

GroundTruth make_truth(const FixtureSpec& fixture, Eigen::Index p,
                       std::mt19937_64& rng);
Domain make_box(const FixtureSpec& fixture, Eigen::Index p);

enum class LearnerKind { kFinite, kAdditive, kMaha, kHessian, kMultiplicative };

std::string_view to_string(LearnerKind k) noexcept;
LearnerKind learner_kind_from_string(std::string_view name);

struct ExperimentConfig {
  std::uint64_t seed = 0;
  LearnerKind learner = LearnerKind::kFinite;
  FixtureSpec fixture;
  /// Parameter name -> values; the run covers the cartesian product.
  /// Known names: p, n, omega, eps, kappa.
  std::map<std::string, std::vector<double>> grid;
  std::size_t samples = 10000;       // uniform triplets per check
  std::size_t near_samples = 10000;  // stratified near-pair triplets
  std::string mode = "noiseless";    // maha: noiseless | noisy
  std::string rule = "holder";       // additive: holder | second-order
  CoverMethod cover = CoverMethod::kGrid;
  std::optional<std::size_t> max_centers;
  std::optional<SmoothnessParams> params;  // replaces fixture constants
  ThresholdOverrides overrides;
  std::optional<double> eps_override;      // additive cover radius
  std::string out_csv;
  std::string out_json;

  /// Throws InvalidInput on an empty grid or unknown names.
  void validate() const;
};

ExperimentConfig experiment_config_from_json(const Json& j);
Json to_json(const ExperimentConfig& c);

struct GridPoint {
  std::size_t index = 0;
  Eigen::Index p = 2;
  std::size_t n = 16;
  double omega = 0.3;
  double eps = 1e-3;
  double kappa = 4.0;
};

std::vector<GridPoint> expand_grid(const ExperimentConfig& config);

struct ResultRow {
  std::size_t index = 0;
  std::string learner;
  std::string fixture;
  Eigen::Index p = 0;
  std::size_t n = 0;
  double omega = 0.0;
  double eps = 0.0;
  double kappa = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t query_count = 0;
  double budget = 0.0;
  double error = 0.0;  // Frobenius error, or NaN when not applicable
  std::uint64_t eligible = 0;
  std::uint64_t violations = 0;
  bool pass = false;
  double wall_time = 0.0;
  Json details;  // full-precision extras, not part of the CSV
};

/// Seed of grid point `index`, independent of scheduling.
std::uint64_t point_seed(std::uint64_t seed, std::size_t index) noexcept;

/// Runs one grid point. When `artifact` is given it receives the learned
/// object's JSON.
ResultRow run_point(const ExperimentConfig& config, const GridPoint& point,
                    Json* artifact = nullptr);

struct ExperimentResult {
  std::vector<ResultRow> rows;
  bool all_pass = true;
  std::uint64_t hash = 0;
};

ExperimentResult run_experiment(const ExperimentConfig& config,
                                unsigned jobs = 1);

std::string csv_header();
std::string csv_row(const ResultRow& row, bool with_wall_time = true);
std::string to_csv(const std::vector<ResultRow>& rows);
Json to_json(const ResultRow& row);
Json sidecar_json(const ExperimentConfig& config, const ExperimentResult& r);

/// FNV-1a over the CSV rows with the wall_time column dropped.
std::uint64_t determinism_hash(const std::vector<ResultRow>& rows);

}  // namespace tripletq
