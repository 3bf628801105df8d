// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include "tripletq/evaluation.hpp"
#include "tripletq/experiment.hpp"
#include "tripletq/maha_learner.hpp"
#include "tripletq/serialize.hpp"
#include "tripletq/smooth_learners.hpp"

#include <Eigen/SVD>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace tripletq;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int g_failures = 0;

void run(const char* name, double limit_s, const std::function<Outcome()>& f) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = f();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double dt =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  const bool in_time = dt <= limit_s;
  const bool ok = o.pass && in_time;
  if (!ok) ++g_failures;
  std::printf("%s %s (%.2fs, limit %.0fs%s) %s\n", ok ? "PASS" : "FAIL", name,
              dt, limit_s, in_time ? "" : ", over time", o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Outcome finite_tables() {
  Outcome o;
  ExperimentConfig c;
  c.seed = 101;
  c.learner = LearnerKind::kFinite;
  c.fixture.kind = "sqrt-maha";
  c.grid = {{"n", {5, 10, 16, 20}}, {"p", {3}}};
  const ExperimentResult r = run_experiment(c, 1);
  std::uint64_t viol = 0;
  double worst = 0.0;
  for (const ResultRow& row : r.rows) {
    viol += row.violations;
    worst = std::max(worst, double(row.query_count) / row.budget);
  }
  o.pass = r.all_pass && r.rows.size() == 4;
  o.detail = fmt("violations=%.0f max_queries/budget=%.3f", double(viol), worst);
  return o;
}

Outcome design_conditioning() {
  Outcome o;
  double worst = kInf;
  for (Eigen::Index p = 2; p <= 20; ++p) {
    const Matrix d = design_matrix(p);
    Eigen::JacobiSVD<Matrix> svd(d);
    const double smin = svd.singularValues().minCoeff();
    const double ratio = smin * smin / design_conditioning_floor(p);
    worst = std::min(worst, ratio);
    if (d.rows() != sym_dim(p) || d.cols() != sym_dim(p) || svd.rank() != sym_dim(p) ||
        ratio < 1.0 - 1e-12) {
      o.pass = false;
    }
  }
  o.detail = fmt("min sigma_min^2/floor=%.4f over p=2..20", worst);
  return o;
}

Outcome mahalanobis_recovery() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> kap(3.0, 10.0);
  ExperimentConfig c;
  c.seed = 202;
  c.learner = LearnerKind::kMaha;
  c.fixture.kind = "sqrt-maha";
  c.grid = {{"p", {2}}};
  std::size_t fails = 0, trials = 0;
  double worst_err = 0.0, worst_budget = 0.0;
  for (Eigen::Index p : {2, 3, 4, 6}) {
    for (int t = 0; t < 50; ++t) {
      GridPoint g;
      g.index = trials++;
      g.p = p;
      g.eps = 1e-3;
      g.kappa = kap(rng);
      const ResultRow row = run_point(c, g);
      worst_err = std::max(worst_err, row.error);
      worst_budget = std::max(worst_budget, double(row.query_count) / row.budget);
      if (!row.pass) ++fails;
    }
  }
  o.pass = fails == 0;
  o.detail = fmt("trials=%.0f failures=%.0f max_error=%.3g", double(trials),
                 double(fails), worst_err) +
             fmt(" max_queries/budget=%.3f", worst_budget);
  return o;
}

Outcome hessian_recovery() {
  Outcome o;
  std::size_t fails = 0, runs = 0;
  double worst = 0.0;
  for (const char* kind : {"sq-maha", "varying-hessian"}) {
    ExperimentConfig c;
    c.seed = 303;
    c.learner = LearnerKind::kHessian;
    c.fixture.kind = kind;
    c.grid = {{"p", {2, 3}}, {"eps", {1e-2, 3e-3}}};
    for (std::uint64_t rep = 0; rep < 5; ++rep) {
      c.seed = 303 + rep;
      const ExperimentResult r = run_experiment(c, 2);
      for (const ResultRow& row : r.rows) {
        ++runs;
        worst = std::max(worst, row.error / row.eps);
        if (!row.pass) ++fails;
      }
    }
  }
  o.pass = fails == 0;
  o.detail = fmt("runs=%.0f failures=%.0f max_error/eps=%.3f", double(runs),
                 double(fails), worst);
  return o;
}

Outcome additive_agreement() {
  Outcome o;
  ExperimentConfig c;
  c.seed = 404;
  c.learner = LearnerKind::kAdditive;
  c.fixture.kind = "sq-maha";
  c.samples = 100000;
  c.near_samples = 100000;
  c.grid = {{"p", {2}}, {"omega", {0.1, 0.3}}};
  const ExperimentResult r = run_experiment(c, 2);
  std::ostringstream s;
  for (const ResultRow& row : r.rows) {
    s << " omega=" << row.omega << ":eligible=" << row.eligible
      << ",violations=" << row.violations
      << ",centers=" << row.details["cover_size"];
  }
  o.pass = r.all_pass;
  o.detail = s.str();
  return o;
}

Outcome multiplicative_agreement() {
  Outcome o;
  const double a = std::numbers::pi / 6.0;
  Matrix rot(2, 2);
  rot << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  const Matrix star = rot * Eigen::Vector2d(1.0, 0.5).asDiagonal() *
                      rot.transpose();
  ExperimentConfig c;
  c.seed = 505;
  c.learner = LearnerKind::kMultiplicative;
  c.fixture.kind = "sq-maha";
  c.fixture.matrix = star;
  c.samples = 100000;
  c.near_samples = 100000;
  c.grid = {{"p", {2}}, {"omega", {0.5, 1.0}}};
  const ExperimentResult r = run_experiment(c, 2);
  std::ostringstream s;
  for (const ResultRow& row : r.rows) {
    s << " omega=" << row.omega << ":eligible=" << row.eligible
      << ",violations=" << row.violations
      << ",centers=" << row.details["cover_size"]
      << ",domain_scale=" << row.details["domain_scale"].get<double>();
  }
  ExperimentConfig neg = c;
  neg.overrides.theta = 0.0;
  neg.grid = {{"p", {2}}, {"omega", {0.5}}};
  const ExperimentResult n = run_experiment(neg, 1);
  const std::uint64_t neg_viol = n.rows.front().violations;
  s << " theta=0 control violations=" << neg_viol;
  o.pass = r.all_pass && neg_viol > 0;
  o.detail = s.str();
  return o;
}

Outcome smoothness_audits() {
  Outcome o;
  std::ostringstream s;
  std::mt19937_64 rng(606);
  FixtureSpec fixture;
  fixture.kind = "varying-hessian";
  for (Eigen::Index p : {2, 3}) {
    const GroundTruth t = make_truth(fixture, p, rng);
    const Domain box = make_box(fixture, p);
    const SmoothnessParams sp = fixture_params(t, box);
    const double m = t.third_derivative_bound(0.1);
    const TaylorAudit ta = audit_taylor(t, box, m, 10000, 0.1, 7 + p);
    const TaylorAudit half = audit_taylor(t, box, 0.5 * m, 10000, 0.1, 7 + p);
    const SandwichAudit sw = audit_sandwich(t, box, sp, 10000, 17 + p);
    const bool ok = ta.max_ratio <= 1.0 && half.max_ratio > 1.0 &&
                    sw.violations == 0 && sw.samples == 10000;
    o.pass = o.pass && ok;
    s << " p=" << p << ":taylor=" << ta.max_ratio
      << ",halved=" << half.max_ratio << ",sandwich_viol=" << sw.violations;
  }
  const GroundTruth t = make_truth(fixture, 2, rng);
  const Domain box = make_box(fixture, 2);
  CountingOracle oracle(t);
  MultiplicativeOptions opts;
  opts.cover.max_centers = 200;
  const HybridDistance d =
      learn_multiplicative(box, oracle, 0.5, fixture_params(t, box), {}, opts);
  const EigenBandAudit eb = audit_eigen_band(t, d);
  o.pass = o.pass && eb.checked == d.cover.size() && eb.violations == 0;
  s << " eigen_band checked=" << eb.checked << ",violations=" << eb.violations;
  o.detail = s.str();
  return o;
}

Outcome determinism() {
  Outcome o;
  const ExperimentConfig c = experiment_config_from_json(Json::parse(R"({
    "learner": "hessian", "seed": 77,
    "fixture": {"kind": "varying-hessian"},
    "grid": {"p": [2, 3], "eps": [0.01, 0.003]}})"));
  const ExperimentResult a = run_experiment(c, 1);
  const ExperimentResult b = run_experiment(c, 4);
  const ExperimentResult f = run_experiment(
      experiment_config_from_json(Json::parse(R"({
    "learner": "finite", "seed": 78, "grid": {"n": [6, 12], "p": [2]}})")),
      2);
  const ExperimentResult g = run_experiment(
      experiment_config_from_json(Json::parse(R"({
    "learner": "finite", "seed": 78, "grid": {"n": [6, 12], "p": [2]}})")),
      1);
  o.pass = a.hash == b.hash && f.hash == g.hash && to_csv(a.rows).size() > 0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "hash=%016llx", (unsigned long long)a.hash);
  o.detail = buf;
  return o;
}

}  // namespace

int main() {
  run("1 finite-table exactness and budget", 5, finite_tables);
  run("2 design-matrix conditioning", 1, design_conditioning);
  run("3 Mahalanobis recovery", 30, mahalanobis_recovery);
  run("4 local Hessian recovery", 60, hessian_recovery);
  run("5 additive agreement", 120, additive_agreement);
  run("6 multiplicative agreement", 300, multiplicative_agreement);
  run("7 Taylor, sandwich and eigenvalue-band audits", 30, smoothness_audits);
  run("8 sweep determinism", 60, determinism);
  std::printf("%d criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
