#include "tripletq/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

namespace tripletq {

GroundTruth make_truth(const FixtureSpec& fixture, Eigen::Index p,
                       std::mt19937_64& rng) {
  const TruthKind kind = truth_kind_from_string(fixture.kind);
  if (kind == TruthKind::kGaussianKl) return GroundTruth::gaussian_kl(p);
  if (kind == TruthKind::kVaryingHessian) {
    Matrix a;
    if (fixture.matrix) {
      a = *fixture.matrix;
    } else {
      Eigen::VectorXd ev = Eigen::VectorXd::LinSpaced(p, fixture.base_lo,
                                                      fixture.base_hi);
      if (p == 1) ev[0] = fixture.base_lo;
      a = random_rotation_of(ev, rng);
    }
    return GroundTruth::varying_hessian(a, fixture.amplitude, fixture.frequency,
                                        fixture.phase);
  }
  Matrix m = fixture.matrix ? *fixture.matrix : random_psd(p, fixture.kappa, rng);
  return kind == TruthKind::kSqrtMahalanobis
             ? GroundTruth::sqrt_mahalanobis(m)
             : GroundTruth::squared_mahalanobis(m);
}

Domain make_box(const FixtureSpec& fixture, Eigen::Index p) {
  return Domain::box(Point::Constant(p, fixture.box_lo),
                     Point::Constant(p, fixture.box_hi));
}

std::string_view to_string(LearnerKind k) noexcept {
  switch (k) {
    case LearnerKind::kFinite: return "finite";
    case LearnerKind::kAdditive: return "additive";
    case LearnerKind::kMaha: return "maha";
    case LearnerKind::kHessian: return "hessian";
    case LearnerKind::kMultiplicative: return "multiplicative";
  }
  return "?";
}

LearnerKind learner_kind_from_string(std::string_view name) {
  if (name == "finite") return LearnerKind::kFinite;
  if (name == "additive") return LearnerKind::kAdditive;
  if (name == "maha") return LearnerKind::kMaha;
  if (name == "hessian") return LearnerKind::kHessian;
  if (name == "multiplicative" || name == "mult") {
    return LearnerKind::kMultiplicative;
  }
  throw InvalidInput("unknown learner: " + std::string(name));
}

void ExperimentConfig::validate() const {
  if (grid.empty()) throw InvalidInput("config: parameter grid is empty");
  for (const auto& [name, values] : grid) {
    if (name != "p" && name != "n" && name != "omega" && name != "eps" &&
        name != "kappa") {
      throw InvalidInput("config: unknown grid parameter " + name);
    }
    if (values.empty()) {
      throw InvalidInput("config: grid parameter " + name + " has no values");
    }
  }
  if (mode != "noiseless" && mode != "noisy") {
    throw InvalidInput("config: mode must be noiseless or noisy");
  }
  if (rule != "holder" && rule != "second-order") {
    throw InvalidInput("config: rule must be holder or second-order");
  }
  truth_kind_from_string(fixture.kind);
  if (!(fixture.box_hi > fixture.box_lo)) {
    throw InvalidInput("config: box_hi must exceed box_lo");
  }
}

namespace {

FixtureSpec fixture_from_json(const Json& j) {
  FixtureSpec f;
  for (const auto& [key, v] : j.items()) {
    if (key == "kind") f.kind = v.get<std::string>();
    else if (key == "kappa") f.kappa = v.get<double>();
    else if (key == "matrix") f.matrix = matrix_from_json(v);
    else if (key == "base_lo") f.base_lo = v.get<double>();
    else if (key == "base_hi") f.base_hi = v.get<double>();
    else if (key == "amplitude") f.amplitude = v.get<double>();
    else if (key == "frequency") f.frequency = v.get<double>();
    else if (key == "phase") f.phase = v.get<double>();
    else if (key == "box_lo") f.box_lo = v.get<double>();
    else if (key == "box_hi") f.box_hi = v.get<double>();
    else throw InvalidInput("config: unknown fixture key " + key);
  }
  return f;
}

Json fixture_to_json(const FixtureSpec& f) {
  Json j{{"kind", f.kind},           {"kappa", f.kappa},
         {"base_lo", f.base_lo},     {"base_hi", f.base_hi},
         {"amplitude", f.amplitude}, {"frequency", f.frequency},
         {"phase", f.phase},         {"box_lo", f.box_lo},
         {"box_hi", f.box_hi}};
  if (f.matrix) j["matrix"] = to_json(*f.matrix);
  return j;
}

}  // namespace

ExperimentConfig experiment_config_from_json(const Json& j) {
  if (!j.is_object()) throw InvalidInput("config must be a JSON object");
  ExperimentConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "learner") c.learner = learner_kind_from_string(v.get<std::string>());
      else if (key == "fixture") c.fixture = fixture_from_json(v);
      else if (key == "grid") {
        for (const auto& [name, vals] : v.items()) {
          c.grid[name] = vals.is_array() ? vals.get<std::vector<double>>()
                                         : std::vector<double>{vals.get<double>()};
        }
      }
      else if (key == "samples") c.samples = v.get<std::size_t>();
      else if (key == "near_samples") c.near_samples = v.get<std::size_t>();
      else if (key == "mode") c.mode = v.get<std::string>();
      else if (key == "rule") c.rule = v.get<std::string>();
      else if (key == "cover") {
        const auto s = v.get<std::string>();
        if (s == "grid") c.cover = CoverMethod::kGrid;
        else if (s == "greedy") c.cover = CoverMethod::kGreedy;
        else throw InvalidInput("config: cover must be grid or greedy");
      }
      else if (key == "max_centers") c.max_centers = v.get<std::size_t>();
      else if (key == "params") c.params = smoothness_params_from_json(v);
      else if (key == "override_eps") c.overrides.eps = v.get<double>();
      else if (key == "override_xi") c.overrides.xi = v.get<double>();
      else if (key == "override_theta") c.overrides.theta = v.get<double>();
      else if (key == "eps_override") c.eps_override = v.get<double>();
      else if (key == "out_csv") c.out_csv = v.get<std::string>();
      else if (key == "out_json") c.out_json = v.get<std::string>();
      else throw InvalidInput("config: unknown key " + key);
    }
  } catch (const Json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

Json to_json(const ExperimentConfig& c) {
  Json j{{"seed", c.seed},
         {"learner", std::string(to_string(c.learner))},
         {"fixture", fixture_to_json(c.fixture)},
         {"grid", c.grid},
         {"samples", c.samples},
         {"near_samples", c.near_samples},
         {"mode", c.mode},
         {"rule", c.rule},
         {"cover", c.cover == CoverMethod::kGrid ? "grid" : "greedy"}};
  if (c.max_centers) j["max_centers"] = *c.max_centers;
  if (c.params) j["params"] = to_json(*c.params);
  if (c.overrides.eps) j["override_eps"] = *c.overrides.eps;
  if (c.overrides.xi) j["override_xi"] = *c.overrides.xi;
  if (c.overrides.theta) j["override_theta"] = *c.overrides.theta;
  if (c.eps_override) j["eps_override"] = *c.eps_override;
  return j;
}

std::vector<GridPoint> expand_grid(const ExperimentConfig& config) {
  config.validate();
  std::vector<GridPoint> out{GridPoint{}};
  out[0].kappa = config.fixture.kappa;
  for (const auto& [name, values] : config.grid) {
    std::vector<GridPoint> next;
    next.reserve(out.size() * values.size());
    for (const GridPoint& base : out) {
      for (double v : values) {
        GridPoint g = base;
        if (name == "p") g.p = Eigen::Index(std::llround(v));
        else if (name == "n") g.n = std::size_t(std::llround(v));
        else if (name == "omega") g.omega = v;
        else if (name == "eps") g.eps = v;
        else if (name == "kappa") g.kappa = v;
        next.push_back(g);
      }
    }
    out = std::move(next);
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].index = i;
  return out;
}

std::uint64_t point_seed(std::uint64_t seed, std::size_t index) noexcept {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (std::uint64_t(index) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

SmoothnessParams params_for(const ExperimentConfig& c, const GroundTruth& t,
                            const Domain& box) {
  return c.params ? *c.params : fixture_params(t, box);
}

std::vector<Triplet> check_stream(const Domain& box, std::uint64_t seed,
                                  std::size_t uniform, std::size_t near,
                                  const std::vector<double>& scales) {
  TripletSampler s(box, seed);
  std::vector<Triplet> out = s.uniform(uniform);
  if (near > 0) {
    std::vector<Triplet> more = s.near_pairs(near, scales);
    out.insert(out.end(), std::make_move_iterator(more.begin()),
               std::make_move_iterator(more.end()));
  }
  return out;
}

void run_finite(const ExperimentConfig& c, const GridPoint& g,
                std::mt19937_64& rng, ResultRow& row, Json* artifact) {
  const GroundTruth truth = make_truth(c.fixture, g.p, rng);
  const Domain box = make_box(c.fixture, g.p);
  const std::vector<Point> pts = random_points(g.n, box, rng);
  CountingOracle oracle(truth);
  const RankTable t = learn_finite_distance(pts, oracle);
  row.query_count = t.query_count;
  std::uint64_t bad = 0;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        const Label want = label_from_sign(truth.eval(pts[i], pts[j]) -
                                           truth.eval(pts[i], pts[k]));
        if (t.label(i, j, k) != want) ++bad;
      }
    }
  }
  row.eligible = std::uint64_t(n) * n * n;
  row.violations = bad;
  BudgetInputs in;
  in.n = n;
  const BudgetCheck b = assert_query_budget(row.query_count,
                                            BudgetFormula::kFinite, in);
  row.budget = b.budget;
  row.error = kNaN;
  row.pass = bad == 0 && b.pass;
  if (artifact) *artifact = to_json(t);
}

void run_maha(const ExperimentConfig& c, const GridPoint& g,
              std::mt19937_64& rng, ResultRow& row, Json* artifact) {
  const Matrix target = c.fixture.matrix ? *c.fixture.matrix
                                         : random_psd(g.p, g.kappa, rng);
  const double kappa = condition_number(target);
  MahaModel model;
  BudgetCheck b;
  ScaledError err;
  if (c.mode == "noiseless") {
    CountingOracle oracle(GroundTruth::sqrt_mahalanobis(target));
    model = learn_mahalanobis(oracle, g.p, g.eps);
    err = frobenius_error(model.M, target, ScaleConvention::kMaxDiagonal);
    BudgetInputs in;
    in.p = g.p;
    in.kappa = kappa;
    in.eps = g.eps;
    b = assert_query_budget(model.query_count, BudgetFormula::kMahalanobis, in);
  } else {
    const GroundTruth truth = GroundTruth::squared_mahalanobis(target);
    CountingOracle oracle(truth);
    const Domain box = make_box(c.fixture, g.p);
    const SmoothnessParams sp = params_for(c, truth, box);
    const Point x = random_points(1, box, rng).front();
    model = learn_local_hessian(oracle, x, g.eps, sp);
    err = frobenius_error(model.M, target, ScaleConvention::kAnchor,
                          model.anchor);
    BudgetInputs in;
    in.p = g.p;
    in.eps = g.eps;
    in.eig_lo = sp.eig_lo;
    in.eig_hi = sp.eig_hi;
    b = assert_query_budget(model.query_count, BudgetFormula::kHessian, in);
  }
  row.fixture = c.mode == "noiseless" ? "sqrt-maha" : "sq-maha";
  row.kappa = kappa;
  row.query_count = model.query_count;
  row.budget = b.budget;
  row.error = err.error;
  row.pass = err.error <= g.eps && b.pass;
  row.details["tau"] = err.tau;
  if (artifact) *artifact = to_json(model);
}

void run_hessian(const ExperimentConfig& c, const GridPoint& g,
                 std::mt19937_64& rng, ResultRow& row, Json* artifact) {
  const GroundTruth truth = make_truth(c.fixture, g.p, rng);
  const Domain box = make_box(c.fixture, g.p);
  const SmoothnessParams sp = params_for(c, truth, box);
  const Point x = random_points(1, box, rng).front();
  CountingOracle oracle(truth);
  const MahaModel model = learn_local_hessian(oracle, x, g.eps, sp);
  const Matrix star = truth.hessian(x);
  const ScaledError err = frobenius_error(model.M, star,
                                          ScaleConvention::kAnchor,
                                          model.anchor);
  BudgetInputs in;
  in.p = g.p;
  in.eps = g.eps;
  in.eig_lo = sp.eig_lo;
  in.eig_hi = sp.eig_hi;
  const BudgetCheck b = assert_query_budget(model.query_count,
                                            BudgetFormula::kHessian, in);
  const bool tau_ok = err.tau >= 1.0 / sp.eig_hi - 1e-12 &&
                      err.tau <= 1.0 / sp.eig_lo + 1e-12;
  row.query_count = model.query_count;
  row.budget = b.budget;
  row.error = err.error;
  row.pass = err.error <= 1.1 * g.eps && tau_ok && b.pass;
  row.details["tau"] = err.tau;
  row.details["x"] = to_json(x);
  if (artifact) *artifact = to_json(model);
}

void run_additive(const ExperimentConfig& c, const GridPoint& g,
                  std::mt19937_64& rng, ResultRow& row, Json* artifact) {
  const GroundTruth truth = make_truth(c.fixture, g.p, rng);
  const Domain box = make_box(c.fixture, g.p);
  const SmoothnessParams sp = params_for(c, truth, box);
  CountingOracle oracle(truth);
  AdditiveOptions opts;
  opts.rule = c.rule == "holder" ? AdditiveRadiusRule::kHolder
                                 : AdditiveRadiusRule::kSecondOrder;
  opts.cover.method = c.cover;
  if (c.max_centers) opts.cover.max_centers = *c.max_centers;
  opts.eps_override = c.eps_override;
  const NNDistance d = learn_additive(box, oracle, g.omega, sp, opts);
  const double r = d.cover.radius;
  const auto triplets =
      check_stream(box, rng(), c.samples, c.near_samples,
                   {r, 4.0 * r, 0.1 * box.diameter()});
  const AgreementReport rep =
      check_additive(truth, answer_of(d), g.omega, triplets, d.query_count);
  BudgetInputs in;
  in.n = d.cover.size();
  row.query_count = d.query_count;
  row.budget = query_budget(BudgetFormula::kFinite, in);
  row.eps = r;
  row.error = kNaN;
  row.eligible = rep.eligible;
  row.violations = rep.violations;
  row.pass = rep.violations == 0 && double(row.query_count) <= row.budget;
  row.details["cover_size"] = d.cover.size();
  row.details["report"] = to_json(rep);
  if (artifact) *artifact = to_json(d);
}

void run_multiplicative(const ExperimentConfig& c, const GridPoint& g,
                        std::mt19937_64& rng, ResultRow& row, Json* artifact) {
  const GroundTruth truth = make_truth(c.fixture, g.p, rng);
  const Domain box = make_box(c.fixture, g.p);
  const SmoothnessParams sp = params_for(c, truth, box);
  CountingOracle oracle(truth);
  MultiplicativeOptions opts;
  opts.cover.method = c.cover;
  if (c.max_centers) opts.cover.max_centers = *c.max_centers;
  const HybridDistance d =
      learn_multiplicative(box, oracle, g.omega, sp, c.overrides, opts);
  const Domain& eff = d.cover.domain;
  const double s = std::sqrt(d.theta);
  const double r = d.cover.radius;
  const auto triplets =
      check_stream(eff, rng(), c.samples, c.near_samples,
                   {0.5 * s, s, 2.0 * s, r, 4.0 * r, 0.25 * eff.diameter()});
  const AgreementReport rep = check_multiplicative(
      truth, answer_of(d), g.omega, triplets, d.query_count());
  BudgetInputs in;
  in.n = d.cover.size();
  in.p = g.p;
  in.eps = c.overrides.xi.value_or(d.thresholds.xi);
  in.eig_lo = sp.eig_lo;
  in.eig_hi = sp.eig_hi;
  const BudgetCheck b = assert_query_budget(d.query_count(),
                                            BudgetFormula::kMultiplicative, in);
  row.query_count = d.query_count();
  row.budget = b.budget;
  row.eps = r;
  row.error = kNaN;
  row.eligible = rep.eligible;
  row.violations = rep.violations;
  row.pass = rep.violations == 0 && b.pass;
  row.details["cover_size"] = d.cover.size();
  row.details["domain_scale"] = d.domain_scale;
  row.details["thresholds"] = to_json(d.thresholds);
  row.details["theta"] = d.theta;
  row.details["report"] = to_json(rep);
  if (artifact) *artifact = to_json(d);
}

}  // namespace

ResultRow run_point(const ExperimentConfig& config, const GridPoint& g,
                    Json* artifact) {
  ResultRow row;
  row.index = g.index;
  row.learner = std::string(to_string(config.learner));
  row.fixture = config.fixture.kind;
  row.p = g.p;
  row.n = config.learner == LearnerKind::kFinite ? g.n : 0;
  row.omega = g.omega;
  row.eps = g.eps;
  row.kappa = g.kappa;
  row.seed = point_seed(config.seed, g.index);
  row.details = Json::object();
  std::mt19937_64 rng(row.seed);
  const auto start = std::chrono::steady_clock::now();
  switch (config.learner) {
    case LearnerKind::kFinite: run_finite(config, g, rng, row, artifact); break;
    case LearnerKind::kMaha: run_maha(config, g, rng, row, artifact); break;
    case LearnerKind::kHessian: run_hessian(config, g, rng, row, artifact); break;
    case LearnerKind::kAdditive: run_additive(config, g, rng, row, artifact); break;
    case LearnerKind::kMultiplicative:
      run_multiplicative(config, g, rng, row, artifact);
      break;
  }
  row.wall_time = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start)
                      .count();
  return row;
}

ExperimentResult run_experiment(const ExperimentConfig& config, unsigned jobs) {
  const std::vector<GridPoint> points = expand_grid(config);
  ExperimentResult result;
  result.rows.resize(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        result.rows[i] = run_point(config, points[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, points.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (const ResultRow& r : result.rows) result.all_pass &= r.pass;
  result.hash = determinism_hash(result.rows);
  return result;
}

std::string csv_header() {
  return "index,learner,fixture,p,n,omega,eps,kappa,seed,query_count,budget,"
         "error,eligible,violations,pass,wall_time";
}

std::string csv_row(const ResultRow& r, bool with_wall_time) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%zu,%s,%s,%lld,%zu,%.10g,%.10g,%.10g,%llu,%llu,%.10g,%.10g,"
                "%llu,%llu,%d",
                r.index, r.learner.c_str(), r.fixture.c_str(),
                static_cast<long long>(r.p), r.n, r.omega, r.eps, r.kappa,
                static_cast<unsigned long long>(r.seed),
                static_cast<unsigned long long>(r.query_count), r.budget,
                r.error, static_cast<unsigned long long>(r.eligible),
                static_cast<unsigned long long>(r.violations), r.pass ? 1 : 0);
  std::string out = buf;
  if (with_wall_time) {
    std::snprintf(buf, sizeof buf, ",%.6f", r.wall_time);
    out += buf;
  }
  return out;
}

std::string to_csv(const std::vector<ResultRow>& rows) {
  std::string out = csv_header() + "\n";
  for (const ResultRow& r : rows) out += csv_row(r) + "\n";
  return out;
}

Json to_json(const ResultRow& r) {
  auto num = [](double v) { return std::isnan(v) ? Json(nullptr) : Json(v); };
  return Json{{"index", r.index},
              {"learner", r.learner},
              {"fixture", r.fixture},
              {"p", r.p},
              {"n", r.n},
              {"omega", r.omega},
              {"eps", r.eps},
              {"kappa", r.kappa},
              {"seed", r.seed},
              {"query_count", r.query_count},
              {"budget", r.budget},
              {"error", num(r.error)},
              {"eligible", r.eligible},
              {"violations", r.violations},
              {"pass", r.pass},
              {"wall_time", r.wall_time},
              {"details", r.details}};
}

Json sidecar_json(const ExperimentConfig& config, const ExperimentResult& r) {
  Json rows = Json::array();
  for (const ResultRow& row : r.rows) rows.push_back(to_json(row));
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(r.hash));
  return Json{{"config", to_json(config)},
              {"rows", std::move(rows)},
              {"all_pass", r.all_pass},
              {"determinism_hash", hash}};
}

std::uint64_t determinism_hash(const std::vector<ResultRow>& rows) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const std::string& s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
    h ^= '\n';
    h *= 0x100000001b3ULL;
  };
  feed(csv_header());
  for (const ResultRow& r : rows) feed(csv_row(r, false));
  return h;
}

}  // namespace tripletq
