// Command-line driver: single learner runs, smoothness audits, and parameter sweeps.
//
// Exit codes: 0 all assertions pass, 1 an assertion failed, 2 usage error.

#include "tripletq/experiment.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

using namespace tripletq;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  unsigned jobs = 1;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* jobs_opt = nullptr;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON config file")
      ->check(CLI::ExistingFile);
  c.seed_opt = cmd->add_option("--seed", c.seed, "Random seed");
  cmd->add_option("--out", c.out, "Output path");
  c.jobs_opt = cmd->add_option("--jobs", c.jobs, "Parallel grid points")
                   ->check(CLI::PositiveNumber);
}

/// Flag value wins over the config file, which wins over the flag default.
template <class T>
void overlay(Json& doc, const std::string& key, CLI::Option* opt, const T& v) {
  if (opt->count() > 0 || !doc.contains(key)) doc[key] = v;
}

template <class T>
void overlay_if_given(Json& doc, const std::string& key, CLI::Option* opt,
                      const std::optional<T>& v) {
  if (opt->count() > 0 && v) doc[key] = *v;
}

Json load_doc(const Common& c) {
  Json doc = c.config.empty() ? Json::object() : read_json_file(c.config);
  if (!doc.is_object()) throw InvalidInput("config must be a JSON object");
  if (c.seed_opt->count() > 0 || !doc.contains("seed")) doc["seed"] = c.seed;
  return doc;
}

/// Top-level single-run parameters become a one-point grid.
ExperimentConfig single_run_config(Json doc) {
  Json grid = doc.contains("grid") ? doc["grid"] : Json::object();
  for (const char* k : {"p", "n", "omega", "eps", "kappa"}) {
    if (doc.contains(k)) {
      grid[k] = Json::array({doc[k]});
      doc.erase(k);
    }
  }
  doc["grid"] = grid;
  if (doc.contains("fixture") && doc["fixture"].is_string()) {
    doc["fixture"] = Json{{"kind", doc["fixture"]}};
  }
  if (doc.contains("params_file")) {
    doc["params"] = read_json_file(doc["params_file"].get<std::string>());
    doc.erase("params_file");
  }
  return experiment_config_from_json(doc);
}

int report_single(const ExperimentConfig& config, const Common& c) {
  const std::vector<GridPoint> points = expand_grid(config);
  if (points.size() != 1) {
    throw InvalidInput("single runs take one value per parameter; use sweep");
  }
  Json artifact;
  const ResultRow row = run_point(config, points.front(), &artifact);
  std::cout << csv_header() << "\n" << csv_row(row) << "\n";
  if (!c.out.empty()) {
    const Json doc{{"model", artifact}, {"report", to_json(row)}};
    write_text_file(c.out, doc.dump(2) + "\n");
  }
  if (!row.pass) {
    std::cerr << "assertion failed";
    if (!c.out.empty()) std::cerr << "; report: " << c.out;
    std::cerr << "\n";
    return kFail;
  }
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning distances from triplet comparisons"};
  app.require_subcommand(1);

  // learn-finite
  Common finite_c;
  int finite_n = 16;
  int finite_p = 2;
  std::string finite_fixture = "sqrt-maha";
  auto* finite = app.add_subcommand("learn-finite",
                                    "Exact learner on a random finite set");
  add_common(finite, finite_c);
  auto* finite_n_opt = finite->add_option("--n", finite_n, "Set size")
                           ->check(CLI::Range(2, 4096));
  auto* finite_p_opt = finite->add_option("--p", finite_p, "Dimension")
                           ->check(CLI::PositiveNumber);
  auto* finite_fx_opt = finite->add_option("--fixture", finite_fixture,
                                           "Ground-truth kind");

  // learn-maha
  Common maha_c;
  int maha_p = 3;
  double maha_kappa = 4.0;
  double maha_eps = 1e-3;
  std::string maha_mode = "noiseless";
  auto* maha = app.add_subcommand("learn-maha", "Mahalanobis recovery");
  add_common(maha, maha_c);
  auto* maha_p_opt = maha->add_option("--p", maha_p)->check(CLI::PositiveNumber);
  auto* maha_k_opt = maha->add_option("--kappa", maha_kappa)
                         ->check(CLI::Range(1.0, 1e12));
  auto* maha_e_opt = maha->add_option("--eps", maha_eps)
                         ->check(CLI::PositiveNumber);
  auto* maha_m_opt = maha->add_option("--mode", maha_mode)
                         ->check(CLI::IsMember({"noiseless", "noisy"}));

  // learn-hessian
  Common hess_c;
  int hess_p = 2;
  double hess_eps = 1e-2;
  std::string hess_fixture = "varying-hessian";
  std::string hess_params;
  auto* hess = app.add_subcommand("learn-hessian", "Local Hessian recovery");
  add_common(hess, hess_c);
  auto* hess_p_opt = hess->add_option("--p", hess_p)->check(CLI::PositiveNumber);
  auto* hess_e_opt = hess->add_option("--eps", hess_eps)
                         ->check(CLI::PositiveNumber);
  auto* hess_fx_opt = hess->add_option("--fixture", hess_fixture);
  auto* hess_pf_opt = hess->add_option("--params-file", hess_params)
                          ->check(CLI::ExistingFile);

  // learn-additive and learn-mult share their flags
  struct SmoothFlags {
    Common c;
    int p = 2;
    double omega = 0.3;
    std::string fixture = "sq-maha";
    std::string params;
    std::string cover = "grid";
    std::string rule = "holder";
    std::size_t samples = 10000;
    std::optional<double> o_eps, o_xi, o_theta;
    CLI::Option *p_opt, *omega_opt, *fx_opt, *pf_opt, *cover_opt, *rule_opt,
        *samples_opt, *eps_opt, *xi_opt = nullptr, *theta_opt = nullptr;
  };
  auto add_smooth = [](CLI::App* cmd, SmoothFlags& f, bool mult) {
    add_common(cmd, f.c);
    f.p_opt = cmd->add_option("--p", f.p)->check(CLI::PositiveNumber);
    f.omega_opt = cmd->add_option("--omega", f.omega)
                      ->check(CLI::PositiveNumber);
    f.fx_opt = cmd->add_option("--fixture", f.fixture);
    f.pf_opt = cmd->add_option("--params-file", f.params)
                   ->check(CLI::ExistingFile);
    f.cover_opt = cmd->add_option("--cover", f.cover)
                      ->check(CLI::IsMember({"grid", "greedy"}));
    f.samples_opt = cmd->add_option("--samples", f.samples,
                                    "Uniform and near-pair triplets each");
    f.eps_opt = cmd->add_option("--override-eps", f.o_eps)
                    ->check(CLI::PositiveNumber);
    if (mult) {
      f.xi_opt = cmd->add_option("--override-xi", f.o_xi)
                     ->check(CLI::PositiveNumber);
      f.theta_opt = cmd->add_option("--override-theta", f.o_theta)
                        ->check(CLI::NonNegativeNumber);
      f.rule_opt = nullptr;
    } else {
      f.rule_opt = cmd->add_option("--rule", f.rule)
                       ->check(CLI::IsMember({"holder", "second-order"}));
    }
  };
  SmoothFlags add_f;
  auto* additive = app.add_subcommand("learn-additive",
                                      "Additive learner over a box");
  add_smooth(additive, add_f, false);
  SmoothFlags mult_f;
  auto* mult = app.add_subcommand("learn-mult",
                                  "Multiplicative learner over a box");
  add_smooth(mult, mult_f, true);

  // audit
  Common audit_c;
  int audit_p = 2;
  std::string audit_fixture = "varying-hessian";
  std::size_t audit_samples = 10000;
  double audit_radius = 0.1;
  double audit_m_scale = 1.0;
  auto* audit = app.add_subcommand("audit",
                                   "Taylor-residual and sandwich audits");
  add_common(audit, audit_c);
  audit->add_option("--p", audit_p)->check(CLI::PositiveNumber);
  audit->add_option("--fixture", audit_fixture);
  audit->add_option("--samples", audit_samples);
  audit->add_option("--radius", audit_radius)->check(CLI::PositiveNumber);
  audit->add_option("--m-scale", audit_m_scale,
                    "Multiplier on the declared third-derivative bound")
      ->check(CLI::PositiveNumber);

  // sweep
  Common sweep_c;
  auto* sweep = app.add_subcommand("sweep", "Run a parameter grid");
  add_common(sweep, sweep_c);
  sweep->get_option("--config")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*finite) {
      Json doc = load_doc(finite_c);
      doc["learner"] = "finite";
      overlay(doc, "n", finite_n_opt, finite_n);
      overlay(doc, "p", finite_p_opt, finite_p);
      if (finite_fx_opt->count() > 0 || !doc.contains("fixture")) {
        doc["fixture"] = finite_fixture;
      }
      return report_single(single_run_config(doc), finite_c);
    }
    if (*maha) {
      Json doc = load_doc(maha_c);
      doc["learner"] = "maha";
      overlay(doc, "p", maha_p_opt, maha_p);
      overlay(doc, "kappa", maha_k_opt, maha_kappa);
      overlay(doc, "eps", maha_e_opt, maha_eps);
      overlay(doc, "mode", maha_m_opt, maha_mode);
      return report_single(single_run_config(doc), maha_c);
    }
    if (*hess) {
      Json doc = load_doc(hess_c);
      doc["learner"] = "hessian";
      overlay(doc, "p", hess_p_opt, hess_p);
      overlay(doc, "eps", hess_e_opt, hess_eps);
      if (hess_fx_opt->count() > 0 || !doc.contains("fixture")) {
        doc["fixture"] = hess_fixture;
      }
      if (hess_pf_opt->count() > 0) doc["params_file"] = hess_params;
      return report_single(single_run_config(doc), hess_c);
    }
    if (*additive || *mult) {
      const bool is_mult = bool(*mult);
      SmoothFlags& f = is_mult ? mult_f : add_f;
      Json doc = load_doc(f.c);
      doc["learner"] = is_mult ? "multiplicative" : "additive";
      overlay(doc, "p", f.p_opt, f.p);
      overlay(doc, "omega", f.omega_opt, f.omega);
      overlay(doc, "cover", f.cover_opt, f.cover);
      overlay(doc, "samples", f.samples_opt, f.samples);
      overlay(doc, "near_samples", f.samples_opt, f.samples);
      if (f.fx_opt->count() > 0 || !doc.contains("fixture")) {
        doc["fixture"] = f.fixture;
      }
      if (f.pf_opt->count() > 0) doc["params_file"] = f.params;
      if (is_mult) {
        overlay_if_given(doc, "override_eps", f.eps_opt, f.o_eps);
        overlay_if_given(doc, "override_xi", f.xi_opt, f.o_xi);
        overlay_if_given(doc, "override_theta", f.theta_opt, f.o_theta);
      } else {
        overlay_if_given(doc, "eps_override", f.eps_opt, f.o_eps);
        overlay(doc, "rule", f.rule_opt, f.rule);
      }
      return report_single(single_run_config(doc), f.c);
    }
    if (*audit) {
      Json doc = load_doc(audit_c);
      FixtureSpec fixture;
      fixture.kind = audit_fixture;
      std::mt19937_64 rng(doc["seed"].get<std::uint64_t>());
      const GroundTruth truth = make_truth(fixture, audit_p, rng);
      const Domain box = make_box(fixture, audit_p);
      const SmoothnessParams sp = fixture_params(truth, box);
      const double m = audit_m_scale * truth.third_derivative_bound(audit_radius);
      const std::uint64_t seed = rng();
      const TaylorAudit ta =
          audit_taylor(truth, box, m, audit_samples, audit_radius, seed);
      const SandwichAudit sa =
          audit_sandwich(truth, box, sp, audit_samples, seed + 1);
      const bool pass = ta.max_ratio <= 1.0 && sa.violations == 0;
      const Json report{
          {"fixture", audit_fixture},
          {"p", audit_p},
          {"params", to_json(sp)},
          {"taylor", {{"M_third", m},
                      {"radius", audit_radius},
                      {"samples", ta.samples},
                      {"max_ratio", ta.max_ratio},
                      {"max_residual", ta.max_residual}}},
          {"sandwich", {{"radius", sa.radius},
                        {"samples", sa.samples},
                        {"min_lower_ratio", sa.min_lower_ratio},
                        {"max_upper_ratio", sa.max_upper_ratio},
                        {"violations", sa.violations}}},
          {"pass", pass}};
      std::cout << "fixture,p,taylor_max_ratio,sandwich_violations,pass\n"
                << audit_fixture << ',' << audit_p << ',' << ta.max_ratio
                << ',' << sa.violations << ',' << (pass ? 1 : 0) << "\n";
      if (!audit_c.out.empty()) {
        write_text_file(audit_c.out, report.dump(2) + "\n");
      }
      return pass ? kPass : kFail;
    }
    if (*sweep) {
      Json doc = load_doc(sweep_c);
      ExperimentConfig config = experiment_config_from_json(doc);
      const ExperimentResult r = run_experiment(config, sweep_c.jobs);
      std::string csv_path = config.out_csv;
      std::string json_path = config.out_json;
      if (!sweep_c.out.empty()) {
        csv_path = sweep_c.out + ".csv";
        json_path = sweep_c.out + ".json";
      }
      const std::string csv = to_csv(r.rows);
      if (csv_path.empty()) {
        std::cout << csv;
      } else {
        write_text_file(csv_path, csv);
      }
      if (!json_path.empty()) {
        write_text_file(json_path, sidecar_json(config, r).dump(2) + "\n");
      }
      std::fprintf(stderr, "determinism_hash=%016llx rows=%zu all_pass=%d\n",
                   static_cast<unsigned long long>(r.hash), r.rows.size(),
                   r.all_pass ? 1 : 0);
      if (!r.all_pass) {
        std::cerr << "assertion failed";
        if (!json_path.empty()) std::cerr << "; report: " << json_path;
        std::cerr << "\n";
        return kFail;
      }
      return kPass;
    }
  } catch (const InvalidInput& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  }
  return kUsage;
}
