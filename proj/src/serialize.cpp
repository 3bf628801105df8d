#include "tripletq/serialize.hpp"

#include <fstream>
#include <sstream>

namespace tripletq {

Json to_json(const Point& x) {
  Json j = Json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) j.push_back(x[i]);
  return j;
}

Json to_json(const Matrix& m) {
  Json j = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    j.push_back(std::move(row));
  }
  return j;
}

Point point_from_json(const Json& j) {
  if (!j.is_array()) throw InvalidInput("expected a numeric array");
  Point x(Eigen::Index(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    x[Eigen::Index(i)] = j[i].get<double>();
  }
  return x;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw InvalidInput("expected a matrix");
  const auto rows = Eigen::Index(j.size());
  const auto cols = Eigen::Index(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = j[std::size_t(r)];
    if (!row.is_array() || Eigen::Index(row.size()) != cols) {
      throw InvalidInput("matrix rows differ in length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = row[std::size_t(c)].get<double>();
    }
  }
  return m;
}

namespace {

Json points_json(const std::vector<Point>& pts) {
  Json j = Json::array();
  for (const Point& x : pts) j.push_back(to_json(x));
  return j;
}

std::vector<Point> points_from_json(const Json& j) {
  std::vector<Point> out;
  for (const Json& x : j) out.push_back(point_from_json(x));
  return out;
}

}  // namespace

Json to_json(const RankTable& t) {
  return Json{{"points", points_json(t.points())},
              {"ranks", t.ranks()},
              {"tie_groups", t.tie_groups()},
              {"query_count", t.query_count}};
}

RankTable rank_table_from_json(const Json& j) {
  RankTable t(points_from_json(j.at("points")),
              j.at("ranks").get<std::vector<std::vector<int>>>());
  t.query_count = j.value("query_count", std::uint64_t{0});
  return t;
}

Json to_json(const EpsCover& c) {
  return Json{{"radius", c.radius},
              {"centers", points_json(c.centers)},
              {"method", c.method == CoverMethod::kGrid ? "grid" : "greedy"},
              {"packing_radius", c.packing_radius}};
}

Json to_json(const MahaModel& m) {
  return Json{{"p", m.dimension()},
              {"matrix", to_json(m.M)},
              {"coefficients", to_json(Point(m.coefficients))},
              {"query_count", m.query_count},
              {"anchor", m.anchor},
              {"eps", m.eps},
              {"eps_alg", m.eps_alg},
              {"rho", m.rho}};
}

MahaModel maha_model_from_json(const Json& j) {
  MahaModel m;
  m.M = matrix_from_json(j.at("matrix"));
  if (m.M.rows() != j.at("p").get<Eigen::Index>() || m.M.rows() != m.M.cols()) {
    throw InvalidInput("MahaModel: matrix shape does not match p");
  }
  m.M_unprojected = m.M;
  m.coefficients = point_from_json(j.at("coefficients"));
  m.query_count = j.at("query_count").get<std::uint64_t>();
  m.anchor = j.value("anchor", std::size_t{0});
  m.eps = j.value("eps", 0.0);
  m.eps_alg = j.value("eps_alg", 0.0);
  m.rho = j.value("rho", 1.0);
  return m;
}

Json to_json(const NNDistance& d) {
  return Json{
      {"cover", to_json(d.cover)},
      {"table", to_json(d.table)},
      {"rule", d.rule == AdditiveRadiusRule::kHolder ? "holder" : "second-order"},
      {"query_count", d.query_count}};
}

Json to_json(const MultiplicativeThresholds& t) {
  return Json{{"beta_hat", t.beta_hat},
              {"beta_curvature", t.beta_curvature},
              {"beta_separation", t.beta_separation},
              {"beta_taylor", t.beta_taylor},
              {"eps", t.eps},
              {"xi", t.xi},
              {"theta", t.theta},
              {"kappa0", t.kappa0}};
}

Json to_json(const HybridDistance& d) {
  Json locals = Json::array();
  for (const MahaModel& m : d.locals) locals.push_back(to_json(m));
  return Json{{"cover", to_json(d.cover)},
              {"table", to_json(d.table)},
              {"locals", std::move(locals)},
              {"theta", d.theta},
              {"computed_thresholds", to_json(d.thresholds)},
              {"domain_scale", d.domain_scale},
              {"global_queries", d.global_queries},
              {"local_queries", d.local_queries},
              {"query_count", d.query_count()},
              {"rho_override", d.rho_override}};
}

Json to_json(const SmoothnessParams& p) {
  return Json{{"alpha", p.alpha},     {"L_smooth", p.L_smooth},
              {"M_third", p.M_third}, {"eig_lo", p.eig_lo},
              {"eig_hi", p.eig_hi},   {"L_hess", p.L_hess},
              {"delta_floor", p.delta_floor}, {"kappa0", p.kappa0}};
}

SmoothnessParams smoothness_params_from_json(const Json& j) {
  if (!j.is_object()) throw InvalidInput("smoothness params must be an object");
  SmoothnessParams p;
  bool kappa_given = false;
  for (const auto& [key, value] : j.items()) {
    const double v = value.get<double>();
    if (key == "alpha") p.alpha = v;
    else if (key == "L_smooth") p.L_smooth = v;
    else if (key == "M_third") p.M_third = v;
    else if (key == "eig_lo") p.eig_lo = v;
    else if (key == "eig_hi") p.eig_hi = v;
    else if (key == "L_hess") p.L_hess = v;
    else if (key == "delta_floor") p.delta_floor = v;
    else if (key == "kappa0") { p.kappa0 = v; kappa_given = true; }
    else throw InvalidInput("unknown smoothness parameter: " + key);
  }
  if (!kappa_given) p.kappa0 = default_kappa0(p.eig_lo, p.eig_hi);
  p.validate();
  return p;
}

Json to_json(const AgreementReport& r) {
  Json ex = Json::array();
  for (const auto& e : r.violation_exemplars) {
    ex.push_back(Json{{"x", to_json(e.triplet.x)},
                      {"y", to_json(e.triplet.y)},
                      {"z", to_json(e.triplet.z)},
                      {"d_xy", e.d_xy},
                      {"d_xz", e.d_xz},
                      {"expected", to_int(e.expected)},
                      {"answered", to_int(e.answered)}});
  }
  return Json{{"criterion", r.criterion},
              {"threshold", r.threshold},
              {"total_triplets", r.total_triplets},
              {"eligible", r.eligible},
              {"violations", r.violations},
              {"violation_exemplars", std::move(ex)},
              {"query_count_of_learner", r.query_count_of_learner}};
}

std::string agreement_csv_header() {
  return "criterion,threshold,total_triplets,eligible,violations,"
         "query_count_of_learner";
}

std::string agreement_csv_row(const AgreementReport& r) {
  std::ostringstream os;
  os.precision(10);
  os << r.criterion << ',' << r.threshold << ',' << r.total_triplets << ','
     << r.eligible << ',' << r.violations << ',' << r.query_count_of_learner;
  return os.str();
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InvalidInput("malformed JSON in " + path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

}  // namespace tripletq
