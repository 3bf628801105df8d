#include "tripletq/maha_learner.hpp"

#include <cmath>
#include <sstream>

namespace tripletq {

namespace {
const double kSqrt2 = std::sqrt(2.0);
}

Eigen::VectorXd sym_vec(const Matrix& a) {
  const Eigen::Index p = a.rows();
  Eigen::VectorXd v(sym_dim(p));
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < p; ++i) v[k++] = a(i, i);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i + 1; j < p; ++j) {
      v[k++] = (a(i, j) + a(j, i)) / kSqrt2;
    }
  }
  return v;
}

Matrix sym_unvec(const Eigen::VectorXd& v, Eigen::Index p) {
  if (v.size() != sym_dim(p)) {
    throw InvalidInput("sym_unvec: vector length does not match p(p+1)/2");
  }
  Matrix a(p, p);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < p; ++i) a(i, i) = v[k++];
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i + 1; j < p; ++j) {
      a(i, j) = a(j, i) = v[k++] / kSqrt2;
    }
  }
  return a;
}

ExtendedBasis ExtendedBasis::build(Eigen::Index p, std::size_t anchor) {
  if (p < 1) throw InvalidInput("ExtendedBasis: p must be >= 1");
  if (anchor >= static_cast<std::size_t>(p)) {
    throw InvalidInput("ExtendedBasis: anchor must be a coordinate index");
  }
  ExtendedBasis b;
  b.p = p;
  b.anchor = anchor;
  b.vectors.reserve(static_cast<std::size_t>(sym_dim(p)));
  for (Eigen::Index i = 0; i < p; ++i) b.vectors.push_back(Point::Unit(p, i));
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i + 1; j < p; ++j) {
      b.vectors.push_back((Point::Unit(p, i) + Point::Unit(p, j)) / kSqrt2);
    }
  }
  return b;
}

Matrix design_matrix(const ExtendedBasis& basis) {
  const Eigen::Index n = sym_dim(basis.p);
  Matrix d(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const Point& u = basis.vectors[static_cast<std::size_t>(r)];
    d.row(r) = sym_vec(u * u.transpose()).transpose();
  }
  return d;
}

Matrix design_matrix(Eigen::Index p) {
  return design_matrix(ExtendedBasis::build(p));
}

double design_conditioning_floor(Eigen::Index p) noexcept {
  return 1.0 / std::max(2.0 * double(p) - 1.0, 4.0);
}

Label QueryFrame::ask(CountingOracle& oracle, const Point& a,
                      const Point& b) const {
  return oracle.label(origin, origin + scale * a, origin + scale * b);
}

std::size_t find_anchor(CountingOracle& oracle, const QueryFrame& frame) {
  const Eigen::Index p = oracle.dimension();
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < p; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    if (frame.ask(oracle, Point::Unit(p, Eigen::Index(best)),
                  Point::Unit(p, i)) == Label::kLess) {
      best = ui;
    }
  }
  return best;
}

std::size_t find_anchor(CountingOracle& oracle, Eigen::Index p,
                        const Point& origin) {
  if (p != oracle.dimension()) {
    throw InvalidInput("find_anchor: p does not match the oracle dimension");
  }
  return find_anchor(oracle, QueryFrame{origin, 1.0});
}

CoefficientEstimate binary_search_coeff(CountingOracle& oracle,
                                        const QueryFrame& frame,
                                        const Point& y, const Point& u,
                                        double eps_alg,
                                        const BinarySearchOptions& options) {
  if (!(eps_alg > 0.0)) {
    throw InvalidInput("binary_search_coeff: eps_alg must be > 0");
  }
  BinarySearchState s;
  s.tolerance = eps_alg;
  CoefficientEstimate out;
  while (s.hi - s.lo > eps_alg) {
    if (s.iteration >= options.max_iterations) {
      std::ostringstream os;
      os << "binary_search_coeff: no convergence after " << s.iteration
         << " iterations (lo=" << s.lo << ", hi=" << s.hi << ")";
      throw NumericError(os.str());
    }
    ++s.iteration;
    ++out.queries;
    const Label l = frame.ask(oracle, std::sqrt(s.c) * y, u);
    if (l == Label::kEqual) {
      out.value = s.c;
      out.exact = true;
      return out;
    }
    if (l == Label::kGreater) {
      s.hi = s.c;
      s.c = 0.5 * (s.hi + s.lo);
    } else {
      s.lo = s.c;
      s.c = std::isinf(s.hi) ? 2.0 * s.c : 0.5 * (s.hi + s.lo);
    }
    if (options.observer) options.observer(s);
  }
  out.value = s.c;
  return out;
}

double MahaModel::quadratic(const Point& a, const Point& b) const {
  const Point h = b - a;
  return h.dot(M * h);
}

Matrix project_psd(const Matrix& m) {
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  const Eigen::VectorXd clamped = es.eigenvalues().cwiseMax(0.0);
  Matrix out = es.eigenvectors() * clamped.asDiagonal() *
               es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

MahaModel solve_model(const Eigen::VectorXd& coefficients,
                      const ExtendedBasis& basis) {
  const Eigen::Index n = sym_dim(basis.p);
  if (coefficients.size() != n) {
    throw InvalidInput("solve_model: need p(p+1)/2 coefficients");
  }
  Eigen::VectorXd rhs = coefficients;
  rhs[Eigen::Index(basis.anchor)] = 1.0;

  const Matrix d = design_matrix(basis);
  Eigen::FullPivLU<Matrix> lu(d);
  if (!lu.isInvertible()) {
    throw NumericError("solve_model: design matrix is singular");
  }
  MahaModel model;
  model.coefficients = rhs;
  model.anchor = basis.anchor;
  model.M_unprojected = sym_unvec(lu.solve(rhs), basis.p);
  model.M = project_psd(model.M_unprojected);
  return model;
}

namespace {

MahaModel run_recovery(CountingOracle& oracle, const QueryFrame& frame,
                       double eps_alg, const BinarySearchOptions& search) {
  const Eigen::Index p = oracle.dimension();
  const std::uint64_t start = oracle.query_count();
  const std::size_t anchor = find_anchor(oracle, frame);
  const ExtendedBasis basis = ExtendedBasis::build(p, anchor);
  const Point& y = basis.anchor_vector();

  Eigen::VectorXd coeffs(sym_dim(p));
  for (std::size_t i = 0; i < basis.vectors.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    if (i == anchor) {
      coeffs[ii] = 1.0;
      continue;
    }
    coeffs[ii] = binary_search_coeff(oracle, frame, y, basis.vectors[i],
                                     eps_alg, search)
                     .value;
  }
  MahaModel model = solve_model(coeffs, basis);
  model.query_count = oracle.query_count() - start;
  model.eps_alg = eps_alg;
  model.rho = frame.scale;
  return model;
}

}  // namespace

MahaModel learn_mahalanobis(CountingOracle& oracle, Eigen::Index p, double eps,
                            const MahaOptions& options) {
  if (p != oracle.dimension()) {
    throw InvalidInput("learn_mahalanobis: p does not match the oracle");
  }
  if (!(eps > 0.0)) throw InvalidInput("learn_mahalanobis: eps must be > 0");
  const double eps_alg = options.eps_alg.value_or(eps / (2.0 * double(p * p)));
  QueryFrame frame{options.origin.size() == 0 ? Point(Point::Zero(p))
                                              : options.origin,
                   1.0};
  require_dimension(frame.origin, p, "learn_mahalanobis origin");
  MahaModel model = run_recovery(oracle, frame, eps_alg, options.search);
  model.eps = eps;
  return model;
}

double hessian_eps_limit(const SmoothnessParams& params, Eigen::Index p) {
  if (params.M_third <= 0.0) return kInf;
  const double e = params.eig_lo;
  const double big_e = params.eig_hi;
  return 3.0 * e * e * e /
         (2.0 * params.M_third * std::pow(double(p), 1.5) * big_e * big_e);
}

MahaModel learn_local_hessian(CountingOracle& oracle, const Point& x,
                              double eps, const SmoothnessParams& params,
                              const HessianOptions& options) {
  params.validate();
  const Eigen::Index p = oracle.dimension();
  require_dimension(x, p, "learn_local_hessian");
  require_finite(x, "learn_local_hessian");
  if (!(eps > 0.0)) throw InvalidInput("learn_local_hessian: eps must be > 0");
  if (!options.rho) {
    const double limit = hessian_eps_limit(params, p);
    if (!(eps < limit)) {
      std::ostringstream os;
      os << "learn_local_hessian: eps=" << eps
         << " is outside the admissible range (0, " << limit
         << "); supply an explicit rho to override";
      throw ParameterError(os.str());
    }
  }
  const double rho = options.rho.value_or(eps * eps);
  if (!(rho > 0.0)) throw ParameterError("learn_local_hessian: rho must be > 0");
  const double eps_alg = options.eps_alg.value_or(eps / (2.0 * double(p * p)));
  MahaModel model = run_recovery(oracle, QueryFrame{x, rho}, eps_alg,
                                 options.search);
  model.eps = eps;
  return model;
}

double mahalanobis_query_budget(Eigen::Index p, double kappa, double eps) {
  const double n = double(sym_dim(p));
  return n * std::log2(2.0 * double(p * p) * kappa * kappa / eps) + double(p);
}

double hessian_query_budget(Eigen::Index p, double eig_lo, double eig_hi,
                            double eps) {
  const double n = double(sym_dim(p));
  const double r = eig_hi / eig_lo;
  return n * std::log2(2.0 * double(p * p) * r * r / eps) + double(p);
}

double condition_number(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()),
                                           Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = es.eigenvalues().cwiseAbs();
  const double hi = ev.maxCoeff();
  if (hi <= 0.0) throw InvalidInput("condition_number: zero matrix");
  double lo = hi;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > 1e-12 * hi) lo = std::min(lo, ev[i]);
  }
  return hi / lo;
}

}  // namespace tripletq
