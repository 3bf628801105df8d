#include "tripletq/evaluation.hpp"
#include "tripletq/experiment.hpp"
#include "tripletq/serialize.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace tripletq;

namespace {

template <class T>
std::string dump(const T& v) {
  return to_json(v).dump();
}

}  // namespace

PYBIND11_MODULE(_tripletq, m) {
  m.doc() = "Distance learning from triplet comparisons";

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<ResourceError>(m, "ResourceError", PyExc_RuntimeError);

  py::enum_<Label>(m, "Label")
      .value("LESS", Label::kLess)
      .value("EQUAL", Label::kEqual)
      .value("GREATER", Label::kGreater);

  py::class_<GroundTruth>(m, "GroundTruth")
      .def_static("sqrt_mahalanobis", &GroundTruth::sqrt_mahalanobis)
      .def_static("squared_mahalanobis", &GroundTruth::squared_mahalanobis)
      .def_static("varying_hessian", &GroundTruth::varying_hessian,
                  py::arg("base"), py::arg("amplitude"),
                  py::arg("frequency") = 1.0, py::arg("phase") = 0.0)
      .def_static("gaussian_kl", &GroundTruth::gaussian_kl)
      .def_property_readonly("dimension", &GroundTruth::dimension)
      .def("eval", &GroundTruth::eval)
      .def("hessian", &GroundTruth::hessian);

  py::class_<CountingOracle>(m, "CountingOracle")
      .def(py::init<GroundTruth, double>(), py::arg("truth"),
           py::arg("equality_tolerance") = 0.0)
      .def("label", &CountingOracle::label)
      .def_property_readonly("query_count", &CountingOracle::query_count)
      .def("reset_count", &CountingOracle::reset_count);

  py::class_<Domain>(m, "Domain")
      .def_static("box", &Domain::box)
      .def_static("unit_box", &Domain::unit_box)
      .def_static("finite_set", &Domain::finite_set)
      .def_property_readonly("dimension", &Domain::dimension);

  py::class_<SmoothnessParams>(m, "SmoothnessParams")
      .def(py::init<>())
      .def_readwrite("alpha", &SmoothnessParams::alpha)
      .def_readwrite("L_smooth", &SmoothnessParams::L_smooth)
      .def_readwrite("M_third", &SmoothnessParams::M_third)
      .def_readwrite("eig_lo", &SmoothnessParams::eig_lo)
      .def_readwrite("eig_hi", &SmoothnessParams::eig_hi)
      .def_readwrite("L_hess", &SmoothnessParams::L_hess)
      .def_readwrite("delta_floor", &SmoothnessParams::delta_floor)
      .def_readwrite("kappa0", &SmoothnessParams::kappa0)
      .def("validate", &SmoothnessParams::validate);
  m.def("fixture_params", &fixture_params);

  py::class_<RankTable>(m, "RankTable")
      .def_property_readonly("size", &RankTable::size)
      .def_property_readonly("ranks", &RankTable::ranks)
      .def("label", &RankTable::label)
      .def("rank_distance", &RankTable::rank_distance)
      .def("to_json", &dump<RankTable>);

  py::class_<MahaModel>(m, "MahaModel")
      .def_readonly("matrix", &MahaModel::M)
      .def_readonly("query_count", &MahaModel::query_count)
      .def_readonly("anchor", &MahaModel::anchor)
      .def("to_json", &dump<MahaModel>);

  py::class_<NNDistance>(m, "NNDistance")
      .def_readonly("query_count", &NNDistance::query_count)
      .def_property_readonly("cover_size",
                             [](const NNDistance& d) { return d.cover.size(); })
      .def("eval", &NNDistance::eval)
      .def("answer", &NNDistance::answer)
      .def("to_json", &dump<NNDistance>);

  py::class_<HybridDistance>(m, "HybridDistance")
      .def_property_readonly("query_count", &HybridDistance::query_count)
      .def_property_readonly(
          "cover_size", [](const HybridDistance& d) { return d.cover.size(); })
      .def_readonly("theta", &HybridDistance::theta)
      .def_readonly("domain_scale", &HybridDistance::domain_scale)
      .def("eval", [](const HybridDistance& d, const Point& x,
                      const Point& y) { return eval_hybrid(d, x, y); })
      .def("answer", [](const HybridDistance& d, const Point& x, const Point& y,
                        const Point& z) { return answer_triplet_hybrid(d, x, y, z); })
      .def("to_json", &dump<HybridDistance>);

  m.def("learn_finite_distance", &learn_finite_distance, py::arg("points"),
        py::arg("oracle"));
  m.def("learn_mahalanobis",
        [](CountingOracle& o, Eigen::Index p, double eps) {
          return learn_mahalanobis(o, p, eps);
        },
        py::arg("oracle"), py::arg("p"), py::arg("eps"));
  m.def("learn_local_hessian",
        [](CountingOracle& o, const Point& x, double eps,
           const SmoothnessParams& sp) {
          return learn_local_hessian(o, x, eps, sp);
        },
        py::arg("oracle"), py::arg("x"), py::arg("eps"), py::arg("params"));
  m.def("learn_additive",
        [](const Domain& d, CountingOracle& o, double omega,
           const SmoothnessParams& sp) { return learn_additive(d, o, omega, sp); },
        py::arg("domain"), py::arg("oracle"), py::arg("omega"),
        py::arg("params"));
  m.def("learn_multiplicative",
        [](const Domain& d, CountingOracle& o, double omega,
           const SmoothnessParams& sp, std::size_t max_centers) {
          MultiplicativeOptions opts;
          opts.cover.max_centers = max_centers;
          return learn_multiplicative(d, o, omega, sp, {}, opts);
        },
        py::arg("domain"), py::arg("oracle"), py::arg("omega"),
        py::arg("params"), py::arg("max_centers") = 2500);

  m.def("run_experiment_json",
        [](const std::string& config, unsigned jobs) {
          const ExperimentConfig c = experiment_config_from_json(Json::parse(config));
          ExperimentResult r;
          {
            py::gil_scoped_release release;
            r = run_experiment(c, jobs);
          }
          return py::make_tuple(to_csv(r.rows), sidecar_json(c, r).dump());
        },
        py::arg("config"), py::arg("jobs") = 1);
}
