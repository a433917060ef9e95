#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "fgmtail/copula.hpp"
#include "fgmtail/errors.hpp"
#include "fgmtail/experiment.hpp"
#include "fgmtail/montecarlo.hpp"
#include "fgmtail/oracle.hpp"
#include "fgmtail/rng.hpp"
#include "fgmtail/tail_math.hpp"
#include "fgmtail/validation.hpp"

namespace py = pybind11;
using namespace fgmtail;

namespace {

py::object optional_float(const std::optional<double>& v) { return v ? py::cast(*v) : py::none(); }

py::dict report_dict(const EstimateReport& r) {
  py::dict d;
  d["estimate"] = optional_float(r.estimate);
  d["std_error"] = r.std_error;
  d["hits"] = r.denominator_hits;
  d["samples"] = r.samples;
  d["seed"] = r.seed;
  return d;
}

}  // namespace

PYBIND11_MODULE(_fgmtail, m) {
  m.doc() = "FGM portfolio tail moments";
  m.attr("__version__") = FGMTAIL_VERSION;

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ClassMismatchError>(m, "ClassMismatchError", PyExc_ValueError);
  py::register_exception<UnsupportedBranchError>(m, "UnsupportedBranchError", PyExc_ValueError);
  py::register_exception<GridCoverageError>(m, "GridCoverageError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("philox4x32", &philox4x32, py::arg("counter"), py::arg("key"));

  py::class_<Margin>(m, "Margin")
      .def_static("inverse_gaussian", &Margin::inverse_gaussian, py::arg("mu"), py::arg("nu"))
      .def_static("shifted_pareto", &Margin::shifted_pareto, py::arg("alpha"))
      .def("cdf", &Margin::cdf)
      .def("sf", &Margin::sf)
      .def("density", &Margin::density)
      .def("quantile", &Margin::quantile)
      .def("mgf_hat", &Margin::mgf_hat)
      .def("mean", &Margin::mean)
      .def_property_readonly("convolution_gamma", &Margin::convolution_gamma)
      .def("samples", [](const Margin& self, std::size_t count, std::uint64_t seed, std::uint64_t stream) {
        RngStream rng(seed, stream);
        std::vector<double> out(count);
        for (auto& v : out) v = self.sample(rng);
        return out;
      }, py::arg("count"), py::arg("seed"), py::arg("stream") = 0)
      .def("__repr__", &Margin::label);

  py::class_<MinSquaredMargin>(m, "MinSquaredMargin")
      .def(py::init<Margin>())
      .def("cdf", &MinSquaredMargin::cdf)
      .def("sf", &MinSquaredMargin::sf)
      .def("quantile", &MinSquaredMargin::quantile)
      .def("mgf_hat", &MinSquaredMargin::mgf_hat)
      .def("__repr__", &MinSquaredMargin::label);

  py::class_<FgmModel>(m, "FgmModel")
      .def(py::init<Margin, Margin, double>(), py::arg("f"), py::arg("g"), py::arg("theta"))
      .def("joint_cdf", &FgmModel::joint_cdf)
      .def("joint_sf", &FgmModel::joint_sf)
      .def("pair_from_uniforms", &FgmModel::pair_from_uniforms)
      .def_property_readonly("theta", &FgmModel::theta);

  py::class_<HatValues>(m, "HatValues")
      .def(py::init<double, double, double, double>(), py::arg("hat_f") = 1.0, py::arg("hat_g") = 1.0,
           py::arg("hat_f_min") = 1.0, py::arg("hat_g_min") = 1.0)
      .def_static("from_margins", &HatValues::from_margins)
      .def_readonly("hat_f", &HatValues::hat_f)
      .def_readonly("hat_g", &HatValues::hat_g)
      .def_readonly("hat_f_min", &HatValues::hat_f_min)
      .def_readonly("hat_g_min", &HatValues::hat_g_min);

  m.def("f_poly", &f_poly);
  m.def("k_coefficient_iterative", &k_coefficient_iterative, py::arg("n"), py::arg("theta"),
        py::arg("hats") = HatValues::ones());
  m.def("k_coefficient_sum", &k_coefficient_sum, py::arg("n"), py::arg("theta"), py::arg("hats") = HatValues::ones());
  m.def("asym_rho",
        [](double x, double y, double beta, double zeta, int k, int n, const Margin& f, const Margin& g, double theta) {
          return asym_rho({x, y, beta, zeta, k, n}, f, g, theta);
        },
        py::arg("x"), py::arg("y"), py::arg("beta"), py::arg("zeta"), py::arg("k"), py::arg("n"), py::arg("f"),
        py::arg("g"), py::arg("theta"));

  m.def("estimate_joint_tail",
        [](const FgmModel& model, int n, double x, double y, std::int64_t samples, std::uint64_t seed, int workers) {
          py::gil_scoped_release release;
          const SimulationPlan plan{.n = n, .k = 1, .model = model, .samples = samples, .seed = seed,
                                    .link_thresholds = false, .queries = {}, .workers = workers};
          const auto r = estimate_joint_tail(plan, x, y);
          py::gil_scoped_acquire acquire;
          return report_dict(r);
        },
        py::arg("model"), py::arg("n"), py::arg("x"), py::arg("y"), py::arg("samples"), py::arg("seed"),
        py::arg("workers") = 0);

  m.def("nfold_ratio_check", py::overload_cast<const Margin&, int, double>(&oracle::nfold_ratio_check));

  m.def("run_config",
        [](const std::string& text, std::optional<std::int64_t> samples, std::optional<std::uint64_t> seed) {
          std::istringstream in(text);
          auto cfg = parse_config(in);
          if (samples) cfg.samples = *samples;
          if (seed) cfg.seed = *seed;
          ExperimentResult res;
          {
            py::gil_scoped_release release;
            res = run_experiment(cfg);
          }
          return py::make_tuple(format_csv(res.rows), format_metadata(cfg, res));
        },
        py::arg("config_text"), py::arg("samples") = py::none(), py::arg("seed") = py::none(),
        "Parses a key = value config, runs it and returns (csv, metadata_json).");

  m.def("validate",
        [](const std::string& suite) {
          const auto results = run_validation(parse_validation_suite(suite));
          py::list out;
          for (const auto& r : results) out.append(py::make_tuple(r.suite + "/" + r.name, r.pass, r.detail));
          return out;
        },
        py::arg("suite") = "coefficients");
}
