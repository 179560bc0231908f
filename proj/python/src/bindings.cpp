#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "netreduce/fim.hpp"
#include "netreduce/json_io.hpp"
#include "netreduce/network.hpp"
#include "netreduce/pipeline.hpp"
#include "netreduce/simulate.hpp"
#include "netreduce/train.hpp"
#include "netreduce/validate.hpp"

namespace py = pybind11;
using namespace netreduce;

namespace {

PipelineResult pipeline(const Network& net, const std::vector<double>& ladder, double tol, double t_end, double dt,
                        const std::vector<std::string>& augment, bool all) {
  PipelineConfig cfg;
  cfg.kappa_ladder = ladder;
  cfg.tol = tol;
  cfg.data_spec = {Method::ode, t_end, dt};
  cfg.augment = augment;
  cfg.stop_at_first_pass = !all;
  return run_pipeline(net, cfg);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Parameter-information driven reduction of reaction networks";

  py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);

  py::class_<Network>(m, "Network")
      .def_property_readonly("species", &Network::species_names)
      .def_property_readonly("parameters", &Network::parameter_names)
      .def_property_readonly("initial_state", &Network::initial_state)
      .def_property_readonly("parameter_values", &Network::parameter_values)
      .def_property_readonly("num_reactions", &Network::num_reactions)
      .def("drift", [](const Network& n, const Vector& x) { return Vector(n.drift(x, n.parameter_values())); })
      .def("diffusion", [](const Network& n, const Vector& x) { return Matrix(n.diffusion_matrix(x, n.parameter_values())); })
      .def("with_parameters", &Network::with_parameters)
      .def("to_json", [](const Network& n) { return serialize_model(n); });

  m.def("load_model", &load_model, py::arg("path"));
  m.def("parse_model", [](const std::string& text) { return parse_model(text); }, py::arg("text"));

  py::class_<TimeSeries>(m, "TimeSeries")
      .def_readonly("species", &TimeSeries::species)
      .def_readonly("times", &TimeSeries::times)
      .def_property_readonly("states", [](const TimeSeries& ts) { return Matrix(ts.states); })
      .def_readonly("seed", &TimeSeries::seed)
      .def("time_average", [](const TimeSeries& ts) { return Vector(time_average(ts)); })
      .def("to_csv", [](const TimeSeries& ts) { return to_csv(ts); });

  m.def(
      "simulate",
      [](const Network& net, const std::string& method, double t_end, double dt, std::uint64_t seed) {
        return simulate(net, {method_from_string(method), t_end, dt}, seed);
      },
      py::arg("network"), py::arg("method") = "ode", py::arg("t_end") = 10.0, py::arg("dt") = 0.01,
      py::arg("seed") = 0);
  m.def("kurtz_scale", &kurtz_scale, py::arg("network"), py::arg("system_size"));

  py::class_<InformationRanking>(m, "InformationRanking")
      .def_readonly("xi", &InformationRanking::xi)
      .def_readonly("order", &InformationRanking::order)
      .def_readonly("cumulative", &InformationRanking::cumulative)
      .def("select", [](const InformationRanking& r, double kappa) { return rank_and_select(r, kappa); },
           py::arg("kappa"));
  m.def(
      "fim_diagonal",
      [](const Network& net, const TimeSeries& ts, bool log_scale) {
        return fim_diag_mean_field(net, net.parameter_values(), ts, log_scale);
      },
      py::arg("network"), py::arg("data"), py::arg("log_scale") = true);

  py::class_<PipelineRow>(m, "PipelineRow")
      .def_readonly("label", &PipelineRow::label)
      .def_readonly("kappa", &PipelineRow::kappa)
      .def_readonly("reactions", &PipelineRow::reactions)
      .def_readonly("parameters", &PipelineRow::parameters)
      .def_readonly("species", &PipelineRow::species)
      .def_readonly("loss", &PipelineRow::loss)
      .def_readonly("path_dist", &PipelineRow::path_dist)
      .def_readonly("ss_dist", &PipelineRow::ss_dist)
      .def_readonly("passed", &PipelineRow::pass)
      .def_property_readonly("theta", [](const PipelineRow& r) { return r.fit.theta_star; })
      .def_property_readonly("fitted_species", [](const PipelineRow& r) { return r.fitted.network.species_names(); });
  py::class_<PipelineResult>(m, "PipelineResult")
      .def_readonly("rows", &PipelineResult::rows)
      .def_readonly("accepted", &PipelineResult::accepted)
      .def("summary_csv", [](const PipelineResult& r) { return summary_csv(r); })
      .def("summary_table", [](const PipelineResult& r) { return summary_table(r); });
  m.def("run_pipeline", &pipeline, py::arg("network"), py::arg("kappa_ladder"), py::arg("tol") = 0.05,
        py::arg("t_end") = 10.0, py::arg("dt") = 0.01, py::arg("augment") = std::vector<std::string>{},
        py::arg("all") = false);
}
