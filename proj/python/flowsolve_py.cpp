#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>
#include <sstream>

#include "flowsolve/coeffs.hpp"
#include "flowsolve/core.hpp"
#include "flowsolve/experiment.hpp"
#include "flowsolve/fields.hpp"
#include "flowsolve/metrics.hpp"
#include "flowsolve/solvers.hpp"

#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)

namespace py = pybind11;
using namespace flowsolve;

namespace {

// Wraps a Python callable f(x: ndarray, t: float) -> array-like.
class CallableField final : public VelocityField {
 public:
  CallableField(py::function fn, std::size_t dim) : fn_(std::move(fn)), dim_(dim) {}

  std::size_t dim() const override { return dim_; }
  Vector evaluate(const Vector& x, double t) const override {
    py::gil_scoped_acquire gil;
    return fn_(x, t).cast<Vector>();
  }

 private:
  py::function fn_;
  std::size_t dim_;
};

TimeSchedule to_schedule(const std::vector<double>& times) {
  const bool full = times.size() >= 2 && times.front() == 1.0 && times.back() == 0.0;
  return TimeSchedule(times, !full);
}

py::dict run_sample(const std::string& method, const VelocityField& field, const Vector& x_init,
                    const std::vector<double>& times, int order, bool corrector) {
  SolverConfig cfg;
  cfg.method = parse_method(method);
  cfg.order = order;
  cfg.use_corrector = corrector;
  cfg.schedule = to_schedule(times);
  const TrajectoryRecord tr = sample(cfg, field, x_init);
  Matrix states(static_cast<Eigen::Index>(tr.states.size()), x_init.size());
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    states.row(static_cast<Eigen::Index>(i)) = tr.states[i].transpose();
  }
  py::dict out;
  out["states"] = states;
  out["nfe"] = tr.nfe;
  return out;
}

std::vector<State> rows_to_states(const Matrix& m) {
  std::vector<State> out;
  out.reserve(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.emplace_back(m.row(i).transpose());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cached multistep flow-ODE samplers, analytic velocity fields and metrics.";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<InvalidState>(m, "InvalidState", PyExc_RuntimeError);
  py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_ArithmeticError);
  py::register_exception<SingularSystem>(m, "SingularSystem", PyExc_ArithmeticError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<StepError>(m, "StepError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("make_uniform_schedule", [](std::size_t n) {
    const auto s = make_uniform_schedule(n);
    return std::vector<double>(s.times().begin(), s.times().end());
  }, py::arg("n_steps"));
  m.def("make_shifted_schedule", [](std::size_t n, double shift) {
    const auto s = make_shifted_schedule(n, shift);
    return std::vector<double>(s.times().begin(), s.times().end());
  }, py::arg("n_steps"), py::arg("shift"));

  m.def("compute_c", &compute_c, py::arg("t_prev"), py::arg("t_next"), py::arg("p"));
  m.def("solve_b", [](const std::vector<double>& deltas, const std::vector<double>& c) {
    return solve_b(deltas, c);
  }, py::arg("deltas"), py::arg("c"));

  py::class_<VelocityField, std::shared_ptr<VelocityField>>(m, "VelocityField")
      .def_property_readonly("dim", &VelocityField::dim)
      .def("__call__", &VelocityField::evaluate, py::arg("x"), py::arg("t"))
      .def("exact_flow", &VelocityField::exact_flow, py::arg("x"), py::arg("t_from"),
           py::arg("t_to"));

  py::class_<PolyTimeField, VelocityField, std::shared_ptr<PolyTimeField>>(m, "PolyTimeField")
      .def(py::init<std::vector<double>, std::size_t>(), py::arg("coeffs"), py::arg("dim") = 1);
  py::class_<AffineField, VelocityField, std::shared_ptr<AffineField>>(m, "AffineField")
      .def(py::init<Matrix, Vector>(), py::arg("A"), py::arg("b"));
  py::class_<GaussianMixtureFlowField, VelocityField, std::shared_ptr<GaussianMixtureFlowField>>(
      m, "GaussianMixtureFlowField")
      .def(py::init<std::vector<double>, std::vector<Vector>, double>(), py::arg("weights"),
           py::arg("means"), py::arg("std"))
      .def("responsibilities", &GaussianMixtureFlowField::responsibilities);
  py::class_<GridField, VelocityField, std::shared_ptr<GridField>>(m, "GridField");
  py::class_<CallableField, VelocityField, std::shared_ptr<CallableField>>(m, "CallableField")
      .def(py::init<py::function, std::size_t>(), py::arg("fn"), py::arg("dim"));
  m.def("load_grid_field", [](const std::filesystem::path& p) {
    return std::make_shared<GridField>(load_grid_field(p));
  }, py::arg("path"));

  m.def("sample", &run_sample, py::arg("method"), py::arg("field"), py::arg("x_init"),
        py::arg("times"), py::arg("order") = 1, py::arg("corrector") = false,
        "Integrate x_init along `times` (strictly decreasing). Returns {'states', 'nfe'}.");

  m.def("endpoint_error", [](const Vector& a, const Vector& b, const std::string& norm) {
    return endpoint_error(a, b, norm == "linf" ? Norm::linf : Norm::l2);
  }, py::arg("approx"), py::arg("exact"), py::arg("norm") = "l2");
  m.def("fit_order", [](const std::vector<std::size_t>& n, const std::vector<double>& e) {
    const auto r = fit_order(n, e);
    return py::make_tuple(r.slope, r.r_squared);
  }, py::arg("step_counts"), py::arg("errors"));
  m.def("gaussian_w2", &gaussian_w2, py::arg("mean_a"), py::arg("cov_a"), py::arg("mean_b"),
        py::arg("cov_b"));
  m.def("energy_distance", [](const Matrix& a, const Matrix& b) {
    return energy_distance(rows_to_states(a), rows_to_states(b));
  }, py::arg("samples_a"), py::arg("samples_b"));

  m.def("sweep_csv", [](const std::filesystem::path& config) {
    const auto cfg = load_experiment_config(config);
    std::ostringstream os;
    write_csv(os, run_sweep(cfg).rows);
    return os.str();
  }, py::arg("config"), "Run a sweep config and return the CSV text.");

#ifdef VERSION_INFO
  m.attr("__version__") = MACRO_STRINGIFY(VERSION_INFO);
#else
  m.attr("__version__") = "dev";
#endif
}
