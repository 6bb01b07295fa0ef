#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>
#include <sstream>

#include "cohspace/catalog.hpp"
#include "cohspace/cli.hpp"
#include "cohspace/dynamics.hpp"
#include "cohspace/errors.hpp"
#include "cohspace/kernel.hpp"
#include "cohspace/lie.hpp"
#include "cohspace/quantum_space.hpp"
#include "cohspace/spectra.hpp"

namespace py = pybind11;
using namespace cohspace;
using nlohmann::json;

namespace {

PointList to_points(const std::vector<VecC>& v) {
  PointList out;
  out.reserve(v.size());
  for (const auto& c : v) out.emplace_back(c);
  return out;
}

std::vector<VecC> from_points(const PointList& p) {
  std::vector<VecC> out;
  for (const auto& x : p) out.push_back(x.coords);
  return out;
}

KernelSpace parse_space(const std::string& s) { return space_from_json(json::parse(s)); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "cohspace native core";
  m.attr("__version__") = COHSPACE_VERSION;

  static PyObject* error_type = PyErr_NewException("cohspace._core.CohspaceError", PyExc_RuntimeError, nullptr);
  m.add_object("CohspaceError", py::handle(error_type));
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = py::handle(error_type)(e.what());
      err.attr("kind") = e.kind();
      PyErr_SetObject(error_type, err.ptr());
    }
  });

  py::class_<KernelSpace>(m, "KernelSpace")
      .def_property_readonly("label_dim", &KernelSpace::label_dim)
      .def_property_readonly("kind", [](const KernelSpace& s) { return to_string(s.kind()); })
      .def_property_readonly("normalized", &KernelSpace::normalized)
      .def("descriptor", [](const KernelSpace& s) { return s.descriptor().dump(); })
      .def("kernel", [](const KernelSpace& s, const VecC& z, const VecC& z2) { return eval_kernel(s, Point(z), Point(z2)); })
      .def("product",
           [](const KernelSpace& s, const VecC& z, const VecC& z2) { return coherent_product(s, Point(z), Point(z2)); })
      .def("distance", [](const KernelSpace& s, const VecC& z, const VecC& z2) { return distance(s, Point(z), Point(z2)); })
      .def(
          "sample",
          [](const KernelSpace& s, int count, std::uint64_t seed) {
            std::mt19937_64 rng(seed);
            return from_points(s.sample(rng, static_cast<std::size_t>(count)));
          },
          py::arg("count"), py::arg("seed") = 0);

  m.def("space_from_json", &parse_space, py::arg("descriptor"));

  m.def(
      "gram_matrix",
      [](const KernelSpace& s, const std::vector<VecC>& pts, int threads) {
        const auto p = to_points(pts);
        return gram_matrix(s, p, threads);
      },
      py::arg("space"), py::arg("points"), py::arg("threads") = 1);

  m.def(
      "check_coherence",
      [](const KernelSpace& s, const std::vector<VecC>& pts, double tol) {
        const auto p = to_points(pts);
        const auto v = check_coherence(s, p, tol);
        py::dict d;
        d["min_eigenvalue"] = v.min_eigenvalue;
        d["gram_norm"] = v.gram_norm;
        d["passed"] = v.passed;
        d["tolerance_used"] = v.tolerance_used;
        return d;
      },
      py::arg("space"), py::arg("points"), py::arg("tol") = 1e-8);

  m.def(
      "quantum_space",
      [](const KernelSpace& s, const std::vector<VecC>& pts, double tol) {
        return build_quantum_space(s, to_points(pts), tol).to_json().dump();
      },
      py::arg("space"), py::arg("points"), py::arg("tol") = 1e-10);

  m.def(
      "solve_spectrum",
      [](const std::string& model, double lo, double hi, double tol, int grid) {
        SpectrumOptions o;
        o.grid = grid;
        return spectrum_to_json(solve_implicit_spectrum(model_from_json(json::parse(model)), {lo, hi}, tol, o)).dump();
      },
      py::arg("model"), py::arg("lo"), py::arg("hi"), py::arg("tol") = 1e-10, py::arg("grid") = 10000);

  m.def("free_dispersion", &free_dispersion, py::arg("p"), py::arg("mass"), py::arg("c"));

  m.def(
      "qubit_axioms",
      [](double hbar) {
        const auto [alg, rep] = qubit_algebra(hbar);
        const auto r = check_axioms(alg);
        return std::vector<double>{r.antisymmetry, r.jacobi, r.involution, r.unit, representation_defect(alg, rep)};
      },
      py::arg("hbar") = 1.0);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
