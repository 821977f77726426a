#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "uplocal/cli.hpp"
#include "uplocal/direction.hpp"
#include "uplocal/hermite.hpp"
#include "uplocal/localization.hpp"
#include "uplocal/periodization.hpp"

namespace py = pybind11;
using namespace uplocal;

namespace {

py::dict to_dict(const LocalizationReport& r) {
  py::dict d;
  d["direction"] = r.direction;
  d["delta_A"] = r.delta_A;
  d["delta_B"] = r.delta_B;
  d["up"] = r.up;
  d["sum_functional"] = r.sum_functional;
  d["warnings"] = r.warnings;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Directional time-frequency localization measures";

  py::register_exception<Error>(m, "UplocalError", PyExc_RuntimeError);
  py::register_exception<cli::SpecError>(m, "SpecError", PyExc_ValueError);

  py::class_<CatalogFunction>(m, "Function")
      .def_static("parse", &CatalogFunction::parse, py::arg("spec"))
      .def_property_readonly("name", &CatalogFunction::name)
      .def_property_readonly("dim", &CatalogFunction::dim)
      .def("evaluate", [](const CatalogFunction& f, const Vec& x) { return f.evaluate(x); }, py::arg("x"))
      .def("__repr__", [](const CatalogFunction& f) { return "<uplocal.Function " + f.name() + ">"; });

  m.def("parse", &CatalogFunction::parse, py::arg("spec"), "Parse a catalog function such as 'gaussian_diag:1,4'.");

  m.def(
      "up_directional",
      [](const CatalogFunction& f, const Vec& L) { return to_dict(up_directional(moments(f), L)); },
      py::arg("f"), py::arg("L"));

  m.def("up_gg", [](const CatalogFunction& f) { return up_gg(moments(f)); }, py::arg("f"));

  m.def(
      "extremes",
      [](const CatalogFunction& f) {
        const auto e = optimize_sum_functional(build_M_matrix(moments(f)));
        py::dict d;
        d["min"] = e.min.value;
        d["argmin"] = e.min.direction;
        d["max"] = e.max.value;
        d["argmax"] = e.max.direction;
        d["isotropic"] = e.isotropic;
        return d;
      },
      py::arg("f"), "Extremes of the sum functional over unit directions.");

  m.def(
      "candidates",
      [](const CatalogFunction& f) {
        const auto s = extremal_directions(build_A_matrix(moments(f)));
        py::list out;
        for (const auto& c : s.candidates) out.append(py::make_tuple(c.direction, c.up_value));
        return out;
      },
      py::arg("f"), "Candidate extremal directions of UP_L as (direction, up) pairs.");

  m.def(
      "up_hermite",
      [](const CatalogFunction& f, const Vec& L, int cutoff) { return up_hermite(expand(f, cutoff), L); },
      py::arg("f"), py::arg("L"), py::arg("cutoff") = 10);

  m.def(
      "sweep",
      [](const CatalogFunction& f, const Vec& L, const Vec& lambdas, bool include_gg) {
        const auto r = convergence_sweep(f, L, lambdas, include_gg);
        py::list rows;
        for (const auto& row : r.rows) {
          py::dict d;
          d["lambda"] = row.lambda;
          d["up_periodic"] = row.up_periodic;
          d["error"] = row.error;
          d["up_gg_periodic"] = row.up_gg_periodic;
          d["gg_error"] = row.gg_error;
          d["flag"] = row.flag;
          rows.append(d);
        }
        return rows;
      },
      py::arg("f"), py::arg("L"), py::arg("lambdas"), py::arg("include_gg") = false);

  m.def(
      "run_spec",
      [](const std::string& text) {
        std::ostringstream err;
        const int code = cli::run(cli::parse_spec(text), err);
        return py::make_tuple(code, err.str());
      },
      py::arg("text"), "Execute a key=value run specification; returns (exit_code, diagnostics).");

  m.def("format_number", &cli::format_number, py::arg("v"));
}
