#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gplab/config.hpp"
#include "gplab/fock.hpp"
#include "gplab/gp_solver.hpp"
#include "gplab/run.hpp"
#include "gplab/scattering.hpp"

namespace py = pybind11;
using namespace gplab;

namespace {

py::dict ground_state(const gp::Grid& grid, double coupling, double trap, double width, double tol) {
  gp::Spectral sp(grid);
  gp::GpParams p{coupling, std::nullopt};
  if (trap > 0.0) p.trap = gp::harmonic_trap(grid, trap);
  const auto gs = gp::minimize_imaginary_time(sp, p, gp::Field::gaussian(grid, width), 0.1, tol);
  py::dict d;
  d["phi"] = Eigen::VectorXcd(gs.phi.values);
  d["energy"] = gs.energy.total;
  d["kinetic"] = gs.energy.kinetic;
  d["trap"] = gs.energy.trap;
  d["interaction"] = gs.energy.interaction;
  d["mu"] = gs.mu;
  d["residual"] = gs.residual;
  d["iterations"] = gs.iterations;
  return d;
}

std::string run_json(const std::string& text, const std::string& out, const std::string& base) {
  auto cfg = config::parse_config_text(text, base);
  cfg.output_dir = out;
  return run::run(cfg).to_json().dump();
}

}  // namespace

PYBIND11_MODULE(_gplab, m) {
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<config::ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<gp::Grid>(m, "Grid")
      .def_static("cube", &gp::Grid::cube, py::arg("dim"), py::arg("points"), py::arg("length"))
      .def_readonly("dim", &gp::Grid::dim)
      .def_readonly("points", &gp::Grid::points)
      .def_readonly("spacing", &gp::Grid::spacing)
      .def("size", &gp::Grid::size)
      .def("cell_volume", &gp::Grid::cell_volume);

  py::class_<scattering::RadialPotential>(m, "RadialPotential")
      .def(py::init<std::vector<double>, double>(), py::arg("samples"), py::arg("dr"))
      .def_static("zero", &scattering::RadialPotential::zero, py::arg("dr"), py::arg("extent"))
      .def_static("square_well", &scattering::RadialPotential::square_well, py::arg("depth"), py::arg("radius"),
                  py::arg("dr"))
      .def_static("smooth_bump", &scattering::RadialPotential::smooth_bump, py::arg("depth"), py::arg("radius"),
                  py::arg("dr"))
      .def("scaled", &scattering::RadialPotential::scaled)
      .def("at", &scattering::RadialPotential::at)
      .def("integral", &scattering::RadialPotential::integral)
      .def_property_readonly("dr", &scattering::RadialPotential::dr)
      .def_property_readonly("support_radius", &scattering::RadialPotential::support_radius);

  py::class_<scattering::ScatteringSolution>(m, "ScatteringSolution")
      .def_readonly("a", &scattering::ScatteringSolution::a)
      .def_readonly("dr", &scattering::ScatteringSolution::dr)
      .def_readonly("r_max", &scattering::ScatteringSolution::r_max)
      .def_readonly("f", &scattering::ScatteringSolution::f)
      .def_readonly("u", &scattering::ScatteringSolution::u)
      .def("f_at", &scattering::ScatteringSolution::f_at);

  m.def("solve_zero_energy", &scattering::solve_zero_energy, py::arg("potential"), py::arg("r_max"),
        py::arg("tol") = 1e-6);
  m.def("scattering_length_variational", &scattering::scattering_length_variational, py::arg("potential"),
        py::arg("trial_family_size") = 64);
  m.def("integral_identity_length", &scattering::integral_identity_length);
  m.def("ground_state", &ground_state, py::arg("grid"), py::arg("coupling") = 0.0, py::arg("trap") = 0.0,
        py::arg("width") = 1.0, py::arg("tol") = 1e-8);
  m.def("sector_dimension", &fock::sector_dimension, py::arg("modes"), py::arg("particles"));
  m.def("parse_config", [](const std::string& text) { return config::serialize(config::parse_config_text(text)); },
        "Validate INI text and return it in canonical form.");
  m.def("_run_json", &run_json);
  m.def("version", &run::version);
}
