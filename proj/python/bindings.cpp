#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "phaseflow/coupling.hpp"
#include "phaseflow/driver.hpp"
#include "phaseflow/error.hpp"
#include "phaseflow/scenarios.hpp"

namespace py = pybind11;
using namespace phaseflow;

namespace {

py::array_t<double> vertices_of(const Mesh& m) {
  py::array_t<double> out({m.num_vertices(), 2});
  auto a = out.mutable_unchecked<2>();
  for (int i = 0; i < m.num_vertices(); ++i) {
    a(i, 0) = m.vertex(i).x();
    a(i, 1) = m.vertex(i).y();
  }
  return out;
}

py::array_t<int> triangles_of(const Mesh& m) {
  py::array_t<int> out({m.num_triangles(), 3});
  auto a = out.mutable_unchecked<2>();
  for (int t = 0; t < m.num_triangles(); ++t) {
    for (int k = 0; k < 3; ++k) a(t, k) = m.triangle(t).v[k];
  }
  return out;
}

// Velocity at the mesh vertices, one row per vertex.
py::array_t<double> vertex_velocity(const State& s) {
  const FeSpace& fe = s.v.fe();
  const int nv = s.mesh().num_vertices();
  py::array_t<double> out({nv, 2});
  auto a = out.mutable_unchecked<2>();
  for (int i = 0; i < nv; ++i) {
    a(i, 0) = s.v.values[fe.dof(i, 0)];
    a(i, 1) = s.v.values[fe.dof(i, 1)];
  }
  return out;
}

py::dict energy_dict(const EnergyBreakdown& e) {
  py::dict d;
  d["E_kin"] = e.E_kin;
  d["E_int"] = e.E_int;
  d["E_total"] = e.E_total;
  d["D_visc"] = e.D_visc;
  d["D_mob"] = e.D_mob;
  d["W_ext"] = e.W_ext;
  d["num_kin"] = e.num_kin;
  d["num_phi"] = e.num_phi;
  return d;
}

py::dict audit_dict(const InequalityReport& r) {
  py::dict d;
  d["pass"] = r.pass;
  d["lhs"] = r.lhs;
  d["rhs"] = r.rhs;
  d["residual"] = r.residual;
  d["threshold"] = r.threshold;
  d["E_old"] = r.E_old;
  d["E_new"] = r.E_new;
  return d;
}

py::dict energy_table(const std::vector<EnergyRow>& rows) {
  const py::ssize_t n = static_cast<py::ssize_t>(rows.size());
  py::dict d;
  auto column = [&](const char* name, auto get) {
    py::array_t<double> a(n);
    auto m = a.mutable_unchecked<1>();
    for (py::ssize_t i = 0; i < n; ++i) m(i) = get(rows[i]);
    d[name] = a;
  };
  column("t", [](const EnergyRow& r) { return r.t; });
  column("tau", [](const EnergyRow& r) { return r.tau; });
  column("E_kin", [](const EnergyRow& r) { return r.E_kin; });
  column("E_int", [](const EnergyRow& r) { return r.E_int; });
  column("E_total", [](const EnergyRow& r) { return r.E_total; });
  column("D_visc", [](const EnergyRow& r) { return r.D_visc; });
  column("D_mob", [](const EnergyRow& r) { return r.D_mob; });
  column("W_ext", [](const EnergyRow& r) { return r.W_ext; });
  column("ineq_residual", [](const EnergyRow& r) { return r.ineq_residual; });
  column("mass_phi", [](const EnergyRow& r) { return r.mass_phi; });
  column("min_phi", [](const EnergyRow& r) { return r.min_phi; });
  column("max_phi", [](const EnergyRow& r) { return r.max_phi; });
  column("dofs", [](const EnergyRow& r) { return static_cast<double>(r.dofs); });
  return d;
}

// Step-by-step driver on a fixed mesh.
class Simulation {
 public:
  explicit Simulation(const Config& c) : config_(c), opt_(to_run_options(c)), state_(initial_state(opt_)) {}

  py::dict step(std::optional<double> tau) {
    const double t = tau ? *tau : timestep();
    StepResult r = splitting_step(state_, t, opt_.params, opt_.step);
    const InequalityReport audit = step_inequality_check(state_, r.state, t, opt_.params, opt_.audit_tol);
    state_ = std::move(r.state);
    ++steps_;
    py::dict d;
    d["t"] = state_.t;
    d["tau"] = t;
    d["inner_iterations"] = r.report.inner_iterations;
    d["newton_iterations"] = r.report.newton_iterations;
    d["divergence_residual"] = r.report.divergence_residual;
    d["mass_phi"] = state_.mass_phi;
    d["audit"] = audit_dict(audit);
    d["energy"] = energy_dict(audit.step);
    return d;
  }

  double timestep() const { return compute_timestep(state_, state_.mesh().min_edge_length(), opt_.timestep); }
  py::dict energy() const { return energy_dict(total_energy(state_, opt_.params)); }
  void write_vtk_file(const std::string& path, bool quadratic) const { write_vtk(state_, path, quadratic); }

  const Config& config() const { return config_; }
  const State& state() const { return state_; }
  int steps() const { return steps_; }

 private:
  Config config_;
  RunOptions opt_;
  State state_;
  int steps_ = 0;
};

Config config_from(const py::object& c) {
  if (py::isinstance<Config>(c)) return c.cast<Config>();
  return preset(c.cast<std::string>());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Diffuse-interface two-phase flow solver";

  static py::exception<Error> base(m, "PhaseflowError", PyExc_RuntimeError);
  static py::exception<ConfigError> config_error(m, "ConfigError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      py::set_error(config_error, e.what());
    } catch (const Error& e) {
      py::set_error(base, e.what());
    }
  });

  py::class_<Config>(m, "Config")
      .def(py::init(&default_config))
      .def_readwrite("scenario", &Config::scenario)
      .def_readwrite("level", &Config::level)
      .def_readwrite("t_end", &Config::t_end)
      .def_readwrite("max_steps", &Config::max_steps)
      .def("__getitem__", [](const Config& c, const std::string& key) { return get_config_value(c, key); })
      .def("__setitem__", [](Config& c, const std::string& key, const std::string& value) {
        set_config_value(c, key, value);
      })
      .def("set", [](Config& c, const std::string& key, const py::object& value) {
        if (py::isinstance<py::bool_>(value)) {
          set_config_value(c, key, value.cast<bool>() ? "true" : "false");
        } else if (py::isinstance<py::float_>(value)) {
          set_config_value(c, key, format_number(value.cast<double>()));
        } else {
          set_config_value(c, key, py::str(value).cast<std::string>());
        }
      }, py::arg("key"), py::arg("value"))
      .def("validate", &Config::validate)
      .def("dump", &dump_config)
      .def_readonly("defaulted", &Config::defaulted)
      .def("__repr__", [](const Config& c) { return "<phaseflow.Config scenario=" + c.scenario + ">"; });

  m.def("preset", &preset, py::arg("name"));
  m.def("preset_names", &preset_names);
  m.def("config_keys", &config_keys);
  m.def("parse_config", [](const std::string& text, const std::string& base) { return parse_config_string(text, base); },
        py::arg("text"), py::arg("base_scenario") = "");
  m.def("load_config", &load_config, py::arg("path"), py::arg("base_scenario") = "");

  py::class_<Simulation>(m, "Simulation")
      .def(py::init([](const py::object& c) { return Simulation(config_from(c)); }), py::arg("config"))
      .def("step", &Simulation::step, py::arg("tau") = py::none(),
           "Advance one step; tau defaults to the adaptive rule. Returns diagnostics and the energy audit.")
      .def("timestep", &Simulation::timestep)
      .def("energy", &Simulation::energy)
      .def("write_vtk", &Simulation::write_vtk_file, py::arg("path"), py::arg("quadratic") = false)
      .def_property_readonly("config", &Simulation::config)
      .def_property_readonly("steps", &Simulation::steps)
      .def_property_readonly("t", [](const Simulation& s) { return s.state().t; })
      .def_property_readonly("mass", [](const Simulation& s) { return s.state().mass_phi; })
      .def_property_readonly("phi", [](const Simulation& s) { return Vector(s.state().phi.values); })
      .def_property_readonly("mu", [](const Simulation& s) { return Vector(s.state().mu.values); })
      .def_property_readonly("p", [](const Simulation& s) { return Vector(s.state().p.values); })
      .def_property_readonly("velocity", [](const Simulation& s) { return vertex_velocity(s.state()); })
      .def_property_readonly("vertices", [](const Simulation& s) { return vertices_of(s.state().mesh()); })
      .def_property_readonly("triangles", [](const Simulation& s) { return triangles_of(s.state().mesh()); });

  m.def("run", [](const py::object& c, bool write_files) {
    const Config cfg = config_from(c);
    SimulationSummary s;
    {
      py::gil_scoped_release release;
      s = simulate(cfg, write_files);
    }
    py::dict d;
    d["steps"] = s.steps;
    d["t_final"] = s.t_final;
    d["audit_failures"] = s.audit_failures;
    d["ledger_pass"] = s.ledger.pass;
    d["max_mass_drift"] = s.max_mass_drift;
    d["energy"] = energy_table(s.rows);
    d["files"] = s.files;
    d["phi"] = Vector(s.final_state.phi.values);
    d["vertices"] = vertices_of(s.final_state.mesh());
    d["triangles"] = triangles_of(s.final_state.mesh());
    return d;
  }, py::arg("config"), py::arg("write_files") = false,
        "Run a scenario (Config or preset name) to its end time and return the energy table and final phase field.");

  m.def("eoc", [](const py::object& c, const std::vector<int>& levels, int reference) {
    const Config cfg = config_from(c);
    EocResult r;
    {
      py::gil_scoped_release release;
      r = run_eoc(cfg, levels, reference);
    }
    py::list rows;
    for (const EocRow& row : r.rows) {
      py::dict d;
      d["level"] = row.level;
      d["h"] = row.h;
      d["error"] = row.error;
      d["ratio"] = row.ratio;
      d["steps"] = row.steps;
      rows.append(d);
    }
    return rows;
  }, py::arg("config"), py::arg("levels"), py::arg("reference_level"));

  m.def("eo_flux", &eo_flux, py::arg("u_n"), py::arg("phi_left"), py::arg("phi_right"), py::arg("face_measure"));
  m.def("timestep_from_estimator", [](double h, double est, double safety, double v_min, double v_max) {
    TimestepConfig cfg;
    cfg.safety = safety;
    cfg.v_min = v_min;
    cfg.v_max = v_max;
    return timestep_from_estimator(h, est, cfg);
  }, py::arg("h"), py::arg("estimator"), py::arg("safety") = 0.9, py::arg("v_min") = 10.0, py::arg("v_max") = 1e5);
  m.def("mark_indicator", [](const std::vector<double>& g, double c_ref, double c_coarse) {
    const RefineMarks marks = mark_indicator(g, c_ref, c_coarse);
    std::vector<int> out(marks.size());
    for (int i = 0; i < marks.size(); ++i) out[i] = static_cast<int>(marks[i]);
    return out;
  }, py::arg("g"), py::arg("c_ref"), py::arg("c_coarse"), "Per-element marks: 0 keep, 1 refine, 2 coarsen.");
  m.def("structured_mesh", [](double x0, double y0, double x1, double y1, int level) {
    const Mesh mesh = build_structured_mesh(Rect{x0, y0, x1, y1}, level);
    return py::make_tuple(vertices_of(mesh), triangles_of(mesh));
  }, py::arg("x0"), py::arg("y0"), py::arg("x1"), py::arg("y1"), py::arg("level"));
  m.def("double_well", &double_well, py::arg("phi"));
}
