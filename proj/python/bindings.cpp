#include "qlb/app.hpp"
#include "qlb/error.hpp"

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>
#include <memory>
#include <sstream>

namespace py = pybind11;
using namespace qlb;

namespace {

using CArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;

py::array_t<cplx> to_numpy(const Complex4x4 &m) {
    py::array_t<cplx> out({4, 4});
    std::memcpy(out.mutable_data(), m.entries().data(), sizeof(cplx) * 16);
    return out;
}

Complex4x4 from_numpy(const CArray &a) {
    if (a.ndim() != 2 || a.shape(0) != 4 || a.shape(1) != 4)
        throw std::invalid_argument("expected a 4x4 complex array");
    Complex4x4 m;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) m(r, c) = a.at(r, c);
    return m;
}

py::array_t<cplx> field_to_numpy(const SpinorField &f) {
    py::array_t<cplx> out({static_cast<py::ssize_t>(f.grid().sites()), py::ssize_t{4}});
    std::memcpy(out.mutable_data(), f.data().data(), sizeof(Spinor) * f.grid().sites());
    return out;
}

SpinorField field_from_numpy(const CArray &a, const Grid &grid, double dt) {
    if (a.ndim() != 2 || a.shape(1) != 4 || static_cast<std::size_t>(a.shape(0)) != grid.sites())
        throw std::invalid_argument("expected a (sites, 4) complex array matching the grid");
    SpinorField f(grid, dt);
    std::memcpy(f.data().data(), a.data(), sizeof(Spinor) * grid.sites());
    return f;
}

py::array_t<double> vec(const std::vector<double> &v) { return py::array_t<double>(v.size(), v.data()); }

py::dict centroid_dict(const CentroidPair &c) {
    py::dict d;
    d["left"] = c.left ? py::cast(*c.left) : py::none();
    d["right"] = c.right ? py::cast(*c.right) : py::none();
    return d;
}

py::dict record_dict(const ObservableRecord &r) {
    py::dict d;
    d["step"] = r.step;
    d["time"] = r.time;
    d["norm2"] = r.norm2;
    d["density"] = vec(r.density);
    d["rho_s"] = vec(r.rho_s);
    d["rho_a"] = vec(r.rho_a);
    d["half_line"] = centroid_dict(r.half_line);
    d["movers"] = centroid_dict(r.movers);
    d["v_mean"] = r.v_mean ? py::cast(*r.v_mean) : py::none();
    return d;
}

// A potential kept on the C++ side so built-in fields never call back into Python.
struct Potential {
    PotentialFn fn;
};

Potential from_python(py::function f) {
    // Solver copies may be destroyed without the GIL, so only the shared_ptr is copied.
    std::shared_ptr<py::function> held(new py::function(std::move(f)), [](py::function *p) {
        py::gil_scoped_acquire gil;
        delete p;
    });
    return {[held](std::size_t site, const std::array<double, 3> &x, double t) {
        py::gil_scoped_acquire gil;
        return (*held)(site, x, t).cast<EmPotentialSample>();
    }};
}

const DiracSet &dirac() {
    static const DiracSet set = build_dirac_set();
    return set;
}

} // namespace

PYBIND11_MODULE(_qlb, m) {
    m.doc() = "Quantum lattice Boltzmann solver for the Dirac equation";

    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::enum_<Axis>(m, "Axis").value("x", Axis::x).value("y", Axis::y).value("z", Axis::z);
    py::enum_<Boundary>(m, "Boundary")
        .value("periodic", Boundary::periodic)
        .value("copy", Boundary::copy);
    py::enum_<Branch>(m, "Branch")
        .value("particle", Branch::particle)
        .value("antiparticle", Branch::antiparticle);

    m.def("dirac_set", [] {
        const DiracSet &s = dirac();
        py::dict d;
        d["beta"] = to_numpy(s.beta);
        d["alpha"] = py::make_tuple(to_numpy(s.alpha[0]), to_numpy(s.alpha[1]), to_numpy(s.alpha[2]));
        d["gamma5"] = to_numpy(s.gamma5);
        d["sigma"] = to_numpy(s.sigma);
        d["rot"] = py::make_tuple(to_numpy(s.rot[0]), to_numpy(s.rot[1]), to_numpy(s.rot[2]));
        return d;
    }, "Dirac-Pauli matrices and streaming rotations as 4x4 complex arrays.");

    m.def("expm_antihermitian", [](const CArray &a) { return to_numpy(expm_antihermitian(from_numpy(a))); });
    m.def("collision_matrix_free",
          [](double mass, double dt) { return to_numpy(collision_matrix_free(dirac(), mass, dt)); },
          py::arg("mass"), py::arg("dt") = 1.0);
    m.def("collision_matrix_njl",
          [](double mass, double g, double rho_s, double rho_a, double dt) {
              return to_numpy(collision_matrix_njl(dirac(), mass, g, rho_s, rho_a, dt));
          },
          py::arg("mass"), py::arg("coupling"), py::arg("rho_s"), py::arg("rho_a"), py::arg("dt") = 1.0);
    m.def("collision_matrix_em",
          [](double mass, double e, std::array<double, 3> a, double v, double dt) {
              return to_numpy(collision_matrix_em(dirac(), mass, e, a, v, dt));
          },
          py::arg("mass"), py::arg("charge"), py::arg("vector_potential"),
          py::arg("scalar_potential") = 0.0, py::arg("dt") = 1.0);

    py::class_<Grid>(m, "Grid")
        .def(py::init<std::array<std::size_t, 3>, Boundary>(), py::arg("extents"),
             py::arg("boundary") = Boundary::periodic)
        .def_static("line", &Grid::line, py::arg("n"), py::arg("axis") = Axis::z,
                    py::arg("boundary") = Boundary::periodic)
        .def_property_readonly("sites", &Grid::sites)
        .def_property_readonly("dims", &Grid::dims)
        .def_property_readonly("extents", &Grid::extents)
        .def_property_readonly("boundary", &Grid::boundary)
        .def("__repr__", [](const Grid &g) {
            std::ostringstream s;
            s << "Grid(" << g.extents()[0] << "x" << g.extents()[1] << "x" << g.extents()[2] << ", "
              << boundary_name(g.boundary()) << ")";
            return s.str();
        });

    py::class_<FreeModel>(m, "FreeModel")
        .def(py::init([](double mass) { return FreeModel{mass}; }), py::arg("mass") = 0.0)
        .def_readwrite("mass", &FreeModel::mass);
    py::class_<NjlModel>(m, "NjlModel")
        .def(py::init([](double mass, double g) { return NjlModel{mass, g}; }), py::arg("mass") = 0.0,
             py::arg("coupling") = 0.0)
        .def_readwrite("mass", &NjlModel::mass)
        .def_readwrite("coupling", &NjlModel::coupling);
    py::class_<EmPotentialSample>(m, "PotentialSample")
        .def(py::init([](std::array<double, 3> a, double v) { return EmPotentialSample{a, v}; }),
             py::arg("vector_potential") = std::array<double, 3>{0.0, 0.0, 0.0},
             py::arg("scalar_potential") = 0.0)
        .def_readwrite("vector_potential", &EmPotentialSample::vector_potential)
        .def_readwrite("scalar_potential", &EmPotentialSample::scalar_potential);
    py::class_<Potential>(m, "Potential")
        .def(py::init(&from_python), py::arg("fn"),
             "Wraps fn(site, position, t) -> PotentialSample. Slower than the built-in factories.")
        .def("__call__", [](const Potential &p, std::size_t site, std::array<double, 3> x, double t) {
            return p.fn(site, x, t);
        }, py::arg("site"), py::arg("position"), py::arg("t"));
    m.def("uniform_scalar_potential", [](double v) { return Potential{uniform_scalar_potential(v)}; },
          py::arg("v"));
    m.def("constant_vector_potential",
          [](std::array<double, 3> a) { return Potential{constant_vector_potential(a)}; }, py::arg("a"));
    m.def("plane_wave_vector_potential",
          [](double amplitude, Axis polarization, Axis direction, double k, double omega) {
              return Potential{plane_wave_vector_potential(amplitude, polarization, direction, k, omega)};
          },
          py::arg("amplitude"), py::arg("polarization"), py::arg("direction"), py::arg("k"),
          py::arg("omega"));

    py::class_<EmModel>(m, "EmModel")
        .def(py::init([](double mass, double charge, const Potential &p) { return EmModel{mass, charge, p.fn}; }),
             py::arg("mass"), py::arg("charge"), py::arg("potential"))
        .def(py::init([](double mass, double charge, py::function f) {
                 return EmModel{mass, charge, from_python(std::move(f)).fn};
             }),
             py::arg("mass"), py::arg("charge"), py::arg("potential"))
        .def_readwrite("mass", &EmModel::mass)
        .def_readwrite("charge", &EmModel::charge);

    m.def("gaussian_packet",
          [](const Grid &grid, double k, double sigma, double c_u, double c_d, double center, Axis axis,
             bool normalize, double dt) {
              const WavepacketSpec spec{k, sigma, c_u, c_d, center, axis};
              return field_to_numpy(init_gaussian(grid, dirac(), spec, normalize, dt));
          },
          py::arg("grid"), py::arg("k") = 0.006, py::arg("sigma") = 48.0, py::arg("c_u") = 1.177,
          py::arg("c_d") = 0.784, py::arg("center") = -1.0, py::arg("axis") = Axis::z,
          py::arg("normalize") = true, py::arg("dt") = 1.0);
    m.def("plane_wave",
          [](const Grid &grid, double k, double mass, Branch branch, Axis axis, double dt) {
              return field_to_numpy(plane_wave(grid, dirac(), k, mass, branch, axis, dt));
          },
          py::arg("grid"), py::arg("k"), py::arg("mass"), py::arg("branch") = Branch::particle,
          py::arg("axis") = Axis::z, py::arg("dt") = 1.0);

    m.def("evolve",
          [](const CArray &psi, const Grid &grid, const CollisionModel &model, std::size_t steps,
             double dt, int workers) {
              SpinorField f = field_from_numpy(psi, grid, dt);
              {
                  py::gil_scoped_release release;
                  f = evolve(std::move(f), dirac(), model, StepPlan::for_grid(grid, workers), steps);
              }
              return field_to_numpy(f);
          },
          py::arg("psi"), py::arg("grid"), py::arg("model"), py::arg("steps"), py::arg("dt") = 1.0,
          py::arg("workers") = 1, "Advances a (sites, 4) field by `steps` steps from t = 0.");

    m.def("norm2", [](const CArray &psi, const Grid &grid, double dt) {
        return field_from_numpy(psi, grid, dt).norm2();
    }, py::arg("psi"), py::arg("grid"), py::arg("dt") = 1.0);
    m.def("observe",
          [](const CArray &psi, const Grid &grid, std::size_t step, Axis axis, double center, double dt) {
              return record_dict(observe(field_from_numpy(psi, grid, dt), dirac(), step, axis, center));
          },
          py::arg("psi"), py::arg("grid"), py::arg("step") = 0, py::arg("axis") = Axis::z,
          py::arg("center") = 0.0, py::arg("dt") = 1.0);
    m.def("theory_group_velocity", &theory_group_velocity, py::arg("k"), py::arg("mass"));

    py::class_<RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def_static("from_file", &load_config, py::arg("path"))
        .def_static("from_text", [](const std::string &text) {
            std::istringstream in(text);
            return parse_config(in, "<text>");
        }, py::arg("text"))
        .def("set", [](RunConfig &cfg, const std::string &key, py::object value) {
            const std::string text = py::isinstance<py::bool_>(value)
                                         ? (value.cast<bool>() ? "true" : "false")
                                         : py::str(value).cast<std::string>();
            apply_override(cfg, key + "=" + text);
            return &cfg;
        }, py::arg("key"), py::arg("value"), py::return_value_policy::reference_internal,
             "Applies `key = value` exactly as a CLI override would; returns self.")
        .def("validate", &RunConfig::validate)
        .def("render", &render_config)
        .def("__repr__", &render_config);

    m.def("run", [](const RunConfig &cfg) {
        std::ostringstream log;
        py::list out;
        for (const ObservableRecord &r : cmd_run(cfg, log)) out.append(record_dict(r));
        return out;
    }, py::arg("config"), "Runs a simulation, writes its outputs and returns the observable series.");
    m.def("bench", [](const RunConfig &cfg) {
        std::ostringstream log;
        const BenchResult r = cmd_bench(cfg, log);
        py::dict d;
        d["sites"] = r.sites;
        d["steps"] = r.steps;
        d["site_updates"] = r.site_updates;
        d["seconds_single"] = r.seconds_single;
        d["mlups_single"] = r.mlups_single;
        d["workers"] = r.workers;
        d["seconds_multi"] = r.seconds_multi;
        d["mlups_multi"] = r.mlups_multi;
        return d;
    }, py::arg("config"));
    m.def("converge", [](const RunConfig &cfg) {
        std::ostringstream log;
        const ConvergenceResult r = cmd_converge(cfg, log);
        py::list levels;
        for (const ConvergenceLevel &l : r.levels) {
            py::dict d;
            d["level"] = l.level;
            d["dt"] = l.dt;
            d["sites"] = l.sites;
            d["steps"] = l.steps;
            d["phase_error"] = l.phase_error;
            d["error_per_time"] = l.error_per_time;
            levels.append(d);
        }
        py::dict d;
        d["levels"] = levels;
        d["fitted_order"] = r.fitted_order;
        d["exact"] = r.exact;
        return d;
    }, py::arg("config"));
    m.def("check", [](std::uint64_t seed, int draws) {
        py::list out;
        for (const CheckEntry &e : run_checks(dirac(), seed, draws)) {
            py::dict d;
            d["name"] = e.name;
            d["tolerance"] = e.tolerance;
            d["residual"] = e.residual;
            d["passed"] = e.passed;
            out.append(d);
        }
        return out;
    }, py::arg("seed") = 42, py::arg("draws") = 1000);
}
