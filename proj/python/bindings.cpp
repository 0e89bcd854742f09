#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "segwave/cli.hpp"

namespace py = pybind11;
using namespace segwave;

namespace {

py::object to_python(const io::json& value) {
    return py::module_::import("json").attr("loads")(value.dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Lattice model, PDE solver and travelling-wave analytics for segregated cell populations";
    m.attr("__version__") = SEGWAVE_VERSION;

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<StructuralError>(m, "StructuralError", base.ptr());
    auto numerical = py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
    py::register_exception<ConvergenceError>(m, "ConvergenceError", numerical.ptr());

    py::class_<PhenotypeSet>(m, "PhenotypeSet")
        .def(py::init(&PhenotypeSet::make), py::arg("alpha"), py::arg("mu"), py::arg("omega"), py::arg("p_bar"))
        .def_readonly("alpha", &PhenotypeSet::alpha)
        .def_readonly("mu", &PhenotypeSet::mu)
        .def_readonly("omega", &PhenotypeSet::omega)
        .def_readonly("p_bar", &PhenotypeSet::p_bar)
        .def_property_readonly("count", &PhenotypeSet::count);

    py::class_<GridSpec>(m, "GridSpec")
        .def(py::init(&GridSpec::make), py::arg("length"), py::arg("dx"), py::arg("tau") = 0.0)
        .def_readonly("length", &GridSpec::length)
        .def_readonly("dx", &GridSpec::dx)
        .def_readonly("cells", &GridSpec::cells)
        .def_readonly("tau", &GridSpec::tau);

    py::class_<InitialCondition>(m, "InitialCondition")
        .def(py::init(&InitialCondition::make), py::arg("amplitude"), py::arg("decay"), py::arg("boundaries"))
        .def_readonly("amplitude", &InitialCondition::amplitude)
        .def_readonly("decay", &InitialCondition::decay)
        .def_readonly("boundaries", &InitialCondition::boundaries);

    py::class_<FieldState>(m, "FieldState")
        .def(py::init([](std::vector<std::vector<double>> n, double t) { return FieldState{std::move(n), t}; }),
             py::arg("n"), py::arg("t") = 0.0)
        .def_readwrite("n", &FieldState::n)
        .def_readwrite("t", &FieldState::t);

    m.def("pressure", py::overload_cast<const FieldState&, const PhenotypeSet&>(&pressure), py::arg("fields"),
          py::arg("params"));
    m.def("growth", &growth, py::arg("p"), py::arg("p_bar"));
    m.def("gamma_from_mu", &gamma_from_mu, py::arg("params"), py::arg("grid"));
    m.def("build_initial", &build_initial, py::arg("initial"), py::arg("grid"), py::arg("params"));

    py::class_<RunConfig>(m, "RunConfig")
        .def_readonly("params", &RunConfig::params)
        .def_readonly("grid", &RunConfig::grid)
        .def_readonly("initial", &RunConfig::initial)
        .def_property_readonly("t_end", [](const RunConfig& c) { return c.run.t_end; })
        .def_property_readonly("snapshot_times", [](const RunConfig& c) { return c.run.snapshot_times; })
        .def_property_readonly("seed", [](const RunConfig& c) { return c.run.seed; })
        .def_property_readonly("replicates", [](const RunConfig& c) { return c.run.replicates; })
        .def("canonical", [](const RunConfig& c) { return canonical(c); })
        .def("hash", [](const RunConfig& c) { return config_hash(c); });
    m.def("parse_config", &parse_config, py::arg("text"));
    m.def("load_config", &load_config, py::arg("path"));
    m.def("preset_names", &preset_names);
    m.def("load_preset", [](const std::string& name) { return load_config(preset_path(name)); }, py::arg("name"));

    py::class_<pde::SchemeOptions>(m, "SchemeOptions")
        .def(py::init<>())
        .def_readwrite("cfl_safety", &pde::SchemeOptions::cfl_safety)
        .def_readwrite("dt_max", &pde::SchemeOptions::dt_max)
        .def_readwrite("max_steps", &pde::SchemeOptions::max_steps);
    m.def("pde_step",
          [](const FieldState& f, const PhenotypeSet& p, const GridSpec& g, const pde::SchemeOptions& o) {
              return pde::step(f, p, g, o);
          },
          py::arg("fields"), py::arg("params"), py::arg("grid"), py::arg("options") = pde::SchemeOptions{});
    m.def("pde_run",
          [](const FieldState& f, const PhenotypeSet& p, const GridSpec& g, double t_end, std::vector<double> times,
             const pde::SchemeOptions& o) {
              py::gil_scoped_release release;
              return pde::run(f, p, g, t_end, times, o).snapshots;
          },
          py::arg("initial"), py::arg("params"), py::arg("grid"), py::arg("t_end"), py::arg("times"),
          py::arg("options") = pde::SchemeOptions{});

    py::class_<ibm::LatticeState>(m, "LatticeState")
        .def_readonly("counts", &ibm::LatticeState::counts)
        .def_readonly("step", &ibm::LatticeState::step)
        .def("densities", &ibm::LatticeState::densities, py::arg("dx"), py::arg("tau"))
        .def("total", &ibm::LatticeState::total, py::arg("phenotype"));
    m.def("init_lattice", &ibm::init_lattice, py::arg("initial"), py::arg("grid"), py::arg("params"));
    m.def("ibm_run",
          [](const PhenotypeSet& p, const GridSpec& g, const ibm::LatticeState& start, std::uint64_t seed,
             double t_end, std::vector<double> times, const std::string& sampler) {
              if (sampler != "aggregated" && sampler != "per_cell") {
                  throw ConfigError("sampler must be 'aggregated' or 'per_cell'");
              }
              const auto model = ibm::Model::from_mobilities(
                  p, g, sampler == "per_cell" ? ibm::Sampler::per_cell : ibm::Sampler::aggregated);
              py::gil_scoped_release release;
              return ibm::run(model, start, seed, t_end, times).snapshots;
          },
          py::arg("params"), py::arg("grid"), py::arg("initial"), py::arg("seed"), py::arg("t_end"),
          py::arg("times"), py::arg("sampler") = "aggregated");

    py::class_<twa::WavePrediction>(m, "WavePrediction")
        .def_readonly("c", &twa::WavePrediction::c)
        .def_readonly("z", &twa::WavePrediction::z)
        .def_readonly("p", &twa::WavePrediction::p)
        .def_readonly("tail_masses", &twa::WavePrediction::tail_masses)
        .def_readonly("iterations", &twa::WavePrediction::iterations)
        .def_readonly("residual", &twa::WavePrediction::residual)
        .def_readonly("p_rear", &twa::WavePrediction::p_rear);
    m.def("speed_from_p0", [](double p0, std::vector<double> m, const PhenotypeSet& p) { return twa::speed_from_p0(p0, m, p); },
          py::arg("p0"), py::arg("tail_masses"), py::arg("params"));
    m.def("interface_pressures",
          [](double c, std::vector<double> m, const PhenotypeSet& p) { return twa::interface_pressures(c, m, p); },
          py::arg("c"), py::arg("tail_masses"), py::arg("params"));
    m.def("interface_positions",
          [](double c, std::vector<double> m, const PhenotypeSet& p) { return twa::interface_positions(c, m, p); },
          py::arg("c"), py::arg("tail_masses"), py::arg("params"));
    m.def("density_jump_ratios", &twa::density_jump_ratios, py::arg("params"));
    m.def("assemble_wave", [](double c, std::vector<double> m, const PhenotypeSet& p) { return twa::assemble(c, m, p); },
          py::arg("c"), py::arg("tail_masses"), py::arg("params"));
    m.def("shoot_rear", [](double c, const PhenotypeSet& p) { return twa::shoot_rear(c, p).p_front; },
          py::arg("c"), py::arg("params"));
    m.def("solve_wave", [](std::vector<double> tail, const PhenotypeSet& p) { return twa::solve_wave(tail, p); },
          py::arg("tail_masses"), py::arg("params"));

    m.def("kink_audit",
          [](const FieldState& f, const PhenotypeSet& p, const GridSpec& g, double c) {
              py::list out;
              for (const auto& k : harness::kink_audit(f, p, g, c)) out.append(to_python(io::to_json(k)));
              return out;
          },
          py::arg("fields"), py::arg("params"), py::arg("grid"), py::arg("c"));
    m.def("summarize",
          [](std::vector<FieldState> snapshots, const PhenotypeSet& p, const GridSpec& g, std::vector<double> levels,
             double fit_start, double fit_end, double threshold) {
              return to_python(io::to_json(harness::summarize(snapshots, p, g, levels, fit_start, fit_end, threshold)));
          },
          py::arg("snapshots"), py::arg("params"), py::arg("grid"), py::arg("levels"), py::arg("fit_start"),
          py::arg("fit_end"), py::arg("threshold"));
    m.def("simulate_pde",
          [](const RunConfig& c) {
              cli::PdeOutcome out;
              {
                  py::gil_scoped_release release;
                  out = cli::simulate_pde(c);
              }
              return py::make_tuple(out.outputs, to_python(io::to_json(out.summary)));
          },
          py::arg("config"), "Runs a config; returns (snapshots at the output times, summary dict).");
    m.def("predict", &cli::predict_from_config, py::arg("config"));
}
