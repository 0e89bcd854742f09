#include "segwave/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#ifndef SEGWAVE_VERSION
#define SEGWAVE_VERSION "unknown"
#endif

namespace segwave::cli {

namespace fs = std::filesystem;
using io::json;

unsigned thread_count() {
    if (const char* env = std::getenv("SEGWAVE_THREADS"); env && *env) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (*end != '\0' || v < 1) {
            throw ConfigError(fmt::format("SEGWAVE_THREADS='{}' is not a positive integer", env));
        }
        return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

std::size_t nearest_index(const std::vector<double>& times, double t) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (std::abs(times[k] - t) < std::abs(times[best] - t)) best = k;
    }
    return best;
}

template <class Snapshots>
std::vector<FieldState> pick_outputs(const RunConfig& config, const std::vector<double>& times,
                                     const Snapshots& snapshots) {
    std::vector<FieldState> out;
    for (double t : config.run.snapshot_times) out.push_back(snapshots[nearest_index(times, t)]);
    return out;
}

}  // namespace

double ibm_threshold(const RunConfig& config) {
    // n > threshold holds exactly for counts >= ibm_support_cells.
    return (config.run.ibm_support_cells - 0.5) / config.grid.dx;
}

double pde_threshold(const RunConfig& config) {
    return config.run.support_threshold * config.peak_initial_density();
}

PdeOutcome simulate_pde(const RunConfig& config) {
    const auto& run = config.run;
    const auto initial = build_initial(config.initial, config.grid, config.params);
    const auto times = config.measurement_times();
    auto traj = pde::run(initial, config.params, config.grid, run.t_end, times, run.scheme);

    PdeOutcome out;
    out.steps = traj.steps;
    out.outputs = pick_outputs(config, times, traj.snapshots);
    out.summary = harness::summarize(traj.snapshots, config.params, config.grid, run.levels,
                                     run.resolved_fit_start(), run.resolved_fit_end(),
                                     pde_threshold(config));
    out.summary.clipped_mass = traj.clipped_mass;
    out.summary.max_clip_fraction = traj.max_clip_fraction;
    out.measurements = std::move(traj.snapshots);
    return out;
}

IbmOutcome simulate_ibm(const RunConfig& config, unsigned threads) {
    const auto& run = config.run;
    if (!(config.grid.tau > 0.0)) throw ConfigError("[grid] tau must be > 0 for the lattice model");
    const auto model = ibm::Model::from_mobilities(config.params, config.grid, run.sampler);
    const auto initial = ibm::init_lattice(config.initial, config.grid, config.params);
    const auto times = config.measurement_times();

    IbmOutcome out;
    out.replicates = ibm::run_ensemble(model, initial, run.seed, run.replicates, run.t_end, times, threads);
    out.measurements = ibm::ensemble_average(out.replicates, config.grid.dx, config.grid.tau);
    out.outputs = pick_outputs(config, times, out.measurements);
    out.summary = harness::summarize(out.measurements, config.params, config.grid, run.levels,
                                     run.resolved_fit_start(), run.resolved_fit_end(),
                                     ibm_threshold(config));
    return out;
}

std::vector<double> initial_tail_masses(const RunConfig& config) {
    const auto initial = build_initial(config.initial, config.grid, config.params);
    std::vector<double> tail;
    for (std::size_t i = 1; i < initial.phenotypes(); ++i) tail.push_back(mass(initial.n[i], config.grid.dx));
    return tail;
}

twa::WavePrediction predict_from_config(const RunConfig& config) {
    return twa::solve_wave(initial_tail_masses(config), config.params, config.run.bisection);
}

MeasuredPrediction predict_from_snapshot(const RunConfig& config, const FieldState& snapshot,
                                         double c_fit) {
    MeasuredPrediction out;
    out.kinks = harness::kink_audit(snapshot, config.params, config.grid, c_fit > 0.0 ? c_fit : 1.0);
    if (out.kinks.empty() || !out.kinks.front().valid) {
        throw NumericalError("cannot locate the interface behind phenotype 1 in the snapshot");
    }
    out.p0 = out.kinks.front().pressure;
    std::vector<double> tail;
    for (std::size_t i = 1; i < snapshot.phenotypes(); ++i) tail.push_back(mass(snapshot.n[i], config.grid.dx));
    const double c = twa::speed_from_p0(out.p0, tail, config.params);
    out.wave = twa::assemble(c, tail, config.params);
    return out;
}

namespace {

struct Common {
    std::string config;
    std::string preset;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> replicates;
};

void add_common(CLI::App* sub, Common& c, bool with_ensemble) {
    sub->add_option("--config", c.config, "Configuration file");
    sub->add_option("--preset", c.preset, "Shipped preset name (e.g. fig3-pde)");
    sub->add_option("--out", c.out, "Output directory");
    if (with_ensemble) {
        sub->add_option("--seed", c.seed, "Base seed; replicate r uses seed + r");
        sub->add_option("--replicates", c.replicates, "Number of replicates");
    }
}

std::optional<RunConfig> resolve(const Common& c) {
    if (!c.config.empty() && !c.preset.empty()) throw ConfigError("give --config or --preset, not both");
    std::optional<RunConfig> config;
    if (!c.config.empty()) config = load_config(c.config);
    if (!c.preset.empty()) config = load_config(preset_path(c.preset));
    if (config) {
        if (c.seed) config->run.seed = *c.seed;
        if (c.replicates) {
            if (*c.replicates == 0) throw ConfigError("--replicates must be >= 1");
            config->run.replicates = *c.replicates;
        }
    }
    return config;
}

RunConfig need(const Common& c) {
    auto config = resolve(c);
    if (!config) throw ConfigError("a configuration is required: pass --config FILE or --preset NAME");
    return *config;
}

fs::path out_dir(const Common& c, const char* command) {
    return c.out.empty() ? fs::path(fmt::format("segwave_{}", command)) : fs::path(c.out);
}

std::vector<double> times_of(const std::vector<FieldState>& snapshots) {
    std::vector<double> t;
    for (const auto& s : snapshots) t.push_back(s.t);
    return t;
}

json manifest(const char* command, const RunConfig& config, std::vector<std::uint64_t> seeds,
              const std::vector<FieldState>& outputs, double seconds) {
    return json{{"command", command},
                {"version", SEGWAVE_VERSION},
                {"config_hash", config_hash(config)},
                {"params_hash", io::params_hash(config.params)},
                {"seeds", seeds},
                {"replicates", config.run.replicates},
                {"rng", std::string(ibm::RngStream::algorithm)},
                {"requested_times", config.run.snapshot_times},
                {"snapshot_times", times_of(outputs)},
                {"elapsed_seconds", seconds}};
}

double elapsed(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

int cmd_pde(const Common& c) {
    const auto start = std::chrono::steady_clock::now();
    const auto config = need(c);
    const auto dir = out_dir(c, "pde");
    const auto result = simulate_pde(config);
    io::write_text(dir / "config.ini", canonical(config));
    io::write_snapshots_csv(dir / "snapshots.csv", result.outputs, config.params, config.grid);
    io::write_tracks_csv(dir / "tracks.csv", result.summary);
    io::write_json(dir / "summary.json", io::to_json(result.summary));
    auto m = manifest("pde", config, {}, result.outputs, elapsed(start));
    m["steps"] = result.steps;
    io::write_json(dir / "manifest.json", m);
    std::cout << fmt::format("pde: c_fit = {:.6g}, {} steps, output in {}\n", result.summary.c_fit,
                             result.steps, dir.string());
    return 0;
}

int cmd_ibm(const Common& c) {
    const auto start = std::chrono::steady_clock::now();
    const auto config = need(c);
    const auto dir = out_dir(c, "ibm");
    const unsigned threads = thread_count();
    const auto result = simulate_ibm(config, threads);

    io::write_text(dir / "config.ini", canonical(config));
    std::vector<std::uint64_t> seeds;
    const auto times = config.measurement_times();
    for (const auto& rep : result.replicates) {
        seeds.push_back(rep.seed);
        std::vector<FieldState> fields;
        for (double t : config.run.snapshot_times) {
            fields.push_back(rep.snapshots[nearest_index(times, t)].densities(config.grid.dx, config.grid.tau));
        }
        io::write_snapshots_csv(dir / "replicates" / fmt::format("seed_{}.csv", rep.seed), fields,
                                config.params, config.grid);
    }
    io::write_snapshots_csv(dir / "snapshots.csv", result.outputs, config.params, config.grid);
    io::write_tracks_csv(dir / "tracks.csv", result.summary);
    io::write_json(dir / "summary.json", io::to_json(result.summary));
    auto m = manifest("ibm", config, seeds, result.outputs, elapsed(start));
    m["threads"] = threads;
    m["sampler"] = config.run.sampler == ibm::Sampler::aggregated ? "aggregated" : "per_cell";
    io::write_json(dir / "manifest.json", m);
    std::cout << fmt::format("ibm: {} replicates, c_fit = {:.6g}, output in {}\n",
                             config.run.replicates, result.summary.c_fit, dir.string());
    return 0;
}

struct RunDir {
    RunConfig config;
    json manifest;
    json summary;
    std::vector<FieldState> snapshots;
    double threshold = 0.0;
};

RunDir load_run(const fs::path& dir) {
    RunDir r;
    r.config = load_config(dir / "config.ini");
    r.manifest = io::read_json(dir / "manifest.json");
    r.summary = io::read_json(dir / "summary.json");
    r.snapshots = io::read_snapshots_csv(dir / "snapshots.csv");
    if (r.snapshots.empty()) throw StructuralError(fmt::format("{} holds no snapshots", dir.string()));
    for (const auto& s : r.snapshots) {
        if (s.phenotypes() != r.config.params.count() || s.cells() != r.config.grid.cells) {
            throw StructuralError(fmt::format("{}: snapshots do not match config.ini", dir.string()));
        }
    }
    r.threshold = r.manifest.value("command", "") == "ibm" ? ibm_threshold(r.config) : pde_threshold(r.config);
    return r;
}

json prediction_json(const twa::WavePrediction& wave, const PhenotypeSet& params,
                     const std::string& mode) {
    auto j = io::to_json(wave, io::params_hash(params));
    j["mode"] = mode;
    j["density_jump_ratios"] = twa::density_jump_ratios(params);
    return j;
}

int cmd_predict(const Common& c, const std::string& run_dir, std::optional<double> p0,
                const std::vector<double>& masses) {
    const auto dir = out_dir(c, "predict");
    json out;
    if (!run_dir.empty()) {
        if (p0 || !masses.empty()) throw ConfigError("--run excludes --p0 and --masses");
        const auto run = load_run(run_dir);
        if (!run.config.params.mobility_ordered()) {
            throw ConfigError("mobilities must increase strictly (mu_1 < ... < mu_I) for predictions");
        }
        const double c_fit = run.summary.value("c_fit", 0.0);
        const auto m = predict_from_snapshot(run.config, run.snapshots.back(), c_fit);
        out = prediction_json(m.wave, run.config.params, "run");
        out["measured"] = json{{"run", run_dir}, {"time", run.snapshots.back().t}, {"p0", m.p0}, {"c_fit", c_fit}};
    } else if (p0 || !masses.empty()) {
        if (!p0 || masses.empty()) throw ConfigError("measured mode needs both --p0 and --masses");
        const auto config = need(c);
        const double speed = twa::speed_from_p0(*p0, masses, config.params);
        out = prediction_json(twa::assemble(speed, masses, config.params), config.params, "measured");
        out["measured"] = json{{"p0", *p0}};
    } else {
        const auto config = need(c);
        out = prediction_json(predict_from_config(config), config.params, "solve");
    }
    io::write_json(dir / "prediction.json", out);
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_compare(const std::string& a_dir, const std::string& b_dir, const std::string& twa_file,
                const std::string& out) {
    if (a_dir.empty()) throw ConfigError("compare needs --pde DIR");
    const fs::path dir = out.empty() ? fs::path("segwave_compare") : fs::path(out);
    const auto a = load_run(a_dir);
    const auto& params = a.config.params;
    const auto& grid = a.config.grid;
    json report;
    report["pde"] = json{{"dir", a_dir}, {"summary", a.summary}, {"config_hash", a.manifest.value("config_hash", "")}};

    const auto& last = a.snapshots.back();
    const double c_fit = a.summary.value("c_fit", 0.0);
    json kinks = json::array();
    const auto audit = harness::kink_audit(last, params, grid, c_fit > 0.0 ? c_fit : 1.0);
    const auto predicted_jumps = twa::density_jump_ratios(params);
    for (const auto& k : audit) {
        auto j = io::to_json(k);
        j["predicted_jump_ratio"] = predicted_jumps[k.interface - 1];
        kinks.push_back(std::move(j));
    }
    report["kink_audit"] = json{{"time", last.t}, {"c_fit", c_fit}, {"interfaces", kinks}};

    twa::WavePrediction wave;
    std::string source;
    if (!twa_file.empty()) {
        const auto j = io::read_json(twa_file);
        wave.c = j.at("c").get<double>();
        wave.z = j.at("z").get<std::vector<double>>();
        source = twa_file;
    } else {
        wave = predict_from_snapshot(a.config, last, c_fit).wave;
        source = "measured from the final snapshot";
    }
    if (wave.z.size() != params.count()) {
        throw StructuralError("prediction and run have different phenotype counts");
    }
    const auto endpoints = harness::support_endpoints(last, a.threshold, grid.dx);
    json zrows = json::array();
    for (std::size_t i = 1; i < params.count(); ++i) {
        json row{{"phenotype", i + 1}, {"Z_a", wave.z[i]}};
        if (endpoints[0] && endpoints[i]) {
            const double z = *endpoints[i] - *endpoints[0];
            row["Z"] = z;
            row["relative_error"] = std::abs(z - wave.z[i]) / wave.z[i];
        }
        zrows.push_back(std::move(row));
    }
    report["interfaces"] = json{{"prediction", source}, {"c_a", wave.c}, {"rows", zrows}};

    if (!b_dir.empty()) {
        const auto b = load_run(b_dir);
        if (b.config.params.count() != params.count() || b.config.grid.cells != grid.cells ||
            b.config.grid.dx != grid.dx) {
            throw StructuralError("runs use different phenotype counts or grids");
        }
        const auto ta = a.manifest.at("requested_times").get<std::vector<double>>();
        const auto tb = b.manifest.at("requested_times").get<std::vector<double>>();
        std::vector<double> times;
        std::vector<std::vector<double>> errors;
        json rows = json::array();
        for (std::size_t ia = 0; ia < ta.size() && ia < a.snapshots.size(); ++ia) {
            for (std::size_t ib = 0; ib < tb.size() && ib < b.snapshots.size(); ++ib) {
                if (std::abs(ta[ia] - tb[ib]) > 1e-9 * std::max(1.0, ta[ia])) continue;
                const auto cmp = harness::compare_pressure(a.snapshots[ia], b.snapshots[ib], params,
                                                           grid, a.threshold, b.threshold);
                times.push_back(ta[ia]);
                errors.push_back(cmp.error);
                rows.push_back(json{{"time", ta[ia]},
                                    {"near_interface_max", cmp.near_max},
                                    {"far_max", cmp.far_max},
                                    {"interfaces", cmp.interfaces}});
            }
        }
        if (times.empty()) throw StructuralError("the two runs share no snapshot times");
        io::write_error_csv(dir / "pressure_error.csv", times, errors, grid);
        const double cb = b.summary.value("c_fit", 0.0);
        report["other"] = json{{"dir", b_dir}, {"summary", b.summary}, {"config_hash", b.manifest.value("config_hash", "")}};
        report["pressure_error"] = rows;
        report["speeds"] = json{{"pde", c_fit}, {"other", cb},
                                {"relative_difference", c_fit != 0.0 ? std::abs(cb - c_fit) / std::abs(c_fit) : 0.0}};
    }
    io::write_json(dir / "report.json", report);
    std::cout << fmt::format("compare: report in {}\n", (dir / "report.json").string());
    return 0;
}

}  // namespace

int main_entry(int argc, char** argv) {
    CLI::App app{"Segregated travelling waves: lattice model, PDE solver and wave analytics"};
    app.set_version_flag("--version", SEGWAVE_VERSION);
    app.require_subcommand(1);

    Common ibm_opts, pde_opts, predict_opts;
    auto* ibm_cmd = app.add_subcommand("ibm", "Run the stochastic lattice model");
    add_common(ibm_cmd, ibm_opts, true);
    auto* pde_cmd = app.add_subcommand("pde", "Run the finite-volume PDE solver");
    add_common(pde_cmd, pde_opts, false);

    auto* predict_cmd = app.add_subcommand("predict", "Travelling-wave prediction");
    add_common(predict_cmd, predict_opts, false);
    std::string run_dir;
    std::optional<double> p0;
    std::vector<double> masses;
    predict_cmd->add_option("--run", run_dir, "PDE run directory to measure p(0) and masses from");
    predict_cmd->add_option("--p0", p0, "Measured front pressure p(0)");
    predict_cmd->add_option("--masses", masses, "Masses M_2..M_I")->delimiter(',');

    auto* compare_cmd = app.add_subcommand("compare", "Cross-validate runs and predictions");
    std::string a_dir, b_dir, twa_file, compare_out;
    compare_cmd->add_option("--pde", a_dir, "Reference run directory")->required();
    compare_cmd->add_option("--ibm", b_dir, "Second run directory (lattice ensemble or another PDE run)");
    compare_cmd->add_option("--twa", twa_file, "prediction.json to compare interface positions with");
    compare_cmd->add_option("--out", compare_out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*ibm_cmd) return cmd_ibm(ibm_opts);
        if (*pde_cmd) return cmd_pde(pde_opts);
        if (*predict_cmd) return cmd_predict(predict_opts, run_dir, p0, masses);
        if (*compare_cmd) return cmd_compare(a_dir, b_dir, twa_file, compare_out);
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const io::json::exception& e) {
        std::cerr << "configuration error: malformed run files: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

}  // namespace segwave::cli
