#include "segwave/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace segwave::io {

namespace {

std::string g17(double v) { return fmt::format("{:.17g}", v); }

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError(fmt::format("cannot write {}", path.string()));
    return out;
}

json optional_list(const std::vector<std::optional<double>>& v) {
    json out = json::array();
    for (const auto& x : v) out.push_back(x ? json(*x) : json(nullptr));
    return out;
}

}  // namespace

std::string snapshots_csv(std::span<const FieldState> snapshots, const PhenotypeSet& params,
                          const GridSpec& grid) {
    std::string out = "time,x";
    for (std::size_t i = 0; i < params.count(); ++i) out += fmt::format(",n_{}", i + 1);
    out += ",p\n";
    for (const auto& s : snapshots) {
        if (s.phenotypes() != params.count() || s.cells() != grid.cells) {
            throw StructuralError("snapshot shape does not match the configuration");
        }
        const auto p = pressure(s, params);
        for (std::size_t j = 0; j < grid.cells; ++j) {
            out += g17(s.t);
            out += ',';
            out += g17(grid.x(j));
            for (const auto& n : s.n) {
                out += ',';
                out += g17(n[j]);
            }
            out += ',';
            out += g17(p[j]);
            out += '\n';
        }
    }
    return out;
}

void write_snapshots_csv(const std::filesystem::path& path, std::span<const FieldState> snapshots,
                         const PhenotypeSet& params, const GridSpec& grid) {
    write_text(path, snapshots_csv(snapshots, params, grid));
}

std::vector<FieldState> read_snapshots_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot read {}", path.string()));
    std::string line;
    if (!std::getline(in, line)) throw StructuralError(fmt::format("{} is empty", path.string()));
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    if (header.size() < 5 || header[0] != "time" || header[1] != "x" || header.back() != "p") {
        throw StructuralError(fmt::format("{}: header is not time,x,n_1..n_I,p", path.string()));
    }
    const std::size_t count = header.size() - 3;
    for (std::size_t i = 0; i < count; ++i) {
        if (header[i + 2] != fmt::format("n_{}", i + 1)) {
            throw StructuralError(fmt::format("{}: unexpected column '{}'", path.string(), header[i + 2]));
        }
    }

    std::vector<FieldState> out;
    std::size_t row = 1;
    std::vector<double> values;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        values.clear();
        const char* p = line.c_str();
        char* end = nullptr;
        for (;;) {
            values.push_back(std::strtod(p, &end));
            if (end == p) throw StructuralError(fmt::format("{}:{}: bad number", path.string(), row));
            if (*end != ',') break;
            p = end + 1;
        }
        if (values.size() != header.size()) {
            throw StructuralError(fmt::format("{}:{}: expected {} columns, got {}", path.string(), row,
                                              header.size(), values.size()));
        }
        if (out.empty() || values[0] != out.back().t || values[1] == 0.0) {
            FieldState s;
            s.t = values[0];
            s.n.resize(count);
            out.push_back(std::move(s));
        }
        auto& s = out.back();
        for (std::size_t i = 0; i < count; ++i) s.n[i].push_back(values[i + 2]);
    }
    for (const auto& s : out) {
        if (s.cells() != out.front().cells()) {
            throw StructuralError(fmt::format("{}: snapshots have different node counts", path.string()));
        }
    }
    return out;
}

void write_tracks_csv(const std::filesystem::path& path, const harness::RunSummary& summary) {
    std::string out = "time";
    for (const auto& tr : summary.tracks) out += fmt::format(",x_{}", tr.level);
    out += '\n';
    std::vector<double> times;
    for (const auto& tr : summary.tracks) {
        times.insert(times.end(), tr.t.begin(), tr.t.end());
        times.insert(times.end(), tr.omitted.begin(), tr.omitted.end());
    }
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    for (double t : times) {
        out += g17(t);
        for (const auto& tr : summary.tracks) {
            out += ',';
            const auto it = std::find(tr.t.begin(), tr.t.end(), t);
            if (it != tr.t.end()) out += g17(tr.x[static_cast<std::size_t>(it - tr.t.begin())]);
        }
        out += '\n';
    }
    write_text(path, out);
}

void write_error_csv(const std::filesystem::path& path, std::span<const double> times,
                     std::span<const std::vector<double>> errors, const GridSpec& grid) {
    std::string out = "time,x,error\n";
    for (std::size_t s = 0; s < times.size(); ++s) {
        for (std::size_t j = 0; j < errors[s].size(); ++j) {
            out += fmt::format("{},{},{}\n", g17(times[s]), g17(grid.x(j)), g17(errors[s][j]));
        }
    }
    write_text(path, out);
}

json to_json(const twa::WavePrediction& wave, const std::string& params_hash) {
    return json{{"c", wave.c},
                {"z", wave.z},
                {"p", wave.p},
                {"masses", wave.tail_masses},
                {"params_hash", params_hash},
                {"iterations", wave.iterations},
                {"residual", wave.residual},
                {"p_rear", wave.p_rear}};
}

json to_json(const harness::RunSummary& s) {
    json tracks = json::array();
    for (std::size_t k = 0; k < s.tracks.size(); ++k) {
        json t{{"level", s.tracks[k].level}, {"omitted", s.tracks[k].omitted}};
        if (k < s.fits.size()) {
            const auto& f = s.fits[k];
            t["fit"] = json{{"slope", f.slope},
                            {"intercept", f.intercept},
                            {"residual", f.residual},
                            {"slope_stderr", f.slope_stderr},
                            {"points", f.points}};
        }
        tracks.push_back(std::move(t));
    }
    return json{{"c_fit", s.c_fit},
                {"fit_window", {s.fit_start, s.fit_end}},
                {"tracks", tracks},
                {"initial_masses", s.initial_masses},
                {"final_masses", s.final_masses},
                {"mass_drift", s.mass_drift},
                {"endpoints", optional_list(s.endpoints)},
                {"support_threshold", s.threshold},
                {"max_overlap_cells", s.max_overlap},
                {"clipped_mass", s.clipped_mass},
                {"max_clip_fraction", s.max_clip_fraction}};
}

json to_json(const harness::KinkReport& r) {
    return json{{"interface", r.interface},
                {"valid", r.valid},
                {"position", r.position},
                {"slope_minus", r.slope_minus},
                {"slope_plus", r.slope_plus},
                {"residual_minus", r.residual_minus},
                {"residual_plus", r.residual_plus},
                {"slope_order", r.slope_order},
                {"density_minus", r.density_minus},
                {"density_plus", r.density_plus},
                {"jump_ratio", r.jump_ratio},
                {"pressure", r.pressure}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
    if (!out) throw ConfigError(fmt::format("write to {} failed", path.string()));
}

void write_json(const std::filesystem::path& path, const json& value) {
    write_text(path, value.dump(2) + "\n");
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot read {}", path.string()));
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

std::string params_hash(const PhenotypeSet& params) {
    std::string text;
    for (const auto* v : {&params.alpha, &params.mu, &params.omega}) {
        for (double x : *v) text += g17(x) + ",";
        text += ";";
    }
    text += g17(params.p_bar);
    return sha256_hex(text);
}

}  // namespace segwave::io
