#include "segwave/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <openssl/evp.h>

#ifndef SEGWAVE_PRESET_DIR
#define SEGWAVE_PRESET_DIR "presets"
#endif

namespace segwave {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>> kSchema = {
    {"phenotypes", {"alpha", "mu", "omega", "p_bar"}},
    {"grid", {"length", "dx", "tau"}},
    {"initial", {"amplitude", "decay", "boundaries"}},
    {"run",
     {"t_end", "snapshot_times", "snapshot_interval", "track_interval", "levels", "fit_start",
      "fit_end", "support_threshold", "ibm_support_cells", "seed", "replicates", "sampler",
      "cfl_safety", "dt_max", "max_steps"}},
    {"twa", {"c_low", "c_high", "tol_fraction", "max_iterations"}},
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ConfigError(fmt::format("{}: '{}' is not a number", key, raw));
    }
    if (used != s.size() || !std::isfinite(v)) {
        throw ConfigError(fmt::format("{}: '{}' is not a finite number", key, raw));
    }
    return v;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
        throw ConfigError(fmt::format("{}: '{}' is not a non-negative integer", key, raw));
    }
    try {
        return std::stoull(s);
    } catch (const std::exception&) {
        throw ConfigError(fmt::format("{}: '{}' is out of range", key, raw));
    }
}

std::vector<double> to_list(const std::string& key, const std::string& raw) {
    std::vector<double> out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, item));
    if (out.empty()) throw ConfigError(fmt::format("{}: empty list", key));
    return out;
}

class Reader {
public:
    explicit Reader(const pt::ptree& tree) : tree_(tree) {}

    std::optional<std::string> get(const std::string& section, const std::string& key) const {
        const auto sec = tree_.get_child_optional(section);
        if (!sec) return std::nullopt;
        const auto v = sec->get_optional<std::string>(key);
        if (!v) return std::nullopt;
        return *v;
    }
    std::string need(const std::string& section, const std::string& key) const {
        if (auto v = get(section, key)) return *v;
        throw ConfigError(fmt::format("missing key [{}] {}", section, key));
    }
    double number(const std::string& section, const std::string& key) const {
        return to_double(section + "." + key, need(section, key));
    }
    double number(const std::string& section, const std::string& key, double fallback) const {
        auto v = get(section, key);
        return v ? to_double(section + "." + key, *v) : fallback;
    }
    std::vector<double> list(const std::string& section, const std::string& key) const {
        return to_list(section + "." + key, need(section, key));
    }

private:
    const pt::ptree& tree_;
};

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) out += ", ";
        out += fmt::format("{:.17g}", v[k]);
    }
    return out;
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

std::vector<double> RunConfig::measurement_times() const {
    std::vector<double> t = run.snapshot_times;
    if (run.track_interval > 0.0) {
        const auto n = static_cast<std::size_t>(std::floor(run.t_end / run.track_interval + 1e-9));
        for (std::size_t k = 0; k <= n; ++k) {
            t.push_back(std::min(run.t_end, static_cast<double>(k) * run.track_interval));
        }
    }
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end(),
                        [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, b); }),
            t.end());
    return t;
}

double RunConfig::peak_initial_density() const {
    return *std::max_element(initial.amplitude.begin(), initial.amplitude.end());
}

RunConfig parse_config(const std::string& text) {
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(fmt::format("config syntax error: {}", e.what()));
    }
    for (const auto& [section, body] : tree) {
        const auto it = kSchema.find(section);
        if (it == kSchema.end() || body.empty()) {
            throw ConfigError(fmt::format("unknown section or top-level key '{}'", section));
        }
        for (const auto& [key, value] : body) {
            if (!it->second.count(key)) {
                throw ConfigError(fmt::format("unknown key [{}] {}", section, key));
            }
        }
    }
    const Reader r(tree);

    RunConfig c;
    c.params = PhenotypeSet::make(r.list("phenotypes", "alpha"), r.list("phenotypes", "mu"),
                                  r.list("phenotypes", "omega"), r.number("phenotypes", "p_bar"));
    c.grid = GridSpec::make(r.number("grid", "length"), r.number("grid", "dx"),
                            r.number("grid", "tau", 0.0));
    c.initial = InitialCondition::make(r.list("initial", "amplitude"), r.number("initial", "decay"),
                                       r.list("initial", "boundaries"));
    if (c.initial.amplitude.size() != c.params.count()) {
        throw ConfigError(fmt::format("[initial] has {} amplitudes for {} phenotypes",
                                      c.initial.amplitude.size(), c.params.count()));
    }
    if (c.initial.boundaries.front() != 0.0 ||
        std::abs(c.initial.boundaries.back() - c.grid.length) > 1e-12 * c.grid.length) {
        throw ConfigError("[initial] boundaries must start at 0 and end at the grid length");
    }

    auto& run = c.run;
    run.t_end = r.number("run", "t_end");
    if (!(run.t_end >= 0.0)) throw ConfigError("[run] t_end must be >= 0");
    const auto times = r.get("run", "snapshot_times");
    const auto interval = r.get("run", "snapshot_interval");
    if (times && interval) {
        throw ConfigError("[run] give either snapshot_times or snapshot_interval, not both");
    }
    if (times) {
        run.snapshot_times = to_list("run.snapshot_times", *times);
    } else {
        const double dt = interval ? to_double("run.snapshot_interval", *interval) : run.t_end;
        if (!(dt > 0.0) && run.t_end > 0.0) throw ConfigError("[run] snapshot_interval must be > 0");
        const auto n = dt > 0.0 ? static_cast<std::size_t>(std::floor(run.t_end / dt + 1e-9)) : 0;
        for (std::size_t k = 0; k <= n; ++k) run.snapshot_times.push_back(std::min(run.t_end, static_cast<double>(k) * dt));
    }
    for (std::size_t k = 0; k < run.snapshot_times.size(); ++k) {
        const double t = run.snapshot_times[k];
        if (t < 0.0 || t > run.t_end || (k > 0 && t < run.snapshot_times[k - 1])) {
            throw ConfigError("[run] snapshot_times must be non-decreasing within [0, t_end]");
        }
    }
    run.track_interval = r.number("run", "track_interval", run.track_interval);
    if (run.track_interval < 0.0) throw ConfigError("[run] track_interval must be >= 0");
    if (auto v = r.get("run", "levels")) run.levels = to_list("run.levels", *v);
    run.fit_start = r.number("run", "fit_start", run.fit_start);
    run.fit_end = r.number("run", "fit_end", run.fit_end);
    run.support_threshold = r.number("run", "support_threshold", run.support_threshold);
    run.ibm_support_cells = r.number("run", "ibm_support_cells", run.ibm_support_cells);
    if (!(run.support_threshold > 0.0) || !(run.ibm_support_cells > 0.0)) {
        throw ConfigError("[run] support thresholds must be > 0");
    }
    if (auto v = r.get("run", "seed")) run.seed = to_unsigned("run.seed", *v);
    if (auto v = r.get("run", "replicates")) run.replicates = to_unsigned("run.replicates", *v);
    if (run.replicates == 0) throw ConfigError("[run] replicates must be >= 1");
    if (auto v = r.get("run", "sampler")) {
        const auto s = trim(*v);
        if (s == "aggregated") {
            run.sampler = ibm::Sampler::aggregated;
        } else if (s == "per_cell") {
            run.sampler = ibm::Sampler::per_cell;
        } else {
            throw ConfigError(fmt::format("[run] sampler '{}' is not aggregated or per_cell", s));
        }
    }
    run.scheme.cfl_safety = r.number("run", "cfl_safety", run.scheme.cfl_safety);
    run.scheme.dt_max = r.number("run", "dt_max", run.scheme.dt_max);
    if (!(run.scheme.cfl_safety > 0.0 && run.scheme.cfl_safety < 1.0)) {
        throw ConfigError("[run] cfl_safety must lie in (0, 1)");
    }
    if (!(run.scheme.dt_max > 0.0)) throw ConfigError("[run] dt_max must be > 0");
    if (auto v = r.get("run", "max_steps")) run.scheme.max_steps = to_unsigned("run.max_steps", *v);

    run.bisection.c_low = r.number("twa", "c_low", run.bisection.c_low);
    run.bisection.c_high = r.number("twa", "c_high", run.bisection.c_high);
    run.bisection.tol_fraction = r.number("twa", "tol_fraction", run.bisection.tol_fraction);
    if (auto v = r.get("twa", "max_iterations")) {
        run.bisection.max_iterations = to_unsigned("twa.max_iterations", *v);
    }
    if (!(run.bisection.c_low > 0.0 && run.bisection.c_high > run.bisection.c_low)) {
        throw ConfigError("[twa] need 0 < c_low < c_high");
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot read config file {}", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string canonical(const RunConfig& c) {
    std::string out;
    auto line = [&](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
    out += "[phenotypes]\n";
    line("alpha", join(c.params.alpha));
    line("mu", join(c.params.mu));
    line("omega", join(c.params.omega));
    line("p_bar", num(c.params.p_bar));
    out += "\n[grid]\n";
    line("length", num(c.grid.length));
    line("dx", num(c.grid.dx));
    line("tau", num(c.grid.tau));
    out += "\n[initial]\n";
    line("amplitude", join(c.initial.amplitude));
    line("decay", num(c.initial.decay));
    line("boundaries", join(c.initial.boundaries));
    const auto& r = c.run;
    out += "\n[run]\n";
    line("t_end", num(r.t_end));
    line("snapshot_times", join(r.snapshot_times));
    line("track_interval", num(r.track_interval));
    line("levels", join(r.levels));
    line("fit_start", num(r.fit_start));
    line("fit_end", num(r.fit_end));
    line("support_threshold", num(r.support_threshold));
    line("ibm_support_cells", num(r.ibm_support_cells));
    line("seed", std::to_string(r.seed));
    line("replicates", std::to_string(r.replicates));
    line("sampler", r.sampler == ibm::Sampler::aggregated ? "aggregated" : "per_cell");
    line("cfl_safety", num(r.scheme.cfl_safety));
    line("dt_max", num(r.scheme.dt_max));
    line("max_steps", std::to_string(r.scheme.max_steps));
    out += "\n[twa]\n";
    line("c_low", num(r.bisection.c_low));
    line("c_high", num(r.bisection.c_high));
    line("tol_fraction", num(r.bisection.tol_fraction));
    line("max_iterations", std::to_string(r.bisection.max_iterations));
    return out;
}

std::string sha256_hex(std::string_view text) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int size = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &size, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    std::string hex;
    for (unsigned int k = 0; k < size; ++k) hex += fmt::format("{:02x}", digest[k]);
    return hex;
}

std::string config_hash(const RunConfig& config) { return sha256_hex(canonical(config)); }

std::filesystem::path preset_dir() {
    if (const char* env = std::getenv("SEGWAVE_PRESET_DIR"); env && *env) return env;
    return SEGWAVE_PRESET_DIR;
}

std::filesystem::path preset_path(const std::string& name) {
    const auto path = preset_dir() / (name + ".ini");
    if (!std::filesystem::exists(path)) {
        auto names = preset_names();
        std::string known;
        for (const auto& n : names) known += (known.empty() ? "" : ", ") + n;
        throw ConfigError(fmt::format("unknown preset '{}' (known: {})", name, known));
    }
    return path;
}

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(preset_dir(), ec)) {
        if (entry.path().extension() == ".ini") names.push_back(entry.path().stem().string());
    }
    std::sort(names.begin(), names.end());
    return names;
}

}  // namespace segwave
