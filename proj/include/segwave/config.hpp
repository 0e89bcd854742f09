#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "segwave/core.hpp"
#include "segwave/ibm.hpp"
#include "segwave/pde.hpp"
#include "segwave/twa.hpp"

namespace segwave {

struct RunControl {
    double t_end = 150.0;
    std::vector<double> snapshot_times;  ///< written to snapshots.csv
    double track_interval = 1.0;         ///< cadence of the measurement snapshots
    std::vector<double> levels{0.2, 0.4, 0.6};
    double fit_start = -1.0;  ///< negative: t_end / 3
    double fit_end = -1.0;    ///< negative: t_end
    double support_threshold = 1e-8;  ///< PDE, relative to the peak initial density
    double ibm_support_cells = 1.0;   ///< IBM support: at least this many cells per site
    std::uint64_t seed = 1;
    std::size_t replicates = 1;
    ibm::Sampler sampler = ibm::Sampler::aggregated;
    pde::SchemeOptions scheme;
    twa::BisectionOptions bisection;

    double resolved_fit_start() const { return fit_start < 0.0 ? t_end / 3.0 : fit_start; }
    double resolved_fit_end() const { return fit_end < 0.0 ? t_end : fit_end; }
};

struct RunConfig {
    PhenotypeSet params;
    GridSpec grid;
    InitialCondition initial;
    RunControl run;

    /// Times at which the runs keep snapshots: the requested output times
    /// merged with the tracking cadence, sorted and deduplicated.
    std::vector<double> measurement_times() const;
    double peak_initial_density() const;
};

/// Parses the sectioned key/value format ([phenotypes], [grid], [initial],
/// [run], [twa]). Lists are comma separated. Throws ConfigError on unknown
/// sections or keys, missing keys, or invalid values.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical text of a resolved config; parse_config(canonical(c)) == c.
std::string canonical(const RunConfig& config);

/// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::string_view text);

/// Hex SHA-256 of the canonical text.
std::string config_hash(const RunConfig& config);

/// Directory holding preset files: $SEGWAVE_PRESET_DIR or the built-in path.
std::filesystem::path preset_dir();
std::filesystem::path preset_path(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace segwave
