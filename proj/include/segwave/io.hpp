#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "segwave/config.hpp"
#include "segwave/core.hpp"
#include "segwave/harness.hpp"
#include "segwave/twa.hpp"

namespace segwave::io {

using nlohmann::json;

/// CSV with header time,x,n_1..n_I,p; one row per (snapshot, node); 17
/// significant digits.
void write_snapshots_csv(const std::filesystem::path& path, std::span<const FieldState> snapshots,
                         const PhenotypeSet& params, const GridSpec& grid);
std::string snapshots_csv(std::span<const FieldState> snapshots, const PhenotypeSet& params,
                          const GridSpec& grid);

/// Reads a snapshot CSV back. Throws StructuralError when the header or the
/// node layout is inconsistent.
std::vector<FieldState> read_snapshots_csv(const std::filesystem::path& path);

/// time,x_<level>... for each track; empty cells where a level is absent.
void write_tracks_csv(const std::filesystem::path& path, const harness::RunSummary& summary);

/// x,error per node; one block per snapshot with a time column.
void write_error_csv(const std::filesystem::path& path, std::span<const double> times,
                     std::span<const std::vector<double>> errors, const GridSpec& grid);

json to_json(const twa::WavePrediction& wave, const std::string& params_hash);
json to_json(const harness::RunSummary& summary);
json to_json(const harness::KinkReport& report);

void write_json(const std::filesystem::path& path, const json& value);
json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Hex SHA-256 of the phenotype parameters (canonical [phenotypes] text).
std::string params_hash(const PhenotypeSet& params);

}  // namespace segwave::io
