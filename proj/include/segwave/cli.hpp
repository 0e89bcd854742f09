#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "segwave/config.hpp"
#include "segwave/harness.hpp"
#include "segwave/ibm.hpp"
#include "segwave/io.hpp"
#include "segwave/pde.hpp"
#include "segwave/twa.hpp"

namespace segwave::cli {

/// Worker threads from $SEGWAVE_THREADS, else the hardware concurrency.
unsigned thread_count();

/// Support thresholds on densities: a fraction of the peak initial density for
/// the PDE, and the density of ibm_support_cells - 1/2 cells for the lattice.
double pde_threshold(const RunConfig& config);
double ibm_threshold(const RunConfig& config);

struct PdeOutcome {
    std::vector<FieldState> measurements;  ///< at config.measurement_times()
    std::vector<FieldState> outputs;       ///< at config.run.snapshot_times
    harness::RunSummary summary;
    std::size_t steps = 0;
};

PdeOutcome simulate_pde(const RunConfig& config);

struct IbmOutcome {
    std::vector<ibm::Trajectory> replicates;  ///< at config.measurement_times()
    std::vector<FieldState> measurements;     ///< replicate means
    std::vector<FieldState> outputs;          ///< replicate means at the output times
    harness::RunSummary summary;
};

IbmOutcome simulate_ibm(const RunConfig& config, unsigned threads);

/// Masses M_2..M_I of the discretised initial condition.
std::vector<double> initial_tail_masses(const RunConfig& config);

/// Fully predictive: solve_wave with the initial-condition masses.
twa::WavePrediction predict_from_config(const RunConfig& config);

struct MeasuredPrediction {
    twa::WavePrediction wave;
    double p0 = 0.0;
    std::vector<harness::KinkReport> kinks;
};

/// c_a from the pressure measured at the phenotype-1 interface of a snapshot
/// and the snapshot's masses; positions from the closed-form relations.
MeasuredPrediction predict_from_snapshot(const RunConfig& config, const FieldState& snapshot,
                                         double c_fit);

/// Runs a subcommand line; returns the process exit code (0 success,
/// 2 configuration error, 3 numerical failure).
int main_entry(int argc, char** argv);

}  // namespace segwave::cli
