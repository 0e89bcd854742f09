#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "segwave/core.hpp"
#include "segwave/error.hpp"

namespace segwave::harness {

/// Level-set positions over time; snapshots where the level is absent are
/// listed in `omitted`.
struct Track {
    double level = 0.0;
    std::vector<double> t;
    std::vector<double> x;
    std::vector<double> omitted;
};

/// Rightmost crossing of level * p_bar in one pressure array, by linear
/// interpolation between nodes; nullopt when the level is never reached.
std::optional<double> level_crossing(std::span<const double> p, double dx, double value);

Track track_level(std::span<const FieldState> snapshots, const PhenotypeSet& params,
                  const GridSpec& grid, double level);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;      ///< root-mean-square deviation from the line
    double slope_stderr = 0.0;
    std::size_t points = 0;
};

/// Least-squares line through the track points with t in [t_a, t_b].
/// Throws DomainError for fewer than three points.
LineFit fit_speed(const Track& track, double t_a, double t_b);

/// Position of the rightmost node with n > threshold.
std::optional<double> support_endpoint(std::span<const double> n, double threshold, double dx);

/// Rightmost support endpoint of every phenotype; absent phenotypes are nullopt.
std::vector<std::optional<double>> support_endpoints(const FieldState& fields, double threshold,
                                                     double dx);

/// Largest number of nodes where two phenotypes both exceed the threshold.
std::size_t support_overlap(const FieldState& fields, double threshold);
std::size_t segregation_overlap(std::span<const FieldState> snapshots, double threshold);

struct PressureComparison {
    std::vector<double> error;       ///< |p_a - p_b| / p_bar per node
    std::vector<double> interfaces;  ///< union of both inputs' interface positions
    double near_max = 0.0;           ///< max error within `near_cells` of an interface
    double far_max = 0.0;            ///< max error elsewhere
};

/// Pointwise relative pressure error between two runs on the same grid.
/// Interfaces are the support endpoints of each phenotype at the given
/// thresholds (one per input).
PressureComparison compare_pressure(const FieldState& a, const FieldState& b,
                                    const PhenotypeSet& params, const GridSpec& grid,
                                    double threshold_a, double threshold_b,
                                    std::size_t near_cells = 5);

/// Position between phenotypes i and i+1 where omega_i n_i = omega_{i+1} n_{i+1},
/// searched outward from the last node of phenotype i's dominance.
std::optional<double> dominance_crossing(const FieldState& fields, const PhenotypeSet& params,
                                         const GridSpec& grid, std::size_t i);

struct OneSided {
    double slope = 0.0;  ///< at the evaluation point
    double value = 0.0;  ///< at the evaluation point
};

/// Least-squares quadratic through `nodes` consecutive nodes starting at
/// `anchor` and extending in `direction` (-1 left, +1 right), evaluated at x.
/// Fitting across both parities averages out odd-even oscillations.
OneSided one_sided(std::span<const double> v, std::size_t anchor, int direction,
                   std::size_t nodes, double dx, double x);

struct KinkReport {
    std::size_t interface = 0;  ///< 1-based: between phenotypes i and i+1
    bool valid = false;         ///< false when the stencil leaves the domain
    double position = 0.0;
    double slope_minus = 0.0;
    double slope_plus = 0.0;
    double residual_minus = 0.0;  ///< |mu_i s- + c| / c
    double residual_plus = 0.0;   ///< |mu_{i+1} s+ + c| / c
    bool slope_order = false;     ///< |s+| < |s-|
    double density_minus = 0.0;   ///< n_i(X_i-)
    double density_plus = 0.0;    ///< n_{i+1}(X_i+)
    double jump_ratio = 0.0;      ///< density_plus / density_minus
    double pressure = 0.0;        ///< mean of the two one-sided pressure values
};

/// One-sided slopes, densities and pressure at each interior interface,
/// located by dominance crossing. Fits start `margin` nodes away from the
/// node below the crossing and span `nodes` nodes.
std::vector<KinkReport> kink_audit(const FieldState& fields, const PhenotypeSet& params,
                                   const GridSpec& grid, double c, std::size_t margin = 2,
                                   std::size_t nodes = 10);

/// Measurements of one run, taken from snapshots at the tracking cadence.
struct RunSummary {
    std::vector<Track> tracks;  ///< one per level, in the given order
    std::vector<LineFit> fits;  ///< speed fit of each track
    double c_fit = 0.0;         ///< slope of the first track
    double fit_start = 0.0;
    double fit_end = 0.0;
    std::vector<double> initial_masses;
    std::vector<double> final_masses;
    std::vector<double> mass_drift;  ///< relative change, 0 for zero initial mass
    std::vector<std::optional<double>> endpoints;  ///< X_i at the last snapshot
    double threshold = 0.0;
    std::size_t max_overlap = 0;  ///< over all snapshots and pairs
    double clipped_mass = 0.0;
    double max_clip_fraction = 0.0;
};

/// Tracks, speed fits on [fit_start, fit_end], masses, endpoints and overlap.
/// The speed fit is skipped (fits left empty) when a track has fewer than
/// three points in the window.
RunSummary summarize(std::span<const FieldState> snapshots, const PhenotypeSet& params,
                     const GridSpec& grid, std::span<const double> levels, double fit_start,
                     double fit_end, double threshold);

}  // namespace segwave::harness
