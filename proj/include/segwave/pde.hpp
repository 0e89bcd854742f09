#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "segwave/core.hpp"
#include "segwave/error.hpp"

namespace segwave::pde {

/// Ospre limiter 1.5(r^2 + r)/(r^2 + r + 1), clipped to 0 for r <= 0.
double ospre(double r) noexcept;

/// Interface values for J cells. Index k of each array is the interface
/// between cells k-1 and k, so both arrays have J+1 entries; the two outer
/// interfaces carry the adjacent cell value.
struct Reconstruction {
    std::vector<double> left;   ///< n^L, limited extrapolation from cell k-1
    std::vector<double> right;  ///< n^R, limited extrapolation from cell k
};

/// MUSCL reconstruction with the ospre limiter. Cells 0 and J-1 are
/// reconstructed piecewise-constant; near-flat differences (below 1e-14 of
/// the array's magnitude) give a zero slope.
Reconstruction muscl_reconstruct(std::span<const double> values);

/// Interface pressure gradient 0.5(grad p^L + grad p^R), where p^{L/R} are the
/// omega-weighted sums of the reconstructed densities, differentiated across
/// interfaces with central differences (one-sided at the two ends).
std::vector<double> interface_pressure_gradient(std::span<const Reconstruction> recon,
                                                const PhenotypeSet& params, double dx);
std::vector<double> interface_pressure_gradient(const FieldState& fields,
                                                const PhenotypeSet& params, const GridSpec& grid);

/// Upwind flux mu n^L max(0, -grad p) + mu n^R min(0, -grad p); zero at both
/// outer interfaces.
std::vector<double> upwind_flux(const Reconstruction& recon, std::span<const double> gradient,
                                double mu);

struct SchemeOptions {
    double cfl_safety = 0.9;
    double dt_max = 1e-2;
    std::size_t max_steps = 100'000'000;
};

/// safety * dx / (max mu * max |grad p|), capped at dt_max (and equal to it
/// when the gradient vanishes).
double cfl_dt(std::span<const double> gradient, const PhenotypeSet& params, double dx,
              double safety, double dt_max);
double cfl_dt(const FieldState& fields, const PhenotypeSet& params, const GridSpec& grid,
              const SchemeOptions& options);

/// Scratch buffers reused across steps.
struct SchemeWork {
    std::vector<Reconstruction> recon;
    std::vector<double> gradient;
    std::vector<std::vector<double>> flux;
    std::vector<double> pressure;
    double dt = 0.0;
};

struct StepReport {
    double dt = 0.0;
    double clipped_mass = 0.0;  ///< mass removed by clipping negative densities
};

/// One forward-Euler step in place: conservative transport, then the reaction
/// factor (1 + dt alpha_i G(p^k)) with the step-start pressure, then clipping
/// of negative values. Throws NumericalError on non-finite densities.
StepReport step(FieldState& fields, const PhenotypeSet& params, const GridSpec& grid,
                const SchemeOptions& options, SchemeWork& work);

/// Copying convenience overload.
FieldState step(const FieldState& fields, const PhenotypeSet& params, const GridSpec& grid,
                const SchemeOptions& options = {});

struct Trajectory {
    std::vector<double> requested;  ///< requested snapshot times
    std::vector<FieldState> snapshots;  ///< each carries its actual time
    std::size_t steps = 0;
    double clipped_mass = 0.0;
    double max_clip_fraction = 0.0;  ///< worst per-step clipped mass / total mass
};

/// Adaptive-dt loop from `initial` until t >= t_end. Each snapshot is the first
/// state with t >= its requested time; no interpolation. Throws
/// NumericalError when options.max_steps is exceeded.
Trajectory run(FieldState initial, const PhenotypeSet& params, const GridSpec& grid, double t_end,
               std::span<const double> snapshot_times, const SchemeOptions& options = {});

}  // namespace segwave::pde
