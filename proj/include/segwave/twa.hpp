#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "segwave/core.hpp"
#include "segwave/error.hpp"

namespace segwave::twa {

// Mass arguments named `tail` hold M_2..M_I (I-1 entries) in phenotype order.

/// Travelling-wave prediction in the wave frame, front of phenotype 1 at z = 0.
struct WavePrediction {
    double c = 0.0;
    std::vector<double> z;           ///< z_1 = 0 < z_2 < ... < z_I
    std::vector<double> p;           ///< p(z_1) > ... > p(z_I) = 0
    std::vector<double> tail_masses; ///< M_2..M_I
    std::size_t iterations = 0;      ///< bisection iterations (0 for closed-form use)
    double residual = 0.0;           ///< |p(0-) - p(0+)| at the returned c
    double p_rear = 0.0;             ///< p(0-) from the rear problem
};

/// Sum_{j>=2} omega_j M_j / mu_j.
double weighted_mass(std::span<const double> tail, const PhenotypeSet& params);

/// c = p0^2 / (2 sum_{j>=2} omega_j M_j / mu_j).
double speed_from_p0(double p0, std::span<const double> tail, const PhenotypeSet& params);

/// p(0+) = sqrt(2 c sum_{j>=2} omega_j M_j / mu_j).
double front_pressure(double c, std::span<const double> tail, const PhenotypeSet& params);

/// p(z_1), ..., p(z_{I-1}).
std::vector<double> interface_pressures(double c, std::span<const double> tail,
                                        const PhenotypeSet& params);

/// z_2, ..., z_I.
std::vector<double> interface_positions(double c, std::span<const double> tail,
                                        const PhenotypeSet& params);

/// omega_i / omega_{i+1}: predicted n_{i+1}(z_i+)/n_i(z_i-).
std::vector<double> density_jump_ratios(const PhenotypeSet& params);

/// Prediction for a given speed, assembled from the closed-form relations.
WavePrediction assemble(double c, std::span<const double> tail, const PhenotypeSet& params);

/// Piecewise-linear pressure ahead of z = 0 (0 beyond z_I). Slope on
/// (z_{i-1}, z_i) is -c/mu_i.
double pressure_ahead(const WavePrediction& wave, const PhenotypeSet& params, double z);

struct ShootingNumerics {
    double start_offset = 1e-6;  ///< rear start at p = (1 - start_offset) p_bar
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    double z_span = 1e4;         ///< give up past this distance from the start
    double p_floor = 0.0;        ///< inadmissible once p drops below; 0 means 1e-3 p_bar
};

struct RearOdeSolution {
    double c = 0.0;
    bool admissible = false;  ///< slope condition met before hitting the floor
    double p_front = 0.0;     ///< p(0-), 0 when inadmissible
    std::vector<double> z;    ///< sample positions, ending at 0
    std::vector<double> p;    ///< p at the samples, decreasing
    std::size_t steps = 0;
};

/// Rear problem -c p' - mu_1 (p p')' = alpha_1 G(p) p on z < 0 with
/// p(-inf) = p_bar and p'(0-) = -c/mu_1. Integrates forward from the
/// unstable manifold of p = p_bar and stops where the slope condition holds.
RearOdeSolution shoot_rear(double c, const PhenotypeSet& params,
                           const ShootingNumerics& numerics = {});

struct BisectionOptions {
    double c_low = 1e-3;
    double c_high = 10.0;
    double tol_fraction = 1e-4;  ///< residual tolerance as a fraction of p_bar
    std::size_t max_iterations = 200;
};

/// Speed from matching p(0-) (decreasing in c) to p(0+) (increasing in c).
/// Throws ConfigError when mobilities are not increasing or alpha_1 = 0, and
/// ConvergenceError when the bracket does not straddle the root.
WavePrediction solve_wave(std::span<const double> tail, const PhenotypeSet& params,
                          const BisectionOptions& bisection = {},
                          const ShootingNumerics& numerics = {});

}  // namespace segwave::twa
