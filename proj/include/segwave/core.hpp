#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace segwave {

/// Per-phenotype parameters of the model and the homeostatic pressure.
///
/// Index 0 is the proliferative, least mobile phenotype. Construct through
/// `make`, which validates the invariants; the struct is immutable by
/// convention after that.
struct PhenotypeSet {
    std::vector<double> alpha;  ///< growth-rate scale, 1/time, >= 0
    std::vector<double> mu;     ///< mobility, length^2/(pressure*time), > 0
    std::vector<double> omega;  ///< pressure weight per unit density, > 0
    double p_bar = 0.0;         ///< homeostatic pressure, > 0

    static PhenotypeSet make(std::vector<double> alpha, std::vector<double> mu,
                             std::vector<double> omega, double p_bar);

    std::size_t count() const noexcept { return mu.size(); }

    /// alpha_1 > 0 and alpha_i = 0 for i >= 2.
    bool baseline_regime() const noexcept;

    /// mu_1 < mu_2 < ... < mu_I (required by the travelling-wave analytics).
    bool mobility_ordered() const noexcept;
};

/// Uniform 1-D grid on [0, length) with `cells` nodes at x_j = j*dx.
struct GridSpec {
    double length = 0.0;
    double dx = 0.0;
    std::size_t cells = 0;
    double tau = 0.0;  ///< IBM time-step; 0 when unused

    /// Throws ConfigError unless length/dx is an integer (to 1e-9 relative)
    /// and tau >= 0.
    static GridSpec make(double length, double dx, double tau = 0.0);

    double x(std::size_t j) const noexcept { return static_cast<double>(j) * dx; }
};

/// Segment-wise truncated Gaussians: n_i(0,x) = A_i exp(-B (x - s_i)^2) on [s_i, s_{i+1}).
struct InitialCondition {
    std::vector<double> amplitude;   ///< A_i
    double decay = 0.0;              ///< B
    std::vector<double> boundaries;  ///< s_0 = 0 < s_1 < ... < s_I = length

    static InitialCondition make(std::vector<double> amplitude, double decay,
                                 std::vector<double> boundaries);

    double density(std::size_t i, double x) const noexcept;
};

/// Continuum densities on the grid nodes at time t. Pressure is derived.
struct FieldState {
    std::vector<std::vector<double>> n;
    double t = 0.0;

    std::size_t phenotypes() const noexcept { return n.size(); }
    std::size_t cells() const noexcept { return n.empty() ? 0 : n.front().size(); }
};

/// p_j = sum_i omega_i n_{i,j}.
std::vector<double> pressure(std::span<const std::vector<double>> densities,
                             const PhenotypeSet& params);

inline std::vector<double> pressure(const FieldState& fields, const PhenotypeSet& params) {
    return pressure(std::span<const std::vector<double>>(fields.n), params);
}

/// G(p) = arctan((1 - p/p_bar)/10).
double growth(double p, double p_bar);

/// gamma_i = 2 tau p_bar mu_i / dx^2. Throws ConfigError when some gamma_i >= 1,
/// since a cell between two empty neighbours at pressure p_bar would then
/// have a total move probability of at least one.
std::vector<double> gamma_from_mu(const PhenotypeSet& params, const GridSpec& grid);

/// Inverse scaling map mu_i = gamma_i dx^2 / (2 tau p_bar).
std::vector<double> mu_from_gamma(std::span<const double> gamma, double p_bar,
                                  const GridSpec& grid);

/// Samples the initial condition on the grid nodes. Throws ConfigError when
/// the phenotype counts disagree or the initial pressure exceeds p_bar at a node.
FieldState build_initial(const InitialCondition& ic, const GridSpec& grid,
                         const PhenotypeSet& params);

/// Mass sum_j n_j dx of one density array.
double mass(std::span<const double> density, double dx) noexcept;

}  // namespace segwave
