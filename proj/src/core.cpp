#include "segwave/core.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "segwave/error.hpp"

namespace segwave {

PhenotypeSet PhenotypeSet::make(std::vector<double> alpha, std::vector<double> mu,
                                std::vector<double> omega, double p_bar) {
    const std::size_t count = mu.size();
    if (count < 2) {
        throw ConfigError(fmt::format("at least two phenotypes are required, got {}", count));
    }
    if (alpha.size() != count || omega.size() != count) {
        throw ConfigError(fmt::format("phenotype arrays disagree in length: alpha={}, mu={}, omega={}",
                                      alpha.size(), count, omega.size()));
    }
    for (std::size_t i = 0; i < count; ++i) {
        if (!(alpha[i] >= 0.0) || !std::isfinite(alpha[i])) {
            throw ConfigError(fmt::format("alpha[{}] = {} must be finite and >= 0", i + 1, alpha[i]));
        }
        if (!(mu[i] > 0.0) || !std::isfinite(mu[i])) {
            throw ConfigError(fmt::format("mu[{}] = {} must be finite and > 0", i + 1, mu[i]));
        }
        if (!(omega[i] > 0.0) || !std::isfinite(omega[i])) {
            throw ConfigError(fmt::format("omega[{}] = {} must be finite and > 0", i + 1, omega[i]));
        }
    }
    if (!(p_bar > 0.0) || !std::isfinite(p_bar)) {
        throw ConfigError(fmt::format("p_bar = {} must be finite and > 0", p_bar));
    }
    return PhenotypeSet{std::move(alpha), std::move(mu), std::move(omega), p_bar};
}

bool PhenotypeSet::baseline_regime() const noexcept {
    if (alpha.empty() || !(alpha.front() > 0.0)) return false;
    return std::all_of(alpha.begin() + 1, alpha.end(), [](double a) { return a == 0.0; });
}

bool PhenotypeSet::mobility_ordered() const noexcept {
    return std::adjacent_find(mu.begin(), mu.end(),
                              [](double a, double b) { return !(a < b); }) == mu.end();
}

GridSpec GridSpec::make(double length, double dx, double tau) {
    if (!(length > 0.0) || !(dx > 0.0) || !std::isfinite(length) || !std::isfinite(dx)) {
        throw ConfigError(fmt::format("grid length ({}) and dx ({}) must be positive", length, dx));
    }
    if (!(tau >= 0.0) || !std::isfinite(tau)) {
        throw ConfigError(fmt::format("time-step tau = {} must be >= 0", tau));
    }
    const double ratio = length / dx;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * ratio) {
        throw ConfigError(fmt::format("length {} is not an integer multiple of dx {}", length, dx));
    }
    return GridSpec{length, dx, static_cast<std::size_t>(rounded), tau};
}

InitialCondition InitialCondition::make(std::vector<double> amplitude, double decay,
                                        std::vector<double> boundaries) {
    if (boundaries.size() != amplitude.size() + 1) {
        throw ConfigError(fmt::format("{} amplitudes need {} segment boundaries, got {}",
                                      amplitude.size(), amplitude.size() + 1, boundaries.size()));
    }
    for (std::size_t i = 0; i < amplitude.size(); ++i) {
        if (!(amplitude[i] >= 0.0) || !std::isfinite(amplitude[i])) {
            throw ConfigError(fmt::format("amplitude[{}] = {} must be >= 0", i + 1, amplitude[i]));
        }
    }
    if (!(decay >= 0.0) || !std::isfinite(decay)) {
        throw ConfigError(fmt::format("decay B = {} must be >= 0", decay));
    }
    for (std::size_t k = 1; k < boundaries.size(); ++k) {
        if (!(boundaries[k] > boundaries[k - 1])) {
            throw ConfigError(fmt::format("segment boundaries must be strictly increasing: {}",
                                          boundaries));
        }
    }
    return InitialCondition{std::move(amplitude), decay, std::move(boundaries)};
}

double InitialCondition::density(std::size_t i, double x) const noexcept {
    const double start = boundaries[i];
    if (x < start || x >= boundaries[i + 1]) return 0.0;
    const double d = x - start;
    return amplitude[i] * std::exp(-decay * d * d);
}

std::vector<double> pressure(std::span<const std::vector<double>> densities,
                             const PhenotypeSet& params) {
    if (densities.size() != params.count()) {
        throw StructuralError(fmt::format("pressure: {} density arrays for {} phenotypes",
                                          densities.size(), params.count()));
    }
    const std::size_t cells = densities.front().size();
    std::vector<double> p(cells, 0.0);
    for (std::size_t i = 0; i < densities.size(); ++i) {
        const auto& n = densities[i];
        if (n.size() != cells) {
            throw StructuralError(fmt::format("pressure: density array {} has length {}, expected {}",
                                              i + 1, n.size(), cells));
        }
        const double w = params.omega[i];
        for (std::size_t j = 0; j < cells; ++j) {
            if (n[j] < 0.0) {
                throw DomainError(fmt::format("pressure: negative density {} for phenotype {} at node {}",
                                              n[j], i + 1, j));
            }
            p[j] += w * n[j];
        }
    }
    return p;
}

double growth(double p, double p_bar) {
    if (!(p_bar > 0.0)) {
        throw DomainError(fmt::format("growth: p_bar = {} must be > 0", p_bar));
    }
    return std::atan(0.1 * (1.0 - p / p_bar));
}

std::vector<double> gamma_from_mu(const PhenotypeSet& params, const GridSpec& grid) {
    if (!(grid.tau > 0.0)) {
        throw ConfigError("gamma_from_mu: the grid has no positive time-step tau");
    }
    const double scale = 2.0 * grid.tau * params.p_bar / (grid.dx * grid.dx);
    std::vector<double> gamma(params.count());
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        gamma[i] = scale * params.mu[i];
        if (!(gamma[i] < 1.0)) {
            throw ConfigError(fmt::format(
                "gamma[{}] = {} >= 1: a cell between empty neighbours at pressure p_bar would move "
                "with probability >= 1; reduce tau or mu, or increase dx",
                i + 1, gamma[i]));
        }
    }
    return gamma;
}

std::vector<double> mu_from_gamma(std::span<const double> gamma, double p_bar,
                                  const GridSpec& grid) {
    const double scale = grid.dx * grid.dx / (2.0 * grid.tau * p_bar);
    std::vector<double> mu(gamma.size());
    std::transform(gamma.begin(), gamma.end(), mu.begin(), [scale](double g) { return g * scale; });
    return mu;
}

FieldState build_initial(const InitialCondition& ic, const GridSpec& grid,
                         const PhenotypeSet& params) {
    const std::size_t count = params.count();
    if (ic.amplitude.size() != count) {
        throw ConfigError(fmt::format("initial condition has {} amplitudes for {} phenotypes",
                                      ic.amplitude.size(), count));
    }
    FieldState fields;
    fields.n.assign(count, std::vector<double>(grid.cells, 0.0));
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t j = 0; j < grid.cells; ++j) {
            fields.n[i][j] = ic.density(i, grid.x(j));
        }
    }
    const auto p = pressure(fields, params);
    const auto peak = std::max_element(p.begin(), p.end());
    if (*peak > params.p_bar) {
        throw ConfigError(fmt::format("initial pressure {} at x = {} exceeds p_bar = {}", *peak,
                                      grid.x(static_cast<std::size_t>(peak - p.begin())),
                                      params.p_bar));
    }
    return fields;
}

double mass(std::span<const double> density, double dx) noexcept {
    double total = 0.0;
    for (double v : density) total += v;
    return total * dx;
}

}  // namespace segwave
