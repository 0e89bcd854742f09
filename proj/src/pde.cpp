#include "segwave/pde.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace segwave::pde {

double ospre(double r) noexcept {
    if (!(r > 0.0)) return 0.0;
    const double q = r * r + r;
    return 1.5 * q / (q + 1.0);
}

Reconstruction muscl_reconstruct(std::span<const double> values) {
    const std::size_t cells = values.size();
    Reconstruction out;
    out.left.assign(cells + 1, 0.0);
    out.right.assign(cells + 1, 0.0);
    if (cells == 0) return out;

    double scale = 0.0;
    for (double v : values) scale = std::max(scale, std::abs(v));
    const double eps = 1e-14 * scale;

    for (std::size_t j = 0; j < cells; ++j) {
        double slope = 0.0;
        if (j > 0 && j + 1 < cells) {
            const double forward = values[j + 1] - values[j];
            if (std::abs(forward) >= eps && forward != 0.0) {
                const double r = (values[j] - values[j - 1]) / forward;
                slope = ospre(r) * forward;
            }
        }
        out.left[j + 1] = values[j] + 0.5 * slope;
        out.right[j] = values[j] - 0.5 * slope;
    }
    out.left[0] = values.front();
    out.right[cells] = values.back();
    return out;
}

namespace {

void interface_gradient(std::span<const double> q, double dx, std::vector<double>& grad,
                        double weight) {
    const std::size_t n = q.size();
    grad[0] += weight * (q[1] - q[0]) / dx;
    for (std::size_t k = 1; k + 1 < n; ++k) grad[k] += weight * (q[k + 1] - q[k - 1]) / (2.0 * dx);
    grad[n - 1] += weight * (q[n - 1] - q[n - 2]) / dx;
}

void gradient_into(std::span<const Reconstruction> recon, const PhenotypeSet& params, double dx,
                   std::vector<double>& grad, std::vector<double>& scratch) {
    if (recon.size() != params.count()) {
        throw StructuralError(fmt::format("{} reconstructions for {} phenotypes", recon.size(),
                                          params.count()));
    }
    const std::size_t n = recon.front().left.size();
    grad.assign(n, 0.0);
    if (n < 2) return;
    scratch.assign(n, 0.0);
    for (std::size_t i = 0; i < recon.size(); ++i) {
        for (std::size_t k = 0; k < n; ++k) scratch[k] += params.omega[i] * recon[i].left[k];
    }
    interface_gradient(scratch, dx, grad, 0.5);
    std::fill(scratch.begin(), scratch.end(), 0.0);
    for (std::size_t i = 0; i < recon.size(); ++i) {
        for (std::size_t k = 0; k < n; ++k) scratch[k] += params.omega[i] * recon[i].right[k];
    }
    interface_gradient(scratch, dx, grad, 0.5);
}

void flux_into(const Reconstruction& recon, std::span<const double> gradient, double mu,
               std::vector<double>& flux) {
    const std::size_t n = gradient.size();
    flux.assign(n, 0.0);
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const double drive = -gradient[k];
        flux[k] = mu * recon.left[k] * std::max(0.0, drive) + mu * recon.right[k] * std::min(0.0, drive);
    }
}

}  // namespace

std::vector<double> interface_pressure_gradient(std::span<const Reconstruction> recon,
                                                const PhenotypeSet& params, double dx) {
    std::vector<double> grad, scratch;
    gradient_into(recon, params, dx, grad, scratch);
    return grad;
}

std::vector<double> interface_pressure_gradient(const FieldState& fields,
                                                const PhenotypeSet& params, const GridSpec& grid) {
    std::vector<Reconstruction> recon;
    recon.reserve(fields.n.size());
    for (const auto& n : fields.n) recon.push_back(muscl_reconstruct(n));
    return interface_pressure_gradient(recon, params, grid.dx);
}

std::vector<double> upwind_flux(const Reconstruction& recon, std::span<const double> gradient,
                                double mu) {
    if (recon.left.size() != gradient.size() || recon.right.size() != gradient.size()) {
        throw StructuralError("upwind_flux: reconstruction and gradient lengths differ");
    }
    std::vector<double> flux;
    flux_into(recon, gradient, mu, flux);
    return flux;
}

double cfl_dt(std::span<const double> gradient, const PhenotypeSet& params, double dx,
              double safety, double dt_max) {
    if (!(safety > 0.0 && safety < 1.0)) {
        throw ConfigError(fmt::format("CFL safety factor {} must lie in (0, 1)", safety));
    }
    if (!(dt_max > 0.0)) throw ConfigError(fmt::format("dt_max = {} must be > 0", dt_max));
    double g = 0.0;
    for (double v : gradient) g = std::max(g, std::abs(v));
    const double mu_max = *std::max_element(params.mu.begin(), params.mu.end());
    if (g == 0.0) return dt_max;
    return std::min(dt_max, safety * dx / (mu_max * g));
}

double cfl_dt(const FieldState& fields, const PhenotypeSet& params, const GridSpec& grid,
              const SchemeOptions& options) {
    const auto grad = interface_pressure_gradient(fields, params, grid);
    return cfl_dt(grad, params, grid.dx, options.cfl_safety, options.dt_max);
}

StepReport step(FieldState& fields, const PhenotypeSet& params, const GridSpec& grid,
                const SchemeOptions& options, SchemeWork& work) {
    const std::size_t count = fields.phenotypes();
    const std::size_t cells = fields.cells();
    if (count != params.count() || cells != grid.cells) {
        throw StructuralError(fmt::format("fields {}x{} do not match parameters {}x{}", count, cells,
                                          params.count(), grid.cells));
    }
    StepReport report;
    if (cells < 2) return report;

    work.recon.resize(count);
    for (std::size_t i = 0; i < count; ++i) work.recon[i] = muscl_reconstruct(fields.n[i]);
    std::vector<double> scratch;
    gradient_into(work.recon, params, grid.dx, work.gradient, scratch);
    const double dt = cfl_dt(work.gradient, params, grid.dx, options.cfl_safety, options.dt_max);
    work.dt = dt;
    report.dt = dt;

    work.pressure = pressure(fields, params);
    work.flux.resize(count);
    const double ratio = dt / grid.dx;
    double clipped = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        flux_into(work.recon[i], work.gradient, params.mu[i], work.flux[i]);
        const auto& f = work.flux[i];
        auto& n = fields.n[i];
        const double alpha = params.alpha[i];
        for (std::size_t j = 0; j < cells; ++j) {
            double v = n[j] - ratio * (f[j + 1] - f[j]);
            if (alpha != 0.0) v *= 1.0 + dt * alpha * growth(work.pressure[j], params.p_bar);
            if (!std::isfinite(v)) {
                throw NumericalError(fmt::format(
                    "non-finite density for phenotype {} at x = {} (t = {}, dt = {})", i + 1,
                    grid.x(j), fields.t, dt));
            }
            if (v < 0.0) {
                clipped -= v;
                v = 0.0;
            }
            n[j] = v;
        }
    }
    fields.t += dt;
    report.clipped_mass = clipped * grid.dx;
    return report;
}

FieldState step(const FieldState& fields, const PhenotypeSet& params, const GridSpec& grid,
                const SchemeOptions& options) {
    FieldState next = fields;
    SchemeWork work;
    step(next, params, grid, options, work);
    return next;
}

Trajectory run(FieldState initial, const PhenotypeSet& params, const GridSpec& grid, double t_end,
               std::span<const double> snapshot_times, const SchemeOptions& options) {
    if (!(t_end >= 0.0)) throw ConfigError(fmt::format("t_end = {} must be >= 0", t_end));
    for (std::size_t s = 0; s < snapshot_times.size(); ++s) {
        const double t = snapshot_times[s];
        if (!(t >= 0.0) || t > t_end) {
            throw ConfigError(fmt::format("snapshot time {} outside [0, {}]", t, t_end));
        }
        if (s > 0 && t < snapshot_times[s - 1]) {
            throw ConfigError("snapshot times must be non-decreasing");
        }
    }

    Trajectory traj;
    traj.requested.assign(snapshot_times.begin(), snapshot_times.end());
    FieldState fields = std::move(initial);
    SchemeWork work;
    std::size_t next = 0;
    auto take = [&] {
        while (next < snapshot_times.size() && fields.t >= snapshot_times[next]) {
            traj.snapshots.push_back(fields);
            ++next;
        }
    };
    take();
    while (fields.t < t_end) {
        if (traj.steps >= options.max_steps) {
            throw NumericalError(fmt::format("step limit {} reached at t = {} before t_end = {}",
                                             options.max_steps, fields.t, t_end));
        }
        const auto report = step(fields, params, grid, options, work);
        ++traj.steps;
        if (report.clipped_mass > 0.0) {
            double total = 0.0;
            for (const auto& n : fields.n) total += mass(n, grid.dx);
            traj.clipped_mass += report.clipped_mass;
            if (total > 0.0) {
                traj.max_clip_fraction = std::max(traj.max_clip_fraction, report.clipped_mass / total);
            }
        }
        take();
    }
    return traj;
}

}  // namespace segwave::pde
