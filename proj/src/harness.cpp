#include "segwave/harness.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <fmt/format.h>

namespace segwave::harness {

std::optional<double> level_crossing(std::span<const double> p, double dx, double value) {
    for (std::size_t j = p.size(); j-- > 0;) {
        if (p[j] >= value) {
            if (j + 1 == p.size()) return static_cast<double>(j) * dx;
            const double frac = (p[j] - value) / (p[j] - p[j + 1]);
            return (static_cast<double>(j) + frac) * dx;
        }
    }
    return std::nullopt;
}

Track track_level(std::span<const FieldState> snapshots, const PhenotypeSet& params,
                  const GridSpec& grid, double level) {
    Track track;
    track.level = level;
    for (const auto& s : snapshots) {
        const auto p = pressure(s, params);
        if (auto x = level_crossing(p, grid.dx, level * params.p_bar)) {
            track.t.push_back(s.t);
            track.x.push_back(*x);
        } else {
            track.omitted.push_back(s.t);
        }
    }
    return track;
}

LineFit fit_speed(const Track& track, double t_a, double t_b) {
    std::vector<double> t, x;
    for (std::size_t k = 0; k < track.t.size(); ++k) {
        if (track.t[k] >= t_a && track.t[k] <= t_b) {
            t.push_back(track.t[k]);
            x.push_back(track.x[k]);
        }
    }
    const std::size_t n = t.size();
    if (n < 3) {
        throw DomainError(fmt::format("speed fit needs >= 3 points in [{}, {}], got {}", t_a, t_b, n));
    }
    double tm = 0.0, xm = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        tm += t[k];
        xm += x[k];
    }
    tm /= static_cast<double>(n);
    xm /= static_cast<double>(n);
    double stt = 0.0, stx = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        stt += (t[k] - tm) * (t[k] - tm);
        stx += (t[k] - tm) * (x[k] - xm);
    }
    LineFit fit;
    fit.points = n;
    fit.slope = stt > 0.0 ? stx / stt : 0.0;
    fit.intercept = xm - fit.slope * tm;
    double sse = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double e = x[k] - (fit.intercept + fit.slope * t[k]);
        sse += e * e;
    }
    fit.residual = std::sqrt(sse / static_cast<double>(n));
    fit.slope_stderr = stt > 0.0 ? std::sqrt(sse / static_cast<double>(n - 2) / stt) : 0.0;
    return fit;
}

std::optional<double> support_endpoint(std::span<const double> n, double threshold, double dx) {
    if (!(threshold > 0.0)) throw DomainError(fmt::format("threshold {} must be > 0", threshold));
    for (std::size_t j = n.size(); j-- > 0;) {
        if (n[j] > threshold) return static_cast<double>(j) * dx;
    }
    return std::nullopt;
}

std::vector<std::optional<double>> support_endpoints(const FieldState& fields, double threshold,
                                                     double dx) {
    std::vector<std::optional<double>> out;
    out.reserve(fields.n.size());
    for (const auto& n : fields.n) out.push_back(support_endpoint(n, threshold, dx));
    return out;
}

std::size_t support_overlap(const FieldState& fields, double threshold) {
    std::size_t worst = 0;
    for (std::size_t a = 0; a < fields.n.size(); ++a) {
        for (std::size_t b = a + 1; b < fields.n.size(); ++b) {
            std::size_t both = 0;
            for (std::size_t j = 0; j < fields.cells(); ++j) {
                both += fields.n[a][j] > threshold && fields.n[b][j] > threshold;
            }
            worst = std::max(worst, both);
        }
    }
    return worst;
}

std::size_t segregation_overlap(std::span<const FieldState> snapshots, double threshold) {
    std::size_t worst = 0;
    for (const auto& s : snapshots) worst = std::max(worst, support_overlap(s, threshold));
    return worst;
}

PressureComparison compare_pressure(const FieldState& a, const FieldState& b,
                                    const PhenotypeSet& params, const GridSpec& grid,
                                    double threshold_a, double threshold_b,
                                    std::size_t near_cells) {
    if (a.cells() != b.cells() || a.phenotypes() != b.phenotypes() || a.cells() != grid.cells) {
        throw StructuralError(fmt::format("cannot compare fields {}x{} and {}x{} on a grid of {}",
                                          a.phenotypes(), a.cells(), b.phenotypes(), b.cells(),
                                          grid.cells));
    }
    const auto pa = pressure(a, params);
    const auto pb = pressure(b, params);
    PressureComparison out;
    out.error.resize(pa.size());
    for (std::size_t j = 0; j < pa.size(); ++j) out.error[j] = std::abs(pa[j] - pb[j]) / params.p_bar;

    for (const auto* f : {&a, &b}) {
        const double th = f == &a ? threshold_a : threshold_b;
        for (const auto& x : support_endpoints(*f, th, grid.dx)) {
            if (x) out.interfaces.push_back(*x);
        }
    }
    std::sort(out.interfaces.begin(), out.interfaces.end());

    const double reach = static_cast<double>(near_cells) * grid.dx * (1.0 + 1e-9);
    for (std::size_t j = 0; j < pa.size(); ++j) {
        const double x = grid.x(j);
        const bool near = std::any_of(out.interfaces.begin(), out.interfaces.end(),
                                      [&](double xi) { return std::abs(x - xi) <= reach; });
        double& slot = near ? out.near_max : out.far_max;
        slot = std::max(slot, out.error[j]);
    }
    return out;
}

std::optional<double> dominance_crossing(const FieldState& fields, const PhenotypeSet& params,
                                         const GridSpec& grid, std::size_t i) {
    if (i + 1 >= fields.phenotypes()) return std::nullopt;
    const auto& lo = fields.n[i];
    const auto& hi = fields.n[i + 1];
    const double wl = params.omega[i];
    const double wh = params.omega[i + 1];
    auto d = [&](std::size_t j) { return wl * lo[j] - wh * hi[j]; };

    // Peak of phenotype i, then the first node ahead where i+1 dominates.
    const auto peak = static_cast<std::size_t>(std::max_element(lo.begin(), lo.end()) - lo.begin());
    if (!(lo[peak] > 0.0)) return std::nullopt;
    for (std::size_t j = peak; j + 1 < grid.cells; ++j) {
        if (d(j) > 0.0 && d(j + 1) <= 0.0) {
            const double frac = d(j) / (d(j) - d(j + 1));
            return (static_cast<double>(j) + frac) * grid.dx;
        }
    }
    return std::nullopt;
}

OneSided one_sided(std::span<const double> v, std::size_t anchor, int direction,
                   std::size_t nodes, double dx, double x) {
    if (nodes < 3) throw DomainError("a quadratic fit needs at least three nodes");
    const std::ptrdiff_t step = direction < 0 ? -1 : 1;
    const auto last = static_cast<std::ptrdiff_t>(anchor) + step * static_cast<std::ptrdiff_t>(nodes - 1);
    if (last < 0 || last >= static_cast<std::ptrdiff_t>(v.size())) {
        throw DomainError("one-sided fit leaves the domain");
    }
    // Normal equations in the offset d = x_j - x.
    double m[3][4] = {};
    for (std::size_t q = 0; q < nodes; ++q) {
        const auto j = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(anchor) + step * static_cast<std::ptrdiff_t>(q));
        const double d = static_cast<double>(j) * dx - x;
        const double basis[3] = {1.0, d, d * d};
        for (int r = 0; r < 3; ++r) {
            for (int col = 0; col < 3; ++col) m[r][col] += basis[r] * basis[col];
            m[r][3] += basis[r] * v[j];
        }
    }
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r) {
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
        }
        std::swap(m[col], m[pivot]);
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double f = m[r][col] / m[col][col];
            for (int k = col; k < 4; ++k) m[r][k] -= f * m[col][k];
        }
    }
    return OneSided{m[1][3] / m[1][1], m[0][3] / m[0][0]};
}

std::vector<KinkReport> kink_audit(const FieldState& fields, const PhenotypeSet& params,
                                   const GridSpec& grid, double c, std::size_t margin,
                                   std::size_t nodes) {
    if (!(c > 0.0)) throw DomainError(fmt::format("kink audit needs c > 0, got {}", c));
    const auto p = pressure(fields, params);
    std::vector<KinkReport> out;
    for (std::size_t i = 0; i + 1 < fields.phenotypes(); ++i) {
        KinkReport r;
        r.interface = i + 1;
        const auto x = dominance_crossing(fields, params, grid, i);
        if (!x) {
            out.push_back(r);
            continue;
        }
        r.position = *x;
        const auto k = static_cast<std::size_t>(std::floor(*x / grid.dx));
        if (k < margin + nodes || k + 1 + margin + nodes > grid.cells) {
            out.push_back(r);
            continue;
        }
        const std::size_t left = k - margin;
        const std::size_t right = k + 1 + margin;
        const auto pm = one_sided(p, left, -1, nodes, grid.dx, *x);
        const auto pp = one_sided(p, right, +1, nodes, grid.dx, *x);
        const auto nm = one_sided(fields.n[i], left, -1, nodes, grid.dx, *x);
        const auto np = one_sided(fields.n[i + 1], right, +1, nodes, grid.dx, *x);

        r.valid = true;
        r.slope_minus = pm.slope;
        r.slope_plus = pp.slope;
        r.residual_minus = std::abs(params.mu[i] * pm.slope + c) / c;
        r.residual_plus = std::abs(params.mu[i + 1] * pp.slope + c) / c;
        r.slope_order = std::abs(pp.slope) < std::abs(pm.slope);
        r.density_minus = nm.value;
        r.density_plus = np.value;
        r.jump_ratio = nm.value != 0.0 ? np.value / nm.value : 0.0;
        r.pressure = 0.5 * (pm.value + pp.value);
        out.push_back(r);
    }
    return out;
}

RunSummary summarize(std::span<const FieldState> snapshots, const PhenotypeSet& params,
                     const GridSpec& grid, std::span<const double> levels, double fit_start,
                     double fit_end, double threshold) {
    if (snapshots.empty()) throw StructuralError("summarize: no snapshots");
    RunSummary s;
    s.fit_start = fit_start;
    s.fit_end = fit_end;
    s.threshold = threshold;
    bool fitted = true;
    for (double level : levels) {
        s.tracks.push_back(track_level(snapshots, params, grid, level));
        const auto& tr = s.tracks.back();
        const auto in_window = std::count_if(tr.t.begin(), tr.t.end(), [&](double t) {
            return t >= fit_start && t <= fit_end;
        });
        fitted = fitted && in_window >= 3;
    }
    if (fitted) {
        for (const auto& tr : s.tracks) s.fits.push_back(fit_speed(tr, fit_start, fit_end));
        if (!s.fits.empty()) s.c_fit = s.fits.front().slope;
    }
    for (const auto& n : snapshots.front().n) s.initial_masses.push_back(mass(n, grid.dx));
    for (const auto& n : snapshots.back().n) s.final_masses.push_back(mass(n, grid.dx));
    for (std::size_t i = 0; i < s.initial_masses.size(); ++i) {
        const double m0 = s.initial_masses[i];
        s.mass_drift.push_back(m0 > 0.0 ? (s.final_masses[i] - m0) / m0 : 0.0);
    }
    s.endpoints = support_endpoints(snapshots.back(), threshold, grid.dx);
    s.max_overlap = segregation_overlap(snapshots, threshold);
    return s;
}

}  // namespace segwave::harness
