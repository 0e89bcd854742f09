#include "segwave/twa.hpp"

#include <array>
#include <cmath>

#include <boost/numeric/odeint.hpp>
#include <fmt/format.h>

namespace segwave::twa {

namespace {

void check_tail(std::span<const double> tail, const PhenotypeSet& params) {
    if (tail.empty()) throw DomainError("at least one mass M_2.. is required");
    if (tail.size() + 1 != params.count()) {
        throw StructuralError(fmt::format("{} masses given for phenotypes 2..{}", tail.size(),
                                          params.count()));
    }
    for (std::size_t k = 0; k < tail.size(); ++k) {
        if (!(tail[k] > 0.0)) {
            throw DomainError(fmt::format("mass M_{} = {} must be > 0", k + 2, tail[k]));
        }
    }
}

void check_ordering(const PhenotypeSet& params) {
    if (!params.mobility_ordered()) {
        throw ConfigError(
            "travelling-wave predictions need strictly increasing mobilities mu_1 < ... < mu_I");
    }
}

double partial_sum(std::span<const double> tail, const PhenotypeSet& params, std::size_t from) {
    double s = 0.0;
    for (std::size_t j = from; j < params.count(); ++j) {
        s += params.omega[j] * tail[j - 1] / params.mu[j];
    }
    return s;
}

}  // namespace

double weighted_mass(std::span<const double> tail, const PhenotypeSet& params) {
    check_tail(tail, params);
    return partial_sum(tail, params, 1);
}

double speed_from_p0(double p0, std::span<const double> tail, const PhenotypeSet& params) {
    if (!(p0 > 0.0)) throw DomainError(fmt::format("p0 = {} must be > 0", p0));
    return p0 * p0 / (2.0 * weighted_mass(tail, params));
}

double front_pressure(double c, std::span<const double> tail, const PhenotypeSet& params) {
    return std::sqrt(2.0 * c * weighted_mass(tail, params));
}

std::vector<double> interface_pressures(double c, std::span<const double> tail,
                                        const PhenotypeSet& params) {
    if (!(c > 0.0)) throw DomainError(fmt::format("speed c = {} must be > 0", c));
    check_tail(tail, params);
    std::vector<double> p(params.count() - 1);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::sqrt(2.0 * c * partial_sum(tail, params, i + 1));
    return p;
}

std::vector<double> interface_positions(double c, std::span<const double> tail,
                                        const PhenotypeSet& params) {
    check_ordering(params);
    const auto pz = interface_pressures(c, tail, params);
    const std::size_t count = params.count();
    std::vector<double> z(count - 1);
    double prev = 0.0;
    for (std::size_t i = 1; i + 1 < count; ++i) {
        prev += params.mu[i] / c * (pz[i - 1] - pz[i]);
        z[i - 1] = prev;
    }
    const std::size_t last = count - 1;
    z[last - 1] = prev + std::sqrt(2.0 * params.omega[last] * params.mu[last] * tail[last - 1] / c);
    return z;
}

std::vector<double> density_jump_ratios(const PhenotypeSet& params) {
    std::vector<double> r(params.count() - 1);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = params.omega[i] / params.omega[i + 1];
    return r;
}

WavePrediction assemble(double c, std::span<const double> tail, const PhenotypeSet& params) {
    WavePrediction w;
    w.c = c;
    w.tail_masses.assign(tail.begin(), tail.end());
    w.z.push_back(0.0);
    for (double zi : interface_positions(c, tail, params)) w.z.push_back(zi);
    w.p = interface_pressures(c, tail, params);
    w.p.push_back(0.0);
    return w;
}

double pressure_ahead(const WavePrediction& wave, const PhenotypeSet& params, double z) {
    if (z <= 0.0) return wave.p.front();
    for (std::size_t i = 1; i < wave.z.size(); ++i) {
        if (z <= wave.z[i]) return wave.p[i - 1] - wave.c / params.mu[i] * (z - wave.z[i - 1]);
    }
    return 0.0;
}

RearOdeSolution shoot_rear(double c, const PhenotypeSet& params, const ShootingNumerics& numerics) {
    namespace ode = boost::numeric::odeint;
    using State = std::array<double, 2>;

    if (!(c > 0.0)) throw DomainError(fmt::format("speed c = {} must be > 0", c));
    const double alpha = params.alpha.front();
    if (!(alpha > 0.0)) throw ConfigError("the rear problem needs alpha_1 > 0");

    // u = p / p_bar, w = u u'.
    const double d = params.mu.front() * params.p_bar;
    const double target = -c / d;
    const double floor = (numerics.p_floor > 0.0 ? numerics.p_floor : 1e-3 * params.p_bar) / params.p_bar;

    auto rhs = [&](const State& y, State& dy, double) {
        const double u = y[0];
        const double g = std::atan(0.1 * (1.0 - u));
        dy[0] = y[1] / u;
        dy[1] = -(c * y[1] / u + alpha * g * u) / d;
    };
    auto slope_gap = [&](const State& y) { return y[1] / y[0] - target; };

    const double lambda = (-c + std::sqrt(c * c + 0.4 * alpha * d)) / (2.0 * d);
    const double u0 = 1.0 - numerics.start_offset;
    State y{u0, u0 * lambda * (u0 - 1.0)};

    RearOdeSolution sol;
    sol.c = c;
    std::vector<double> zs{0.0}, us{u0};

    auto stepper = ode::make_dense_output(numerics.abs_tol, numerics.rel_tol,
                                          ode::runge_kutta_dopri5<State>());
    stepper.initialize(y, 0.0, 1e-3);
    double z_hit = 0.0;
    bool hit = false;
    while (stepper.current_time() < numerics.z_span) {
        stepper.do_step(rhs);
        ++sol.steps;
        const State cur = stepper.current_state();
        if (slope_gap(cur) <= 0.0) {
            double lo = stepper.previous_time();
            double hi = stepper.current_time();
            State probe;
            for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
                const double mid = 0.5 * (lo + hi);
                stepper.calc_state(mid, probe);
                (slope_gap(probe) > 0.0 ? lo : hi) = mid;
            }
            stepper.calc_state(hi, probe);
            y = probe;
            z_hit = hi;
            hit = true;
            break;
        }
        if (!(cur[0] > floor) || !std::isfinite(cur[0])) break;
        zs.push_back(stepper.current_time());
        us.push_back(cur[0]);
    }

    if (hit && y[0] > floor) {
        sol.admissible = true;
        sol.p_front = y[0] * params.p_bar;
        zs.push_back(z_hit);
        us.push_back(y[0]);
    }
    const double shift = zs.back();
    sol.z.reserve(zs.size());
    sol.p.reserve(us.size());
    for (std::size_t k = 0; k < zs.size(); ++k) {
        sol.z.push_back(zs[k] - shift);
        sol.p.push_back(us[k] * params.p_bar);
    }
    return sol;
}

WavePrediction solve_wave(std::span<const double> tail, const PhenotypeSet& params,
                          const BisectionOptions& bisection, const ShootingNumerics& numerics) {
    check_ordering(params);
    const double s = weighted_mass(tail, params);
    const double tol = bisection.tol_fraction * params.p_bar;

    struct Eval {
        double gap;
        double rear;
    };
    auto evaluate = [&](double c) {
        const double front = std::sqrt(2.0 * c * s);
        ShootingNumerics n = numerics;
        n.p_floor = 0.1 * front;
        const auto rear = shoot_rear(c, params, n);
        return Eval{rear.p_front - front, rear.p_front};
    };

    double lo = bisection.c_low;
    double hi = bisection.c_high;
    const Eval f_lo = evaluate(lo);
    const Eval f_hi = evaluate(hi);
    if (!(f_lo.gap > 0.0) || !(f_hi.gap < 0.0)) {
        throw ConvergenceError(fmt::format(
            "speed bracket [{}, {}] does not straddle the root: p(0-) - p(0+) = {} at c = {} and {} "
            "at c = {}; widen the bracket",
            lo, hi, f_lo.gap, lo, f_hi.gap, hi));
    }

    std::size_t it = 0;
    double c = 0.5 * (lo + hi);
    Eval f = evaluate(c);
    while (std::abs(f.gap) > tol) {
        if (++it > bisection.max_iterations) {
            throw ConvergenceError(fmt::format(
                "bisection stopped after {} iterations with residual {} in [{}, {}]",
                bisection.max_iterations, std::abs(f.gap), lo, hi));
        }
        (f.gap > 0.0 ? lo : hi) = c;
        c = 0.5 * (lo + hi);
        f = evaluate(c);
    }

    WavePrediction w = assemble(c, tail, params);
    w.iterations = it;
    w.residual = std::abs(f.gap);
    w.p_rear = f.rear;
    return w;
}

}  // namespace segwave::twa
