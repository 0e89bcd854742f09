#include <doctest.h>

#include <cmath>
#include <vector>

#include "segwave/core.hpp"
#include "segwave/twa.hpp"

using namespace segwave;
using namespace segwave::twa;

namespace {

PhenotypeSet baseline3(std::vector<double> omega = {1, 2, 3}) {
    return PhenotypeSet::make({10, 0, 0}, {1e-4, 2e-4, 3e-4}, std::move(omega), 4e4);
}

PhenotypeSet baseline4() {
    return PhenotypeSet::make({10, 0, 0, 0}, {1e-4, 2e-4, 3e-4, 4e-4}, {1, 2, 3, 4}, 4e4);
}

std::vector<double> ic_tail_masses(const PhenotypeSet& params, std::vector<double> boundaries) {
    const auto grid = GridSpec::make(150, 0.1);
    std::vector<double> amp;
    for (double w : params.omega) amp.push_back(0.97 * params.p_bar / w);
    const auto f = build_initial(InitialCondition::make(amp, 6e-2, std::move(boundaries)), grid, params);
    std::vector<double> tail;
    for (std::size_t i = 1; i < f.n.size(); ++i) tail.push_back(mass(f.n[i], grid.dx));
    return tail;
}

}  // namespace

TEST_SUITE("twa") {
    TEST_CASE("speed_from_p0 examples") {
        const auto params = PhenotypeSet::make({1, 0}, {1, 1}, {1, 1}, 10);
        const std::vector<double> unit{1.0};
        CHECK(weighted_mass(unit, params) == 1.0);
        CHECK(speed_from_p0(2.0, unit, params) == doctest::Approx(2.0));
        CHECK_THROWS_AS(speed_from_p0(2.0, std::vector<double>{}, params), DomainError);

        const auto p3 = baseline3();
        const std::vector<double> m{3.7, 1.2};
        for (double c : {0.01, 0.42, 3.0}) {
            CHECK(speed_from_p0(front_pressure(c, m, p3), m, p3) == doctest::Approx(c).epsilon(1e-12));
        }
    }

    TEST_CASE("interface_pressures examples") {
        const auto params = baseline3();
        const std::vector<double> m{1.0, 1.0};
        const auto p = interface_pressures(0.42, m, params);
        REQUIRE(p.size() == 2);
        CHECK(p[0] == doctest::Approx(std::sqrt(16800.0)));
        CHECK(p[0] == doctest::Approx(129.61).epsilon(1e-4));
        CHECK(p[1] == doctest::Approx(91.65).epsilon(1e-4));
        CHECK(p[1] == doctest::Approx(std::sqrt(2 * 0.42 * 3 * 1.0 / 3e-4)));

        const std::vector<double> tiny{1e-30, 1e-30};
        for (double v : interface_pressures(0.42, tiny, params)) CHECK(v < 1e-10);
    }

    TEST_CASE("interface_positions examples") {
        const auto params = baseline3();
        const std::vector<double> m{1.0, 1.0};
        const auto z = interface_positions(0.42, m, params);
        REQUIRE(z.size() == 2);
        CHECK(z[0] == doctest::Approx(0.01808).epsilon(1e-3));
        CHECK(z[1] - z[0] == doctest::Approx(0.06547).epsilon(1e-3));

        const std::vector<double> vanishing{1.0, 1e-16};
        const auto zv = interface_positions(0.42, vanishing, params);
        CHECK(zv[1] - zv[0] < 1e-6);

        const auto unordered = PhenotypeSet::make({10, 0, 0}, {1e-4, 3e-4, 2e-4}, {1, 2, 3}, 4e4);
        CHECK_THROWS_AS(interface_positions(0.42, m, unordered), ConfigError);
    }

    TEST_CASE("density_jump_ratios examples") {
        for (double r : density_jump_ratios(baseline3({2, 2, 2}))) CHECK(r == 1.0);
        const auto up = density_jump_ratios(baseline3({1, 2, 3}));
        CHECK(up[0] == doctest::Approx(0.5));
        CHECK(up[1] == doctest::Approx(2.0 / 3.0));
        const auto down = density_jump_ratios(baseline3({3, 2, 1}));
        CHECK(down[0] == doctest::Approx(1.5));
        CHECK(down[1] == doctest::Approx(2.0));
    }

    TEST_CASE("consistency chain and assembled profile") {
        for (const auto& params : {baseline3(), baseline3({3, 2, 1}), baseline4()}) {
            std::vector<double> m;
            for (std::size_t i = 1; i < params.count(); ++i) m.push_back(0.5 + 0.7 * static_cast<double>(i));
            for (double c : {0.05, 0.35, 0.42, 2.0}) {
                const auto p = interface_pressures(c, m, params);
                CHECK(speed_from_p0(p[0], m, params) == doctest::Approx(c).epsilon(1e-10));

                const auto wave = assemble(c, m, params);
                REQUIRE(wave.z.size() == params.count());
                REQUIRE(wave.p.size() == params.count());
                CHECK(wave.z[0] == 0.0);
                CHECK(wave.p.back() == 0.0);
                for (std::size_t i = 1; i < wave.z.size(); ++i) {
                    CHECK(wave.z[i] > wave.z[i - 1]);
                    CHECK(wave.p[i] < wave.p[i - 1]);
                    const double slope = (wave.p[i] - wave.p[i - 1]) / (wave.z[i] - wave.z[i - 1]);
                    CHECK(-params.mu[i] * slope == doctest::Approx(c).epsilon(1e-10));
                    const double band = 0.5 * (wave.p[i] + wave.p[i - 1]) * (wave.z[i] - wave.z[i - 1]) / params.omega[i];
                    CHECK(band == doctest::Approx(m[i - 1]).epsilon(1e-8));
                    const double mid = 0.5 * (wave.z[i] + wave.z[i - 1]);
                    CHECK(pressure_ahead(wave, params, mid) == doctest::Approx(0.5 * (wave.p[i] + wave.p[i - 1])));
                }
                CHECK(pressure_ahead(wave, params, wave.z.back() + 1.0) == 0.0);
            }
        }
    }

    TEST_CASE("shoot_rear is monotone in c over a 5-point bracket") {
        const auto params = baseline3();
        double prev = INFINITY;
        for (double c : {0.3, 0.35, 0.4, 0.45, 0.5}) {
            const auto rear = shoot_rear(c, params);
            REQUIRE(rear.admissible);
            CHECK(rear.p_front < prev);
            prev = rear.p_front;
            REQUIRE(rear.z.size() == rear.p.size());
            CHECK(rear.z.back() == doctest::Approx(0.0));
            for (std::size_t k = 0; k < rear.p.size(); ++k) {
                CHECK(rear.p[k] < params.p_bar);
                if (k > 0) {
                    CHECK(rear.z[k] > rear.z[k - 1]);
                    CHECK(rear.p[k] < rear.p[k - 1]);
                }
            }
        }
    }

    TEST_CASE("fast candidates are inadmissible") {
        const auto rear = shoot_rear(50.0, baseline3());
        CHECK_FALSE(rear.admissible);
        CHECK(rear.p_front == 0.0);
    }

    TEST_CASE("solve_wave at the baseline") {
        const auto p3 = baseline3();
        const auto m3 = ic_tail_masses(p3, {0, 10, 20, 150});
        const auto w3 = solve_wave(m3, p3);
        CHECK(std::abs(w3.c - 0.42) <= 0.1 * 0.42);
        CHECK(w3.residual <= 1e-4 * p3.p_bar);
        CHECK(w3.p_rear == doctest::Approx(w3.p[0]).epsilon(1e-3));

        const auto p4 = baseline4();
        const auto m4 = ic_tail_masses(p4, {0, 10, 20, 30, 150});
        const auto w4 = solve_wave(m4, p4);
        CHECK(std::abs(w4.c - 0.35) <= 0.1 * 0.35);
    }

    TEST_CASE("solve_wave errors") {
        const auto params = baseline3();
        const std::vector<double> m{2000, 1300};
        BisectionOptions narrow;
        narrow.c_high = 0.01;
        CHECK_THROWS_AS(solve_wave(m, params, narrow), ConvergenceError);

        const auto unordered = PhenotypeSet::make({10, 0, 0}, {2e-4, 1e-4, 3e-4}, {1, 2, 3}, 4e4);
        CHECK_THROWS_AS(solve_wave(m, unordered), ConfigError);
        const auto inert = PhenotypeSet::make({0, 0, 0}, {1e-4, 2e-4, 3e-4}, {1, 2, 3}, 4e4);
        CHECK_THROWS_AS(solve_wave(m, inert), ConfigError);
    }
}
