#include <doctest.h>

#include <cmath>
#include <vector>

#include "segwave/core.hpp"
#include "segwave/ibm.hpp"
#include "master_equation.hpp"

using namespace segwave;
using namespace segwave::ibm;

namespace {

Model small_model(double p_bar, Sampler sampler, std::size_t cells = 10) {
    auto params = PhenotypeSet::make({50.0, 0.0}, {1.0, 2.0}, {1.0, 2.0}, p_bar);
    auto grid = GridSpec::make(0.1 * static_cast<double>(cells), 0.1, 1e-2);
    return Model{params, grid, {0.3, 0.6}, sampler};
}

LatticeState lattice(std::size_t phenotypes, std::size_t sites) {
    return LatticeState{std::vector<std::vector<std::int64_t>>(phenotypes, std::vector<std::int64_t>(sites, 0)), 0};
}
}  // namespace

TEST_SUITE("ibm") {
    TEST_CASE("movement_probs examples") {
        const auto flat = movement_probs(100, 100, 100, 0.08, 4e4);
        CHECK(flat.left == 0.0);
        CHECK(flat.right == 0.0);
        CHECK(flat.stay == 1.0);

        const auto ramp = movement_probs(2000, 3000, 1000, 0.08, 4e4);
        CHECK(ramp.left == 0.0);
        CHECK(ramp.right == doctest::Approx(0.001));
        CHECK(ramp.stay == doctest::Approx(0.999));

        const auto well = movement_probs(10, 20, 30, 0.08, 4e4);
        CHECK(well.left == 0.0);
        CHECK(well.right == 0.0);
        CHECK(well.stay == 1.0);

        CHECK_THROWS_AS(movement_probs(4e4, 0, 0, 1.0, 4e4), NumericalError);
    }

    TEST_CASE("division_death_probs examples") {
        const auto inert = division_death_probs(0.0, 0.0, 4e4, 1e-4);
        CHECK(inert.divide == 0.0);
        CHECK(inert.die == 0.0);
        CHECK(inert.quiet == 1.0);

        const auto balanced = division_death_probs(10.0, 4e4, 4e4, 1e-4);
        CHECK(balanced.divide == 0.0);
        CHECK(balanced.die == 0.0);
        CHECK(balanced.quiet == 1.0);

        const auto empty = division_death_probs(10.0, 0.0, 4e4, 1e-4);
        CHECK(empty.divide == doctest::Approx(9.96687e-5).epsilon(1e-5));
        CHECK(empty.die == 0.0);

        const auto crowded = division_death_probs(10.0, 8e4, 4e4, 1e-4);
        CHECK(crowded.divide == 0.0);
        CHECK(crowded.die == doctest::Approx(9.96687e-5).epsilon(1e-5));

        CHECK_THROWS_AS(division_death_probs(1e3, 0.0, 4e4, 1.0), NumericalError);
    }

    TEST_CASE("step on trivial states") {
        const auto model = small_model(600, Sampler::aggregated);
        RngStream rng(3);
        const auto empty = lattice(2, 10);
        const auto next = step(empty, model, rng);
        CHECK(next.counts == empty.counts);
        CHECK(next.step == 1);

        auto inert = model;
        inert.params.alpha = {0.0, 0.0};
        inert.grid = GridSpec::make(0.3, 0.1, 1e-2);
        auto uniform = lattice(2, 3);
        uniform.counts[0] = {1, 1, 1};
        for (int k = 0; k < 100; ++k) {
            uniform = step(uniform, inert, rng);
            CHECK(uniform.counts[0] == std::vector<std::int64_t>{1, 1, 1});
        }

        CHECK_THROWS_AS(step(lattice(3, 10), model, rng), StructuralError);
    }

    TEST_CASE("binomial sampler moments") {
        RngStream rng(11);
        const std::int64_t n = 5000;
        for (double p : {1e-4, 0.01, 0.3, 0.5, 0.8, 0.999}) {
            double s = 0, s2 = 0;
            const int reps = 20000;
            for (int r = 0; r < reps; ++r) {
                const auto k = rng.binomial(n, p);
                REQUIRE(k >= 0);
                REQUIRE(k <= n);
                s += static_cast<double>(k);
                s2 += static_cast<double>(k) * static_cast<double>(k);
            }
            const double mean = s / reps;
            const double var = s2 / reps - mean * mean;
            const double expected = static_cast<double>(n) * p;
            const double expected_var = expected * (1 - p);
            CAPTURE(p);
            CHECK(std::abs(mean - expected) <= 4.0 * std::sqrt(expected_var / reps));
            CHECK(var == doctest::Approx(expected_var).epsilon(0.05));
        }
        CHECK(rng.binomial(0, 0.5) == 0);
        CHECK(rng.binomial(10, 0.0) == 0);
        CHECK(rng.binomial(10, 1.0) == 10);
    }

    TEST_CASE("init_lattice rounding") {
        const auto params = PhenotypeSet::make({1, 0}, {1e-4, 2e-4}, {1, 1}, 4e4);
        const auto grid = GridSpec::make(1.0, 0.1, 1e-4);
        const auto lat = init_lattice(InitialCondition::make({104, 5}, 0.0, {0, 0.5, 1.0}), grid, params);
        CHECK(lat.counts[0][0] == 10);
        CHECK(lat.counts[1][5] == 1);
        CHECK(lat.counts[0][6] == 0);
        const auto zero = init_lattice(InitialCondition::make({0, 0}, 0.0, {0, 0.5, 1.0}), grid, params);
        CHECK(zero.total(0) == 0);
        CHECK(zero.total(1) == 0);
    }

    TEST_CASE("run: t_end zero, determinism, seed sensitivity") {
        const auto params = PhenotypeSet::make({10, 0, 0}, {1e-4, 2e-4, 3e-4}, {1, 2, 3}, 4e4);
        const auto grid = GridSpec::make(30, 0.1, 1e-4);
        const auto model = Model::from_mobilities(params, grid);
        const auto ic = InitialCondition::make({38800, 19400, 12933}, 6e-2, {0, 10, 20, 30});
        const auto start = init_lattice(ic, grid, params);

        const std::vector<double> none{0.0};
        const auto still = run(model, start, 1, 0.0, none);
        REQUIRE(still.snapshots.size() == 1);
        CHECK(still.snapshots[0] == start);

        const std::vector<double> times{0.05, 0.1};
        const auto a = run(model, start, 5, 0.1, times);
        const auto b = run(model, start, 5, 0.1, times);
        const auto c = run(model, start, 6, 0.1, times);
        REQUIRE(a.snapshots.size() == 2);
        CHECK(a.snapshots == b.snapshots);
        CHECK(a.snapshots[1].step == 1000);
        CHECK(a.snapshots != c.snapshots);
        CHECK(a.snapshots[1].total(1) == start.total(1));
        CHECK(a.snapshots[1].total(2) == start.total(2));
    }

    TEST_CASE("ensemble is independent of thread count") {
        const auto params = PhenotypeSet::make({10, 0}, {1e-4, 2e-4}, {1, 2}, 4e4);
        const auto grid = GridSpec::make(5, 0.1, 1e-4);
        const auto model = Model::from_mobilities(params, grid);
        const auto start = init_lattice(InitialCondition::make({38800, 19400}, 6e-2, {0, 2, 5}), grid, params);
        const std::vector<double> times{0.02};
        const auto one = run_ensemble(model, start, 9, 4, 0.02, times, 1);
        const auto many = run_ensemble(model, start, 9, 4, 0.02, times, 3);
        REQUIRE(one.size() == 4);
        for (std::size_t r = 0; r < 4; ++r) {
            CHECK(one[r].seed == 9 + r);
            CHECK(one[r].snapshots == many[r].snapshots);
        }
    }

    TEST_CASE("ensemble_average") {
        const auto params = PhenotypeSet::make({10, 0}, {1e-4, 2e-4}, {1, 2}, 4e4);
        const auto grid = GridSpec::make(5, 0.1, 1e-4);
        const auto model = Model::from_mobilities(params, grid);
        const auto start = init_lattice(InitialCondition::make({38800, 19400}, 6e-2, {0, 2, 5}), grid, params);
        const std::vector<double> times{0.01};
        const auto single = run(model, start, 2, 0.01, times);

        std::vector<Trajectory> one{single};
        const auto mean_one = ensemble_average(one, 0.1, 1e-4);
        const auto direct = single.snapshots[0].densities(0.1, 1e-4);
        CHECK(mean_one[0].n == direct.n);

        std::vector<Trajectory> twice{single, single};
        CHECK(ensemble_average(twice, 0.1, 1e-4)[0].n == direct.n);

        const auto blank = lattice(2, 50);
        std::vector<Trajectory> zeros{run(model, blank, 1, 0.01, times), run(model, blank, 2, 0.01, times)};
        const auto zero_mean = ensemble_average(zeros, 0.1, 1e-4);
        for (const auto& n : zero_mean[0].n)
            for (double v : n) CHECK(v == 0.0);

        auto shifted = single;
        shifted.times[0] = 0.02;
        std::vector<Trajectory> mismatched{single, shifted};
        CHECK_THROWS_AS(ensemble_average(mismatched, 0.1, 1e-4), StructuralError);
    }

    TEST_CASE("alpha zero conserves counts exactly") {
        const auto params = PhenotypeSet::make({0, 0}, {1e-4, 2e-4}, {1, 2}, 4e4);
        const auto grid = GridSpec::make(5, 0.1, 1e-4);
        const auto model = Model::from_mobilities(params, grid);
        const auto start = init_lattice(InitialCondition::make({38800, 19400}, 6e-2, {0, 2, 5}), grid, params);
        RngStream rng(4);
        auto s = start;
        for (int k = 0; k < 200; ++k) s = step(s, model, rng);
        CHECK(s.total(0) == start.total(0));
        CHECK(s.total(1) == start.total(1));
    }

    TEST_CASE("master-equation oracle") {
        for (auto sampler : {Sampler::aggregated, Sampler::per_cell}) {
            for (const auto& c : segwave::testing::oracle_cases(sampler)) {
                const auto result = segwave::testing::single_step_oracle(c.start, c.model, c.seed);
                CAPTURE(c.seed);
                CHECK(result.max_enumeration_gap < 1e-12);
                CHECK(result.exact_where_deterministic);
                CHECK(result.max_z <= 3.0);
            }
        }
    }
}
