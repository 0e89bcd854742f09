#include "segwave/ibm.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <fmt/format.h>

namespace segwave::ibm {

FieldState LatticeState::densities(double dx, double tau) const {
    FieldState fields;
    fields.t = static_cast<double>(step) * tau;
    fields.n.resize(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        fields.n[i].resize(counts[i].size());
        std::transform(counts[i].begin(), counts[i].end(), fields.n[i].begin(),
                       [dx](std::int64_t c) { return static_cast<double>(c) / dx; });
    }
    return fields;
}

std::vector<double> LatticeState::pressure(const PhenotypeSet& params, double dx) const {
    std::vector<double> p(sites(), 0.0);
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double w = params.omega[i] / dx;
        for (std::size_t j = 0; j < p.size(); ++j) p[j] += w * static_cast<double>(counts[i][j]);
    }
    return p;
}

std::int64_t LatticeState::total(std::size_t phenotype) const noexcept {
    std::int64_t sum = 0;
    for (auto c : counts[phenotype]) sum += c;
    return sum;
}

std::int64_t RngStream::binomial_small_mean(std::int64_t trials, double prob) {
    const double q = 1.0 - prob;
    const double odds = prob / q;
    double f = std::exp(static_cast<double>(trials) * std::log1p(-prob));
    double u = uniform();
    std::int64_t k = 0;
    while (u > f && k < trials) {
        u -= f;
        f *= odds * static_cast<double>(trials - k) / static_cast<double>(k + 1);
        ++k;
    }
    return k;
}

std::int64_t RngStream::binomial(std::int64_t trials, double prob) {
    if (trials <= 0 || prob <= 0.0) return 0;
    if (prob >= 1.0) return trials;
    if (prob > 0.5) return trials - binomial(trials, 1.0 - prob);
    constexpr double kChunkMean = 30.0;
    const auto chunk = std::max<std::int64_t>(1, static_cast<std::int64_t>(kChunkMean / prob));
    std::int64_t total = 0;
    for (std::int64_t remaining = trials; remaining > 0;) {
        const std::int64_t m = std::min(remaining, chunk);
        total += binomial_small_mean(m, prob);
        remaining -= m;
    }
    return total;
}

MoveProbs movement_probs(double p_here, double p_left, double p_right, double gamma,
                         double p_bar) {
    MoveProbs m;
    m.left = gamma * std::max(0.0, p_here - p_left) / (2.0 * p_bar);
    m.right = gamma * std::max(0.0, p_here - p_right) / (2.0 * p_bar);
    if (!(m.left + m.right < 1.0)) {
        throw NumericalError(fmt::format(
            "move probabilities left={} right={} sum to >= 1 (pressures here={}, left={}, right={})",
            m.left, m.right, p_here, p_left, p_right));
    }
    m.stay = 1.0 - m.left - m.right;
    return m;
}

DivisionProbs division_death_probs(double alpha, double p, double p_bar, double tau) {
    DivisionProbs d;
    if (alpha == 0.0) return d;
    const double rate = tau * alpha * growth(p, p_bar);
    d.divide = std::max(0.0, rate);
    d.die = std::max(0.0, -rate);
    d.quiet = 1.0 - std::abs(rate);
    if (d.quiet < 0.0) {
        throw NumericalError(fmt::format(
            "division/death probability {} exceeds one at pressure {}; reduce tau", std::abs(rate), p));
    }
    return d;
}

Model Model::from_mobilities(PhenotypeSet params, GridSpec grid, Sampler sampler) {
    auto gamma = gamma_from_mu(params, grid);
    return Model{std::move(params), grid, std::move(gamma), sampler};
}

namespace {

void step_site_aggregated(std::int64_t cells, std::size_t j, const MoveProbs& move,
                          const DivisionProbs& event, std::vector<std::int64_t>& next,
                          RngStream& rng) {
    const std::int64_t n_left = move.left > 0.0 ? rng.binomial(cells, move.left) : 0;
    const std::int64_t n_right =
        move.right > 0.0 ? rng.binomial(cells - n_left, move.right / (1.0 - move.left)) : 0;
    const std::int64_t n_stay = cells - n_left - n_right;

    const bool dividing = event.divide > 0.0;
    const double event_prob = dividing ? event.divide : event.die;
    auto settle = [&](std::int64_t group, std::size_t dest) {
        if (group == 0) return;
        const std::int64_t k = event_prob > 0.0 ? rng.binomial(group, event_prob) : 0;
        next[dest] += dividing ? group + k : group - k;
    };
    settle(n_stay, j);
    if (n_left > 0) settle(n_left, j - 1);
    if (n_right > 0) settle(n_right, j + 1);
}

void step_site_per_cell(std::int64_t cells, std::size_t j, const MoveProbs& move,
                        const DivisionProbs& event, std::vector<std::int64_t>& next,
                        RngStream& rng) {
    for (std::int64_t c = 0; c < cells; ++c) {
        const double u = rng.uniform();
        std::size_t dest = j;
        if (u < move.left) {
            dest = j - 1;
        } else if (u < move.left + move.right) {
            dest = j + 1;
        }
        const double v = rng.uniform();
        if (v < event.divide) {
            next[dest] += 2;
        } else if (v >= event.divide + event.die) {
            next[dest] += 1;
        }
    }
}

}  // namespace

LatticeState step(const LatticeState& state, const Model& model, RngStream& rng) {
    const auto& params = model.params;
    const std::size_t count = state.phenotypes();
    const std::size_t sites = state.sites();
    if (count != params.count() || sites != model.grid.cells) {
        throw StructuralError(fmt::format("lattice {}x{} does not match model {}x{}", count, sites,
                                          params.count(), model.grid.cells));
    }
    const auto p = state.pressure(params, model.grid.dx);

    LatticeState next;
    next.counts.assign(count, std::vector<std::int64_t>(sites, 0));
    next.step = state.step + 1;

    for (std::size_t j = 0; j < sites; ++j) {
        // Ghost neighbours mirror the boundary site, so no move off the lattice is attempted.
        const double p_left = j > 0 ? p[j - 1] : p[j];
        const double p_right = j + 1 < sites ? p[j + 1] : p[j];
        for (std::size_t i = 0; i < count; ++i) {
            const std::int64_t cells = state.counts[i][j];
            if (cells == 0) continue;
            MoveProbs move;
            DivisionProbs event;
            try {
                move = movement_probs(p[j], p_left, p_right, model.gamma[i], params.p_bar);
                event = division_death_probs(params.alpha[i], p[j], params.p_bar, model.grid.tau);
            } catch (const NumericalError& e) {
                throw ProbabilityBoundError(
                    fmt::format("step {}: site {} phenotype {}: {}", state.step, j, i + 1, e.what()),
                    state);
            }
            if (model.sampler == Sampler::aggregated) {
                step_site_aggregated(cells, j, move, event, next.counts[i], rng);
            } else {
                step_site_per_cell(cells, j, move, event, next.counts[i], rng);
            }
        }
    }
    return next;
}

LatticeState init_lattice(const InitialCondition& ic, const GridSpec& grid,
                          const PhenotypeSet& params) {
    const auto fields = build_initial(ic, grid, params);
    LatticeState state;
    state.counts.resize(fields.n.size());
    for (std::size_t i = 0; i < fields.n.size(); ++i) {
        state.counts[i].resize(grid.cells);
        for (std::size_t j = 0; j < grid.cells; ++j) {
            // std::llround rounds halfway cases away from zero.
            state.counts[i][j] = std::llround(fields.n[i][j] * grid.dx);
        }
    }
    return state;
}

std::int64_t step_index(double t, double tau) {
    return static_cast<std::int64_t>(std::llround(t / tau));
}

Trajectory run(const Model& model, const LatticeState& initial, std::uint64_t seed, double t_end,
               std::span<const double> snapshot_times) {
    const double tau = model.grid.tau;
    if (!(tau > 0.0)) throw ConfigError("ibm::run: tau must be > 0");
    if (!(t_end >= 0.0)) throw ConfigError(fmt::format("ibm::run: t_end = {} must be >= 0", t_end));
    const std::int64_t last = step_index(t_end, tau);

    std::vector<std::int64_t> wanted;
    wanted.reserve(snapshot_times.size());
    for (double t : snapshot_times) {
        const auto k = step_index(t, tau);
        if (t < 0.0 || k > last) {
            throw ConfigError(fmt::format("snapshot time {} outside [0, {}]", t, t_end));
        }
        if (!wanted.empty() && k < wanted.back()) {
            throw ConfigError("snapshot times must be non-decreasing");
        }
        wanted.push_back(k);
    }

    Trajectory traj;
    traj.seed = seed;
    RngStream rng(seed);
    LatticeState state = initial;
    state.step = 0;
    std::size_t next = 0;
    for (std::int64_t k = 0;; ++k) {
        while (next < wanted.size() && wanted[next] == k) {
            traj.times.push_back(static_cast<double>(k) * tau);
            traj.snapshots.push_back(state);
            ++next;
        }
        if (k >= last) break;
        state = step(state, model, rng);
    }
    traj.draws = rng.draws();
    return traj;
}

std::vector<Trajectory> run_ensemble(const Model& model, const LatticeState& initial,
                                     std::uint64_t seed, std::size_t replicates, double t_end,
                                     std::span<const double> snapshot_times, unsigned threads) {
    if (replicates == 0) throw ConfigError("replicates must be >= 1");
    std::vector<Trajectory> out(replicates);
    std::atomic<std::size_t> cursor{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t r = cursor++; r < replicates; r = cursor++) {
            try {
                out[r] = run(model, initial, seed + r, t_end, snapshot_times);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                cursor = replicates;
            }
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(replicates)));
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
        worker();
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

std::vector<FieldState> ensemble_average(std::span<const Trajectory> trajectories, double dx,
                                         double tau) {
    if (trajectories.empty()) throw StructuralError("ensemble_average: no trajectories");
    const auto& ref = trajectories.front();
    for (const auto& tr : trajectories) {
        if (tr.times != ref.times) {
            throw StructuralError("ensemble_average: replicates have different snapshot schedules");
        }
        for (std::size_t s = 0; s < tr.snapshots.size(); ++s) {
            if (tr.snapshots[s].phenotypes() != ref.snapshots[s].phenotypes() ||
                tr.snapshots[s].sites() != ref.snapshots[s].sites()) {
                throw StructuralError("ensemble_average: replicates have different lattices");
            }
        }
    }
    const double scale = 1.0 / (dx * static_cast<double>(trajectories.size()));
    std::vector<FieldState> mean(ref.snapshots.size());
    for (std::size_t s = 0; s < ref.snapshots.size(); ++s) {
        const auto& shape = ref.snapshots[s];
        FieldState& f = mean[s];
        f.t = static_cast<double>(shape.step) * tau;
        f.n.assign(shape.phenotypes(), std::vector<double>(shape.sites(), 0.0));
        for (std::size_t i = 0; i < shape.phenotypes(); ++i) {
            for (std::size_t j = 0; j < shape.sites(); ++j) {
                std::int64_t sum = 0;
                for (const auto& tr : trajectories) sum += tr.snapshots[s].counts[i][j];
                f.n[i][j] = static_cast<double>(sum) * scale;
            }
        }
    }
    return mean;
}

}  // namespace segwave::ibm
