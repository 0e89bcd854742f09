#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "segwave/core.hpp"
#include "segwave/error.hpp"

namespace segwave::ibm {

/// Integer cell counts N[i][j] on the lattice after `step` time-steps.
struct LatticeState {
    std::vector<std::vector<std::int64_t>> counts;
    std::int64_t step = 0;

    std::size_t phenotypes() const noexcept { return counts.size(); }
    std::size_t sites() const noexcept { return counts.empty() ? 0 : counts.front().size(); }

    /// n_{i,j} = N_{i,j} / dx, recomputed on every call.
    FieldState densities(double dx, double tau) const;
    std::vector<double> pressure(const PhenotypeSet& params, double dx) const;
    std::int64_t total(std::size_t phenotype) const noexcept;

    bool operator==(const LatticeState&) const = default;
};

/// Seeded 64-bit Mersenne Twister (std::mt19937_64, whose output sequence is
/// fixed by the C++ standard) plus portable uniform and binomial variates.
class RngStream {
public:
    static constexpr std::string_view algorithm = "mt19937_64";

    explicit RngStream(std::uint64_t seed) : engine_(seed), seed_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() {
        ++draws_;
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Exact Binomial(trials, prob) by sequential inversion, split into chunks
    /// of mean at most ~30 so the pmf recursion never underflows.
    std::int64_t binomial(std::int64_t trials, double prob);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t draws() const noexcept { return draws_; }

private:
    std::int64_t binomial_small_mean(std::int64_t trials, double prob);

    std::mt19937_64 engine_;
    std::uint64_t seed_;
    std::uint64_t draws_ = 0;
};

struct MoveProbs {
    double left = 0.0;
    double right = 0.0;
    double stay = 1.0;
};

struct DivisionProbs {
    double divide = 0.0;
    double die = 0.0;
    double quiet = 1.0;
};

/// Movement down the pressure gradient. Throws NumericalError when
/// left + right >= 1.
MoveProbs movement_probs(double p_here, double p_left, double p_right, double gamma,
                         double p_bar);

/// Division/death with probabilities tau*(alpha G(p))_+ and tau*(alpha G(p))_-.
/// Throws NumericalError when the quiescence probability would be negative.
DivisionProbs division_death_probs(double alpha, double p, double p_bar, double tau);

/// How a step draws its random events. Both samplers realise the same Markov
/// chain: cells sharing a site and phenotype are exchangeable given the
/// step-start pressures, so per-cell Bernoulli trials and per-site binomial
/// counts have the same joint law.
enum class Sampler {
    per_cell,    ///< one uniform per process per cell
    aggregated,  ///< binomial counts per (site, phenotype, outcome)
};

struct Model {
    PhenotypeSet params;
    GridSpec grid;               ///< must carry tau > 0
    std::vector<double> gamma;   ///< per-phenotype sensitivities
    Sampler sampler = Sampler::aggregated;

    /// Sensitivities from the scaling map gamma_i = 2 tau p_bar mu_i / dx^2.
    static Model from_mobilities(PhenotypeSet params, GridSpec grid,
                                 Sampler sampler = Sampler::aggregated);
};

/// Raised when a probability bound fails during a step; carries the state the
/// step started from for post-mortem dumps.
class ProbabilityBoundError : public NumericalError {
public:
    ProbabilityBoundError(const std::string& what, LatticeState state)
        : NumericalError(what), state_(std::move(state)) {}
    const LatticeState& state() const noexcept { return state_; }

private:
    LatticeState state_;
};

/// One time-step: every cell first attempts a move (left/right/stay), then
/// divides, dies or stays quiescent. All probabilities use the pressures at
/// the start of the step; division/death use the pressure of the site the cell
/// occupied at step start. Moves off the lattice are aborted (zero flux).
/// Sites are visited site-major, phenotype-minor.
LatticeState step(const LatticeState& state, const Model& model, RngStream& rng);

/// Counts from the initial densities: N = round(n(0, x_j) * dx), half away from zero.
LatticeState init_lattice(const InitialCondition& ic, const GridSpec& grid,
                          const PhenotypeSet& params);

struct Trajectory {
    std::vector<double> times;  ///< k * tau at each snapshot
    std::vector<LatticeState> snapshots;
    std::uint64_t seed = 0;
    std::uint64_t draws = 0;
};

/// Step index for a requested time (nearest multiple of tau).
std::int64_t step_index(double t, double tau);

/// Runs from `initial` to t_end, storing copies at each requested time
/// (rounded to the nearest step). Times must be in [0, t_end].
Trajectory run(const Model& model, const LatticeState& initial, std::uint64_t seed, double t_end,
               std::span<const double> snapshot_times);

/// Independent replicates with seeds seed, seed+1, ..., run on `threads` workers.
std::vector<Trajectory> run_ensemble(const Model& model, const LatticeState& initial,
                                     std::uint64_t seed, std::size_t replicates, double t_end,
                                     std::span<const double> snapshot_times, unsigned threads);

/// Replicate-mean densities at each snapshot time.
std::vector<FieldState> ensemble_average(std::span<const Trajectory> trajectories, double dx,
                                         double tau);

}  // namespace segwave::ibm
