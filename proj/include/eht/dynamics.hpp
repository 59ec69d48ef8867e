#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "eht/belief_space.hpp"
#include "eht/game.hpp"
#include "eht/hypothesis_test.hpp"
#include "eht/rng.hpp"

namespace eht {

// Belief resampling kernel psi_i(b' | b) over one player's belief space.
class Resampler {
public:
    enum class Kind { uniform, table };

    static Resampler uniform(std::size_t belief_count);
    // Row-stochastic table; every entry must be >= floor > 0.
    static Resampler table(std::vector<std::vector<double>> rows, double floor);

    Kind kind() const { return kind_; }
    std::size_t size() const { return size_; }
    double floor() const { return floor_; }
    double probability(std::size_t from, std::size_t to) const;
    std::span<const double> row(std::size_t from) const;
    std::size_t sample(CounterRng& rng, std::size_t from) const;
    const std::vector<std::vector<double>>& rows() const { return rows_; }

private:
    Kind kind_ = Kind::uniform;
    std::size_t size_ = 0;
    double floor_ = 0.0;
    std::vector<std::vector<double>> rows_;  // empty for uniform
    std::vector<double> uniform_row_;
};

struct RunConfig {
    double xi = 0.05;
    std::vector<double> test_probs;
    std::vector<UtilityTransform> transforms;
    double sigma = 0.25;
    double tau = 0.2;
    int granularity = 4;
    DistanceMode distance_mode = DistanceMode::joint_product;
    std::vector<Resampler> resamplers;  // empty: uniform for every player
    std::uint64_t epoch_length = 0;     // 0: T(xi^u_bar) from required_sample_size
    std::uint64_t max_epoch_length = kDefaultMaxSampleSize;
    std::optional<double> u_bar_override;
    std::uint64_t epochs = 0;
    std::uint64_t seed = 0;

    void validate(std::size_t player_count) const;
};

struct PlayerEpoch {
    bool tested = false;
    bool rejected = false;
    bool explored = false;
    std::optional<std::size_t> resampled_to;  // present iff rejected or explored
    double statistic = 0.0;                   // test statistic, 0 when not tested
    double exploration_prob = 0.0;
};

struct EpochLog {
    std::uint64_t epoch = 0;
    std::size_t state_before = 0;
    std::size_t state_after = 0;
    std::vector<PlayerEpoch> players;
    std::vector<std::uint64_t> joint_counts;  // realized counts over A
    std::vector<double> anticipated;          // U_i(pi_i^k, b_i^k)
};

std::string to_ndjson(const EpochLog& log);

// Algorithm state shared by every epoch of a run: the enumerated state space,
// resolved u_bar, epoch length, and per-player kernels.
class LearningDynamics {
public:
    LearningDynamics(const StateSpace& space, RunConfig config);

    const StateSpace& space() const { return *space_; }
    const RunConfig& config() const { return config_; }
    double u_bar() const { return u_bar_; }
    double significance() const { return significance_; }
    std::uint64_t epoch_length() const { return epoch_length_; }
    bool epoch_length_capped() const { return epoch_length_capped_; }
    const Resampler& resampler(std::size_t player) const { return resamplers_[player]; }

    // Exploration probability xi^{f_i(U_i(pi_i, b_i))} at `state`; throws when
    // the exponent is not positive.
    double exploration_probability(std::size_t state, std::size_t player) const;

    // One epoch. Draw order: joint action counts, then per player in index
    // order: test coin, (test), exploration coin if not rejected, resample draw.
    EpochLog run_epoch(std::size_t state, CounterRng& rng, std::uint64_t epoch_index = 0) const;

    // K epochs from `initial` on stream (seed, 0).
    std::vector<EpochLog> run(std::size_t initial) const;
    std::vector<EpochLog> run(std::size_t initial, CounterRng& rng) const;

private:
    const StateSpace* space_;
    RunConfig config_;
    double u_bar_ = 0.0;
    double significance_ = 0.0;
    std::uint64_t epoch_length_ = 1;
    bool epoch_length_capped_ = false;
    std::vector<Resampler> resamplers_;
};

// Fraction of epochs whose post-epoch state is in `subset` (indexed by state).
double occupancy(std::span<const EpochLog> trajectory, const std::vector<bool>& subset);

}  // namespace eht
