#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "eht/game.hpp"

namespace eht {

// Raised when an enumeration would exceed the configured state cap.
class CapacityError : public std::runtime_error {
public:
    CapacityError(const std::string& what, std::uint64_t attempted, std::uint64_t cap)
        : std::runtime_error(what + ": " + std::to_string(attempted) + " exceeds cap " + std::to_string(cap)),
          attempted_(attempted), cap_(cap) {}
    std::uint64_t attempted() const { return attempted_; }
    std::uint64_t cap() const { return cap_; }

private:
    std::uint64_t attempted_;
    std::uint64_t cap_;
};

inline constexpr std::uint64_t kDefaultStateCap = 1'000'000;

// kDefaultStateCap unless EHT_STATE_CAP holds a positive integer.
std::uint64_t state_cap();

// Integer counts m_k out of M; the simplex point is m / M.
using GridPoint = std::vector<int>;

// C(M + k - 1, k - 1), saturating at UINT64_MAX.
std::uint64_t simplex_point_count(std::size_t dimension, int granularity);

// All compositions of M into `dimension` nonnegative parts, ascending lexicographic.
std::vector<GridPoint> enumerate_simplex(std::size_t dimension, int granularity,
                                         std::uint64_t cap = state_cap());

std::vector<double> to_weights(const GridPoint& point, int granularity);

// l2-nearest grid point; ties go to the lexicographically smallest count vector.
GridPoint nearest_grid_point(std::span<const double> target, int granularity);

// Player `owner`'s belief: one grid marginal per opponent, opponents ascending.
struct BeliefProfile {
    std::size_t owner = 0;
    int granularity = 1;
    std::vector<GridPoint> marginals;

    std::vector<double> marginal(std::size_t k) const { return to_weights(marginals.at(k), granularity); }
    bool operator==(const BeliefProfile&) const = default;
};

// Distribution over A_{-i} with b_i(a_{-i}) = prod_j b_ij(a_j).
std::vector<double> product_distribution(const BeliefProfile& belief);
std::vector<double> product_distribution(std::span<const std::vector<double>> marginals);

BeliefProfile nearest_grid_belief(std::size_t owner, std::span<const std::vector<double>> target, int granularity);

std::vector<double> action_utilities_vs_belief(const Game& game, std::size_t player, const BeliefProfile& belief);
MixedStrategy smooth_best_response(const Game& game, std::size_t player, const BeliefProfile& belief, double sigma);

// How ||b_i - pi_{-i}||_2 is measured.
enum class DistanceMode { joint_product, concatenated_marginals };

DistanceMode parse_distance_mode(const std::string& name);
std::string to_string(DistanceMode mode);

// Distance between a belief and the opponents' strategies (opponents ascending).
double belief_distance(std::span<const std::vector<double>> belief_marginals,
                       std::span<const MixedStrategy> opponent_strategies, DistanceMode mode);

double l2_distance(std::span<const double> a, std::span<const double> b);

struct SystemState {
    std::vector<BeliefProfile> beliefs;
    StrategyProfile strategies;
};

// Per-player discretized belief space B_i with cached smooth best responses.
struct PlayerBeliefs {
    std::vector<BeliefProfile> beliefs;
    std::vector<std::vector<double>> products;  // product distribution over A_{-i}
    std::vector<MixedStrategy> responses;       // Br_i^sigma(b_i)
    std::vector<double> anticipated;            // U_i(Br_i^sigma(b_i), b_i)
};

// The finite state space Z. State index is mixed radix over per-player belief
// indices, player 0 most significant.
class StateSpace {
public:
    StateSpace(Game game, int granularity, double sigma, std::uint64_t cap = state_cap());

    const Game& game() const { return game_; }
    int granularity() const { return granularity_; }
    double sigma() const { return sigma_; }
    std::size_t player_count() const { return game_.player_count(); }
    std::size_t size() const { return size_; }

    const PlayerBeliefs& player(std::size_t i) const { return players_.at(i); }
    std::size_t belief_count(std::size_t i) const { return players_.at(i).beliefs.size(); }

    std::size_t belief_id(std::size_t state, std::size_t player) const;
    std::vector<std::size_t> belief_ids(std::size_t state) const;
    std::size_t state_index(std::span<const std::size_t> belief_ids) const;

    const MixedStrategy& strategy(std::size_t state, std::size_t player) const {
        return players_[player].responses[belief_id(state, player)];
    }
    double anticipated_utility(std::size_t state, std::size_t player) const {
        return players_[player].anticipated[belief_id(state, player)];
    }
    StrategyProfile strategies(std::size_t state) const;
    // Realized U_i(pi) of the state's strategy profile.
    double realized_utility(std::size_t state, std::size_t player) const;

    // ||b_i - pi_{-i}||_2 under `mode`.
    double distance(std::size_t state, std::size_t player, DistanceMode mode) const;

    SystemState state(std::size_t index) const;

private:
    Game game_;
    int granularity_;
    double sigma_;
    std::vector<PlayerBeliefs> players_;
    std::vector<std::size_t> stride_;
    std::size_t size_ = 1;
};

inline StateSpace enumerate_states(const Game& game, int granularity, double sigma,
                                   std::uint64_t cap = state_cap()) {
    return StateSpace(game, granularity, sigma, cap);
}

// Enumerates B_i = prod_{j != i} Delta_j^M for one player.
std::vector<BeliefProfile> enumerate_beliefs(const Game& game, std::size_t player, int granularity,
                                             std::uint64_t cap = state_cap());

// Im(Br_i^sigma) over B_i, deduplicated within 1e-12 (first occurrence kept).
std::vector<MixedStrategy> br_image(const Game& game, std::size_t player, int granularity, double sigma,
                                    std::uint64_t cap = state_cap());

}  // namespace eht
