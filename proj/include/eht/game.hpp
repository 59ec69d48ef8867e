#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace eht {

// Probability vector over one player's actions.
using MixedStrategy = std::vector<double>;
// One mixed strategy per player.
using StrategyProfile = std::vector<MixedStrategy>;

inline constexpr double kSimplexTolerance = 1e-9;

// Finite normal-form game with a dense payoff tensor.
//
// Joint action profiles are indexed in mixed radix with player 0 as the most
// significant digit, so index order is the lexicographic order of
// (a_0, ..., a_{n-1}). Opponent profiles a_{-i} follow the same convention
// over the opponents in ascending player order.
class Game {
public:
    // `payoffs` is laid out as payoffs[player * profile_count + profile].
    Game(std::vector<std::size_t> action_counts, std::vector<double> payoffs);

    std::size_t player_count() const { return action_counts_.size(); }
    std::size_t action_count(std::size_t player) const { return action_counts_.at(player); }
    const std::vector<std::size_t>& action_counts() const { return action_counts_; }
    std::size_t profile_count() const { return profile_count_; }
    std::size_t opponent_profile_count(std::size_t player) const {
        return profile_count_ / action_counts_.at(player);
    }

    double payoff(std::size_t player, std::size_t profile) const {
        return payoffs_[player * profile_count_ + profile];
    }
    const std::vector<double>& payoffs() const { return payoffs_; }

    std::size_t profile_index(std::span<const std::size_t> actions) const;
    std::vector<std::size_t> decode_profile(std::size_t profile) const;

    // Joint profile formed by `own_action` of `player` and opponent profile `opponents`.
    std::size_t join(std::size_t player, std::size_t own_action, std::size_t opponents) const {
        return join_[player][own_action * opponent_profile_count(player) + opponents];
    }
    // Opponent-profile index of a joint profile, from the point of view of `player`.
    std::size_t opponents_of(std::size_t player, std::size_t profile) const {
        return split_[player][profile];
    }

    double max_payoff(std::size_t player) const;
    double min_payoff(std::size_t player) const;
    // max over players and profiles of |u_i(a)|
    double max_abs_payoff() const;

    void check_player(std::size_t player) const;

private:
    std::vector<std::size_t> action_counts_;
    std::size_t profile_count_ = 1;
    std::vector<double> payoffs_;
    std::vector<std::vector<std::size_t>> join_;
    std::vector<std::vector<std::size_t>> split_;
};

// Throws std::invalid_argument unless weights are nonnegative and sum to one.
void validate_mixed_strategy(std::span<const double> weights, std::size_t expected_size);
void validate_profile(const Game& game, const StrategyProfile& profile);

// Product distribution over A_{-i} induced by the opponents' strategies in `profile`.
std::vector<double> opponent_distribution(const Game& game, std::size_t player,
                                          const StrategyProfile& profile);

// U_i(pi) = sum_a u_i(a) prod_j pi_j(a_j)
double expected_utility(const Game& game, std::size_t player, const StrategyProfile& profile);

// U_i(a_i, b) for every own action a_i, against a distribution over A_{-i}.
std::vector<double> action_utilities(const Game& game, std::size_t player,
                                     std::span<const double> opponent_dist);

// Logit choice with temperature sigma; max-shifted so small sigma cannot overflow.
MixedStrategy logit_response(std::span<const double> utilities, double sigma);

MixedStrategy smooth_best_response(const Game& game, std::size_t player,
                                   std::span<const double> opponent_dist, double sigma);

// max_i [max_{a_i} U_i(a_i, pi_{-i}) - U_i(pi)]. Pure deviations suffice since
// U_i is linear in pi_i.
double epsilon_ne_gap(const Game& game, const StrategyProfile& profile);

// Increasing, positive map applied to anticipated utility before it is used as
// an exploration exponent.
class UtilityTransform {
public:
    enum class Kind { identity, affine, table };

    static UtilityTransform identity();
    static UtilityTransform affine(double scale, double shift);
    // Piecewise-linear through (breakpoints[k], values[k]); clamps outside the table.
    static UtilityTransform table(std::vector<double> breakpoints, std::vector<double> values);

    double operator()(double u) const;

    Kind kind() const { return kind_; }
    double scale() const { return scale_; }
    double shift() const { return shift_; }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<double>& values() const { return values_; }

    // Throws unless the transform is strictly increasing on [lo, hi] and
    // strictly positive there.
    void validate_on_range(double lo, double hi) const;

    std::string describe() const;

    bool operator==(const UtilityTransform&) const = default;

private:
    Kind kind_ = Kind::identity;
    double scale_ = 1.0;
    double shift_ = 0.0;
    std::vector<double> breakpoints_;
    std::vector<double> values_;
};

inline double transform_utility(const UtilityTransform& transform, double u) { return transform(u); }

// sum_i f_i(max_a u_i(a)) + 1. Dominates max_pi sum_i f_i(U_i(pi)) because each
// f_i is increasing and U_i(pi) never exceeds the largest payoff.
double u_bar(const Game& game, std::span<const UtilityTransform> transforms);

}  // namespace eht
