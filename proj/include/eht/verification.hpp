#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "eht/belief_space.hpp"
#include "eht/game.hpp"

namespace eht {

// Closed-form parameter bounds that make every consistent state an
// epsilon-Nash equilibrium, together with the supplied values.
struct ParameterCertificate {
    double epsilon = 0.0;
    double sigma = 0.0;
    double tau = 0.0;
    int granularity = 0;

    double sigma_bound = 0.0;  // sigma <= eps / (2 ln max|A_i|)
    double tau_bound = 0.0;    // tau <= eps sigma / (2 sqrt|A| umax max|A_i||A_-i|)
    double M_bound = 0.0;      // M >= (|I| max|A_i| / tau)(1 + sqrt(max|A_i|)/sigma umax max|A_i||A_-i| |I|)
    bool sigma_ok = false;
    bool tau_ok = false;
    bool M_ok = false;

    // Game constants entering the bounds.
    std::size_t players = 0;
    std::size_t max_actions = 0;
    std::size_t joint_profiles = 0;
    std::size_t max_action_times_opponents = 0;
    double max_payoff = 0.0;  // max |u_i(a)|

    bool passes() const { return sigma_ok && tau_ok && M_ok; }
};

ParameterCertificate check_assumption1(const Game& game, double epsilon, double sigma, double tau, int granularity);

struct FixedPoint {
    StrategyProfile profile;
    double residual = 0.0;  // ||pi - Br(pi)||_inf at the returned profile
    std::uint64_t iterations = 0;
};

inline constexpr double kFixedPointTolerance = 1e-10;
inline constexpr std::uint64_t kFixedPointMaxIterations = 100000;

// Damped iteration pi <- (1 - eta) pi + eta Br(pi) with eta = 0.5 from the
// uniform profile. Throws ConvergenceError after max_iter.
FixedPoint find_smooth_br_fixed_point(const Game& game, double sigma, double tol = kFixedPointTolerance,
                                      std::uint64_t max_iter = kFixedPointMaxIterations);

struct Prop2Report {
    ParameterCertificate certificate;
    FixedPoint fixed_point;
    std::vector<BeliefProfile> beliefs;  // b-dagger
    StrategyProfile strategies;          // pi-dagger = Br(b-dagger)
    // Largest value over players of each inequality's left-hand side.
    double belief_to_fixed_point = 0.0;  // ||pi*_{-i} - b_i||
    double response_shift = 0.0;         // ||Br_i(pi*) - Br_i(b_i)||
    double belief_to_response = 0.0;     // ||b_i - pi-dagger_{-i}||
    double epsilon_gap = 0.0;
    bool belief_to_fixed_point_ok = false;
    bool response_shift_ok = false;
    bool belief_to_response_ok = false;
    bool epsilon_gap_ok = false;

    bool passes() const {
        return belief_to_fixed_point_ok && response_shift_ok && belief_to_response_ok && epsilon_gap_ok;
    }
};

// Builds the consistent state near the logit fixed point without enumerating Z.
Prop2Report verify_prop2_constructive(const Game& game, double epsilon, double sigma, double tau, int granularity,
                                      DistanceMode mode = DistanceMode::joint_product);

struct Assumption2Witness {
    std::size_t player = 0;
    std::vector<std::size_t> opponent_beliefs;  // belief ids of the other players, ascending
    std::optional<std::size_t> witness;         // belief id in B_i
    double margin = 0.0;  // best min of the two distances found over B_i
};

struct Assumption2Report {
    bool passes = false;
    std::vector<Assumption2Witness> cells;          // every (i, b_-i) examined
    std::optional<Assumption2Witness> first_failure;
};

// Exhaustive search over every player and every opponents' belief profile.
Assumption2Report check_assumption2(const StateSpace& space, double tau,
                                    DistanceMode mode = DistanceMode::joint_product);

struct SimpleConditionReport {
    std::vector<std::size_t> image_sizes;  // |Im(Br_i)|
    bool image_condition = false;          // every |Im(Br_i)| > |I|
    double tau_threshold = 0.0;            // min over cells of max over b~_i of min distance
    bool tau_condition = false;            // tau < threshold, strictly
    bool passes() const { return image_condition && tau_condition; }
};

SimpleConditionReport check_simple_condition(const StateSpace& space, double tau,
                                             DistanceMode mode = DistanceMode::joint_product);

struct LipschitzReport {
    double max_ratio = 0.0;
    std::uint64_t trials = 0;
};

// Random belief pairs per player; ratio sigma ||dBr|| / ||dU||, 0 when dU = 0.
LipschitzReport verify_lipschitz(const Game& game, double sigma, std::uint64_t trials, std::uint64_t seed);

}  // namespace eht
