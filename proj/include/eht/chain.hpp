#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "eht/belief_space.hpp"
#include "eht/dynamics.hpp"
#include "eht/game.hpp"

namespace eht {

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual)
        : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

// Inputs of the exact chain besides the state space.
struct ChainParameters {
    std::vector<double> test_probs;
    std::vector<UtilityTransform> transforms;
    std::vector<Resampler> resamplers;  // one per player
    double tau = 0.2;
    DistanceMode distance_mode = DistanceMode::joint_product;
    double u_bar = 0.0;
};

// Resolves u_bar and default uniform resamplers from a run configuration.
ChainParameters chain_parameters(const StateSpace& space, const RunConfig& config);

// Per-(state, player) consistency ||b_i - pi_{-i}||_2 <= tau.
class ConsistencyTable {
public:
    ConsistencyTable(const StateSpace& space, double tau, DistanceMode mode);

    bool player_consistent(std::size_t state, std::size_t player) const {
        return flags_[state * players_ + player] != 0;
    }
    bool state_consistent(std::size_t state) const { return state_flags_[state]; }
    const std::vector<bool>& state_flags() const { return state_flags_; }
    double distance(std::size_t state, std::size_t player) const { return distances_[state * players_ + player]; }
    std::vector<std::size_t> consistent_states() const;

private:
    std::size_t players_;
    std::vector<unsigned char> flags_;
    std::vector<double> distances_;
    std::vector<bool> state_flags_;
};

// Indices of Z-dagger, ascending.
std::vector<std::size_t> consistent_states(const StateSpace& space, double tau, DistanceMode mode);

struct TransitionModel {
    std::size_t state_count = 0;
    std::vector<double> entries;  // row-major
    double xi = 0.0;              // 0 for the unperturbed chain
    std::string error_model = "idealized";

    double at(std::size_t from, std::size_t to) const { return entries[from * state_count + to]; }
    std::span<const double> row(std::size_t from) const {
        return {entries.data() + from * state_count, state_count};
    }
    double max_row_sum_error() const;
};

inline constexpr std::size_t kDenseSolveLimit = 2000;

// P^0: consistent players keep their belief; inconsistent players test with
// probability gamma_i and always resample on a test.
TransitionModel unperturbed_matrix(const StateSpace& space, const ConsistencyTable& consistency,
                                   std::span<const double> test_probs, std::span<const Resampler> resamplers);

// P^xi with test errors at their bounds: consistent players reject with
// probability xi^u_bar, inconsistent ones with 1 - xi^u_bar; after a
// non-rejection a player explores with probability xi^{f_i(U_i)}.
TransitionModel idealized_transition_matrix(const StateSpace& space, const ConsistencyTable& consistency,
                                            const ChainParameters& params, double xi);

// Single entry of the idealized P^xi, without building the matrix.
double idealized_entry(const StateSpace& space, const ConsistencyTable& consistency, const ChainParameters& params,
                       std::size_t from, std::size_t to, double xi);

// Unique stationary distribution. GTH elimination up to kDenseSolveLimit
// states, power iteration beyond. Throws std::domain_error on a reducible
// chain and ConvergenceError when the residual target is missed.
std::vector<double> stationary_distribution(const TransitionModel& model);

// Strongly connected components of the positive-support digraph.
std::vector<std::vector<std::size_t>> strongly_connected_components(const TransitionModel& model);
// Closed SCCs, each sorted, ordered by smallest member.
std::vector<std::vector<std::size_t>> recurrent_classes(const TransitionModel& model);

// Sum of f_i(U_i(pi_i, b_i)) over players consistent at `from` whose belief differs at `to`.
double edge_resistance(const StateSpace& space, const ConsistencyTable& consistency,
                       std::span<const UtilityTransform> transforms, std::size_t from, std::size_t to);

// Dense |Z| x |Z| matrix of one-step resistances.
std::vector<double> all_edge_resistances(const StateSpace& space, const ConsistencyTable& consistency,
                                         std::span<const UtilityTransform> transforms);

// Dijkstra over a dense nonnegative weight matrix.
std::vector<double> min_path_resistances_from(std::span<const double> edge_weights, std::size_t node_count,
                                              std::size_t source);
double min_path_resistance(std::size_t from, std::size_t to, std::span<const double> edge_weights,
                           std::size_t node_count);

// min_i f_i(U_i(pi_i, b_i)) at `state`.
double node_value(const StateSpace& space, std::span<const UtilityTransform> transforms, std::size_t state);

struct ResistanceGraph {
    std::vector<std::size_t> nodes;    // consistent-state indices
    std::vector<double> node_values;   // min_i f_i(U_i(pi_i, b_i))
    std::vector<double> weights;       // k x k, r-hat from row node to column node
    std::size_t size() const { return nodes.size(); }
    double weight(std::size_t from, std::size_t to) const { return weights[from * nodes.size() + to]; }
};

// Edge weights from the closed form (r-hat equals the source node value).
ResistanceGraph build_resistance_graph(const StateSpace& space, const ConsistencyTable& consistency,
                                       std::span<const UtilityTransform> transforms);
// Edge weights from shortest paths over all one-step resistances in Z.
ResistanceGraph build_resistance_graph_by_paths(const StateSpace& space, const ConsistencyTable& consistency,
                                                std::span<const UtilityTransform> transforms);

// phi(z) = sum over consistent w != z of node_value(w). Summation runs in node
// order so the brute-force tree sum reproduces it bit for bit.
std::vector<double> stochastic_potential_closed_form(const ResistanceGraph& graph);

inline constexpr std::size_t kBruteForceTreeLimit = 8;
inline constexpr std::size_t kArborescenceLimit = 1000;

// Minimum j-tree weight for every root j: exhaustive enumeration up to
// kBruteForceTreeLimit nodes, Chu-Liu/Edmonds up to kArborescenceLimit.
std::vector<double> stochastic_potential_bruteforce(const ResistanceGraph& graph);

// Ties in node values and potentials are resolved with this relative tolerance.
inline constexpr double kTieTolerance = 1e-9;

struct StableSet {
    std::vector<std::size_t> members;          // state indices
    std::vector<std::size_t> by_potential;     // argmin phi
    std::vector<std::size_t> by_node_value;    // argmax node value
    bool methods_agree = false;
    double max_node_value = 0.0;
};

StableSet stochastically_stable_set(const ResistanceGraph& graph, std::span<const double> potentials);

struct CorollaryReport {
    std::string case_name;                     // "identical_transforms", "dominated_player", "general"
    std::size_t dominated_player = 0;          // the player i-hat in the dominated case
    std::vector<std::size_t> target;           // predicted refinement set
    bool matches_stable_set = false;
    std::vector<std::pair<double, double>> utility_ranges;  // per player, over consistent states
};

CorollaryReport corollary_selection(const StateSpace& space, const ResistanceGraph& graph,
                                    std::span<const UtilityTransform> transforms, const StableSet& stable);

struct SlopeCheck {
    std::size_t from = 0;
    std::size_t to = 0;
    double target = 0.0;   // r_{zz'}
    double slope = 0.0;    // fitted d log P / d log xi
    double relative_error = 0.0;
};

SlopeCheck perturbation_slope_check(const StateSpace& space, const ConsistencyTable& consistency,
                                    const ChainParameters& params, std::size_t from, std::size_t to,
                                    std::span<const double> xi_grid);
std::vector<SlopeCheck> perturbation_slope_check(const StateSpace& space, const ConsistencyTable& consistency,
                                                 const ChainParameters& params,
                                                 std::span<const std::pair<std::size_t, std::size_t>> entries,
                                                 std::span<const double> xi_grid);

// Transitions out of consistent states with positive resistance, in index order.
std::vector<std::pair<std::size_t, std::size_t>> positive_resistance_entries(
    const StateSpace& space, const ConsistencyTable& consistency, std::span<const UtilityTransform> transforms,
    std::size_t limit);

// Throws std::domain_error when some exploration exponent over Z is not positive.
void check_exploration_exponents(const StateSpace& space, std::span<const UtilityTransform> transforms);

}  // namespace eht
