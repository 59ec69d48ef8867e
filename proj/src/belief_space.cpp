#include "eht/belief_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>

namespace eht {

std::uint64_t state_cap() {
    if (const char* env = std::getenv("EHT_STATE_CAP")) {
        char* end = nullptr;
        const unsigned long long value = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0' && value > 0) return value;
    }
    return kDefaultStateCap;
}

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > kSaturated / a) return kSaturated;
    return a * b;
}

void compositions(std::size_t dimension, int remaining, GridPoint& current, std::vector<GridPoint>& out) {
    const std::size_t k = current.size();
    if (k + 1 == dimension) {
        current.push_back(remaining);
        out.push_back(current);
        current.pop_back();
        return;
    }
    for (int m = 0; m <= remaining; ++m) {
        current.push_back(m);
        compositions(dimension, remaining - m, current, out);
        current.pop_back();
    }
}

}  // namespace

std::uint64_t simplex_point_count(std::size_t dimension, int granularity) {
    if (dimension == 0 || granularity < 0) return 0;
    // C(M + k - 1, k - 1) computed incrementally; every partial product is exact.
    const std::uint64_t r = dimension - 1;
    const std::uint64_t top = static_cast<std::uint64_t>(granularity) + r;
    std::uint64_t result = 1;
    for (std::uint64_t j = 1; j <= r; ++j) {
        const std::uint64_t factor = top - r + j;
        const std::uint64_t g = std::gcd(result, j);
        const std::uint64_t reduced = result / g;
        const std::uint64_t jj = j / g;
        const std::uint64_t f2 = factor / jj;  // jj divides factor after the gcd step
        result = saturating_mul(reduced, f2);
        if (result == kSaturated) return kSaturated;
    }
    return result;
}

std::vector<GridPoint> enumerate_simplex(std::size_t dimension, int granularity, std::uint64_t cap) {
    if (dimension < 1) throw std::invalid_argument("simplex dimension must be >= 1");
    if (granularity < 1) throw std::invalid_argument("granularity M must be >= 1");
    const std::uint64_t count = simplex_point_count(dimension, granularity);
    if (count > cap) throw CapacityError("simplex grid point count", count, cap);
    std::vector<GridPoint> out;
    out.reserve(count);
    GridPoint current;
    current.reserve(dimension);
    compositions(dimension, granularity, current, out);
    return out;
}

std::vector<double> to_weights(const GridPoint& point, int granularity) {
    std::vector<double> w(point.size());
    for (std::size_t k = 0; k < point.size(); ++k) {
        w[k] = static_cast<double>(point[k]) / static_cast<double>(granularity);
    }
    return w;
}

GridPoint nearest_grid_point(std::span<const double> target, int granularity) {
    if (granularity < 1) throw std::invalid_argument("granularity M must be >= 1");
    const std::size_t k = target.size();
    GridPoint counts(k);
    std::vector<double> frac(k);
    long total = 0;
    for (std::size_t a = 0; a < k; ++a) {
        const double scaled = std::max(0.0, target[a]) * granularity;
        const double fl = std::floor(scaled);
        counts[a] = static_cast<int>(fl);
        frac[a] = scaled - fl;
        total += counts[a];
    }
    // Minimizing sum of squared residuals subject to the count total is a
    // matter of rounding up the coordinates with the largest fractional parts.
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    // Equal fractions: round up later coordinates first, which keeps the
    // result lexicographically smallest.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        if (frac[x] != frac[y]) return frac[x] > frac[y];
        return x > y;
    });
    long deficit = granularity - total;
    for (std::size_t r = 0; deficit > 0 && r < k; ++r, --deficit) counts[order[r]] += 1;
    // Targets off the simplex can overshoot; trim the smallest fractional parts.
    for (std::size_t r = k; deficit < 0 && r > 0;) {
        const std::size_t a = order[r - 1];
        if (counts[a] > 0) {
            counts[a] -= 1;
            ++deficit;
        } else {
            --r;
        }
    }
    return counts;
}

std::vector<double> product_distribution(std::span<const std::vector<double>> marginals) {
    std::vector<double> dist{1.0};
    for (const auto& m : marginals) {
        std::vector<double> next;
        next.reserve(dist.size() * m.size());
        for (double p : dist) {
            for (double q : m) next.push_back(p * q);
        }
        dist = std::move(next);
    }
    return dist;
}

std::vector<double> product_distribution(const BeliefProfile& belief) {
    std::vector<std::vector<double>> marginals;
    marginals.reserve(belief.marginals.size());
    for (std::size_t k = 0; k < belief.marginals.size(); ++k) marginals.push_back(belief.marginal(k));
    return product_distribution(marginals);
}

BeliefProfile nearest_grid_belief(std::size_t owner, std::span<const std::vector<double>> target, int granularity) {
    BeliefProfile belief;
    belief.owner = owner;
    belief.granularity = granularity;
    for (const auto& m : target) belief.marginals.push_back(nearest_grid_point(m, granularity));
    return belief;
}

std::vector<double> action_utilities_vs_belief(const Game& game, std::size_t player, const BeliefProfile& belief) {
    game.check_player(player);
    if (belief.marginals.size() + 1 != game.player_count()) {
        throw std::invalid_argument("belief must hold one marginal per opponent");
    }
    std::size_t k = 0;
    for (std::size_t j = 0; j < game.player_count(); ++j) {
        if (j == player) continue;
        if (belief.marginals[k].size() != game.action_count(j)) {
            throw std::invalid_argument("belief marginal for player " + std::to_string(j) +
                                        " has the wrong dimension");
        }
        ++k;
    }
    return action_utilities(game, player, product_distribution(belief));
}

MixedStrategy smooth_best_response(const Game& game, std::size_t player, const BeliefProfile& belief, double sigma) {
    return logit_response(action_utilities_vs_belief(game, player, belief), sigma);
}

DistanceMode parse_distance_mode(const std::string& name) {
    if (name == "joint_product") return DistanceMode::joint_product;
    if (name == "concatenated_marginals") return DistanceMode::concatenated_marginals;
    throw std::invalid_argument("unknown distance mode '" + name + "'");
}

std::string to_string(DistanceMode mode) {
    return mode == DistanceMode::joint_product ? "joint_product" : "concatenated_marginals";
}

double l2_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("l2_distance: size mismatch");
    double total = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        total += d * d;
    }
    return std::sqrt(total);
}

double belief_distance(std::span<const std::vector<double>> belief_marginals,
                       std::span<const MixedStrategy> opponent_strategies, DistanceMode mode) {
    if (belief_marginals.size() != opponent_strategies.size()) {
        throw std::invalid_argument("belief_distance: opponent count mismatch");
    }
    if (mode == DistanceMode::joint_product) {
        return l2_distance(product_distribution(belief_marginals), product_distribution(opponent_strategies));
    }
    double total = 0.0;
    for (std::size_t k = 0; k < belief_marginals.size(); ++k) {
        const double d = l2_distance(belief_marginals[k], opponent_strategies[k]);
        total += d * d;
    }
    return std::sqrt(total);
}

std::vector<BeliefProfile> enumerate_beliefs(const Game& game, std::size_t player, int granularity,
                                             std::uint64_t cap) {
    game.check_player(player);
    std::uint64_t count = 1;
    std::vector<std::vector<GridPoint>> grids;
    for (std::size_t j = 0; j < game.player_count(); ++j) {
        if (j == player) continue;
        count = saturating_mul(count, simplex_point_count(game.action_count(j), granularity));
        if (count > cap) throw CapacityError("belief space size for player " + std::to_string(player), count, cap);
        grids.push_back(enumerate_simplex(game.action_count(j), granularity, cap));
    }
    std::vector<BeliefProfile> out;
    out.reserve(count);
    std::vector<std::size_t> digits(grids.size(), 0);
    for (std::uint64_t n = 0; n < count; ++n) {
        BeliefProfile b;
        b.owner = player;
        b.granularity = granularity;
        for (std::size_t k = 0; k < grids.size(); ++k) b.marginals.push_back(grids[k][digits[k]]);
        out.push_back(std::move(b));
        for (std::size_t k = grids.size(); k-- > 0;) {
            if (++digits[k] < grids[k].size()) break;
            digits[k] = 0;
        }
    }
    return out;
}

std::vector<MixedStrategy> br_image(const Game& game, std::size_t player, int granularity, double sigma,
                                    std::uint64_t cap) {
    std::vector<MixedStrategy> image;
    for (const auto& b : enumerate_beliefs(game, player, granularity, cap)) {
        MixedStrategy s = smooth_best_response(game, player, b, sigma);
        const bool seen = std::any_of(image.begin(), image.end(), [&](const MixedStrategy& t) {
            for (std::size_t a = 0; a < t.size(); ++a) {
                if (std::abs(t[a] - s[a]) > 1e-12) return false;
            }
            return true;
        });
        if (!seen) image.push_back(std::move(s));
    }
    return image;
}

StateSpace::StateSpace(Game game, int granularity, double sigma, std::uint64_t cap)
    : game_(std::move(game)), granularity_(granularity), sigma_(sigma) {
    if (granularity < 1) throw std::invalid_argument("granularity M must be >= 1");
    if (!(sigma > 0.0)) throw std::invalid_argument("temperature sigma must be positive");
    const std::size_t n = game_.player_count();
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t per_player = 1;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) per_player = saturating_mul(per_player, simplex_point_count(game_.action_count(j), granularity));
        }
        total = saturating_mul(total, per_player);
    }
    if (total > cap) throw CapacityError("state space size", total, cap);

    players_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        PlayerBeliefs& p = players_[i];
        p.beliefs = enumerate_beliefs(game_, i, granularity, cap);
        for (const auto& b : p.beliefs) {
            p.products.push_back(product_distribution(b));
            const auto utilities = action_utilities(game_, i, p.products.back());
            p.responses.push_back(logit_response(utilities, sigma));
            double anticipated = 0.0;
            for (std::size_t a = 0; a < utilities.size(); ++a) anticipated += p.responses.back()[a] * utilities[a];
            p.anticipated.push_back(anticipated);
        }
    }
    stride_.assign(n, 1);
    for (std::size_t i = n; i-- > 0;) {
        stride_[i] = size_;
        size_ *= players_[i].beliefs.size();
    }
}

std::size_t StateSpace::belief_id(std::size_t state, std::size_t player) const {
    return (state / stride_[player]) % players_[player].beliefs.size();
}

std::vector<std::size_t> StateSpace::belief_ids(std::size_t state) const {
    std::vector<std::size_t> ids(player_count());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = belief_id(state, i);
    return ids;
}

std::size_t StateSpace::state_index(std::span<const std::size_t> ids) const {
    if (ids.size() != player_count()) throw std::invalid_argument("state_index: need one belief id per player");
    std::size_t index = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] >= players_[i].beliefs.size()) throw std::out_of_range("belief id out of range");
        index += ids[i] * stride_[i];
    }
    return index;
}

StrategyProfile StateSpace::strategies(std::size_t state) const {
    StrategyProfile out;
    out.reserve(player_count());
    for (std::size_t i = 0; i < player_count(); ++i) out.push_back(strategy(state, i));
    return out;
}

double StateSpace::realized_utility(std::size_t state, std::size_t player) const {
    return expected_utility(game_, player, strategies(state));
}

double StateSpace::distance(std::size_t state, std::size_t player, DistanceMode mode) const {
    const BeliefProfile& b = players_[player].beliefs[belief_id(state, player)];
    std::vector<MixedStrategy> opponents;
    for (std::size_t j = 0; j < player_count(); ++j) {
        if (j != player) opponents.push_back(strategy(state, j));
    }
    if (mode == DistanceMode::joint_product) {
        return l2_distance(players_[player].products[belief_id(state, player)], product_distribution(opponents));
    }
    std::vector<std::vector<double>> marginals;
    for (std::size_t k = 0; k < b.marginals.size(); ++k) marginals.push_back(b.marginal(k));
    return belief_distance(marginals, opponents, mode);
}

SystemState StateSpace::state(std::size_t index) const {
    if (index >= size_) throw std::out_of_range("state index out of range");
    SystemState s;
    for (std::size_t i = 0; i < player_count(); ++i) {
        s.beliefs.push_back(players_[i].beliefs[belief_id(index, i)]);
        s.strategies.push_back(strategy(index, i));
    }
    return s;
}

}  // namespace eht
