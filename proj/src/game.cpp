#include "eht/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace eht {

Game::Game(std::vector<std::size_t> action_counts, std::vector<double> payoffs)
    : action_counts_(std::move(action_counts)), payoffs_(std::move(payoffs)) {
    if (action_counts_.size() < 2) {
        throw std::invalid_argument("game needs at least two players");
    }
    for (std::size_t count : action_counts_) {
        if (count < 1) throw std::invalid_argument("every player needs at least one action");
        profile_count_ *= count;
    }
    const std::size_t n = action_counts_.size();
    if (payoffs_.size() != n * profile_count_) {
        std::ostringstream msg;
        msg << "payoff tensor has " << payoffs_.size() << " entries, expected " << n * profile_count_;
        throw std::invalid_argument(msg.str());
    }
    for (double u : payoffs_) {
        if (!std::isfinite(u)) throw std::invalid_argument("payoffs must be finite");
    }

    join_.assign(n, std::vector<std::size_t>(profile_count_));
    split_.assign(n, std::vector<std::size_t>(profile_count_));
    for (std::size_t profile = 0; profile < profile_count_; ++profile) {
        const auto actions = decode_profile(profile);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t opp = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                opp = opp * action_counts_[j] + actions[j];
            }
            split_[i][profile] = opp;
            join_[i][actions[i] * (profile_count_ / action_counts_[i]) + opp] = profile;
        }
    }
}

std::size_t Game::profile_index(std::span<const std::size_t> actions) const {
    if (actions.size() != player_count()) throw std::invalid_argument("profile length mismatch");
    std::size_t index = 0;
    for (std::size_t i = 0; i < actions.size(); ++i) {
        if (actions[i] >= action_counts_[i]) throw std::out_of_range("action index out of range");
        index = index * action_counts_[i] + actions[i];
    }
    return index;
}

std::vector<std::size_t> Game::decode_profile(std::size_t profile) const {
    std::vector<std::size_t> actions(player_count());
    for (std::size_t i = player_count(); i-- > 0;) {
        actions[i] = profile % action_counts_[i];
        profile /= action_counts_[i];
    }
    return actions;
}

double Game::max_payoff(std::size_t player) const {
    check_player(player);
    auto first = payoffs_.begin() + static_cast<std::ptrdiff_t>(player * profile_count_);
    return *std::max_element(first, first + static_cast<std::ptrdiff_t>(profile_count_));
}

double Game::min_payoff(std::size_t player) const {
    check_player(player);
    auto first = payoffs_.begin() + static_cast<std::ptrdiff_t>(player * profile_count_);
    return *std::min_element(first, first + static_cast<std::ptrdiff_t>(profile_count_));
}

double Game::max_abs_payoff() const {
    double best = 0.0;
    for (double u : payoffs_) best = std::max(best, std::abs(u));
    return best;
}

void Game::check_player(std::size_t player) const {
    if (player >= player_count()) {
        throw std::out_of_range("player index " + std::to_string(player) + " out of range");
    }
}

void validate_mixed_strategy(std::span<const double> weights, std::size_t expected_size) {
    if (weights.size() != expected_size) {
        throw std::invalid_argument("mixed strategy has " + std::to_string(weights.size()) +
                                    " weights, expected " + std::to_string(expected_size));
    }
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("mixed strategy weight is negative or NaN");
        total += w;
    }
    if (std::abs(total - 1.0) > kSimplexTolerance) {
        throw std::invalid_argument("mixed strategy does not sum to one");
    }
}

void validate_profile(const Game& game, const StrategyProfile& profile) {
    if (profile.size() != game.player_count()) {
        throw std::invalid_argument("strategy profile length differs from player count");
    }
    for (std::size_t i = 0; i < profile.size(); ++i) {
        validate_mixed_strategy(profile[i], game.action_count(i));
    }
}

std::vector<double> opponent_distribution(const Game& game, std::size_t player,
                                          const StrategyProfile& profile) {
    game.check_player(player);
    std::vector<double> dist{1.0};
    for (std::size_t j = 0; j < game.player_count(); ++j) {
        if (j == player) continue;
        std::vector<double> next;
        next.reserve(dist.size() * profile[j].size());
        for (double p : dist) {
            for (double q : profile[j]) next.push_back(p * q);
        }
        dist = std::move(next);
    }
    return dist;
}

double expected_utility(const Game& game, std::size_t player, const StrategyProfile& profile) {
    game.check_player(player);
    validate_profile(game, profile);
    const auto utilities = action_utilities(game, player, opponent_distribution(game, player, profile));
    double total = 0.0;
    for (std::size_t a = 0; a < utilities.size(); ++a) total += profile[player][a] * utilities[a];
    return total;
}

std::vector<double> action_utilities(const Game& game, std::size_t player,
                                     std::span<const double> opponent_dist) {
    game.check_player(player);
    const std::size_t opponents = game.opponent_profile_count(player);
    if (opponent_dist.size() != opponents) {
        throw std::invalid_argument("opponent distribution has " + std::to_string(opponent_dist.size()) +
                                    " entries, expected " + std::to_string(opponents));
    }
    std::vector<double> utilities(game.action_count(player), 0.0);
    for (std::size_t a = 0; a < utilities.size(); ++a) {
        double total = 0.0;
        for (std::size_t o = 0; o < opponents; ++o) {
            if (opponent_dist[o] != 0.0) total += opponent_dist[o] * game.payoff(player, game.join(player, a, o));
        }
        utilities[a] = total;
    }
    return utilities;
}

MixedStrategy logit_response(std::span<const double> utilities, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("temperature sigma must be positive");
    if (utilities.empty()) throw std::invalid_argument("no actions");
    const double top = *std::max_element(utilities.begin(), utilities.end());
    MixedStrategy out(utilities.size());
    double total = 0.0;
    for (std::size_t a = 0; a < utilities.size(); ++a) {
        out[a] = std::exp((utilities[a] - top) / sigma);
        total += out[a];
    }
    for (double& w : out) w /= total;
    return out;
}

MixedStrategy smooth_best_response(const Game& game, std::size_t player,
                                   std::span<const double> opponent_dist, double sigma) {
    return logit_response(action_utilities(game, player, opponent_dist), sigma);
}

double epsilon_ne_gap(const Game& game, const StrategyProfile& profile) {
    validate_profile(game, profile);
    double gap = 0.0;
    for (std::size_t i = 0; i < game.player_count(); ++i) {
        const auto utilities = action_utilities(game, i, opponent_distribution(game, i, profile));
        double current = 0.0;
        for (std::size_t a = 0; a < utilities.size(); ++a) current += profile[i][a] * utilities[a];
        const double best = *std::max_element(utilities.begin(), utilities.end());
        gap = std::max(gap, best - current);
    }
    return gap;
}

UtilityTransform UtilityTransform::identity() { return UtilityTransform{}; }

UtilityTransform UtilityTransform::affine(double scale, double shift) {
    if (!(scale > 0.0) || !std::isfinite(scale) || !std::isfinite(shift)) {
        throw std::invalid_argument("affine transform needs a finite positive scale");
    }
    UtilityTransform t;
    t.kind_ = Kind::affine;
    t.scale_ = scale;
    t.shift_ = shift;
    return t;
}

UtilityTransform UtilityTransform::table(std::vector<double> breakpoints, std::vector<double> values) {
    if (breakpoints.size() < 2 || breakpoints.size() != values.size()) {
        throw std::invalid_argument("table transform needs >= 2 breakpoints with matching values");
    }
    for (std::size_t k = 0; k < breakpoints.size(); ++k) {
        if (!std::isfinite(breakpoints[k]) || !std::isfinite(values[k])) {
            throw std::invalid_argument("table transform entries must be finite");
        }
        if (!(values[k] > 0.0)) throw std::invalid_argument("table transform values must be positive");
        if (k > 0 && !(breakpoints[k] > breakpoints[k - 1])) {
            throw std::invalid_argument("table breakpoints must be strictly increasing");
        }
        if (k > 0 && !(values[k] > values[k - 1])) {
            throw std::invalid_argument("table values must be strictly increasing");
        }
    }
    UtilityTransform t;
    t.kind_ = Kind::table;
    t.breakpoints_ = std::move(breakpoints);
    t.values_ = std::move(values);
    return t;
}

double UtilityTransform::operator()(double u) const {
    switch (kind_) {
    case Kind::identity:
        return u;
    case Kind::affine:
        return scale_ * u + shift_;
    case Kind::table: {
        if (u <= breakpoints_.front()) return values_.front();
        if (u >= breakpoints_.back()) return values_.back();
        const auto upper = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), u);
        const std::size_t k = static_cast<std::size_t>(upper - breakpoints_.begin());
        const double x0 = breakpoints_[k - 1], x1 = breakpoints_[k];
        const double y0 = values_[k - 1], y1 = values_[k];
        return y0 + (y1 - y0) * (u - x0) / (x1 - x0);
    }
    }
    return u;
}

void UtilityTransform::validate_on_range(double lo, double hi) const {
    if (kind_ == Kind::table) {
        // Clamping makes the table flat outside its breakpoints.
        if (lo < breakpoints_.front() || hi > breakpoints_.back()) {
            std::ostringstream msg;
            msg << "table transform does not cover utility range [" << lo << ", " << hi << "]";
            throw std::invalid_argument(msg.str());
        }
    }
    if (!((*this)(lo) > 0.0)) {
        std::ostringstream msg;
        msg << describe() << " is not positive at utility " << lo << " (value " << (*this)(lo) << ")";
        throw std::invalid_argument(msg.str());
    }
}

std::string UtilityTransform::describe() const {
    std::ostringstream out;
    switch (kind_) {
    case Kind::identity:
        out << "identity";
        break;
    case Kind::affine:
        out << "affine(" << scale_ << ", " << shift_ << ")";
        break;
    case Kind::table:
        out << "table(" << breakpoints_.size() << " breakpoints)";
        break;
    }
    return out.str();
}

double u_bar(const Game& game, std::span<const UtilityTransform> transforms) {
    if (transforms.size() != game.player_count()) {
        throw std::invalid_argument("need one utility transform per player");
    }
    double total = 1.0;
    for (std::size_t i = 0; i < game.player_count(); ++i) total += transforms[i](game.max_payoff(i));
    return total;
}

}  // namespace eht
