#include "eht/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "eht/chain.hpp"
#include "eht/rng.hpp"

namespace eht {

namespace {

double linf(const MixedStrategy& a, const MixedStrategy& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

StrategyProfile respond(const Game& game, const StrategyProfile& profile, double sigma) {
    StrategyProfile out(game.player_count());
    for (std::size_t i = 0; i < game.player_count(); ++i) {
        out[i] = smooth_best_response(game, i, opponent_distribution(game, i, profile), sigma);
    }
    return out;
}

std::vector<std::size_t> others(std::size_t n, std::size_t i) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < n; ++j) {
        if (j != i) out.push_back(j);
    }
    return out;
}

// Position of player i among the opponents of player j.
std::size_t slot_of(std::size_t i, std::size_t j) { return i < j ? i : i - 1; }

std::vector<double> dirichlet(CounterRng& rng, std::size_t k) {
    std::vector<double> w(k);
    double total = 0.0;
    for (double& x : w) {
        x = -std::log1p(-rng.uniform());
        total += x;
    }
    for (double& x : w) x /= total;
    return w;
}

struct Cell {
    double margin;
    std::optional<std::size_t> witness;
};

// Best witness for player i against opponents' beliefs `opp_ids` (one per other player).
Cell search_cell(const StateSpace& space, std::size_t i, const std::vector<std::size_t>& opp,
                 const std::vector<std::size_t>& opp_ids, double tau, DistanceMode mode) {
    std::vector<MixedStrategy> opp_strategies;
    for (std::size_t k = 0; k < opp.size(); ++k) opp_strategies.push_back(space.player(opp[k]).responses[opp_ids[k]]);
    std::vector<std::vector<double>> about_i;  // b_ji for every j != i
    for (std::size_t k = 0; k < opp.size(); ++k) {
        about_i.push_back(space.player(opp[k]).beliefs[opp_ids[k]].marginal(slot_of(i, opp[k])));
    }
    const auto& mine = space.player(i);
    Cell best{-std::numeric_limits<double>::infinity(), std::nullopt};
    for (std::size_t b = 0; b < mine.beliefs.size(); ++b) {
        std::vector<std::vector<double>> marginals;
        for (std::size_t k = 0; k < mine.beliefs[b].marginals.size(); ++k) marginals.push_back(mine.beliefs[b].marginal(k));
        double m = belief_distance(marginals, opp_strategies, mode);
        for (const auto& bji : about_i) m = std::min(m, l2_distance(mine.responses[b], bji));
        if (m > best.margin) best.margin = m;
        if (m > tau && !best.witness) best.witness = b;
    }
    return best;
}

// Calls fn(i, opp, opp_ids) for every player and every opponents' belief profile.
template <class Fn>
void for_each_cell(const StateSpace& space, Fn&& fn) {
    const std::size_t n = space.player_count();
    for (std::size_t i = 0; i < n; ++i) {
        const auto opp = others(n, i);
        std::vector<std::size_t> ids(opp.size(), 0);
        auto advance = [&] {
            for (std::size_t k = opp.size(); k-- > 0;) {
                if (++ids[k] < space.belief_count(opp[k])) return true;
                ids[k] = 0;
            }
            return false;
        };
        do {
            fn(i, opp, ids);
        } while (advance());
    }
}

}  // namespace

ParameterCertificate check_assumption1(const Game& game, double epsilon, double sigma, double tau, int granularity) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
    ParameterCertificate c;
    c.epsilon = epsilon;
    c.sigma = sigma;
    c.tau = tau;
    c.granularity = granularity;
    c.players = game.player_count();
    c.joint_profiles = game.profile_count();
    c.max_payoff = game.max_abs_payoff();
    for (std::size_t i = 0; i < c.players; ++i) {
        c.max_actions = std::max(c.max_actions, game.action_count(i));
        c.max_action_times_opponents =
            std::max(c.max_action_times_opponents, game.action_count(i) * game.opponent_profile_count(i));
    }
    const double max_a = static_cast<double>(c.max_actions);
    const double players = static_cast<double>(c.players);
    const double spread = c.max_payoff * static_cast<double>(c.max_action_times_opponents);

    // ln 1 = 0: with single-action players any sigma works.
    c.sigma_bound = c.max_actions > 1 ? epsilon / (2.0 * std::log(max_a)) : std::numeric_limits<double>::infinity();
    c.tau_bound = spread > 0.0 ? epsilon * sigma / (2.0 * std::sqrt(static_cast<double>(c.joint_profiles)) * spread)
                               : std::numeric_limits<double>::infinity();
    c.M_bound = players * max_a / tau * (1.0 + std::sqrt(max_a) / sigma * spread * players);
    c.sigma_ok = sigma <= c.sigma_bound;
    c.tau_ok = tau <= c.tau_bound;
    c.M_ok = static_cast<double>(granularity) >= c.M_bound;
    return c;
}

FixedPoint find_smooth_br_fixed_point(const Game& game, double sigma, double tol, std::uint64_t max_iter) {
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    constexpr double kDamping = 0.5;
    FixedPoint fp;
    for (std::size_t i = 0; i < game.player_count(); ++i) {
        fp.profile.emplace_back(game.action_count(i), 1.0 / static_cast<double>(game.action_count(i)));
    }
    while (fp.iterations < max_iter) {
        const auto br = respond(game, fp.profile, sigma);
        ++fp.iterations;
        fp.residual = 0.0;
        for (std::size_t i = 0; i < br.size(); ++i) fp.residual = std::max(fp.residual, linf(fp.profile[i], br[i]));
        if (fp.residual < tol) return fp;
        for (std::size_t i = 0; i < br.size(); ++i) {
            for (std::size_t a = 0; a < br[i].size(); ++a) {
                fp.profile[i][a] = (1.0 - kDamping) * fp.profile[i][a] + kDamping * br[i][a];
            }
        }
    }
    throw ConvergenceError("smooth best response fixed point did not converge", fp.residual);
}

Prop2Report verify_prop2_constructive(const Game& game, double epsilon, double sigma, double tau, int granularity,
                                      DistanceMode mode) {
    Prop2Report r;
    r.certificate = check_assumption1(game, epsilon, sigma, tau, granularity);
    r.fixed_point = find_smooth_br_fixed_point(game, sigma);
    const auto& star = r.fixed_point.profile;
    const std::size_t n = game.player_count();

    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::vector<double>> target;
        for (std::size_t j : others(n, i)) target.push_back(star[j]);
        r.beliefs.push_back(nearest_grid_belief(i, target, granularity));
        r.strategies.push_back(smooth_best_response(game, i, r.beliefs.back(), sigma));
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::vector<double>> marginals;
        std::vector<MixedStrategy> at_star, at_dagger;
        for (std::size_t k = 0; k < r.beliefs[i].marginals.size(); ++k) marginals.push_back(r.beliefs[i].marginal(k));
        for (std::size_t j : others(n, i)) {
            at_star.push_back(star[j]);
            at_dagger.push_back(r.strategies[j]);
        }
        r.belief_to_fixed_point = std::max(r.belief_to_fixed_point, belief_distance(marginals, at_star, mode));
        r.response_shift = std::max(r.response_shift, l2_distance(star[i], r.strategies[i]));
        r.belief_to_response = std::max(r.belief_to_response, belief_distance(marginals, at_dagger, mode));
    }
    r.epsilon_gap = epsilon_ne_gap(game, r.strategies);
    r.belief_to_fixed_point_ok = r.belief_to_fixed_point <= tau;
    r.response_shift_ok = r.response_shift <= tau;
    r.belief_to_response_ok = r.belief_to_response <= tau;
    r.epsilon_gap_ok = r.epsilon_gap <= epsilon;
    return r;
}

Assumption2Report check_assumption2(const StateSpace& space, double tau, DistanceMode mode) {
    Assumption2Report report;
    report.passes = true;
    for_each_cell(space, [&](std::size_t i, const std::vector<std::size_t>& opp, const std::vector<std::size_t>& ids) {
        const Cell cell = search_cell(space, i, opp, ids, tau, mode);
        Assumption2Witness w{i, ids, cell.witness, cell.margin};
        if (!cell.witness && !report.first_failure) {
            report.passes = false;
            report.first_failure = w;
        }
        report.cells.push_back(std::move(w));
    });
    return report;
}

SimpleConditionReport check_simple_condition(const StateSpace& space, double tau, DistanceMode mode) {
    SimpleConditionReport report;
    const Game& game = space.game();
    const std::size_t n = game.player_count();
    report.image_condition = true;
    for (std::size_t i = 0; i < n; ++i) {
        report.image_sizes.push_back(br_image(game, i, space.granularity(), space.sigma()).size());
        if (report.image_sizes.back() <= n) report.image_condition = false;
    }
    report.tau_threshold = std::numeric_limits<double>::infinity();
    for_each_cell(space, [&](std::size_t i, const std::vector<std::size_t>& opp, const std::vector<std::size_t>& ids) {
        report.tau_threshold = std::min(report.tau_threshold, search_cell(space, i, opp, ids, tau, mode).margin);
    });
    report.tau_condition = tau < report.tau_threshold;
    return report;
}

LipschitzReport verify_lipschitz(const Game& game, double sigma, std::uint64_t trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("Lipschitz check needs at least one trial");
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    LipschitzReport report;
    report.trials = trials;
    CounterRng rng(seed, derive_stream(0x11F5, 0));
    const std::size_t n = game.player_count();
    for (std::uint64_t t = 0; t < trials; ++t) {
        const std::size_t i = t % n;
        std::vector<std::vector<double>> a, b;
        for (std::size_t j : others(n, i)) {
            a.push_back(dirichlet(rng, game.action_count(j)));
            b.push_back(dirichlet(rng, game.action_count(j)));
        }
        const auto ua = action_utilities(game, i, product_distribution(a));
        const auto ub = action_utilities(game, i, product_distribution(b));
        const double du = l2_distance(ua, ub);
        if (du == 0.0) continue;
        const double dbr = l2_distance(logit_response(ua, sigma), logit_response(ub, sigma));
        report.max_ratio = std::max(report.max_ratio, sigma * dbr / du);
    }
    return report;
}

}  // namespace eht
