#include "eht/dynamics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace eht {

Resampler Resampler::uniform(std::size_t belief_count) {
    if (belief_count == 0) throw std::invalid_argument("resampler over an empty belief space");
    Resampler r;
    r.kind_ = Kind::uniform;
    r.size_ = belief_count;
    r.floor_ = 1.0 / static_cast<double>(belief_count);
    r.uniform_row_.assign(belief_count, r.floor_);
    return r;
}

Resampler Resampler::table(std::vector<std::vector<double>> rows, double floor) {
    if (!(floor > 0.0)) throw std::invalid_argument("resampler floor lambda must be positive");
    if (rows.empty()) throw std::invalid_argument("resampler table is empty");
    const std::size_t n = rows.size();
    for (std::size_t b = 0; b < n; ++b) {
        if (rows[b].size() != n) throw std::invalid_argument("resampler table must be square");
        double total = 0.0;
        for (double p : rows[b]) {
            if (!(p >= floor)) {
                throw std::invalid_argument("resampler row " + std::to_string(b) + " has an entry below lambda");
            }
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-9) {
            throw std::invalid_argument("resampler row " + std::to_string(b) + " does not sum to one");
        }
    }
    Resampler r;
    r.kind_ = Kind::table;
    r.size_ = n;
    r.floor_ = floor;
    r.rows_ = std::move(rows);
    return r;
}

double Resampler::probability(std::size_t from, std::size_t to) const {
    if (from >= size_ || to >= size_) throw std::out_of_range("resampler index out of range");
    return kind_ == Kind::uniform ? uniform_row_[to] : rows_[from][to];
}

std::span<const double> Resampler::row(std::size_t from) const {
    if (from >= size_) throw std::out_of_range("resampler index out of range");
    return kind_ == Kind::uniform ? std::span<const double>(uniform_row_) : std::span<const double>(rows_[from]);
}

std::size_t Resampler::sample(CounterRng& rng, std::size_t from) const { return categorical(rng, row(from)); }

void RunConfig::validate(std::size_t player_count) const {
    if (!(xi > 0.0 && xi < 1.0)) throw std::invalid_argument("xi must lie in (0, 1)");
    if (test_probs.size() != player_count) throw std::invalid_argument("need one test probability per player");
    for (double g : test_probs) {
        if (!(g > 0.0 && g < 1.0)) throw std::invalid_argument("test probabilities gamma_i must lie in (0, 1)");
    }
    if (transforms.size() != player_count) throw std::invalid_argument("need one utility transform per player");
    if (!resamplers.empty() && resamplers.size() != player_count) {
        throw std::invalid_argument("need one resampler per player");
    }
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
    if (granularity < 1) throw std::invalid_argument("granularity M must be >= 1");
    if (max_epoch_length < 1) throw std::invalid_argument("max epoch length must be >= 1");
}

LearningDynamics::LearningDynamics(const StateSpace& space, RunConfig config)
    : space_(&space), config_(std::move(config)) {
    const Game& game = space.game();
    config_.validate(game.player_count());
    if (config_.granularity != space.granularity() || config_.sigma != space.sigma()) {
        throw std::invalid_argument("run config (M, sigma) differs from the state space");
    }
    u_bar_ = config_.u_bar_override ? *config_.u_bar_override : eht::u_bar(game, config_.transforms);
    significance_ = std::pow(config_.xi, u_bar_);
    if (!(significance_ > 0.0)) throw std::invalid_argument("xi^u_bar underflows to zero");

    if (config_.epoch_length > 0) {
        epoch_length_ = config_.epoch_length;
    } else {
        const auto bound = required_sample_size(game, space.granularity(), space.sigma(), config_.tau,
                                                significance_, config_.max_epoch_length);
        epoch_length_ = bound.tests_needed ? bound.sample_size : 1;
        epoch_length_capped_ = bound.capped;
    }

    for (std::size_t i = 0; i < game.player_count(); ++i) {
        if (config_.resamplers.empty()) {
            resamplers_.push_back(Resampler::uniform(space.belief_count(i)));
        } else {
            if (config_.resamplers[i].size() != space.belief_count(i)) {
                throw std::invalid_argument("resampler for player " + std::to_string(i) +
                                            " does not match the belief space size");
            }
            resamplers_.push_back(config_.resamplers[i]);
        }
    }
}

double LearningDynamics::exploration_probability(std::size_t state, std::size_t player) const {
    const double exponent = config_.transforms[player](space_->anticipated_utility(state, player));
    if (!(exponent > 0.0)) {
        std::ostringstream msg;
        msg << "exploration exponent f_" << player << "(U) = " << exponent << " is not positive at state " << state;
        throw std::domain_error(msg.str());
    }
    return std::pow(config_.xi, exponent);
}

EpochLog LearningDynamics::run_epoch(std::size_t state, CounterRng& rng, std::uint64_t epoch_index) const {
    const StateSpace& space = *space_;
    const Game& game = space.game();
    const std::size_t n = game.player_count();
    if (state >= space.size()) throw std::out_of_range("state index out of range");

    EpochLog log;
    log.epoch = epoch_index;
    log.state_before = state;
    log.players.resize(n);
    log.anticipated.resize(n);

    std::vector<double> joint(game.profile_count());
    for (std::size_t profile = 0; profile < joint.size(); ++profile) {
        double p = 1.0;
        std::size_t rest = profile;
        for (std::size_t i = n; i-- > 0;) {
            p *= space.strategy(state, i)[rest % game.action_count(i)];
            rest /= game.action_count(i);
        }
        joint[profile] = p;
    }
    log.joint_counts = multinomial(rng, epoch_length_, joint);

    TestConfig test{config_.tau, significance_, epoch_length_};
    auto ids = space.belief_ids(state);
    for (std::size_t i = 0; i < n; ++i) {
        PlayerEpoch& p = log.players[i];
        log.anticipated[i] = space.anticipated_utility(state, i);
        if (!bernoulli(rng, config_.test_probs[i])) continue;
        p.tested = true;
        std::vector<std::uint64_t> opp_counts(game.opponent_profile_count(i), 0);
        for (std::size_t profile = 0; profile < joint.size(); ++profile) {
            opp_counts[game.opponents_of(i, profile)] += log.joint_counts[profile];
        }
        const auto outcome = run_test_on_counts(space.player(i).products[ids[i]], opp_counts, test);
        p.statistic = outcome.statistic;
        p.rejected = outcome.rejected;
        if (!p.rejected) {
            p.exploration_prob = exploration_probability(state, i);
            p.explored = bernoulli(rng, p.exploration_prob);
        }
        if (p.rejected || p.explored) p.resampled_to = resamplers_[i].sample(rng, ids[i]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (log.players[i].resampled_to) ids[i] = *log.players[i].resampled_to;
    }
    log.state_after = space.state_index(ids);
    return log;
}

std::vector<EpochLog> LearningDynamics::run(std::size_t initial) const {
    CounterRng rng(config_.seed, 0);
    return run(initial, rng);
}

std::vector<EpochLog> LearningDynamics::run(std::size_t initial, CounterRng& rng) const {
    std::vector<EpochLog> trajectory;
    trajectory.reserve(config_.epochs);
    std::size_t state = initial;
    for (std::uint64_t k = 0; k < config_.epochs; ++k) {
        trajectory.push_back(run_epoch(state, rng, k + 1));
        state = trajectory.back().state_after;
    }
    return trajectory;
}

double occupancy(std::span<const EpochLog> trajectory, const std::vector<bool>& subset) {
    if (trajectory.empty()) throw std::invalid_argument("occupancy of an empty trajectory");
    std::size_t hits = 0;
    for (const auto& log : trajectory) {
        if (log.state_after < subset.size() && subset[log.state_after]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(trajectory.size());
}

std::string to_ndjson(const EpochLog& log) {
    nlohmann::json players = nlohmann::json::array();
    for (const auto& p : log.players) {
        nlohmann::json entry{{"tested", p.tested}, {"rejected", p.rejected}, {"explored", p.explored}};
        entry["resampled_to"] = p.resampled_to ? nlohmann::json(*p.resampled_to) : nlohmann::json(nullptr);
        if (p.tested) entry["statistic"] = p.statistic;
        players.push_back(std::move(entry));
    }
    nlohmann::json j{{"epoch", log.epoch},
                     {"state_before", log.state_before},
                     {"state_after", log.state_after},
                     {"players", std::move(players)},
                     {"joint_counts", log.joint_counts},
                     {"anticipated", log.anticipated}};
    return j.dump();
}

}  // namespace eht
