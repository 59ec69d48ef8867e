#include "eht/hypothesis_test.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "eht/rng.hpp"

namespace eht {

void TestConfig::validate() const {
    if (!(tolerance > 0.0)) throw std::invalid_argument("test tolerance tau must be positive");
    if (!(significance > 0.0 && significance < 1.0)) {
        throw std::invalid_argument("significance alpha must lie in (0, 1)");
    }
    if (sample_size < 1) throw std::invalid_argument("sample size T must be >= 1");
}

std::vector<double> empirical_distribution(std::span<const std::size_t> samples, std::size_t profile_count) {
    if (samples.empty()) throw std::invalid_argument("empirical distribution of an empty sample");
    std::vector<std::uint64_t> counts(profile_count, 0);
    for (std::size_t s : samples) {
        if (s >= profile_count) throw std::out_of_range("sample profile index out of range");
        ++counts[s];
    }
    return empirical_distribution(counts);
}

std::vector<double> empirical_distribution(std::span<const std::uint64_t> counts) {
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    if (total == 0) throw std::invalid_argument("empirical distribution of an empty sample");
    std::vector<double> freq(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) {
        freq[k] = static_cast<double>(counts[k]) / static_cast<double>(total);
    }
    return freq;
}

double rejection_threshold(const TestConfig& config, std::size_t profile_count) {
    config.validate();
    const double slack = std::sqrt(static_cast<double>(profile_count) * std::log(2.0 / config.significance) /
                                   (2.0 * static_cast<double>(config.sample_size)));
    return config.tolerance + slack;
}

TestOutcome run_test_on_counts(std::span<const double> belief_dist, std::span<const std::uint64_t> counts,
                               const TestConfig& config) {
    if (belief_dist.size() != counts.size()) throw std::invalid_argument("belief and counts differ in size");
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    if (total != config.sample_size) {
        throw std::invalid_argument("sample count " + std::to_string(total) + " differs from configured T " +
                                    std::to_string(config.sample_size));
    }
    TestOutcome out;
    out.statistic = l2_distance(empirical_distribution(counts), belief_dist);
    out.threshold = rejection_threshold(config, counts.size());
    out.rejected = out.statistic > out.threshold;
    return out;
}

TestOutcome run_test(const BeliefProfile& belief, std::span<const std::size_t> samples, const TestConfig& config) {
    const auto dist = product_distribution(belief);
    if (samples.size() != config.sample_size) {
        throw std::invalid_argument("sample count " + std::to_string(samples.size()) + " differs from configured T " +
                                    std::to_string(config.sample_size));
    }
    std::vector<std::uint64_t> counts(dist.size(), 0);
    for (std::size_t s : samples) {
        if (s >= dist.size()) throw std::out_of_range("sample profile index out of range");
        ++counts[s];
    }
    return run_test_on_counts(dist, counts, config);
}

double sample_size_bound(double distance, double tau, std::size_t profile_count, double alpha) {
    const double gap = distance - tau;
    if (!(gap > 0.0)) return std::numeric_limits<double>::infinity();
    return 2.0 * static_cast<double>(profile_count) / (gap * gap) * std::log(2.0 / alpha);
}

SampleSizeBound required_sample_size(const Game& game, int granularity, double sigma, double tau, double alpha,
                                     std::uint64_t max_T, std::uint64_t cap) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
    const std::size_t n = game.player_count();
    std::vector<std::vector<MixedStrategy>> images(n);
    for (std::size_t j = 0; j < n; ++j) images[j] = br_image(game, j, granularity, sigma, cap);

    SampleSizeBound result;
    result.min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const auto beliefs = enumerate_beliefs(game, i, granularity, cap);
        std::vector<std::size_t> opponents;
        std::uint64_t combos = 1;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            opponents.push_back(j);
            combos *= images[j].size();
        }
        if (combos * beliefs.size() > cap) {
            throw CapacityError("T(alpha) quantifier set for player " + std::to_string(i),
                                combos * beliefs.size(), cap);
        }
        std::vector<std::vector<double>> products;
        products.reserve(combos);
        std::vector<std::size_t> digits(opponents.size(), 0);
        for (std::uint64_t c = 0; c < combos; ++c) {
            std::vector<MixedStrategy> strategies;
            for (std::size_t k = 0; k < opponents.size(); ++k) strategies.push_back(images[opponents[k]][digits[k]]);
            products.push_back(product_distribution(strategies));
            for (std::size_t k = opponents.size(); k-- > 0;) {
                if (++digits[k] < images[opponents[k]].size()) break;
                digits[k] = 0;
            }
        }
        const std::size_t profile_count = game.opponent_profile_count(i);
        for (const auto& b : beliefs) {
            const auto bdist = product_distribution(b);
            for (const auto& p : products) {
                const double d = l2_distance(bdist, p);
                if (!(d > tau)) continue;
                result.tests_needed = true;
                result.min_gap = std::min(result.min_gap, d - tau);
                const double bound = sample_size_bound(d, tau, profile_count, alpha);
                if (bound > result.raw_bound) {
                    result.raw_bound = bound;
                    result.binding_player = i;
                }
            }
        }
    }
    if (!result.tests_needed) {
        result.min_gap = 0.0;
        return result;
    }
    const double ceiled = std::ceil(result.raw_bound);
    if (!(ceiled <= static_cast<double>(max_T))) {
        result.capped = true;
        result.sample_size = max_T;
    } else {
        result.sample_size = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(ceiled));
    }
    return result;
}

ErrorRateEstimate estimate_error_rates(std::span<const double> belief_dist, std::span<const double> true_dist,
                                       const TestConfig& config, std::uint64_t trials, std::uint64_t seed) {
    config.validate();
    if (trials < 100) throw std::invalid_argument("error-rate estimation needs at least 100 trials");
    if (belief_dist.size() != true_dist.size()) throw std::invalid_argument("belief and truth differ in size");
    ErrorRateEstimate out;
    out.trials = trials;
    out.distance = l2_distance(belief_dist, true_dist);
    out.consistent_pair = out.distance <= config.tolerance;
    std::uint64_t errors = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        CounterRng rng(seed, derive_stream(0xCA11B, t));
        const auto counts = multinomial(rng, config.sample_size, true_dist);
        const bool rejected = run_test_on_counts(belief_dist, counts, config).rejected;
        if (rejected == out.consistent_pair) ++errors;
    }
    out.rate = static_cast<double>(errors) / static_cast<double>(trials);
    out.half_width = 3.0 * std::sqrt(out.rate * (1.0 - out.rate) / static_cast<double>(trials));
    return out;
}

}  // namespace eht
