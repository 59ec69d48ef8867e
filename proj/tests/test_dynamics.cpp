#include <gtest/gtest.h>

#include <cmath>

#include "eht/chain.hpp"
#include "eht/dynamics.hpp"
#include "fixtures.hpp"

using namespace eht;

namespace {

RunConfig stag_config(double xi, std::uint64_t epochs = 100) {
    RunConfig c;
    c.xi = xi;
    c.test_probs = {0.5, 0.5};
    c.transforms = {UtilityTransform::identity(), UtilityTransform::identity()};
    c.sigma = 0.25;
    c.tau = 0.2;
    c.granularity = 4;
    c.epochs = epochs;
    c.seed = 99;
    return c;
}

}  // namespace

TEST(Resampler, UniformAndTableValidation) {
    const auto u = Resampler::uniform(4);
    EXPECT_DOUBLE_EQ(u.probability(1, 3), 0.25);
    EXPECT_THROW(Resampler::uniform(0), std::invalid_argument);
    EXPECT_NO_THROW(Resampler::table({{0.5, 0.5}, {0.2, 0.8}}, 0.1));
    EXPECT_THROW(Resampler::table({{0.95, 0.05}, {0.2, 0.8}}, 0.1), std::invalid_argument);
    EXPECT_THROW(Resampler::table({{0.5, 0.6}, {0.2, 0.8}}, 0.1), std::invalid_argument);
    EXPECT_THROW(Resampler::table({{0.5, 0.5}}, 0.1), std::invalid_argument);
}

TEST(RunConfig, RejectsOutOfRangeParameters) {
    auto c = stag_config(0.1);
    EXPECT_NO_THROW(c.validate(2));
    c.xi = 1.0;
    EXPECT_THROW(c.validate(2), std::invalid_argument);
    c = stag_config(0.1);
    c.test_probs = {1.0, 0.5};
    EXPECT_THROW(c.validate(2), std::invalid_argument);
}

TEST(Dynamics, EpochLengthDefaultsToRequiredSampleSize) {
    const StateSpace space(eht::testing::stag_hunt(), 4, 0.25);
    const LearningDynamics d(space, stag_config(0.3));
    const auto bound = required_sample_size(space.game(), 4, 0.25, 0.2, std::pow(0.3, 9.0));
    EXPECT_DOUBLE_EQ(d.u_bar(), 9.0);
    EXPECT_EQ(d.epoch_length(), bound.sample_size);

    auto fixed = stag_config(0.3);
    fixed.epoch_length = 123;
    EXPECT_EQ(LearningDynamics(space, fixed).epoch_length(), 123u);

    auto capped = stag_config(0.05);
    capped.max_epoch_length = 100;
    const LearningDynamics dc(space, capped);
    EXPECT_TRUE(dc.epoch_length_capped());
    EXPECT_EQ(dc.epoch_length(), 100u);
}

TEST(Dynamics, SameSeedSameTrajectory) {
    const StateSpace space(eht::testing::stag_hunt(), 4, 0.25);
    const LearningDynamics d(space, stag_config(0.3, 200));
    const auto a = d.run(7), b = d.run(7);
    ASSERT_EQ(a.size(), 200u);
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(to_ndjson(a[k]), to_ndjson(b[k]));
    EXPECT_TRUE(LearningDynamics(space, stag_config(0.3, 0)).run(7).empty());
}

TEST(Dynamics, EpochLogIsSelfConsistent) {
    const StateSpace space(eht::testing::stag_hunt(), 4, 0.25);
    const LearningDynamics d(space, stag_config(0.3, 300));
    for (const auto& log : d.run(3)) {
        std::uint64_t total = 0;
        for (auto c : log.joint_counts) total += c;
        EXPECT_EQ(total, d.epoch_length());
        const auto before = space.belief_ids(log.state_before);
        const auto after = space.belief_ids(log.state_after);
        for (std::size_t i = 0; i < 2; ++i) {
            const auto& p = log.players[i];
            EXPECT_EQ(p.resampled_to.has_value(), p.rejected || p.explored);
            if (!p.tested) {
                EXPECT_FALSE(p.resampled_to.has_value());
            }
            if (p.rejected) {
                EXPECT_FALSE(p.explored);
            }
            if (!p.resampled_to) {
                EXPECT_EQ(after[i], before[i]);
            }
        }
    }
}

TEST(Dynamics, NonPositiveExponentIsRejected) {
    const StateSpace space(eht::testing::stag_hunt(), 4, 0.25);
    auto c = stag_config(0.3);
    c.transforms[1] = UtilityTransform::affine(1.0, -10.0);
    c.u_bar_override = 9.0;
    const LearningDynamics d(space, c);
    EXPECT_THROW(d.exploration_probability(0, 1), std::domain_error);
}

// With an uncapped epoch length the test errs with probability far below
// xi^u_bar, so one-step frequencies must match the idealized kernel.
TEST(Dynamics, OneStepFrequenciesMatchIdealizedKernel) {
    const StateSpace space(eht::testing::stag_hunt(), 4, 0.25);
    const RunConfig config = stag_config(0.3);
    const LearningDynamics d(space, config);
    ASSERT_FALSE(d.epoch_length_capped());
    const ConsistencyTable table(space, config.tau, config.distance_mode);
    const auto params = chain_parameters(space, config);
    const auto consistent = table.consistent_states();
    ASSERT_FALSE(consistent.empty());
    for (const std::size_t from : {consistent.front(), std::size_t{7}}) {
        const int draws = 20000;
        std::vector<double> freq(space.size(), 0.0);
        CounterRng rng(5, from);
        for (int k = 0; k < draws; ++k) freq[d.run_epoch(from, rng).state_after] += 1.0 / draws;
        double tv = 0.0;
        for (std::size_t to = 0; to < space.size(); ++to) {
            tv += 0.5 * std::abs(freq[to] - idealized_entry(space, table, params, from, to, config.xi));
        }
        EXPECT_LT(tv, 0.03) << "from state " << from;
    }
}

TEST(Occupancy, CountsPostEpochStates) {
    std::vector<EpochLog> t(4);
    t[0].state_after = 1;
    t[1].state_after = 2;
    t[2].state_after = 1;
    t[3].state_after = 0;
    EXPECT_DOUBLE_EQ(occupancy(t, {false, true, false}), 0.5);
    EXPECT_THROW(occupancy(std::vector<EpochLog>{}, {true}), std::invalid_argument);
}
