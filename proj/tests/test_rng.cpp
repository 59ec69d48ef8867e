#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "eht/rng.hpp"

using namespace eht;

TEST(CounterRng, SameSeedAndStreamReproduce) {
    CounterRng a(42, 3), b(42, 3), c(42, 4), d(43, 3);
    for (int k = 0; k < 100; ++k) {
        const auto x = a.next_u64();
        EXPECT_EQ(x, b.next_u64());
        EXPECT_NE(x, c.next_u64());
        EXPECT_NE(x, d.next_u64());
    }
    EXPECT_EQ(a.counter(), 100u);
}

TEST(CounterRng, KnownSplitMixValue) {
    // Reference output of the SplitMix64 finalizer for input 0 after one increment.
    EXPECT_EQ(splitmix64(0), 0xE220A8397B1DCDAFull);
}

TEST(CounterRng, UniformMomentsAndRange) {
    CounterRng rng(1, 0);
    const int n = 200000;
    double sum = 0.0, sq = 0.0;
    for (int k = 0; k < n; ++k) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
        sq += u * u;
    }
    EXPECT_NEAR(sum / n, 0.5, 0.005);
    EXPECT_NEAR(sq / n - (sum / n) * (sum / n), 1.0 / 12.0, 0.002);
}

TEST(CounterRng, DerivedStreamsDiffer) {
    EXPECT_NE(derive_stream(1, 2), derive_stream(2, 1));
    EXPECT_NE(derive_stream(0, 0), derive_stream(0, 1));
}

TEST(Binomial, EdgeCases) {
    CounterRng rng(5);
    EXPECT_EQ(binomial(rng, 0, 0.5), 0u);
    EXPECT_EQ(binomial(rng, 100, 0.0), 0u);
    EXPECT_EQ(binomial(rng, 100, 1.0), 100u);
}

TEST(Binomial, MeanAndVariance) {
    CounterRng rng(9, 1);
    const int draws = 20000;
    for (const auto& [n, p] : {std::pair<std::uint64_t, double>{1000, 0.3}, {50, 0.02}, {100000, 0.5}}) {
        double sum = 0.0, sq = 0.0;
        for (int k = 0; k < draws; ++k) {
            const double x = static_cast<double>(binomial(rng, n, p));
            ASSERT_LE(x, static_cast<double>(n));
            sum += x;
            sq += x * x;
        }
        const double mean = sum / draws, var = sq / draws - mean * mean;
        const double true_var = n * p * (1 - p);
        EXPECT_NEAR(mean, n * p, 5.0 * std::sqrt(true_var / draws)) << "n=" << n << " p=" << p;
        EXPECT_NEAR(var / true_var, 1.0, 0.05) << "n=" << n << " p=" << p;
    }
}

TEST(Multinomial, SumsToNAndRespectsZeros) {
    CounterRng rng(3);
    const std::vector<double> p{0.2, 0.0, 0.5, 0.3, 0.0};
    std::vector<double> totals(p.size(), 0.0);
    for (int k = 0; k < 2000; ++k) {
        const auto c = multinomial(rng, 1000, p);
        EXPECT_EQ(std::accumulate(c.begin(), c.end(), std::uint64_t{0}), 1000u);
        EXPECT_EQ(c[1], 0u);
        EXPECT_EQ(c[4], 0u);
        for (std::size_t j = 0; j < p.size(); ++j) totals[j] += static_cast<double>(c[j]);
    }
    for (std::size_t j = 0; j < p.size(); ++j) EXPECT_NEAR(totals[j] / 2e6, p[j], 0.002);
}

TEST(Categorical, FrequenciesMatch) {
    CounterRng rng(11);
    const std::vector<double> p{0.1, 0.6, 0.3};
    std::vector<int> counts(3, 0);
    const int n = 100000;
    for (int k = 0; k < n; ++k) ++counts[categorical(rng, p)];
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(counts[j] / double(n), p[j], 0.006);
}

TEST(Bernoulli, Extremes) {
    CounterRng rng(2);
    for (int k = 0; k < 1000; ++k) {
        EXPECT_FALSE(bernoulli(rng, 0.0));
        EXPECT_TRUE(bernoulli(rng, 1.0));
    }
}
