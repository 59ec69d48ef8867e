#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace eht {

// Counter-based generator: SplitMix64 evaluated at (key + counter * golden),
// where key mixes a 64-bit seed with a 64-bit stream id. Output k of a stream
// is a pure function of (seed, stream, k), so replications, sweep cells and
// Monte Carlo trials get independent streams from derived ids instead of
// shared state.
//
// Draw conventions:
//   uniform()       top 53 bits of one output, in [0, 1)
//   bernoulli(p)    one uniform, success iff u < p
//   categorical(p)  one uniform, inverse CDF over p in index order
//   binomial(n, p)  one uniform, inversion with a search that starts at the
//                   mode and alternates downward/upward
//   multinomial     conditional binomials over categories in index order
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next_u64();
    double uniform();
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

// Stream id for a (label, index) pair, e.g. (replication, trial).
std::uint64_t derive_stream(std::uint64_t a, std::uint64_t b);

bool bernoulli(CounterRng& rng, double p);
std::size_t categorical(CounterRng& rng, std::span<const double> probs);
std::uint64_t binomial(CounterRng& rng, std::uint64_t n, double p);
std::vector<std::uint64_t> multinomial(CounterRng& rng, std::uint64_t n, std::span<const double> probs);

}  // namespace eht
