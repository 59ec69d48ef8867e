#include "eht/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace eht {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += kGolden;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_stream(std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(a) ^ (b + 0x632BE59BD9B4E019ULL));
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix64(seed ^ splitmix64(stream ^ 0xD1B54A32D192ED03ULL))) {}

std::uint64_t CounterRng::next_u64() { return splitmix64(key_ + (counter_++) * kGolden); }

double CounterRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

bool bernoulli(CounterRng& rng, double p) { return rng.uniform() < p; }

std::size_t categorical(CounterRng& rng, std::span<const double> probs) {
    if (probs.empty()) throw std::invalid_argument("categorical: empty distribution");
    double u = rng.uniform();
    for (std::size_t k = 0; k < probs.size(); ++k) {
        if (u < probs[k]) return k;
        u -= probs[k];
    }
    // Rounding leftover: last category with positive mass.
    for (std::size_t k = probs.size(); k-- > 0;) {
        if (probs[k] > 0.0) return k;
    }
    return probs.size() - 1;
}

std::uint64_t binomial(CounterRng& rng, std::uint64_t n, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial: p outside [0, 1]");
    double u = rng.uniform();
    if (n == 0 || p == 0.0) return 0;
    if (p == 1.0) return n;

    const double nd = static_cast<double>(n);
    std::uint64_t mode = static_cast<std::uint64_t>(std::floor((nd + 1.0) * p));
    if (mode > n) mode = n;
    const double md = static_cast<double>(mode);
    const double log_pmf = std::lgamma(nd + 1.0) - std::lgamma(md + 1.0) - std::lgamma(nd - md + 1.0) +
                           md * std::log(p) + (nd - md) * std::log1p(-p);
    const double ratio = p / (1.0 - p);
    double f_lo = std::exp(log_pmf);
    double f_hi = f_lo;
    u -= f_lo;
    if (u <= 0.0) return mode;
    std::uint64_t lo = mode, hi = mode;
    constexpr double kNegligible = 1e-300;
    for (;;) {
        const bool lo_done = lo == 0 || f_lo < kNegligible;
        const bool hi_done = hi == n || f_hi < kNegligible;
        if (lo_done && hi_done) return mode;
        if (!lo_done) {
            f_lo *= static_cast<double>(lo) / (static_cast<double>(n - lo + 1) * ratio);
            --lo;
            u -= f_lo;
            if (u <= 0.0) return lo;
        }
        if (!hi_done) {
            f_hi *= static_cast<double>(n - hi) / static_cast<double>(hi + 1) * ratio;
            ++hi;
            u -= f_hi;
            if (u <= 0.0) return hi;
        }
    }
}

std::vector<std::uint64_t> multinomial(CounterRng& rng, std::uint64_t n, std::span<const double> probs) {
    std::vector<std::uint64_t> counts(probs.size(), 0);
    double remaining_mass = 1.0;
    std::uint64_t remaining = n;
    for (std::size_t k = 0; k + 1 < probs.size() && remaining > 0; ++k) {
        if (probs[k] < 0.0) throw std::invalid_argument("multinomial: negative probability");
        const double p = probs[k] <= 0.0 ? 0.0 : (remaining_mass > probs[k] ? probs[k] / remaining_mass : 1.0);
        counts[k] = binomial(rng, remaining, p);
        remaining -= counts[k];
        remaining_mass -= probs[k];
    }
    if (!probs.empty()) counts.back() += remaining;
    return counts;
}

}  // namespace eht
