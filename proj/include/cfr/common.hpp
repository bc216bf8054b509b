#ifndef CFR_COMMON_HPP
#define CFR_COMMON_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cfr {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TaxonomyError : Error {
    using Error::Error;
};
struct CorpusError : Error {
    using Error::Error;
};
struct FeatureError : Error {
    using Error::Error;
};
struct ModelError : Error {
    using Error::Error;
};
struct MetricsError : Error {
    using Error::Error;
};
struct HarnessError : Error {
    using Error::Error;
};
// flag-level misuse; the CLI maps this to exit code 2
struct UsageError : Error {
    using Error::Error;
};

// splitmix64: the usual finalizer, used to derive independent seed streams.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t fnv1a64(std::string_view s, uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Derives a named sub-stream seed so train/dropout/tie randomness stay
// independently reproducible under a single master seed.
inline uint64_t substream(uint64_t seed, std::string_view tag, uint64_t index = 0) {
    return splitmix64(splitmix64(seed ^ fnv1a64(tag)) + index);
}

// Deterministic xoshiro-free generator: std::mt19937_64 output is fully
// specified, and we map to doubles ourselves to avoid the
// implementation-defined std::uniform_real_distribution.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(splitmix64(seed)) {}

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // uniform integer in [0, n)
    uint64_t next_below(uint64_t n) {
        // rejection-free modulo is fine here: n is tiny relative to 2^64
        return n == 0 ? 0 : next_u64() % n;
    }

    bool bernoulli(double p) { return next_double() < p; }

private:
    uint64_t state_;
};

// Half-up rounding to two decimals, to mirror percentage tables.
inline double round2(double v) {
    if (v != v) return v;  // NaN marks undefined table cells
    double scaled = v * 100.0;
    return (scaled < 0 ? -static_cast<double>(static_cast<long long>(-scaled + 0.5))
                       : static_cast<double>(static_cast<long long>(scaled + 0.5))) /
           100.0;
}

}  // namespace cfr

#endif
