#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <string_view>

#include "cbr/types.hpp"

namespace cbr {

/// Canonical decimal rendering of a parameter value: fixed 10 decimals,
/// trailing zeros trimmed. Grid values are rounded to 10 decimals on
/// construction, so this rendering is exact and round-trips through strtod.
inline std::string format_param(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10f", v);
    std::string s(buf);
    auto dot = s.find('.');
    if (dot != std::string::npos) {
        auto last = s.find_last_not_of('0');
        if (last == dot) last -= 1;
        s.erase(last + 1);
    }
    return s;
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

/// Stable per-cell seed: a hash of the master seed, the parameter point and
/// the sentence type. Adding grid cells or reordering execution never
/// perturbs the stream any existing cell sees.
inline std::uint64_t derive_cell_seed(std::uint64_t master_seed, const ParameterPoint& p,
                                      SentenceType type) {
    std::string key = std::to_string(master_seed) + "|" + format_param(p.ga) + "|" +
                      format_param(p.dat) + "|" + format_param(p.ans) + "|" + to_string(type);
    return fnv1a64(key);
}

/// Stable sub-stream seed for anything else (synthetic participants,
/// permutation nulls, ...) keyed by a label and an index.
inline std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::string_view label,
                                        std::uint64_t index) {
    std::string key = std::to_string(master_seed) + "|" + std::string(label) + "|" +
                      std::to_string(index);
    return fnv1a64(key);
}

/// A self-contained random stream. Wraps std::mt19937_64 (whose output
/// sequence the standard pins down exactly) and derives all variates through
/// explicit inverse-CDF / rejection code, so results are bit-identical across
/// standard library implementations.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on the open interval (0, 1); never returns 0 or 1.
    double uniform01() {
        const std::uint64_t bits = engine_() >> 11;  // top 53 bits
        return (static_cast<double>(bits) + 0.5) * (1.0 / 9007199254740992.0);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Logistic(location 0, scale s) by inverse CDF; s == 0 degenerates to 0.
    double logistic(double scale) {
        if (scale == 0.0) return 0.0;
        const double u = uniform01();
        return scale * std::log(u / (1.0 - u));
    }

    /// Uniform integer in [0, n), unbiased via rejection.
    std::uint64_t uniform_index(std::uint64_t n) {
        if (n == 0) throw usage_error("uniform_index: empty range");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r;
        do {
            r = engine_();
        } while (r >= limit);
        return r % n;
    }

    /// Binomial(n, p) as n Bernoulli draws; n stays small here (items per
    /// sentence type), so there is no need for anything cleverer.
    int binomial(int n, double p) {
        int k = 0;
        for (int i = 0; i < n; ++i)
            if (uniform01() < p) ++k;
        return k;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace cbr
