#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace qka {

// One SplitMix64 mixing round.
constexpr uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic substream seed: the master seed mixed with integer tags, one
// SplitMix64 round per tag.  Every random decision in a protocol run draws
// from a stream labelled this way (ring, leg, role, ...), and every Monte
// Carlo trial gets derive_seed(master, sweep_index, trial_index), so results
// never depend on execution order or worker count.
template <typename... Tags>
constexpr uint64_t derive_seed(uint64_t master, Tags... tags) {
    uint64_t h = splitmix64(master);
    ((h = splitmix64(h ^ static_cast<uint64_t>(tags))), ...);
    return h;
}

// Counter-based SplitMix64 generator.  Self-contained so that sampled values
// are reproducible independent of the standard library implementation.
class Rng {
  public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    // Uniform in [0, 1) with 53 significant bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    int next_bit() { return static_cast<int>(next_u64() >> 63); }

    bool bernoulli(double p) { return next_double() < p; }

    // Uniform in [0, n), rejection-sampled to avoid modulo bias.
    uint64_t next_below(uint64_t n) {
        const uint64_t bound = n * (UINT64_MAX / n);
        uint64_t r;
        do {
            r = next_u64();
        } while (r >= bound);
        return r % n;
    }

    // Standard normal via Box-Muller (pairs cached).
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 6.283185307179586476925287 * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    // k distinct values from [0, n), ascending.  Partial Fisher-Yates.
    std::vector<int> sample_subset(int k, int n) {
        std::vector<int> idx(static_cast<size_t>(n));
        std::iota(idx.begin(), idx.end(), 0);
        for (int i = 0; i < k; ++i) {
            const int j = i + static_cast<int>(next_below(static_cast<uint64_t>(n - i)));
            std::swap(idx[i], idx[j]);
        }
        std::vector<int> out(idx.begin(), idx.begin() + k);
        std::sort(out.begin(), out.end());
        return out;
    }

  private:
    uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace qka
