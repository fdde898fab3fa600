#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace ajd {

// Counter-based 64-bit generator (splitmix64 output function over an
// incrementing Weyl sequence). A stream is fully determined by its key, so
// (master seed, path index) -> independent, reproducible streams regardless
// of thread scheduling.
class SplitMix64 {
  public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t key = 0) : state_(key) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type(0); }

    result_type operator()() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform on (0,1]; safe under log().
    double uniform_pos() {
        return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
    }
    // Uniform on [0,1).
    double uniform() {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

  private:
    std::uint64_t state_;
};

// Derives the stream for one path from (master seed, path index).
inline SplitMix64 path_stream(std::uint64_t master_seed, std::uint64_t path_index) {
    SplitMix64 h(master_seed ^ (0xA0761D6478BD642Full * (path_index + 1)));
    std::uint64_t key = h();
    key ^= h() << 1;
    return SplitMix64(key);
}

// Box-Muller with one cached value; consumption pattern is fixed, which keeps
// paths bit-reproducible independent of the platform's std::normal_distribution.
class NormalSampler {
  public:
    double operator()(SplitMix64& rng) {
        if (have_cache_) {
            have_cache_ = false;
            return cache_;
        }
        const double u1 = rng.uniform_pos();
        const double u2 = rng.uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cache_ = r * std::sin(a);
        have_cache_ = true;
        return r * std::cos(a);
    }

  private:
    double cache_ = 0.0;
    bool have_cache_ = false;
};

inline double exponential_draw(SplitMix64& rng, double rate) {
    return -std::log(rng.uniform_pos()) / rate;
}

// Inversion by sequential search; fine for the per-step thinning means
// (Lambda*dt << 1). Falls back to accumulation of exponential spacings for
// larger means. Guard against pathological intensities.
inline long poisson_draw(SplitMix64& rng, double mean) {
    if (mean <= 0.0) return 0;
    if (mean > 1e6) throw std::runtime_error("poisson_draw: mean exceeds 1e6, intensity blowup");
    if (mean < 30.0) {
        const double threshold = std::exp(-mean);
        long n = 0;
        double prod = rng.uniform_pos();
        while (prod > threshold) {
            ++n;
            prod *= rng.uniform_pos();
        }
        return n;
    }
    long n = 0;
    double t = exponential_draw(rng, 1.0);
    while (t <= mean) {
        ++n;
        t += exponential_draw(rng, 1.0);
    }
    return n;
}

}  // namespace ajd
