#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace hrpose {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derive an independent stream seed from (seed, salt...). Used to make
// per-epoch / per-sample streams independent of iteration order.
inline uint64_t seed_chain(uint64_t seed, uint64_t a, uint64_t b = 0) {
    return splitmix64(splitmix64(seed ^ splitmix64(a)) ^ splitmix64(b));
}

// xoshiro256** with explicit distributions so sampled streams are stable
// across standard libraries on one platform.
class Rng {
 public:
    explicit Rng(uint64_t seed = 0) { reseed(seed); }

    void reseed(uint64_t seed) {
        uint64_t x = seed;
        for (auto& w : s_) {
            x = splitmix64(x);
            w = x;
        }
    }

    uint64_t next() {
        const uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // [0, 1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // [0, n)
    uint64_t uniform_int(uint64_t n) { return n ? next() % n : 0; }

    bool bernoulli(double p) { return uniform() < p; }

    double normal(double mean = 0.0, double stddev = 1.0) {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[uniform_int(i)]);
        }
    }

    std::string state() const {
        std::ostringstream os;
        os << s_[0] << ' ' << s_[1] << ' ' << s_[2] << ' ' << s_[3];
        return os.str();
    }

    void restore(const std::string& text) {
        std::istringstream is(text);
        is >> s_[0] >> s_[1] >> s_[2] >> s_[3];
    }

 private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4]{};
};

}  // namespace hrpose
