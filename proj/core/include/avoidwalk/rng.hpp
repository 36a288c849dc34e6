#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace avoidwalk {

// Generator identity string, embedded in every report. Bump when the
// stream derivation or output sequence changes.
inline constexpr std::string_view kRngId = "xoshiro256++/splitmix64-substreams-v1";

// SplitMix64, used only to expand (master_seed, task_index) into the
// 256-bit xoshiro state. Steele, Lea, Flood (2014).
struct SplitMix64 {
    uint64_t state;

    explicit constexpr SplitMix64(uint64_t seed) noexcept : state(seed) {}

    constexpr uint64_t next() noexcept {
        uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

// One independent stream per (master_seed, task_index). Equal pairs give
// identical output; distinct task indices give statistically independent
// streams. Workers own their streams exclusively; merging per-task
// results must use commutative reductions only.
class RngStream {
  public:
    RngStream() : RngStream(0, 0) {}

    RngStream(uint64_t master_seed, uint64_t task_index)
        : master_seed_(master_seed), task_index_(task_index) {
        SplitMix64 sm(master_seed ^ (0x9e3779b97f4a7c15ULL * (task_index + 1)));
        sm.next();  // decorrelate near-zero seeds
        for (auto& w : s_) w = sm.next();
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
    }

    uint64_t master_seed() const noexcept { return master_seed_; }
    uint64_t task_index() const noexcept { return task_index_; }

    // xoshiro256++ (Blackman & Vigna)
    uint64_t next_u64() noexcept {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform on [0,1) with 53 random bits
    double next_double() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform on (0,1], safe as a log() argument
    double next_double_pos() noexcept {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    // standard normal, Marsaglia polar method with one cached value
    double next_normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * next_double() - 1.0;
            v = 2.0 * next_double() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    // index into [0,n) without modulo bias (Lemire)
    uint64_t next_below(uint64_t n) noexcept {
        __uint128_t m = static_cast<__uint128_t>(next_u64()) * n;
        uint64_t lo = static_cast<uint64_t>(m);
        if (lo < n) {
            const uint64_t t = (-n) % n;
            while (lo < t) {
                m = static_cast<__uint128_t>(next_u64()) * n;
                lo = static_cast<uint64_t>(m);
            }
        }
        return static_cast<uint64_t>(m >> 64);
    }

  private:
    static constexpr uint64_t rotl(uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    uint64_t s_[4];
    uint64_t master_seed_ = 0;
    uint64_t task_index_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

inline RngStream derive_substream(uint64_t master_seed, uint64_t task_index) {
    return RngStream(master_seed, task_index);
}

}  // namespace avoidwalk
