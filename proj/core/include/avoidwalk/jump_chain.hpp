#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "avoidwalk/avoid_set.hpp"
#include "avoidwalk/step_law.hpp"

namespace avoidwalk {

inline constexpr std::uint64_t kNoHit = std::numeric_limits<std::uint64_t>::max();

// Epochs T'_k and marks H'_k of the jumps over the edges of B, for the
// unkilled walk. An epoch at step n fires when one of the three transition
// rules holds for (S_{n-1}, S_n):
//   hull -> B+ or B-,   B+ -> outside B+,   B- -> outside B-.
// T'_0 = 0 is implicit; epochs[i] is T'_{i+1}.
struct JumpChain {
    std::vector<std::uint64_t> epochs;
    std::vector<double> marks;            // H'_k, real units
    std::vector<long long> marks_units;   // lattice only

    std::uint64_t length = 0;     // steps examined (path length or steps simulated)
    std::uint64_t tau = kNoHit;   // min{k >= 0: S_k in B}, kNoHit if censored
    std::uint64_t tau_tilde = kNoHit;  // min{k >= 1: S_k in B}
    bool censored = true;         // no hit within `length`
    double hit_position = 0.0;    // S_tau when uncensored

    // kappa' = max{k >= 0: T'_k <= tau_B}; only defined when uncensored.
    std::uint64_t kappa_prime = 0;
    bool kappa_valid = false;

    // nu_n = number of epochs <= n
    std::uint64_t nu(std::uint64_t n) const {
        std::uint64_t c = 0;
        for (auto t : epochs) {
            if (t <= n) ++c;
            else break;
        }
        return c;
    }

    // T'_{nu_n}: time of the last epoch by n (0 when none)
    std::uint64_t last_epoch_by(std::uint64_t n) const {
        std::uint64_t t = 0;
        for (auto e : epochs) {
            if (e <= n) t = e;
            else break;
        }
        return t;
    }
};

// Full decomposition of a stored path. Epochs past tau_B follow the formal
// (unkilled) rule; kappa' only counts those with T'_k <= tau_B.
JumpChain jump_decompose(const Path& path, const AvoidSet& B);

// Simulates from x until tau_B or `cap` steps, retaining only epochs and
// marks (memory O(#epochs), not O(cap)).
JumpChain simulate_capped_hit(const StepLaw& law, double x, const AvoidSet& B,
                              std::uint64_t cap, RngStream& rng);

// Survival test only: returns min(tau_B, n+1) semantics via JumpChain-free
// scalar; kNoHit when the walk avoids B through step n.
std::uint64_t simulate_hit_time(const StepLaw& law, double x, const AvoidSet& B,
                                std::uint64_t n, RngStream& rng);

}  // namespace avoidwalk
