#pragma once

#include <cstdint>
#include <vector>

#include "avoidwalk/stats.hpp"
#include "avoidwalk/step_law.hpp"

namespace avoidwalk {

// Spacing statistics of the order statistics of S_1..S_n (S_0 excluded,
// matching max_{1<=k<=n-1} S_{(k+1,n)} - S_{(k,n)}). Index ranges:
//   interior  b_n <= k <= n - b_n,
//   exterior  k in [1, b_n] or [n - b_n, n-1].
struct GapStats {
    std::uint64_t n = 0;
    std::uint64_t b_n = 0;
    double gap = 0.0;        // G_n
    double gap_int = 0.0;    // G_n^Int (0 when the index range is empty)
    double gap_ext = 0.0;    // G_n^Ext
    long long empty_sites = 0;   // E_n, lattice only (-1 for continuous laws)
    double min = 0.0, max = 0.0; // m_n, M_n
    std::uint64_t argmin_first = 0;  // mu_n, 1-based
    std::uint64_t argmax_last = 0;   // eta_n, 1-based
};

GapStats gap_statistics(const Path& path, std::uint64_t b_n);

// min over 1 <= k <= n-1 of #{j <= k: S_j > S_k} + #{j >= k: S_j < S_k},
// j over [1, n]; 0 iff the path has a (weak) point of increase away from
// the final index. O(n log n).
long long increase_functional(const Path& path);

// One draw of (G, E) per rep from the limit construction: independent
// chains S>= and -S< run from 0 for N steps, statistics restricted to
// values <= floor(min(max S>=, max -S<) / 2) (frontier rule). Both chains
// then continue to 2N; the fraction of reps whose (G, E) changed is the
// stabilization diagnostic, and the 2N values are the reported sample.
struct LimitGapSample {
    std::uint64_t N = 0;
    std::uint64_t reps = 0;
    std::vector<double> gap;          // real units
    std::vector<long long> empty;     // sites of lambda N missing below the frontier
    double changed_fraction = 0.0;    // (G,E) differs between N and 2N
    std::uint64_t flagged = 0;        // reps with a suspiciously low frontier
    bool stabilized = false;          // changed_fraction < 1%
};

LimitGapSample sample_limit_gap(const StepLaw& law, std::uint64_t N, std::uint64_t reps,
                                std::uint64_t master_seed, unsigned workers);

struct DistanceReport {
    double ks = 0.0;
    double p_proxy = 0.0;   // asymptotic Kolmogorov Q; a proxy under ties
    std::size_t n1 = 0, n2 = 0;
};

DistanceReport distribution_distance(const std::vector<double>& a,
                                     const std::vector<double>& b);

}  // namespace avoidwalk
