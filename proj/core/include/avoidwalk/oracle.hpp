#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "avoidwalk/avoid_set.hpp"
#include "avoidwalk/step_law.hpp"

namespace avoidwalk {

inline constexpr std::uint64_t kDpDefaultLimit = 1u << 14;
inline constexpr std::uint64_t kRationalDpLimit = 512;

// Exact survival and hit-location data for one start, by forward DP over
// the reachable window (no approximation; long double accumulation).
struct DPResult {
    std::vector<double> q;                           // q_0..q_n
    std::vector<std::pair<long long, double>> hit_pmf;  // entry position (units) -> mass
    double hit_mass = 0.0;                           // 1 - q_n
    double censor_mass = 0.0;                        // q_n
    double e_hit_given_hit = 0.0;                    // E[S_tau | tau <= n], real units
    double e_hit_lo = 0.0, e_hit_hi = 0.0;           // interval for E S_tau, real units
    double mass_drift = 0.0;                         // max |alive+absorbed-1| over steps
};

DPResult dp_survival(const StepLaw& law, const AvoidSet& B, double x, std::uint64_t n,
                     std::uint64_t limit = kDpDefaultLimit);

// Exact rational mode (n <= 512); values serialized as "p/q".
struct RationalDPResult {
    std::vector<std::string> q;
    std::vector<std::pair<long long, std::string>> hit_pmf;
};

RationalDPResult dp_survival_rational(const StepLaw& law, const AvoidSet& B, double x,
                                      std::uint64_t n);

// Backward DP giving q_n(x) for every x in [xlo, xhi] at once, plus tracked
// per-step series. The window is sized so every reported value is exact.
// Deterministic for any worker count.
struct SurvivalGrid {
    long long xlo = 0, xhi = 0;
    std::uint64_t n = 0;
    std::vector<double> q_final;                    // index x - xlo
    std::vector<std::uint64_t> ks;                  // tracked step counts, ascending
    std::vector<long long> tracked_x;
    std::vector<std::vector<double>> tracked_q;       // [xi][ki], P_x(tau > k)
    std::vector<std::vector<double>> tracked_qtilde;  // [xi][ki], P_x(tau~ > k)

    double q_at(long long x_units) const;
};

SurvivalGrid survival_grid(const StepLaw& law, const AvoidSet& B, long long xlo, long long xhi,
                           std::uint64_t n, std::vector<long long> tracked_x,
                           std::vector<std::uint64_t> ks, bool track_tilde, unsigned workers);

// Exact hit-location law by a banded linear solve on the window [-L, L];
// truncation is validated by doubling L.
struct HitSolve {
    long long L = 0;
    std::vector<long long> targets;            // positions in B (units)
    std::vector<std::vector<double>> h;        // h[t][x + L] = P_x(S_tau = targets[t])
    double prob(long long x_units, long long target) const;
    double mass(long long x_units) const;      // total hit mass resolved in window
    double mean(long long x_units) const;      // E[S_tau] in units (window-resolved part)
};

HitSolve dp_hit_solve(const StepLaw& law, const AvoidSet& B, long long L);

// Hit statistics with an explicit bias interval from the horizon censor
// mass, per forward DP; the linear-solve variant above pins the same pmf
// independently.
struct HitStats {
    std::vector<std::pair<long long, double>> pmf;
    double e_hit = 0.0;        // E[S_tau | tau <= horizon], real units
    double e_lo = 0.0, e_hi = 0.0;
    double censor_mass = 0.0;
};

HitStats dp_hit_stats(const StepLaw& law, const AvoidSet& B, double x, std::uint64_t horizon,
                      std::uint64_t limit = kDpDefaultLimit);

// sigma * sqrt(pi n / 2) * q_n(x) along an increasing n grid; no rate is
// assumed, the last value is reported with the previous difference as its
// uncertainty.
struct VExtrapolation {
    std::vector<std::uint64_t> n_grid;
    std::vector<double> v_hat;
    double value = 0.0;
    double err = 0.0;          // |last - previous|
    bool trend_ok = true;      // successive |differences| shrink (beyond noise)
};

VExtrapolation extrapolate_V(const StepLaw& law, const AvoidSet& B, double x,
                             const std::vector<std::uint64_t>& n_grid, unsigned workers);

// Kesten-Spitzer comparison: ratio_n = P_x(tau~_B > n) / P_0(tau~_{0} > n),
// reported against V via sigma^2 * g / lambda.
struct RatioCheck {
    std::vector<std::uint64_t> n_grid;
    std::vector<double> ratio;
    double sigma2_g = 0.0;       // sigma^2 * ratio_final / lambda
    double v_hat = 0.0;          // extrapolated V at the same n
    double rel_gap = 0.0;        // |sigma2_g - v_hat| / v_hat
};

RatioCheck ratio_limit_check(const StepLaw& law, const AvoidSet& B, double x,
                             const std::vector<std::uint64_t>& n_grid, unsigned workers);

}  // namespace avoidwalk
