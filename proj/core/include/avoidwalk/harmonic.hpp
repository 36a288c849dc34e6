#pragma once

#include <cstdint>
#include <vector>

#include "avoidwalk/avoid_set.hpp"
#include "avoidwalk/ladder.hpp"
#include "avoidwalk/oracle.hpp"
#include "avoidwalk/stats.hpp"
#include "avoidwalk/step_law.hpp"

namespace avoidwalk {

// Capped jump-chain sum: mean over reps of
//   sum_{i: T'_i <= cap, T'_i <= tau_B} |H'_i - H'_{i-1}| 1{H'_{i-1} not in Conv(B)}.
// Monotone nondecreasing in cap in expectation, underestimates V (the
// censored tail only removes nonnegative terms).
EstimateCI estimate_V_capped(const StepLaw& law, const AvoidSet& B, double x, std::uint64_t cap,
                             std::uint64_t reps, std::uint64_t master_seed, unsigned workers);

// Tail inversion of P_x(tau_B > n) ~ sqrt(2) V / (sigma sqrt(pi n)):
// V_hat = sigma sqrt(pi n / 2) * survival fraction.
EstimateCI estimate_V_tail(const StepLaw& law, const AvoidSet& B, double x, std::uint64_t n,
                           std::uint64_t reps, std::uint64_t master_seed, unsigned workers);

struct VTable {
    StepLaw law;
    std::string set_spec;
    std::vector<long long> x_units;
    std::vector<EstimateCI> v;

    double value_at(long long xu) const;
    double err_at(long long xu) const;
    bool has(long long xu) const;
};

// Oracle table over [xlo, xhi] by one backward DP; per-point uncertainty is
// the difference between the two largest-n extrapolants.
VTable vtable_from_oracle(const StepLaw& law, const AvoidSet& B, long long xlo, long long xhi,
                          const std::vector<std::uint64_t>& n_grid, unsigned workers);

struct HarmonicityReport {
    std::vector<long long> x_units;       // interior points tested
    std::vector<double> residual;         // |V(x) - E_x V(S_1)|
    std::vector<double> tolerance;        // propagated 3*err per point
    double max_residual = 0.0;
    double max_ratio = 0.0;               // max residual / tolerance
};

// Residual of the killed-walk harmonicity equation on the interior of the
// table (margin >= max_step required on both ends).
HarmonicityReport harmonicity_residual(const VTable& table, const StepLaw& law,
                                       const AvoidSet& B);

// Exact-arithmetic residual for closed-form tables (e.g. SRW V = |x|-d+1).
// Returns true when every interior residual is exactly zero.
bool harmonicity_residual_exact(const StepLaw& law, const AvoidSet& B,
                                const std::vector<std::pair<long long, Fraction>>& table);

struct UVRow {
    double d = 0.0;
    double u_plus_side = 0.0;    // U_d(+(d+y)), exact ladder value
    double u_minus_side = 0.0;   // U_d(-(d+y))
    EstimateCI v_plus_side;
    EstimateCI v_minus_side;
    double diff = 0.0;           // mean of the two V - U differences
};

// Edge comparison of U_d against V_d at offset y across a grid of d values;
// V estimates come from the oracle extrapolation.
std::vector<UVRow> compare_U_V(const StepLaw& law, const std::vector<double>& d_grid, double y,
                               const std::vector<std::uint64_t>& n_grid, unsigned workers);

// max over x in [xlo, xhi] \ hull of sqrt(n) q_n(x) / |x| for each n.
std::vector<double> lemma1_sweep(const StepLaw& law, const AvoidSet& B, long long xlo,
                                 long long xhi, const std::vector<std::uint64_t>& n_set,
                                 unsigned workers);

}  // namespace avoidwalk
