#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "avoidwalk/rng.hpp"
#include "avoidwalk/stats.hpp"
#include "avoidwalk/step_law.hpp"

namespace avoidwalk {

enum class LadderKind { StrictAscending, StrictDescending, WeakAscending, WeakDescending };
enum class StripBoundary { Truncate, Redirect };

// Exact first-passage law into the lower half-line for a bounded-support
// lattice walk: from any alive start j, the distribution of the entry
// position. Canonical orientation is downward; the target is (-inf, 0)
// (strict) or (-inf, 0] (weak), alive states are [alo, L].
//
// With StripBoundary::Redirect, mass leaking above L is absorbed with the
// stationary (infinitely-remote-level) overshoot law and the solve is
// iterated to a fixed point; the leftover `eps` is the self-consistency
// residual. Overshoot laws from high starts converge geometrically for
// bounded lattice steps, so moderate L already reaches near machine
// precision. With Truncate, `eps` is the leaked mass itself (one-sided,
// halves when L doubles).
struct FirstPassageTable {
    long long alo = 0;
    long long L = 0;
    long long band = 0;
    std::vector<long long> targets;          // entry positions, ascending
    std::vector<std::vector<double>> col;    // col[t][j - alo] = P_j(entry at targets[t])
    std::vector<double> eps;                 // eps[j - alo]

    double prob(long long start, long long target) const;
    double eps_at(long long start) const;
    double total(long long start) const;
    // E[S_tau] in units; unresolved mass contributes its worst-case spread
    // to the interval [mean_lo, mean_hi]
    double mean_position(long long start) const;
};

FirstPassageTable build_passage_down(const StepLaw& law, bool weak, long long L,
                                     StripBoundary boundary = StripBoundary::Redirect);

// Ladder-height distribution plus metadata. Exact (lattice strip solve) or
// sampled (cap-censored Monte Carlo, the only option for continuous laws).
struct LadderTable {
    StepLaw law;
    LadderKind kind = LadderKind::StrictDescending;
    bool exact = true;

    // exact mode: pmf over |H| in lambda units (index = magnitude)
    std::vector<double> pmf_abs;
    double eps_L = 0.0;
    long long L = 0;
    double mean_abs_units = 0.0;

    // sampled mode
    std::vector<double> samples_abs;   // |H| in real units
    double censored_fraction = 0.0;
    std::uint64_t cap = 0;
    std::uint64_t reps = 0;

    double mean_abs_real() const;
    double mean_stderr() const;        // 0 for exact tables
};

// Exact ladder pmf by strip solve; lattice bounded-support laws only.
// L = 0 picks a default large enough for near machine precision under the
// redirected boundary.
LadderTable exact_ladder_pmf(const StepLaw& law, LadderKind kind, long long L = 0,
                             StripBoundary boundary = StripBoundary::Redirect);

LadderTable sampled_ladder(const StepLaw& law, LadderKind kind, std::uint64_t cap,
                           std::uint64_t reps, std::uint64_t master_seed, unsigned workers);

// All four exact tables plus the canonical passage tables for a lattice
// law. Ascending data lives in mirrored coordinates internally; accessors
// below take care of signs. Immutable after construction.
class LadderSystem {
  public:
    explicit LadderSystem(const StepLaw& law, long long L = 0);

    const StepLaw& law() const { return law_; }
    const LadderTable& table(LadderKind kind) const;

    // P_y(entry position = t) for first passage into the half-line below 0
    // (strict/weak) and above 0, any lattice start, positions in units.
    double passage_down_prob(long long start, long long target, bool weak) const;
    double passage_up_prob(long long start, long long target, bool weak) const;
    double passage_down_mean(long long start, bool weak) const;  // E S_tau, units
    double passage_up_mean(long long start, bool weak) const;
    long long passage_top(bool /*up*/) const { return down_strict_.L; }

  private:
    StepLaw law_;
    StepLaw mirrored_;
    FirstPassageTable down_strict_, down_weak_;     // law as given
    FirstPassageTable up_strict_, up_weak_;         // built on mirrored law
    LadderTable tables_[4];
};

// Renewal-function evaluators built from exact ladder tables.
//   U_plus(y)  = y - E_y H-            (y >= 0, strict descending data)
//   U_minus(y) = E_y H+ - y            (y <= 0, strict ascending data)
//   U'_plus, U'_minus: closed-half-line variants (weak data at the edge)
//   U_d(x)     = U_sgn(x)(x - sgn(x) d)
// evaluated through the Wald renewal sums; all arguments in real units.
class RenewalU {
  public:
    RenewalU(std::shared_ptr<const LadderSystem> sys, std::size_t capacity_units = 1 << 17);

    double U_plus_units(long long y) const;
    double U_minus_units(long long y) const;
    double U_plus_weak_units(long long y) const;
    double U_minus_weak_units(long long y) const;

    double U_plus(double y) const;
    double U_minus(double y) const;
    double U_plus_weak(double y) const;
    double U_minus_weak(double y) const;
    double U_d(double x, double d) const;

    const LadderSystem& system() const { return *sys_; }
    std::size_t capacity() const { return n_desc_.size(); }

  private:
    std::shared_ptr<const LadderSystem> sys_;
    std::vector<double> n_desc_;   // renewal function of |H-| ladder sums
    std::vector<double> n_asc_;    // renewal function of H+ ladder sums
    double mean_desc_ = 0.0, mean_asc_ = 0.0;
    double mean_weak_desc_ = 0.0, mean_weak_asc_ = 0.0;
};

// Limiting overshoot law over an infinitely remote level, windowed to
// [0, 2d). Lattice: pmf over j units with P(ov = j) = P(H+ > j)/E H+;
// continuous: CDF evaluator from a sampled H+ table.
struct OvershootLimit {
    bool lattice = true;
    double lambda = 0.0;
    std::vector<double> pmf;     // lattice, index = overshoot in units
    double window_mass = 0.0;    // total mass landing inside [0, 2d)
    double inside_limit = 0.0;   // lim P_x(|H_1| < d), the displayed sum
    // continuous: empirical integrated-tail CDF on [0, 2d]
    std::vector<double> grid;
    std::vector<double> cdf;
};

OvershootLimit overshoot_at_infinity(const StepLaw& law, double two_d,
                                     const LadderTable& ascending_strict);

// E_0 H'_+ * E_0 |H_-| versus sigma^2 / 2 (Feller XVIII.4). Exact for
// lattice laws, sampled for continuous ones.
struct FellerIdentity {
    EstimateCI weak_ascending_mean;
    EstimateCI strict_descending_mean_abs;
    double product = 0.0;
    double product_stderr = 0.0;
    double sigma2_half = 0.0;
};

FellerIdentity feller_identity_check(const StepLaw& law, std::uint64_t cap, std::uint64_t reps,
                                     std::uint64_t master_seed, unsigned workers);

// Capped-MC estimate of U_d(x) = |x - E_x S_{T_1}| for continuous laws.
EstimateCI estimate_U_d_continuous(const StepLaw& law, double x, double d, std::uint64_t cap,
                                   std::uint64_t reps, std::uint64_t master_seed,
                                   unsigned workers);

}  // namespace avoidwalk
