#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "avoidwalk/avoid_set.hpp"
#include "avoidwalk/jump_chain.hpp"
#include "avoidwalk/ladder.hpp"
#include "avoidwalk/stats.hpp"
#include "avoidwalk/step_law.hpp"

namespace avoidwalk {

// Per-accepted-path summary; full positions are only retained on request
// (large-n samples would not fit otherwise).
struct PathSummary {
    double s_quarter = 0.0;   // S_{ceil(n/4)}
    double s_half = 0.0;      // S_{ceil(n/2)}
    double s_end = 0.0;       // S_n
    std::uint32_t nu_n = 0;
    std::uint64_t t_last_epoch = 0;   // T'_{nu_n}, 0 when nu_n = 0
    std::vector<std::uint64_t> epochs;
    std::vector<double> marks;
};

struct ConditionedSample {
    StepLaw law;
    std::string set_spec;
    double x = 0.0;
    std::uint64_t n = 0;
    std::uint64_t master_seed = 0;

    std::vector<PathSummary> accepted;
    std::uint64_t attempts = 0;
    double acceptance_rate = 0.0;
    bool partial = false;     // max_attempts hit before target_accepted

    bool keep_paths = false;
    std::vector<Path> paths;  // populated only when keep_paths
};

// Rejection sampler for Law_x( . | tau_B > n). Expected attempts per
// accepted path are ~ 1/q_n(x) = Theta(sqrt(n)). Attempt index doubles as
// the RNG task index, so results are bit-identical for any worker count.
// Throws when max_attempts pass with zero acceptances.
ConditionedSample sample_conditioned(const StepLaw& law, const AvoidSet& B, double x,
                                     std::uint64_t n, std::uint64_t target_accepted,
                                     std::uint64_t max_attempts, std::uint64_t master_seed,
                                     unsigned workers, bool keep_paths = false);

struct ConditionedLawReport {
    // (a) sign law
    double rho_hat = 0.0;
    double rho_stderr = 0.0;
    double rho_formula = 0.0;
    double rho_formula_stderr = 0.0;
    std::uint64_t ties = 0;          // S_n == 0, excluded from rho
    // (b) jump-count law, cells i = 1..5 for P(nu_n = i-1)
    std::vector<double> nu_cells;
    std::vector<double> nu_stderr;
    // (c) early-last-jump fraction P(T'_{nu_n} <= b_n)
    double frac_last_jump_early = 0.0;
    std::uint64_t b_n = 0;
    // (d) KS distances of |S_nt|/(sigma sqrt(n)) against the meander
    // marginals at t = 1/4, 1/2, 1
    double ks_endpoint = 0.0;
    double ks_quarter = 0.0;
    double ks_half = 0.0;
};

ConditionedLawReport conditioned_law_checks(const ConditionedSample& sample, const EstimateCI& v_hat,
                               const EstimateCI& e_hit, std::uint64_t b_n);

// Capped-MC reference for the jump-count limit law: cells
//   V^{-1} E_x |H'_i - H'_{i-1}| 1{kappa' >= i, H'_{i-1} not in Conv(B)}.
struct JumpCountReference {
    std::vector<EstimateCI> cells;   // i = 1..5
    EstimateCI v_capped;             // the full capped sum (denominator)
    double censored_fraction = 0.0;
};

JumpCountReference jump_count_reference(const StepLaw& law, const AvoidSet& B, double x, std::uint64_t cap,
                           std::uint64_t reps, std::uint64_t master_seed, unsigned workers);

// Doob h-transform chains S>= (on [0,inf), U+ weights) and S< (on (-inf,0),
// U'- weights, started at 0). Kernel rows are precomputed and validated to
// 1e-9 at construction; violation is fatal (it means the U table is wrong).
class HChain {
  public:
    enum class Side { NonNegative, Negative };

    HChain(std::shared_ptr<const RenewalU> u, Side side, long long max_state_units = 1 << 15);

    Side side() const { return side_; }
    long long state() const { return state_; }
    void reset(long long state_units = 0);

    std::vector<std::pair<long long, double>> kernel_row(long long x_units) const;
    long long step(RngStream& rng);

    // exact joint law of (S_1, .., S_k) from 0, k small
    std::map<std::vector<long long>, double> exact_kstep_law(std::size_t k) const;

    double max_normalization_error() const { return max_norm_err_; }

  private:
    void build_row(long long x_units);
    double weight(long long y_units) const;

    std::shared_ptr<const RenewalU> u_;
    Side side_;
    long long state_ = 0;
    long long max_state_;
    double max_norm_err_ = 0.0;
    std::vector<std::vector<double>> cum_;        // per state, cumulative kernel
    std::vector<std::vector<long long>> next_;    // per state, target states
};

// TV distance between the rejection-conditioned law of (S_1..S_k) given
// tau_{(-inf,0)} > n and the exact k-step law of S>= from 0.
struct DoobCheck {
    std::vector<std::uint64_t> n_grid;
    std::vector<double> tv;
    std::vector<std::uint64_t> accepted;
    double kernel_norm_error = 0.0;
};

DoobCheck doob_limit_check(const StepLaw& law, std::size_t k,
                           const std::vector<std::uint64_t>& n_grid,
                           std::uint64_t target_accepted, std::uint64_t max_attempts,
                           std::uint64_t master_seed, unsigned workers);

}  // namespace avoidwalk
