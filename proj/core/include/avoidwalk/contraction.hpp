#pragma once

#include <cstdint>
#include <vector>

#include "avoidwalk/avoid_set.hpp"
#include "avoidwalk/stats.hpp"
#include "avoidwalk/step_law.hpp"

namespace avoidwalk {

// Estimates of the contraction mechanisms behind the tail asymptotics:
// per grid point x, the probability of surviving the first jump over the
// edges (gamma), the Lyapunov drift of |H'_1| (alpha, K), survival past
// the third jump (gamma'), and the exponential two-sided exit rate (beta).
struct ContractionReport {
    std::vector<double> x_grid;

    std::vector<EstimateCI> survive_t1;   // P_x(tau_B > T'_1)
    double gamma_hat = 0.0;               // max over grid
    double gamma_hat_stderr = 0.0;

    std::vector<EstimateCI> e_abs_h1;     // E_x |H'_1|, given T'_1 observed
    LinearFit lyapunov;                   // fit E|H'_1| ~ alpha |x| + K

    std::vector<EstimateCI> survive_t3;   // P_x(tau_B > T'_3)
    double gamma3_hat = 0.0;
    double gamma3_hat_stderr = 0.0;

    bool beta_valid = false;              // lattice hull exit only
    double beta_hat = 0.0;
    double beta_r2 = 0.0;
    std::vector<std::uint64_t> exit_n;
    std::vector<double> exit_survival;    // P_mid(exit from hull > n), exact DP

    double censored_fraction = 0.0;       // runs cut by the cap (all estimators)
};

ContractionReport contraction_diagnostics(const StepLaw& law, const AvoidSet& B,
                                          const std::vector<double>& x_grid,
                                          std::uint64_t reps, std::uint64_t cap,
                                          std::uint64_t master_seed, unsigned workers);

}  // namespace avoidwalk
