#include "avoidwalk/contraction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "avoidwalk/parallel.hpp"
#include "avoidwalk/rng.hpp"

namespace avoidwalk {

namespace {

// One run up to min(tau_B, T'_3, cap). A hit from a side region coincides
// with an epoch (the rule fires on entering B); a hit from a hull hole
// does not, hence the separate hit_on_epoch flag.
struct JumpProbe {
    int epochs = 0;            // epochs observed (<= 3)
    bool hit = false;
    bool hit_on_epoch = false; // the hit step itself fired an epoch
    bool censored = false;     // cap reached before hit or third epoch
    double abs_h1 = 0.0;
    bool h1_seen = false;
};

template <bool Lattice>
JumpProbe probe_jumps(const StepLaw& law, const AvoidSet& B, double x, std::uint64_t cap,
                      RngStream& rng) {
    JumpProbe out;
    long long pu = 0;
    double pr = 0.0;
    if constexpr (Lattice) pu = law.to_units(x);
    else pr = x;

    const auto in_b = [&](auto p) {
        if constexpr (Lattice) return B.contains_units(p);
        else return B.contains_real(p);
    };
    const auto hull = [&](auto p) {
        if constexpr (Lattice) return B.in_hull_units(p);
        else return B.in_hull_real(p);
    };
    const auto plus = [&](auto p) {
        if constexpr (Lattice) return B.in_plus_units(p);
        else return B.in_plus_real(p);
    };
    const auto minus = [&](auto p) {
        if constexpr (Lattice) return B.in_minus_units(p);
        else return B.in_minus_real(p);
    };

    if (in_b(Lattice ? pu : pr)) { out.hit = true; return out; }

    auto prev_u = pu;
    auto prev_r = pr;
    for (std::uint64_t k = 1; k <= cap; ++k) {
        if constexpr (Lattice) pu = prev_u + law.sample_step_units(rng);
        else pr = prev_r + law.sample_step_real(rng);

        bool fired;
        if constexpr (Lattice)
            fired = (hull(prev_u) && (plus(pu) || minus(pu))) ||
                    (plus(prev_u) && !plus(pu)) || (minus(prev_u) && !minus(pu));
        else
            fired = (hull(prev_r) && (plus(pr) || minus(pr))) ||
                    (plus(prev_r) && !plus(pr)) || (minus(prev_r) && !minus(pr));

        if (fired) {
            ++out.epochs;
            if (out.epochs == 1) {
                out.abs_h1 = std::abs(Lattice ? law.to_real(pu) : pr);
                out.h1_seen = true;
            }
        }
        if (in_b(Lattice ? pu : pr)) {
            out.hit = true;
            out.hit_on_epoch = fired;
            return out;
        }
        if (out.epochs >= 3) return out;
        prev_u = pu;
        prev_r = pr;
    }
    out.censored = true;
    return out;
}

// exact survival inside the hull interval (two-sided exit), lattice only
void hull_exit_fit(const StepLaw& law, const AvoidSet& B, ContractionReport& rep) {
    const long long lo = B.l_units(), hi = B.r_units();
    const std::size_t width = static_cast<std::size_t>(hi - lo + 1);
    const long long mid = (lo + hi) / 2;
    std::vector<double> v(width, 0.0), vn(width, 0.0);
    v[static_cast<std::size_t>(mid - lo)] = 1.0;

    const auto& sup = law.support_units();
    const auto& pr = law.probs();

    std::vector<double> logp, ns;
    for (std::uint64_t n = 1; n <= 500; ++n) {
        std::fill(vn.begin(), vn.end(), 0.0);
        for (std::size_t i = 0; i < width; ++i) {
            if (v[i] == 0.0) continue;
            const long long p = lo + static_cast<long long>(i);
            for (std::size_t s = 0; s < sup.size(); ++s) {
                const long long p2 = p + sup[s];
                if (p2 >= lo && p2 <= hi)
                    vn[static_cast<std::size_t>(p2 - lo)] += v[i] * pr[s];
            }
        }
        v.swap(vn);
        if (n >= 50 && n % 50 == 0) {
            double total = 0.0;
            for (double w : v) total += w;
            rep.exit_n.push_back(n);
            rep.exit_survival.push_back(total);
            ns.push_back(static_cast<double>(n));
            logp.push_back(std::log(total));
        }
    }
    const LinearFit f = fit_line(ns, logp);
    rep.beta_valid = true;
    rep.beta_hat = -f.slope;
    rep.beta_r2 = f.r2;
}

}  // namespace

ContractionReport contraction_diagnostics(const StepLaw& law, const AvoidSet& B,
                                          const std::vector<double>& x_grid,
                                          std::uint64_t reps, std::uint64_t cap,
                                          std::uint64_t master_seed, unsigned workers) {
    if (reps < 1000) throw std::invalid_argument("contraction_diagnostics: reps >= 1e3");
    if (x_grid.empty()) throw std::invalid_argument("contraction_diagnostics: empty grid");
    if (cap == 0) cap = 1u << 22;

    ContractionReport rep;
    rep.x_grid = x_grid;

    std::uint64_t cens_total = 0;
    std::vector<double> fit_x, fit_y;
    std::vector<JumpProbe> probes(reps);

    for (std::size_t gi = 0; gi < x_grid.size(); ++gi) {
        const double x = x_grid[gi];
        parallel_for(reps, workers, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t r = lo; r < hi; ++r) {
                RngStream rng(master_seed ^ (0x9e3779b97f4a7c15ULL * (gi + 1)), r);
                probes[r] = law.is_lattice() ? probe_jumps<true>(law, B, x, cap, rng)
                                             : probe_jumps<false>(law, B, x, cap, rng);
            }
        });

        std::uint64_t surv1 = 0, res1 = 0, surv3 = 0, res3 = 0;
        RunningStat h1;
        for (const auto& p : probes) {
            if (p.censored) ++cens_total;
            // tau > T'_1: the first epoch fired strictly before the hit
            const bool r1 = p.hit || p.epochs >= 1;
            if (r1) {
                ++res1;
                const bool s1 =
                    p.epochs >= 2 || (p.epochs == 1 && !(p.hit && p.hit_on_epoch));
                if (s1) ++surv1;
            }
            // tau > T'_3: three epochs happened and none of them was the hit
            const bool r3 = p.hit || p.epochs >= 3;
            if (r3) {
                ++res3;
                if (p.epochs >= 3 && !(p.hit && p.hit_on_epoch)) ++surv3;
            }
            if (p.h1_seen) h1.add(p.abs_h1);
        }

        EstimateCI c1, c3, ch;
        c1.value = res1 ? static_cast<double>(surv1) / static_cast<double>(res1) : 0.0;
        c1.stderr_ = binomial_stderr(c1.value, res1);
        c1.reps = res1;
        c1.cap = cap;
        c1.method = Method::CappedSum;
        c1.master_seed = master_seed;
        c3.value = res3 ? static_cast<double>(surv3) / static_cast<double>(res3) : 0.0;
        c3.stderr_ = binomial_stderr(c3.value, res3);
        c3.reps = res3;
        c3.cap = cap;
        c3.method = Method::CappedSum;
        c3.master_seed = master_seed;
        ch.value = h1.mean();
        ch.stderr_ = h1.stderr_mean();
        ch.reps = h1.count();
        ch.cap = cap;
        ch.method = Method::CappedSum;
        ch.master_seed = master_seed;

        rep.survive_t1.push_back(c1);
        rep.survive_t3.push_back(c3);
        rep.e_abs_h1.push_back(ch);
        if (c1.value > rep.gamma_hat) {
            rep.gamma_hat = c1.value;
            rep.gamma_hat_stderr = c1.stderr_;
        }
        if (c3.value > rep.gamma3_hat) {
            rep.gamma3_hat = c3.value;
            rep.gamma3_hat_stderr = c3.stderr_;
        }
        fit_x.push_back(std::abs(x));
        fit_y.push_back(ch.value);
    }

    if (fit_x.size() >= 2) rep.lyapunov = fit_line(fit_x, fit_y);
    if (law.is_lattice()) hull_exit_fit(law, B, rep);
    rep.censored_fraction =
        static_cast<double>(cens_total) / static_cast<double>(reps * x_grid.size());
    return rep;
}

}  // namespace avoidwalk
