#include "avoidwalk/harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "avoidwalk/jump_chain.hpp"
#include "avoidwalk/parallel.hpp"

namespace avoidwalk {

namespace {

double capped_jump_sum(const JumpChain& jc, double x0, const AvoidSet& B) {
    double sum = 0.0;
    double prev = x0;
    bool prev_outside_hull = !B.in_hull_real(x0);
    for (std::size_t i = 0; i < jc.marks.size(); ++i) {
        const double cur = jc.marks[i];
        if (prev_outside_hull) sum += std::abs(cur - prev);
        prev = cur;
        prev_outside_hull = !B.in_hull_real(cur);
    }
    return sum;
}

}  // namespace

EstimateCI estimate_V_capped(const StepLaw& law, const AvoidSet& B, double x, std::uint64_t cap,
                             std::uint64_t reps, std::uint64_t master_seed, unsigned workers) {
    if (law.is_lattice() ? B.contains_units(law.to_units(x)) : B.contains_real(x))
        throw std::invalid_argument("estimate_V_capped: x in B rejected (V == 0 there)");
    if (cap < 1000) throw std::invalid_argument("estimate_V_capped: cap >= 1e3 required");

    std::vector<double> sums(reps);
    std::vector<unsigned char> censored(reps);
    parallel_for(reps, workers, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t r = lo; r < hi; ++r) {
            RngStream rng(master_seed, r);
            JumpChain jc = simulate_capped_hit(law, x, B, cap, rng);
            sums[r] = capped_jump_sum(jc, x, B);
            censored[r] = jc.censored ? 1 : 0;
        }
    });

    RunningStat rs;
    std::uint64_t cens = 0;
    for (std::size_t r = 0; r < reps; ++r) {
        rs.add(sums[r]);
        cens += censored[r];
    }
    EstimateCI ci;
    ci.value = rs.mean();
    ci.stderr_ = rs.stderr_mean();
    ci.reps = reps;
    ci.cap = cap;
    ci.censored_fraction = reps ? static_cast<double>(cens) / static_cast<double>(reps) : 0.0;
    ci.master_seed = master_seed;
    ci.method = Method::CappedSum;
    return ci;
}

EstimateCI estimate_V_tail(const StepLaw& law, const AvoidSet& B, double x, std::uint64_t n,
                           std::uint64_t reps, std::uint64_t master_seed, unsigned workers) {
    if (n < 1000) throw std::invalid_argument("estimate_V_tail: n >= 1e3 required");

    std::vector<unsigned char> alive(reps);
    parallel_for(reps, workers, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t r = lo; r < hi; ++r) {
            RngStream rng(master_seed, r);
            alive[r] = simulate_hit_time(law, x, B, n, rng) == kNoHit ? 1 : 0;
        }
    });
    std::uint64_t surv = 0;
    for (auto a : alive) surv += a;
    const double phat = reps ? static_cast<double>(surv) / static_cast<double>(reps) : 0.0;
    const double scale =
        law.sigma() * std::sqrt(std::numbers::pi * static_cast<double>(n) / 2.0);

    EstimateCI ci;
    ci.value = scale * phat;
    ci.stderr_ = scale * binomial_stderr(phat, reps);
    ci.reps = reps;
    ci.cap = n;
    ci.censored_fraction = 0.0;
    ci.master_seed = master_seed;
    ci.method = Method::TailInversion;
    return ci;
}

double VTable::value_at(long long xu) const {
    for (std::size_t i = 0; i < x_units.size(); ++i)
        if (x_units[i] == xu) return v[i].value;
    throw std::out_of_range("VTable: x not tabulated");
}

double VTable::err_at(long long xu) const {
    for (std::size_t i = 0; i < x_units.size(); ++i)
        if (x_units[i] == xu) return v[i].stderr_;
    throw std::out_of_range("VTable: x not tabulated");
}

bool VTable::has(long long xu) const {
    return std::find(x_units.begin(), x_units.end(), xu) != x_units.end();
}

VTable vtable_from_oracle(const StepLaw& law, const AvoidSet& B, long long xlo, long long xhi,
                          const std::vector<std::uint64_t>& n_grid, unsigned workers) {
    if (n_grid.size() < 2) throw std::invalid_argument("vtable_from_oracle: need >= 2 n values");
    const std::uint64_t n = n_grid.back();
    const std::uint64_t nprev = n_grid[n_grid.size() - 2];

    // one backward pass at n, another at nprev for the trend uncertainty
    SurvivalGrid gn = survival_grid(law, B, xlo, xhi, n, {}, {}, false, workers);
    SurvivalGrid gp = survival_grid(law, B, xlo, xhi, nprev, {}, {}, false, workers);

    const double sig = law.sigma();
    const double sn = sig * std::sqrt(std::numbers::pi * static_cast<double>(n) / 2.0);
    const double sp = sig * std::sqrt(std::numbers::pi * static_cast<double>(nprev) / 2.0);

    VTable t;
    t.law = law;
    t.set_spec = B.spec();
    for (long long xu = xlo; xu <= xhi; ++xu) {
        EstimateCI ci;
        ci.method = Method::Oracle;
        ci.value = sn * gn.q_at(xu);
        ci.stderr_ = std::abs(ci.value - sp * gp.q_at(xu));
        // V == 0 on B by definition; the DP gives exactly 0 there as well
        t.x_units.push_back(xu);
        t.v.push_back(ci);
    }
    return t;
}

HarmonicityReport harmonicity_residual(const VTable& table, const StepLaw& law,
                                       const AvoidSet& B) {
    if (!law.is_lattice())
        throw std::invalid_argument("harmonicity_residual: lattice laws only");
    if (table.x_units.empty()) throw std::invalid_argument("harmonicity_residual: empty table");

    const long long m = law.max_step_units();
    const long long lo = *std::min_element(table.x_units.begin(), table.x_units.end());
    const long long hi = *std::max_element(table.x_units.begin(), table.x_units.end());
    if (hi - lo < 2 * m)
        throw std::invalid_argument("harmonicity_residual: grid margin below max_step");

    HarmonicityReport rep;
    for (long long xu = lo + m; xu <= hi - m; ++xu) {
        if (B.contains_units(xu)) continue;
        double ev = 0.0, err = table.err_at(xu);
        for (std::size_t s = 0; s < law.support_units().size(); ++s) {
            const long long y = xu + law.support_units()[s];
            const double p = law.probs()[s];
            ev += p * (B.contains_units(y) ? 0.0 : table.value_at(y));
            if (!B.contains_units(y)) err += p * table.err_at(y);
        }
        const double res = std::abs(table.value_at(xu) - ev);
        rep.x_units.push_back(xu);
        rep.residual.push_back(res);
        rep.tolerance.push_back(3.0 * err);
        rep.max_residual = std::max(rep.max_residual, res);
        if (err > 0.0) rep.max_ratio = std::max(rep.max_ratio, res / (3.0 * err));
    }
    if (rep.x_units.empty())
        throw std::invalid_argument("harmonicity_residual: no interior points outside B");
    return rep;
}

bool harmonicity_residual_exact(const StepLaw& law, const AvoidSet& B,
                                const std::vector<std::pair<long long, Fraction>>& table) {
    if (!law.is_lattice())
        throw std::invalid_argument("harmonicity_residual_exact: lattice laws only");
    const auto lookup = [&](long long xu, Fraction& out) {
        if (B.contains_units(xu)) { out = Fraction{0, 1}; return true; }
        for (const auto& [u, f] : table)
            if (u == xu) { out = f; return true; }
        return false;
    };
    bool any = false;
    for (const auto& [xu, vx] : table) {
        if (B.contains_units(xu)) continue;
        bool interior = true;
        Fraction ev{0, 1};
        for (std::size_t s = 0; s < law.support_units().size() && interior; ++s) {
            Fraction vy;
            if (!lookup(xu + law.support_units()[s], vy)) { interior = false; break; }
            ev = frac_add(ev, frac_mul(law.probs_exact()[s], vy));
        }
        if (!interior) continue;
        any = true;
        if (!frac_eq(ev, vx)) return false;
    }
    if (!any) throw std::invalid_argument("harmonicity_residual_exact: no interior points");
    return true;
}

std::vector<UVRow> compare_U_V(const StepLaw& law, const std::vector<double>& d_grid, double y,
                               const std::vector<std::uint64_t>& n_grid, unsigned workers) {
    if (y < 0) throw std::invalid_argument("compare_U_V: y >= 0 required");
    if (!law.is_lattice()) throw std::invalid_argument("compare_U_V: lattice laws only");

    auto sys = std::make_shared<LadderSystem>(law);
    RenewalU U(sys);

    std::vector<UVRow> rows;
    for (double d : d_grid) {
        UVRow row;
        row.d = d;
        row.u_plus_side = U.U_d(d + y, d);
        row.u_minus_side = U.U_d(-(d + y), d);

        char spec[96];
        std::snprintf(spec, sizeof spec, "interval(%.17g,%.17g,open)", -d, d);
        AvoidSet B = AvoidSet::parse(spec, law);

        VExtrapolation vp = extrapolate_V(law, B, d + y, n_grid, workers);
        VExtrapolation vm = extrapolate_V(law, B, -(d + y), n_grid, workers);
        row.v_plus_side = EstimateCI{vp.value, vp.err, 0, n_grid.back(), 0.0, 0, Method::Oracle};
        row.v_minus_side = EstimateCI{vm.value, vm.err, 0, n_grid.back(), 0.0, 0, Method::Oracle};
        row.diff = 0.5 * ((vp.value - row.u_plus_side) + (vm.value - row.u_minus_side));
        rows.push_back(row);
    }
    return rows;
}

std::vector<double> lemma1_sweep(const StepLaw& law, const AvoidSet& B, long long xlo,
                                 long long xhi, const std::vector<std::uint64_t>& n_set,
                                 unsigned workers) {
    std::vector<double> out;
    for (std::uint64_t n : n_set) {
        SurvivalGrid g = survival_grid(law, B, xlo, xhi, n, {}, {}, false, workers);
        double best = 0.0;
        for (long long xu = xlo; xu <= xhi; ++xu) {
            const double xr = std::abs(law.to_real(xu));
            if (xr == 0.0 || B.in_hull_units(xu)) continue;
            best = std::max(best, std::sqrt(static_cast<double>(n)) * g.q_at(xu) / xr);
        }
        out.push_back(best);
    }
    return out;
}

}  // namespace avoidwalk
