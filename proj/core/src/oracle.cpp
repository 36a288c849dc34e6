#include "avoidwalk/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/multiprecision/cpp_int.hpp>

#include "avoidwalk/banded.hpp"
#include "avoidwalk/parallel.hpp"

namespace avoidwalk {

namespace {

void require_lattice_bounded(const StepLaw& law, const char* who) {
    if (!law.is_lattice())
        throw std::invalid_argument(std::string(who) + ": continuous laws unsupported");
}

}  // namespace

DPResult dp_survival(const StepLaw& law, const AvoidSet& B, double x, std::uint64_t n,
                     std::uint64_t limit) {
    require_lattice_bounded(law, "dp_survival");
    if (n > limit) throw std::invalid_argument("dp_survival: n exceeds configured limit");

    const long long x0 = law.to_units(x);
    const long long m = law.max_step_units();
    const long long lo = x0 - static_cast<long long>(n) * m;
    const long long hi = x0 + static_cast<long long>(n) * m;
    const std::size_t width = static_cast<std::size_t>(hi - lo + 1);

    DPResult out;
    out.q.reserve(n + 1);

    if (B.contains_units(x0)) {
        out.q.assign(n + 1, 0.0);
        out.hit_pmf.push_back({x0, 1.0});
        out.hit_mass = 1.0;
        out.e_hit_given_hit = law.to_real(x0);
        out.e_hit_lo = out.e_hit_hi = out.e_hit_given_hit;
        return out;
    }

    std::vector<long double> alive(width, 0.0L), next(width, 0.0L);
    alive[static_cast<std::size_t>(x0 - lo)] = 1.0L;
    std::vector<long double> hit(width, 0.0L);
    long double absorbed = 0.0L;
    out.q.push_back(1.0);

    const auto& sup = law.support_units();
    const auto& pr = law.probs();
    long double drift = 0.0L;

    for (std::uint64_t k = 1; k <= n; ++k) {
        std::fill(next.begin(), next.end(), 0.0L);
        const long long reach = static_cast<long long>(k) * m;
        const long long klo = std::max(lo, x0 - reach + m), khi = std::min(hi, x0 + reach - m);
        for (long long p = klo; p <= khi; ++p) {
            const long double w = alive[static_cast<std::size_t>(p - lo)];
            if (w == 0.0L) continue;
            for (std::size_t s = 0; s < sup.size(); ++s) {
                const long long p2 = p + sup[s];
                const long double dw = w * static_cast<long double>(pr[s]);
                if (B.contains_units(p2)) {
                    hit[static_cast<std::size_t>(p2 - lo)] += dw;
                    absorbed += dw;
                } else {
                    next[static_cast<std::size_t>(p2 - lo)] += dw;
                }
            }
        }
        alive.swap(next);
        long double tot = absorbed;
        long double aliveSum = 0.0L;
        for (long double w : alive) aliveSum += w;
        tot += aliveSum;
        drift = std::max(drift, std::abs(tot - 1.0L));
        out.q.push_back(static_cast<double>(aliveSum));
    }

    out.mass_drift = static_cast<double>(drift);
    out.censor_mass = out.q.back();
    out.hit_mass = static_cast<double>(absorbed);
    long double ehit = 0.0L;
    long long zmin = 0, zmax = 0;
    bool first = true;
    for (std::size_t i = 0; i < width; ++i) {
        if (hit[i] == 0.0L) continue;
        const long long z = lo + static_cast<long long>(i);
        out.hit_pmf.push_back({z, static_cast<double>(hit[i])});
        ehit += static_cast<long double>(z) * hit[i];
        if (first) { zmin = zmax = z; first = false; }
        zmin = std::min(zmin, z);
        zmax = std::max(zmax, z);
    }
    if (out.hit_mass > 0.0) {
        const double lam = law.lambda();
        out.e_hit_given_hit = static_cast<double>(ehit / absorbed) * lam;
        // E S_tau interval: censored mass can land anywhere in the hit support
        const double e1 = static_cast<double>(ehit) * lam;
        out.e_hit_lo = e1 + law.to_real(zmin) * out.censor_mass;
        out.e_hit_hi = e1 + law.to_real(zmax) * out.censor_mass;
        if (out.e_hit_lo > out.e_hit_hi) std::swap(out.e_hit_lo, out.e_hit_hi);
    }
    return out;
}

RationalDPResult dp_survival_rational(const StepLaw& law, const AvoidSet& B, double x,
                                      std::uint64_t n) {
    require_lattice_bounded(law, "dp_survival_rational");
    if (n > kRationalDpLimit)
        throw std::invalid_argument("dp_survival_rational: n exceeds the rational-mode limit");

    using Rat = boost::multiprecision::cpp_rational;

    const long long x0 = law.to_units(x);
    const long long m = law.max_step_units();
    const long long lo = x0 - static_cast<long long>(n) * m;
    const std::size_t width = static_cast<std::size_t>(2 * static_cast<long long>(n) * m + 1);

    RationalDPResult out;
    if (B.contains_units(x0)) {
        for (std::uint64_t k = 0; k <= n; ++k) out.q.push_back("0/1");
        out.hit_pmf.push_back({x0, "1/1"});
        return out;
    }

    const auto& sup = law.support_units();
    std::vector<Rat> prob;
    for (const auto& f : law.probs_exact()) prob.emplace_back(f.num, f.den);

    std::vector<Rat> alive(width), next(width), hit(width);
    alive[static_cast<std::size_t>(x0 - lo)] = 1;
    const auto rstr = [](const Rat& r) {
        return boost::multiprecision::numerator(r).str() + "/" +
               boost::multiprecision::denominator(r).str();
    };
    out.q.push_back("1/1");

    for (std::uint64_t k = 1; k <= n; ++k) {
        for (auto& v : next) v = 0;
        for (std::size_t i = 0; i < width; ++i) {
            if (alive[i].is_zero()) continue;
            const long long p = lo + static_cast<long long>(i);
            for (std::size_t s = 0; s < sup.size(); ++s) {
                const long long p2 = p + sup[s];
                const std::size_t j = static_cast<std::size_t>(p2 - lo);
                if (B.contains_units(p2)) hit[j] += alive[i] * prob[s];
                else next[j] += alive[i] * prob[s];
            }
        }
        alive.swap(next);
        Rat tot = 0;
        for (const auto& v : alive) tot += v;
        out.q.push_back(rstr(tot));
    }
    for (std::size_t i = 0; i < width; ++i)
        if (!hit[i].is_zero())
            out.hit_pmf.push_back({lo + static_cast<long long>(i), rstr(hit[i])});
    return out;
}

double SurvivalGrid::q_at(long long x_units) const {
    if (x_units < xlo || x_units > xhi)
        throw std::out_of_range("SurvivalGrid: x outside the exact core");
    return q_final[static_cast<std::size_t>(x_units - xlo)];
}

SurvivalGrid survival_grid(const StepLaw& law, const AvoidSet& B, long long xlo, long long xhi,
                           std::uint64_t n, std::vector<long long> tracked_x,
                           std::vector<std::uint64_t> ks, bool track_tilde, unsigned workers) {
    require_lattice_bounded(law, "survival_grid");
    if (xlo > xhi) throw std::invalid_argument("survival_grid: empty x range");
    std::sort(ks.begin(), ks.end());
    if (!ks.empty() && (ks.front() == 0 || ks.back() > n))
        throw std::invalid_argument("survival_grid: tracked steps must lie in [1, n]");
    for (long long tx : tracked_x)
        if (tx < xlo || tx > xhi)
            throw std::invalid_argument("survival_grid: tracked x outside [xlo, xhi]");

    const long long m = law.max_step_units();
    // extra margin of one step keeps x + s exact for the tau~ series
    const long long wlo = xlo - static_cast<long long>(n) * m - m;
    const long long whi = xhi + static_cast<long long>(n) * m + m;
    const std::size_t width = static_cast<std::size_t>(whi - wlo + 1);

    const auto& sup = law.support_units();
    const auto& pr = law.probs();
    const std::size_t ns = sup.size();

    std::vector<double> q(width), qn(width);
    std::vector<unsigned char> inB(width, 0);
    for (std::size_t i = 0; i < width; ++i) {
        inB[i] = B.contains_units(wlo + static_cast<long long>(i)) ? 1 : 0;
        q[i] = inB[i] ? 0.0 : 1.0;
    }

    SurvivalGrid grid;
    grid.xlo = xlo;
    grid.xhi = xhi;
    grid.n = n;
    grid.ks = ks;
    grid.tracked_x = tracked_x;
    grid.tracked_q.assign(tracked_x.size(), {});
    grid.tracked_qtilde.assign(tracked_x.size(), {});
    std::size_t knext = 0;

    const auto record = [&](std::uint64_t k, const std::vector<double>& cur,
                            const std::vector<double>& prev) {
        while (knext < ks.size() && ks[knext] == k) {
            for (std::size_t xi = 0; xi < tracked_x.size(); ++xi) {
                grid.tracked_q[xi].push_back(
                    cur[static_cast<std::size_t>(tracked_x[xi] - wlo)]);
                if (track_tilde) {
                    // P_x(tau~ > k) = sum_s p_s P_{x+s}(tau > k-1)
                    double v = 0.0;
                    for (std::size_t s = 0; s < ns; ++s)
                        v += pr[s] *
                             prev[static_cast<std::size_t>(tracked_x[xi] + sup[s] - wlo)];
                    grid.tracked_qtilde[xi].push_back(v);
                }
            }
            ++knext;
        }
    };

    for (std::uint64_t k = 1; k <= n; ++k) {
        parallel_for(width, workers, [&](std::size_t lo_i, std::size_t hi_i) {
            for (std::size_t i = lo_i; i < hi_i; ++i) {
                if (inB[i]) { qn[i] = 0.0; continue; }
                double acc = 0.0;
                const long long p = wlo + static_cast<long long>(i);
                for (std::size_t s = 0; s < ns; ++s) {
                    const long long p2 = p + sup[s];
                    if (p2 >= wlo && p2 <= whi)
                        acc += pr[s] * q[static_cast<std::size_t>(p2 - wlo)];
                }
                qn[i] = acc;
            }
        });
        q.swap(qn);
        record(k, q, qn);
    }

    grid.q_final.assign(q.begin() + static_cast<long long>(xlo - wlo),
                        q.begin() + static_cast<long long>(xhi - wlo) + 1);
    return grid;
}

double HitSolve::prob(long long x_units, long long target) const {
    if (x_units < -L || x_units > L) throw std::out_of_range("HitSolve: x outside window");
    for (std::size_t t = 0; t < targets.size(); ++t)
        if (targets[t] == target) return h[t][static_cast<std::size_t>(x_units + L)];
    return 0.0;
}

double HitSolve::mass(long long x_units) const {
    double s = 0.0;
    for (std::size_t t = 0; t < targets.size(); ++t)
        s += h[t][static_cast<std::size_t>(x_units + L)];
    return s;
}

double HitSolve::mean(long long x_units) const {
    double s = 0.0;
    for (std::size_t t = 0; t < targets.size(); ++t)
        s += static_cast<double>(targets[t]) * h[t][static_cast<std::size_t>(x_units + L)];
    return s;
}

HitSolve dp_hit_solve(const StepLaw& law, const AvoidSet& B, long long L) {
    require_lattice_bounded(law, "dp_hit_solve");
    if (L <= std::max(std::abs(B.l_units()), std::abs(B.r_units())) + law.max_step_units())
        throw std::invalid_argument("dp_hit_solve: window too small for B");

    const long long m = law.max_step_units();
    const std::size_t width = static_cast<std::size_t>(2 * L + 1);
    const auto& sup = law.support_units();
    const auto& pr = law.probs();

    BandedLU lu(width, static_cast<std::size_t>(m));
    for (std::size_t i = 0; i < width; ++i) {
        const long long p = -L + static_cast<long long>(i);
        lu.at(i, i) += 1.0;
        if (B.contains_units(p)) continue;  // identity row
        for (std::size_t s = 0; s < sup.size(); ++s) {
            const long long p2 = p + sup[s];
            if (p2 >= -L && p2 <= L) lu.at(i, static_cast<std::size_t>(p2 + L)) -= pr[s];
        }
    }
    lu.factor();

    HitSolve hs;
    hs.L = L;
    hs.targets = B.points_units();
    for (long long z : hs.targets) {
        std::vector<double> b(width, 0.0);
        b[static_cast<std::size_t>(z + L)] = 1.0;
        lu.solve(b);
        hs.h.push_back(std::move(b));
    }
    return hs;
}

HitStats dp_hit_stats(const StepLaw& law, const AvoidSet& B, double x, std::uint64_t horizon,
                      std::uint64_t limit) {
    DPResult dp = dp_survival(law, B, x, horizon, limit);
    HitStats st;
    st.pmf = dp.hit_pmf;
    st.e_hit = dp.e_hit_given_hit;
    st.e_lo = dp.e_hit_lo;
    st.e_hi = dp.e_hit_hi;
    st.censor_mass = dp.censor_mass;
    return st;
}

VExtrapolation extrapolate_V(const StepLaw& law, const AvoidSet& B, double x,
                             const std::vector<std::uint64_t>& n_grid, unsigned workers) {
    if (n_grid.size() < 3) throw std::invalid_argument("extrapolate_V: need >= 3 grid points");
    if (!std::is_sorted(n_grid.begin(), n_grid.end()))
        throw std::invalid_argument("extrapolate_V: n_grid must be increasing");

    const long long xu = law.to_units(x);
    SurvivalGrid g = survival_grid(law, B, xu, xu, n_grid.back(), {xu}, n_grid, false, workers);

    VExtrapolation out;
    out.n_grid = n_grid;
    const double sig = law.sigma();
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        const double qn = g.tracked_q[0][i];
        out.v_hat.push_back(sig * std::sqrt(std::numbers::pi * static_cast<double>(n_grid[i]) / 2.0) * qn);
    }
    out.value = out.v_hat.back();
    out.err = std::abs(out.v_hat.back() - out.v_hat[out.v_hat.size() - 2]);
    for (std::size_t i = 2; i < out.v_hat.size(); ++i) {
        const double d1 = std::abs(out.v_hat[i - 1] - out.v_hat[i - 2]);
        const double d2 = std::abs(out.v_hat[i] - out.v_hat[i - 1]);
        if (d2 > d1 * 1.05 + 1e-12) out.trend_ok = false;  // flagged, not fatal
    }
    return out;
}

RatioCheck ratio_limit_check(const StepLaw& law, const AvoidSet& B, double x,
                             const std::vector<std::uint64_t>& n_grid, unsigned workers) {
    require_lattice_bounded(law, "ratio_limit_check");
    if (n_grid.empty()) throw std::invalid_argument("ratio_limit_check: empty n grid");

    const long long xu = law.to_units(x);
    const std::uint64_t nmax = n_grid.back();

    // numerator pass also yields the extrapolated V along the same grid
    SurvivalGrid num = survival_grid(law, B, xu, xu, nmax, {xu}, n_grid, true, workers);

    // denominator: P_0(tau~_{{0}} > n) for the singleton at the origin
    AvoidSet b0 = AvoidSet::parse("points{0}", law);
    SurvivalGrid den = survival_grid(law, b0, 0, 0, nmax, {0}, n_grid, true, workers);

    RatioCheck out;
    out.n_grid = n_grid;
    const bool x_in_B = B.contains_units(xu);
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        const double numerator = x_in_B ? num.tracked_qtilde[0][i] : num.tracked_q[0][i];
        out.ratio.push_back(numerator / den.tracked_qtilde[0][i]);
    }
    out.sigma2_g = law.sigma2() * out.ratio.back() / law.lambda();

    if (!x_in_B) {
        const double qn = num.tracked_q[0].back();
        out.v_hat = law.sigma() *
                    std::sqrt(std::numbers::pi * static_cast<double>(nmax) / 2.0) * qn;
        out.rel_gap = std::abs(out.sigma2_g - out.v_hat) / out.v_hat;
    }
    return out;
}

}  // namespace avoidwalk
