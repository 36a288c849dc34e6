#include "avoidwalk/ladder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "avoidwalk/banded.hpp"
#include "avoidwalk/parallel.hpp"

namespace avoidwalk {

namespace {

long long default_strip(const StepLaw& law) {
    return std::max<long long>(256, 96 * law.max_step_units());
}

}  // namespace

double FirstPassageTable::prob(long long start, long long target) const {
    if (start < alo || start > L) throw std::invalid_argument("passage table: start outside strip");
    for (std::size_t t = 0; t < targets.size(); ++t)
        if (targets[t] == target) return col[t][static_cast<std::size_t>(start - alo)];
    return 0.0;
}

double FirstPassageTable::eps_at(long long start) const {
    if (start < alo || start > L) throw std::invalid_argument("passage table: start outside strip");
    return eps[static_cast<std::size_t>(start - alo)];
}

double FirstPassageTable::total(long long start) const {
    double s = 0.0;
    for (std::size_t t = 0; t < targets.size(); ++t)
        s += col[t][static_cast<std::size_t>(start - alo)];
    return s;
}

double FirstPassageTable::mean_position(long long start) const {
    double m = 0.0;
    for (std::size_t t = 0; t < targets.size(); ++t)
        m += static_cast<double>(targets[t]) * col[t][static_cast<std::size_t>(start - alo)];
    return m;
}

FirstPassageTable build_passage_down(const StepLaw& law, bool weak, long long L,
                                     StripBoundary boundary) {
    if (!law.is_lattice()) throw std::invalid_argument("strip solve needs a lattice law");
    if (L <= 0) L = default_strip(law);
    const long long m = law.max_step_units();
    if (L < 10 * m) throw std::invalid_argument("strip solve: L >= 10*max_step required");

    FirstPassageTable fp;
    fp.alo = weak ? 1 : 0;
    fp.L = L;
    fp.band = m;
    const long long tlo = fp.alo - m;        // deepest reachable entry position
    const long long thi = weak ? 0 : -1;
    for (long long t = tlo; t <= thi; ++t) fp.targets.push_back(t);

    const std::size_t width = static_cast<std::size_t>(L - fp.alo + 1);
    const auto& sup = law.support_units();
    const auto& pr = law.probs();

    BandedLU lu(width, static_cast<std::size_t>(m));
    for (std::size_t j = 0; j < width; ++j) {
        lu.at(j, j) += 1.0;
        const long long pos = fp.alo + static_cast<long long>(j);
        for (std::size_t s = 0; s < sup.size(); ++s) {
            const long long nxt = pos + sup[s];
            if (nxt >= fp.alo && nxt <= L)
                lu.at(j, static_cast<std::size_t>(nxt - fp.alo)) -= pr[s];
        }
    }
    lu.factor();

    const std::size_t nt = fp.targets.size();
    fp.col.assign(nt, std::vector<double>(width, 0.0));
    fp.eps.assign(width, 0.0);

    // stationary overshoot boundary values per target; start from plain
    // truncation (all zero) and iterate to the fixed point
    std::vector<double> pi(nt, 0.0);
    std::vector<double> pmf_prev;
    const int max_iters = boundary == StripBoundary::Redirect ? 10 : 1;

    for (int iter = 0; iter < max_iters; ++iter) {
        for (std::size_t t = 0; t < nt; ++t) {
            std::vector<double> b(width, 0.0);
            for (std::size_t j = 0; j < width; ++j) {
                const long long pos = fp.alo + static_cast<long long>(j);
                for (std::size_t s = 0; s < sup.size(); ++s) {
                    const long long nxt = pos + sup[s];
                    if (nxt == fp.targets[t]) b[j] += pr[s];
                    else if (nxt > L) b[j] += pr[s] * pi[t];
                }
            }
            lu.solve(b);
            fp.col[t] = std::move(b);
        }

        if (boundary != StripBoundary::Redirect) break;

        // |H-| pmf from start 0 (strict table drives both redirects);
        // for the weak table callers pass the strict stationary law below,
        // so here the self-iteration only applies to the strict build.
        if (weak) break;
        std::vector<double> pmf(static_cast<std::size_t>(m) + 1, 0.0);
        for (std::size_t t = 0; t < nt; ++t)
            pmf[static_cast<std::size_t>(-fp.targets[t])] = fp.col[t][0];
        double mean = 0.0, tailmass = 0.0;
        for (std::size_t w = 1; w <= static_cast<std::size_t>(m); ++w)
            mean += static_cast<double>(w) * pmf[w];
        if (mean <= 0.0) break;
        // stationary entry law: P(position = t) = P(|H| >= |t|)/E|H|
        for (std::size_t t = 0; t < nt; ++t) {
            const long long w = -fp.targets[t];
            double tail = 0.0;
            for (long long k = w; k <= m; ++k) tail += pmf[static_cast<std::size_t>(k)];
            pi[t] = tail / mean;
            tailmass += pi[t];
        }
        if (!pmf_prev.empty()) {
            double delta = 0.0;
            for (std::size_t w = 0; w < pmf.size(); ++w)
                delta = std::max(delta, std::abs(pmf[w] - pmf_prev[w]));
            if (delta < 1e-15) break;
        }
        pmf_prev = pmf;
    }

    for (std::size_t j = 0; j < width; ++j) {
        double tot = 0.0;
        for (std::size_t t = 0; t < nt; ++t) tot += fp.col[t][j];
        fp.eps[j] = std::max(0.0, 1.0 - tot);
    }
    return fp;
}

namespace {

// weak-table redirect boundary: stationary entry law into (-inf, 0] derived
// from the strict |H-| pmf: P(position = -w) = P(|H-| >= w+1)/E|H-|.
FirstPassageTable build_passage_down_weak_redirected(const StepLaw& law, long long L,
                                                     const std::vector<double>& strict_pmf_abs,
                                                     double strict_mean_abs) {
    FirstPassageTable fp = build_passage_down(law, true, L, StripBoundary::Truncate);
    if (strict_mean_abs <= 0.0) return fp;
    const long long m = law.max_step_units();
    const std::size_t width = fp.eps.size();
    const auto& sup = law.support_units();
    const auto& pr = law.probs();

    BandedLU lu(width, static_cast<std::size_t>(m));
    for (std::size_t j = 0; j < width; ++j) {
        lu.at(j, j) += 1.0;
        const long long pos = fp.alo + static_cast<long long>(j);
        for (std::size_t s = 0; s < sup.size(); ++s) {
            const long long nxt = pos + sup[s];
            if (nxt >= fp.alo && nxt <= fp.L)
                lu.at(j, static_cast<std::size_t>(nxt - fp.alo)) -= pr[s];
        }
    }
    lu.factor();

    for (std::size_t t = 0; t < fp.targets.size(); ++t) {
        const long long w = -fp.targets[t];
        double tail = 0.0;
        for (long long k = w + 1; k <= m; ++k)
            tail += strict_pmf_abs[static_cast<std::size_t>(k)];
        const double pi_t = tail / strict_mean_abs;
        std::vector<double> b(width, 0.0);
        for (std::size_t j = 0; j < width; ++j) {
            const long long pos = fp.alo + static_cast<long long>(j);
            for (std::size_t s = 0; s < sup.size(); ++s) {
                const long long nxt = pos + sup[s];
                if (nxt == fp.targets[t]) b[j] += pr[s];
                else if (nxt > fp.L) b[j] += pr[s] * pi_t;
            }
        }
        lu.solve(b);
        fp.col[t] = std::move(b);
    }
    for (std::size_t j = 0; j < width; ++j) {
        double tot = 0.0;
        for (std::size_t t = 0; t < fp.targets.size(); ++t) tot += fp.col[t][j];
        fp.eps[j] = std::max(0.0, 1.0 - tot);
    }
    return fp;
}

// pmf over |H| for a passage table viewed from start 0 (strict) or the
// one-free-step mixture (weak, tau >= 1 semantics).
std::vector<double> ladder_pmf_from(const FirstPassageTable& fp, const StepLaw& law, bool weak) {
    const long long m = law.max_step_units();
    std::vector<double> pmf(static_cast<std::size_t>(m) + 1, 0.0);
    if (!weak) {
        for (std::size_t t = 0; t < fp.targets.size(); ++t)
            pmf[static_cast<std::size_t>(-fp.targets[t])] += fp.col[t][0];
        return pmf;
    }
    const auto& sup = law.support_units();
    const auto& pr = law.probs();
    for (std::size_t s = 0; s < sup.size(); ++s) {
        const long long first = sup[s];
        if (first <= 0) {
            pmf[static_cast<std::size_t>(-first)] += pr[s];
        } else {
            for (std::size_t t = 0; t < fp.targets.size(); ++t)
                pmf[static_cast<std::size_t>(-fp.targets[t])] +=
                    pr[s] * fp.col[t][static_cast<std::size_t>(first - fp.alo)];
        }
    }
    return pmf;
}

}  // namespace

double LadderTable::mean_abs_real() const {
    if (exact) return mean_abs_units * law.lambda();
    double s = 0.0;
    for (double v : samples_abs) s += v;
    return samples_abs.empty() ? 0.0 : s / static_cast<double>(samples_abs.size());
}

double LadderTable::mean_stderr() const {
    if (exact || samples_abs.size() < 2) return 0.0;
    RunningStat rs;
    for (double v : samples_abs) rs.add(v);
    return rs.stderr_mean();
}

LadderTable exact_ladder_pmf(const StepLaw& law, LadderKind kind, long long L,
                             StripBoundary boundary) {
    if (!law.is_lattice())
        throw std::invalid_argument("exact_ladder_pmf: continuous law unsupported; "
                                    "use sampled_ladder");
    if (L <= 0) L = default_strip(law);

    const bool descending =
        kind == LadderKind::StrictDescending || kind == LadderKind::WeakDescending;
    const bool weak = kind == LadderKind::WeakAscending || kind == LadderKind::WeakDescending;
    const StepLaw work = descending ? law : law.mirrored();

    LadderTable tab;
    tab.law = law;
    tab.kind = kind;
    tab.exact = true;
    tab.L = L;

    if (!weak) {
        FirstPassageTable fp = build_passage_down(work, false, L, boundary);
        tab.pmf_abs = ladder_pmf_from(fp, work, false);
        tab.eps_L = fp.eps_at(0);
    } else {
        FirstPassageTable strict = build_passage_down(work, false, L, boundary);
        std::vector<double> strict_pmf = ladder_pmf_from(strict, work, false);
        double strict_mean = 0.0;
        for (std::size_t w = 1; w < strict_pmf.size(); ++w)
            strict_mean += static_cast<double>(w) * strict_pmf[w];
        FirstPassageTable fp =
            boundary == StripBoundary::Redirect
                ? build_passage_down_weak_redirected(work, L, strict_pmf, strict_mean)
                : build_passage_down(work, true, L, StripBoundary::Truncate);
        tab.pmf_abs = ladder_pmf_from(fp, work, true);
        double tot = 0.0;
        for (double p : tab.pmf_abs) tot += p;
        tab.eps_L = std::max(0.0, 1.0 - tot);
    }

    double tot = 0.0, mean = 0.0;
    for (std::size_t w = 0; w < tab.pmf_abs.size(); ++w) {
        tot += tab.pmf_abs[w];
        mean += static_cast<double>(w) * tab.pmf_abs[w];
    }
    tab.eps_L = std::max(tab.eps_L, std::max(0.0, 1.0 - tot));
    tab.mean_abs_units = mean;
    return tab;
}

LadderTable sampled_ladder(const StepLaw& law, LadderKind kind, std::uint64_t cap,
                           std::uint64_t reps, std::uint64_t master_seed, unsigned workers) {
    const bool descending =
        kind == LadderKind::StrictDescending || kind == LadderKind::WeakDescending;
    const bool weak = kind == LadderKind::WeakAscending || kind == LadderKind::WeakDescending;

    LadderTable tab;
    tab.law = law;
    tab.kind = kind;
    tab.exact = false;
    tab.cap = cap;
    tab.reps = reps;

    std::vector<double> values(reps, std::numeric_limits<double>::quiet_NaN());
    parallel_for(reps, workers, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t r = lo; r < hi; ++r) {
            RngStream rng(master_seed, r);
            if (law.is_lattice()) {
                long long pos = 0;
                for (std::uint64_t k = 0; k < cap; ++k) {
                    pos += law.sample_step_units(rng);
                    const long long v = descending ? -pos : pos;
                    if (weak ? v >= 0 : v > 0) {
                        values[r] = static_cast<double>(v) * law.lambda();
                        break;
                    }
                }
            } else {
                double pos = 0.0;
                for (std::uint64_t k = 0; k < cap; ++k) {
                    pos += law.sample_step_real(rng);
                    const double v = descending ? -pos : pos;
                    if (weak ? v >= 0.0 : v > 0.0) {
                        values[r] = v;
                        break;
                    }
                }
            }
        }
    });

    std::uint64_t censored = 0;
    for (double v : values) {
        if (std::isnan(v)) ++censored;
        else tab.samples_abs.push_back(v);
    }
    tab.censored_fraction = reps ? static_cast<double>(censored) / static_cast<double>(reps) : 0.0;
    return tab;
}

LadderSystem::LadderSystem(const StepLaw& law, long long L)
    : law_(law), mirrored_(law.mirrored()) {
    if (!law.is_lattice()) throw std::invalid_argument("LadderSystem needs a lattice law");
    if (L <= 0) L = default_strip(law);
    down_strict_ = build_passage_down(law_, false, L, StripBoundary::Redirect);
    up_strict_ = build_passage_down(mirrored_, false, L, StripBoundary::Redirect);

    tables_[static_cast<int>(LadderKind::StrictDescending)] =
        exact_ladder_pmf(law_, LadderKind::StrictDescending, L);
    tables_[static_cast<int>(LadderKind::StrictAscending)] =
        exact_ladder_pmf(law_, LadderKind::StrictAscending, L);
    tables_[static_cast<int>(LadderKind::WeakDescending)] =
        exact_ladder_pmf(law_, LadderKind::WeakDescending, L);
    tables_[static_cast<int>(LadderKind::WeakAscending)] =
        exact_ladder_pmf(law_, LadderKind::WeakAscending, L);

    const auto& sd = tables_[static_cast<int>(LadderKind::StrictDescending)];
    const auto& sa = tables_[static_cast<int>(LadderKind::StrictAscending)];
    down_weak_ = build_passage_down_weak_redirected(law_, L, sd.pmf_abs, sd.mean_abs_units);
    up_weak_ = build_passage_down_weak_redirected(mirrored_, L, sa.pmf_abs, sa.mean_abs_units);
}

const LadderTable& LadderSystem::table(LadderKind kind) const {
    return tables_[static_cast<int>(kind)];
}

double LadderSystem::passage_down_prob(long long start, long long target, bool weak) const {
    const auto& fp = weak ? down_weak_ : down_strict_;
    return fp.prob(start, target);
}

double LadderSystem::passage_up_prob(long long start, long long target, bool weak) const {
    const auto& fp = weak ? up_weak_ : up_strict_;
    return fp.prob(-start, -target);
}

double LadderSystem::passage_down_mean(long long start, bool weak) const {
    const auto& fp = weak ? down_weak_ : down_strict_;
    return fp.mean_position(start);
}

double LadderSystem::passage_up_mean(long long start, bool weak) const {
    const auto& fp = weak ? up_weak_ : up_strict_;
    return -fp.mean_position(-start);
}

RenewalU::RenewalU(std::shared_ptr<const LadderSystem> sys, std::size_t capacity_units)
    : sys_(std::move(sys)) {
    const auto& desc = sys_->table(LadderKind::StrictDescending);
    const auto& asc = sys_->table(LadderKind::StrictAscending);
    mean_desc_ = desc.mean_abs_units;
    mean_asc_ = asc.mean_abs_units;
    mean_weak_desc_ = sys_->table(LadderKind::WeakDescending).mean_abs_units;
    mean_weak_asc_ = sys_->table(LadderKind::WeakAscending).mean_abs_units;

    const auto build = [capacity_units](const std::vector<double>& pmf) {
        std::vector<double> n(capacity_units, 0.0);
        for (std::size_t y = 0; y < capacity_units; ++y) {
            double v = 1.0;
            for (std::size_t w = 1; w < pmf.size() && w <= y; ++w)
                v += pmf[w] * n[y - w];
            n[y] = v;
        }
        return n;
    };
    n_desc_ = build(desc.pmf_abs);
    n_asc_ = build(asc.pmf_abs);
}

double RenewalU::U_plus_units(long long y) const {
    if (y < 0) throw std::invalid_argument("U_plus: y >= 0 required");
    if (static_cast<std::size_t>(y) >= n_desc_.size())
        throw std::out_of_range("U_plus: renewal table capacity exceeded");
    return mean_desc_ * n_desc_[static_cast<std::size_t>(y)];
}

double RenewalU::U_minus_units(long long y) const {
    if (y > 0) throw std::invalid_argument("U_minus: y <= 0 required");
    if (static_cast<std::size_t>(-y) >= n_asc_.size())
        throw std::out_of_range("U_minus: renewal table capacity exceeded");
    return mean_asc_ * n_asc_[static_cast<std::size_t>(-y)];
}

double RenewalU::U_plus_weak_units(long long y) const {
    if (y < 0) throw std::invalid_argument("U_plus_weak: y >= 0 required");
    if (y == 0) return mean_weak_desc_;
    if (static_cast<std::size_t>(y - 1) >= n_desc_.size())
        throw std::out_of_range("U_plus_weak: renewal table capacity exceeded");
    return mean_desc_ * n_desc_[static_cast<std::size_t>(y - 1)];
}

double RenewalU::U_minus_weak_units(long long y) const {
    if (y > 0) throw std::invalid_argument("U_minus_weak: y <= 0 required");
    if (y == 0) return mean_weak_asc_;
    if (static_cast<std::size_t>(-y - 1) >= n_asc_.size())
        throw std::out_of_range("U_minus_weak: renewal table capacity exceeded");
    return mean_asc_ * n_asc_[static_cast<std::size_t>(-y - 1)];
}

double RenewalU::U_plus(double y) const {
    return U_plus_units(sys_->law().to_units(y)) * sys_->law().lambda();
}
double RenewalU::U_minus(double y) const {
    return U_minus_units(sys_->law().to_units(y)) * sys_->law().lambda();
}
double RenewalU::U_plus_weak(double y) const {
    return U_plus_weak_units(sys_->law().to_units(y)) * sys_->law().lambda();
}
double RenewalU::U_minus_weak(double y) const {
    return U_minus_weak_units(sys_->law().to_units(y)) * sys_->law().lambda();
}

double RenewalU::U_d(double x, double d) const {
    if (std::abs(x) < d) throw std::invalid_argument("U_d: |x| >= d required");
    return x >= 0 ? U_plus(x - d) : U_minus(x + d);
}

OvershootLimit overshoot_at_infinity(const StepLaw& law, double two_d,
                                     const LadderTable& ascending_strict) {
    if (two_d <= 0) throw std::invalid_argument("overshoot_at_infinity: window must be positive");
    OvershootLimit lim;
    lim.lattice = law.is_lattice();
    lim.lambda = law.lambda();

    if (law.is_lattice()) {
        if (!ascending_strict.exact)
            throw std::invalid_argument("lattice overshoot limit needs the exact H+ table");
        const auto& pmf = ascending_strict.pmf_abs;
        const double mean = ascending_strict.mean_abs_units;
        const long long window_units =
            static_cast<long long>(std::ceil(two_d / law.lambda())) - 1;
        for (long long j = 0; j <= window_units; ++j) {
            double tail = 0.0;
            for (std::size_t k = static_cast<std::size_t>(j) + 1; k < pmf.size(); ++k)
                tail += pmf[k];
            lim.pmf.push_back(tail / mean);
        }
        for (double p : lim.pmf) lim.window_mass += p;
        // displayed half-line formula: sum_{k=1}^{2 ceil(d/lambda) - 1} k P(H+ = k) / E H+
        const long long d_units =
            static_cast<long long>(std::ceil((two_d / 2.0) / law.lambda()));
        double s = 0.0;
        for (long long k = 1; k <= 2 * d_units - 1 && k < static_cast<long long>(pmf.size()); ++k)
            s += static_cast<double>(k) * pmf[static_cast<std::size_t>(k)];
        lim.inside_limit = s / mean;
    } else {
        if (ascending_strict.exact || ascending_strict.samples_abs.empty())
            throw std::invalid_argument("continuous overshoot limit needs a sampled H+ table");
        std::vector<double> s = ascending_strict.samples_abs;
        std::sort(s.begin(), s.end());
        double mean = 0.0;
        for (double v : s) mean += v;
        mean /= static_cast<double>(s.size());
        const int pts = 200;
        for (int i = 0; i <= pts; ++i) {
            const double t = two_d * static_cast<double>(i) / pts;
            // integral of the tail up to t, normalized by E H+
            double acc = 0.0;
            std::size_t idx = 0;
            const int inner = 50;
            for (int q = 0; q < inner; ++q) {
                const double u = t * (q + 0.5) / inner;
                while (idx < s.size() && s[idx] <= u) ++idx;
                acc += (static_cast<double>(s.size() - idx) / static_cast<double>(s.size())) *
                       (t / inner);
            }
            lim.grid.push_back(t);
            lim.cdf.push_back(acc / mean);
        }
        lim.window_mass = lim.cdf.back();
        lim.inside_limit = lim.window_mass;
    }
    return lim;
}

FellerIdentity feller_identity_check(const StepLaw& law, std::uint64_t cap, std::uint64_t reps,
                                     std::uint64_t master_seed, unsigned workers) {
    FellerIdentity out;
    out.sigma2_half = law.sigma2() / 2.0;

    if (law.is_lattice()) {
        LadderSystem sys(law);
        const auto& weak_asc = sys.table(LadderKind::WeakAscending);
        const auto& strict_desc = sys.table(LadderKind::StrictDescending);
        out.weak_ascending_mean = EstimateCI{weak_asc.mean_abs_real(), 0.0, 0, 0, 0.0,
                                             master_seed, Method::Oracle};
        out.strict_descending_mean_abs = EstimateCI{strict_desc.mean_abs_real(), 0.0, 0, 0, 0.0,
                                                    master_seed, Method::Oracle};
    } else {
        LadderTable wa = sampled_ladder(law, LadderKind::WeakAscending, cap, reps,
                                        master_seed, workers);
        LadderTable sd = sampled_ladder(law, LadderKind::StrictDescending, cap, reps,
                                        master_seed + 1, workers);
        out.weak_ascending_mean = EstimateCI{wa.mean_abs_real(), wa.mean_stderr(), reps, cap,
                                             wa.censored_fraction, master_seed,
                                             Method::CappedSum};
        out.strict_descending_mean_abs = EstimateCI{sd.mean_abs_real(), sd.mean_stderr(), reps,
                                                    cap, sd.censored_fraction, master_seed + 1,
                                                    Method::CappedSum};
    }
    const double a = out.weak_ascending_mean.value;
    const double b = out.strict_descending_mean_abs.value;
    out.product = a * b;
    out.product_stderr = std::sqrt(std::pow(b * out.weak_ascending_mean.stderr_, 2) +
                                   std::pow(a * out.strict_descending_mean_abs.stderr_, 2));
    return out;
}

EstimateCI estimate_U_d_continuous(const StepLaw& law, double x, double d, std::uint64_t cap,
                                   std::uint64_t reps, std::uint64_t master_seed,
                                   unsigned workers) {
    if (std::abs(x) < d) throw std::invalid_argument("estimate_U_d: |x| >= d required");
    std::vector<double> entry(reps, std::numeric_limits<double>::quiet_NaN());
    const bool from_right = x >= d;
    parallel_for(reps, workers, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t r = lo; r < hi; ++r) {
            RngStream rng(master_seed, r);
            double pos = x;
            for (std::uint64_t k = 0; k < cap; ++k) {
                pos += law.sample_step_real(rng);
                if (from_right ? pos < d : pos > -d) {
                    entry[r] = pos;
                    break;
                }
            }
        }
    });
    RunningStat rs;
    std::uint64_t censored = 0;
    for (double v : entry) {
        if (std::isnan(v)) ++censored;
        else rs.add(std::abs(x - v));
    }
    EstimateCI ci;
    ci.value = rs.mean();
    ci.stderr_ = rs.stderr_mean();
    ci.reps = reps;
    ci.cap = cap;
    ci.censored_fraction = reps ? static_cast<double>(censored) / static_cast<double>(reps) : 0.0;
    ci.master_seed = master_seed;
    ci.method = Method::CappedSum;
    return ci;
}

}  // namespace avoidwalk
