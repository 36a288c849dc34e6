#include "avoidwalk/conditioned.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "avoidwalk/parallel.hpp"

namespace avoidwalk {

namespace {

struct AttemptResult {
    bool accepted = false;
    PathSummary summary;
    Path path;  // only filled when keep_paths
};

template <bool Lattice>
bool run_attempt(const StepLaw& law, const AvoidSet& B, double x, std::uint64_t n,
                 RngStream& rng, bool keep_path, PathSummary& out, Path* path_out) {
    const std::uint64_t q1 = (n + 3) / 4, q2 = (n + 1) / 2;

    long long pos_u = 0;
    double pos_r = 0.0;
    if constexpr (Lattice) pos_u = law.to_units(x);
    else pos_r = x;

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

    if (in_b(Lattice ? pos_u : pos_r)) return false;  // tau = 0, never accepted

    out.epochs.clear();
    out.marks.clear();
    if (keep_path && path_out) {
        path_out->law = law;
        path_out->x0 = x;
        if constexpr (Lattice) path_out->x0_units = pos_u;
        path_out->units.clear();
        path_out->reals.clear();
    }

    auto prev_u = pos_u;
    auto prev_r = pos_r;
    for (std::uint64_t k = 1; k <= n; ++k) {
        if constexpr (Lattice) pos_u = prev_u + law.sample_step_units(rng);
        else pos_r = prev_r + law.sample_step_real(rng);

        bool fired;
        if constexpr (Lattice)
            fired = (hull(prev_u) && (plus(pos_u) || minus(pos_u))) ||
                    (plus(prev_u) && !plus(pos_u)) || (minus(prev_u) && !minus(pos_u));
        else
            fired = (hull(prev_r) && (plus(pos_r) || minus(pos_r))) ||
                    (plus(prev_r) && !plus(pos_r)) || (minus(prev_r) && !minus(pos_r));
        if (fired) {
            out.epochs.push_back(k);
            out.marks.push_back(Lattice ? law.to_real(pos_u) : pos_r);
        }
        if (in_b(Lattice ? pos_u : pos_r)) return false;  // tau <= n, rejected

        if (keep_path && path_out) {
            if constexpr (Lattice) path_out->units.push_back(pos_u);
            else path_out->reals.push_back(pos_r);
        }
        const double rp = Lattice ? law.to_real(pos_u) : pos_r;
        if (k == q1) out.s_quarter = rp;
        if (k == q2) out.s_half = rp;
        if (k == n) out.s_end = rp;

        prev_u = pos_u;
        prev_r = pos_r;
    }
    out.nu_n = static_cast<std::uint32_t>(out.epochs.size());
    out.t_last_epoch = out.epochs.empty() ? 0 : out.epochs.back();
    return true;
}

}  // namespace

ConditionedSample sample_conditioned(const StepLaw& law, const AvoidSet& B, double x,
                                     std::uint64_t n, std::uint64_t target_accepted,
                                     std::uint64_t max_attempts, std::uint64_t master_seed,
                                     unsigned workers, bool keep_paths) {
    if (n < 1) throw std::invalid_argument("sample_conditioned: n >= 1 required");
    if (target_accepted == 0) throw std::invalid_argument("sample_conditioned: target 0");

    ConditionedSample out;
    out.law = law;
    out.set_spec = B.spec();
    out.x = x;
    out.n = n;
    out.master_seed = master_seed;
    out.keep_paths = keep_paths;

    const std::uint64_t chunk = std::max<std::uint64_t>(1024, target_accepted);
    std::vector<AttemptResult> block(chunk);

    std::uint64_t base = 0;
    while (base < max_attempts && out.accepted.size() < target_accepted) {
        const std::uint64_t todo = std::min<std::uint64_t>(chunk, max_attempts - base);
        parallel_for(todo, workers, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                RngStream rng(master_seed, base + i);
                block[i].accepted =
                    law.is_lattice()
                        ? run_attempt<true>(law, B, x, n, rng, keep_paths, block[i].summary,
                                            &block[i].path)
                        : run_attempt<false>(law, B, x, n, rng, keep_paths, block[i].summary,
                                             &block[i].path);
            }
        });
        for (std::uint64_t i = 0; i < todo && out.accepted.size() < target_accepted; ++i) {
            if (block[i].accepted) {
                out.accepted.push_back(std::move(block[i].summary));
                if (keep_paths) out.paths.push_back(std::move(block[i].path));
            }
        }
        base += todo;
    }
    out.attempts = base;
    out.acceptance_rate =
        base ? static_cast<double>(out.accepted.size()) / static_cast<double>(base) : 0.0;
    out.partial = out.accepted.size() < target_accepted;

    if (out.accepted.empty())
        throw std::runtime_error(
            "sample_conditioned: zero acceptances in " + std::to_string(base) +
            " attempts (estimated acceptance rate < " +
            std::to_string(1.0 / static_cast<double>(std::max<std::uint64_t>(base, 1))) +
            "); is V_B(x) = 0 for this start?");
    return out;
}

ConditionedLawReport conditioned_law_checks(const ConditionedSample& sample, const EstimateCI& v_hat,
                               const EstimateCI& e_hit, std::uint64_t b_n) {
    if (sample.accepted.empty()) throw std::invalid_argument("conditioned_law_checks: empty sample");

    ConditionedLawReport rep;
    rep.b_n = b_n;

    std::uint64_t pos = 0, neg = 0, early = 0;
    std::vector<std::uint64_t> nu_hist(6, 0);
    std::vector<double> endpoint, quarter, half;
    const double sig = sample.law.sigma();
    const double scale = sig * std::sqrt(static_cast<double>(sample.n));

    for (const auto& s : sample.accepted) {
        if (s.s_end > 0) ++pos;
        else if (s.s_end < 0) ++neg;
        else ++rep.ties;
        if (s.t_last_epoch <= b_n) ++early;
        const std::size_t cell = std::min<std::size_t>(s.nu_n, 5);
        ++nu_hist[cell];
        endpoint.push_back(std::abs(s.s_end) / scale);
        quarter.push_back(std::abs(s.s_quarter) / scale);
        half.push_back(std::abs(s.s_half) / scale);
    }

    const std::uint64_t signed_n = pos + neg;
    rep.rho_hat = signed_n ? static_cast<double>(pos) / static_cast<double>(signed_n) : 0.0;
    rep.rho_stderr = binomial_stderr(rep.rho_hat, signed_n);

    const double v = v_hat.value;
    rep.rho_formula = 0.5 + (sample.x - e_hit.value) / (2.0 * v);
    const double dv = (sample.x - e_hit.value) / (2.0 * v * v);
    const double de = 1.0 / (2.0 * v);
    rep.rho_formula_stderr = std::sqrt(dv * dv * v_hat.stderr_ * v_hat.stderr_ +
                                       de * de * e_hit.stderr_ * e_hit.stderr_);

    const double na = static_cast<double>(sample.accepted.size());
    for (int i = 0; i < 5; ++i) {
        const double p = static_cast<double>(nu_hist[i]) / na;
        rep.nu_cells.push_back(p);
        rep.nu_stderr.push_back(binomial_stderr(p, sample.accepted.size()));
    }
    rep.frac_last_jump_early = static_cast<double>(early) / na;

    std::sort(endpoint.begin(), endpoint.end());
    std::sort(quarter.begin(), quarter.end());
    std::sort(half.begin(), half.end());
    rep.ks_endpoint =
        ks_statistic(endpoint, [](double u) { return 1.0 - std::exp(-0.5 * u * u); });
    rep.ks_quarter =
        ks_statistic(quarter, [](double u) { return meander_marginal_cdf(0.25, u); });
    rep.ks_half = ks_statistic(half, [](double u) { return meander_marginal_cdf(0.5, u); });
    return rep;
}

JumpCountReference jump_count_reference(const StepLaw& law, const AvoidSet& B, double x, std::uint64_t cap,
                           std::uint64_t reps, std::uint64_t master_seed, unsigned workers) {
    constexpr int kCells = 5;
    std::vector<std::array<double, kCells>> inc(reps);
    std::vector<double> total(reps);
    std::vector<unsigned char> censored(reps);

    parallel_for(reps, workers, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t r = lo; r < hi; ++r) {
            RngStream rng(master_seed, r);
            JumpChain jc = simulate_capped_hit(law, x, B, cap, rng);
            censored[r] = jc.censored ? 1 : 0;
            double prev = x;
            bool prev_out = !B.in_hull_real(x);
            double tot = 0.0;
            inc[r].fill(0.0);
            for (std::size_t i = 0; i < jc.marks.size(); ++i) {
                const double d = prev_out ? std::abs(jc.marks[i] - prev) : 0.0;
                if (i < kCells) inc[r][i] = d;
                tot += d;
                prev = jc.marks[i];
                prev_out = !B.in_hull_real(prev);
            }
            total[r] = tot;
        }
    });

    RunningStat tot_stat;
    std::array<RunningStat, kCells> cell_stats;
    std::uint64_t cens = 0;
    for (std::size_t r = 0; r < reps; ++r) {
        tot_stat.add(total[r]);
        for (int i = 0; i < kCells; ++i) cell_stats[i].add(inc[r][i]);
        cens += censored[r];
    }

    JumpCountReference ref;
    ref.censored_fraction = reps ? static_cast<double>(cens) / static_cast<double>(reps) : 0.0;
    ref.v_capped = EstimateCI{tot_stat.mean(), tot_stat.stderr_mean(), reps, cap,
                              ref.censored_fraction, master_seed, Method::CappedSum};
    const double v = tot_stat.mean();
    for (int i = 0; i < kCells; ++i) {
        EstimateCI c;
        c.value = cell_stats[i].mean() / v;
        // denominator noise is second order at these rep counts
        c.stderr_ = cell_stats[i].stderr_mean() / v;
        c.reps = reps;
        c.cap = cap;
        c.censored_fraction = ref.censored_fraction;
        c.master_seed = master_seed;
        c.method = Method::CappedSum;
        ref.cells.push_back(c);
    }
    return ref;
}

HChain::HChain(std::shared_ptr<const RenewalU> u, Side side, long long max_state_units)
    : u_(std::move(u)), side_(side), max_state_(max_state_units) {
    const std::size_t states = static_cast<std::size_t>(max_state_) + 1;
    cum_.resize(states);
    next_.resize(states);
    for (long long s = 0; s <= max_state_; ++s) build_row(s);
    reset(0);
}

double HChain::weight(long long y) const {
    if (side_ == Side::NonNegative) return y >= 0 ? u_->U_plus_units(y) : 0.0;
    return y <= -1 ? u_->U_minus_weak_units(y) : 0.0;
}

void HChain::build_row(long long x) {
    // chain coordinates: state s >= 0 maps to position +s (NonNegative)
    // or -s (Negative side; state 0 is the common start)
    const long long pos = side_ == Side::NonNegative ? x : -x;
    const double denom = side_ == Side::NonNegative
                             ? u_->U_plus_units(pos)
                             : (pos == 0 ? u_->U_minus_weak_units(0)
                                         : u_->U_minus_weak_units(pos));
    const StepLaw& law = u_->system().law();
    const auto& sup = law.support_units();
    const auto& pr = law.probs();

    double acc = 0.0;
    auto& cum = cum_[static_cast<std::size_t>(x)];
    auto& nxt = next_[static_cast<std::size_t>(x)];
    for (std::size_t s = 0; s < sup.size(); ++s) {
        const long long y = pos + sup[s];
        const double w = weight(y);
        if (w <= 0.0) continue;
        acc += pr[s] * w / denom;
        cum.push_back(acc);
        nxt.push_back(y);  // position; step()/kernel_row() keep positions
    }
    const double err = std::abs(acc - 1.0);
    max_norm_err_ = std::max(max_norm_err_, err);
    if (err > 1e-9)
        throw std::runtime_error("HChain: kernel row at state " + std::to_string(pos) +
                                 " sums to " + std::to_string(acc) +
                                 " (wrong U table?)");
    if (!cum.empty()) cum.back() = 1.0;
}

std::vector<std::pair<long long, double>> HChain::kernel_row(long long x_units) const {
    const long long s = side_ == Side::NonNegative ? x_units : -x_units;
    if (s < 0 || s > max_state_) throw std::out_of_range("HChain: state outside table");
    std::vector<std::pair<long long, double>> row;
    const auto& cum = cum_[static_cast<std::size_t>(s)];
    const auto& nxt = next_[static_cast<std::size_t>(s)];
    double prev = 0.0;
    for (std::size_t i = 0; i < cum.size(); ++i) {
        row.push_back({nxt[i], cum[i] - prev});
        prev = cum[i];
    }
    return row;
}

long long HChain::step(RngStream& rng) {
    const long long s = side_ == Side::NonNegative ? state_ : -state_;
    if (s < 0 || s > max_state_)
        throw std::out_of_range("HChain: state " + std::to_string(state_) +
                                " outside the precomputed kernel table");
    const auto& cum = cum_[static_cast<std::size_t>(s)];
    const auto& nxt = next_[static_cast<std::size_t>(s)];
    const double u = rng.next_double();
    std::size_t i = 0;
    while (i + 1 < cum.size() && u >= cum[i]) ++i;
    state_ = nxt[i];
    return state_;
}

void HChain::reset(long long state_units) { state_ = state_units; }

std::map<std::vector<long long>, double> HChain::exact_kstep_law(std::size_t k) const {
    std::map<std::vector<long long>, double> law;
    std::vector<long long> tuple;
    const std::function<void(long long, std::size_t, double)> rec =
        [&](long long state, std::size_t depth, double p) {
            if (depth == k) {
                law[tuple] += p;
                return;
            }
            for (const auto& [y, w] : kernel_row(state)) {
                tuple.push_back(y);
                rec(y, depth + 1, p * w);
                tuple.pop_back();
            }
        };
    rec(0, 0, 1.0);
    return law;
}

DoobCheck doob_limit_check(const StepLaw& law, std::size_t k,
                           const std::vector<std::uint64_t>& n_grid,
                           std::uint64_t target_accepted, std::uint64_t max_attempts,
                           std::uint64_t master_seed, unsigned workers) {
    if (!law.is_lattice()) throw std::invalid_argument("doob_limit_check: lattice laws only");
    if (k > 5) throw std::invalid_argument("doob_limit_check: k <= 5 required");

    DoobCheck out;
    out.n_grid = n_grid;

    auto sys = std::make_shared<LadderSystem>(law);
    auto U = std::make_shared<RenewalU>(sys);
    HChain chain(U, HChain::Side::NonNegative, 1 << 12);
    out.kernel_norm_error = chain.max_normalization_error();
    const auto exact = chain.exact_kstep_law(k);

    if (k == 0) {
        for (std::size_t i = 0; i < n_grid.size(); ++i) {
            out.tv.push_back(0.0);
            out.accepted.push_back(0);
        }
        return out;
    }

    for (std::uint64_t n : n_grid) {
        // rejection: walk from 0 with S_1..S_n >= 0
        std::map<std::vector<long long>, std::uint64_t> counts;
        std::uint64_t accepted = 0, base = 0;
        const std::uint64_t chunk = 1 << 14;
        std::vector<std::vector<long long>> kept(chunk);
        std::vector<unsigned char> ok(chunk);

        while (base < max_attempts && accepted < target_accepted) {
            const std::uint64_t todo = std::min<std::uint64_t>(chunk, max_attempts - base);
            parallel_for(todo, workers, [&](std::size_t lo, std::size_t hi) {
                for (std::size_t i = lo; i < hi; ++i) {
                    RngStream rng(master_seed ^ (0x100000000ULL * n), base + i);
                    long long pos = 0;
                    ok[i] = 1;
                    kept[i].clear();
                    for (std::uint64_t t = 1; t <= n; ++t) {
                        pos += law.sample_step_units(rng);
                        if (pos < 0) { ok[i] = 0; break; }
                        if (t <= k) kept[i].push_back(pos);
                    }
                }
            });
            for (std::uint64_t i = 0; i < todo && accepted < target_accepted; ++i) {
                if (ok[i]) {
                    ++counts[kept[i]];
                    ++accepted;
                }
            }
            base += todo;
        }

        double tv = 0.0;
        if (accepted > 0) {
            // 0.5 * sum over union support of |empirical - exact|
            double seen_exact = 0.0;
            for (const auto& [tuple, cnt] : counts) {
                const double emp = static_cast<double>(cnt) / static_cast<double>(accepted);
                const auto it = exact.find(tuple);
                const double ex = it == exact.end() ? 0.0 : it->second;
                seen_exact += ex;
                tv += std::abs(emp - ex);
            }
            tv += 1.0 - seen_exact;  // exact tuples never observed
            tv *= 0.5;
        } else {
            tv = 1.0;
        }
        out.tv.push_back(tv);
        out.accepted.push_back(accepted);
    }
    return out;
}

}  // namespace avoidwalk
