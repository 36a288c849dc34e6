#include "avoidwalk/gap.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "avoidwalk/conditioned.hpp"
#include "avoidwalk/ladder.hpp"
#include "avoidwalk/parallel.hpp"

namespace avoidwalk {

namespace {

// spacing at order-statistic index k contributes to the interior/exterior
// maxima per the index windows
struct SpacingAcc {
    std::uint64_t n, bn;
    double g = 0.0, gi = 0.0, ge = 0.0;
    void add(std::uint64_t k, double d) {
        g = std::max(g, d);
        if (k >= bn && k <= n - bn) gi = std::max(gi, d);
        if (k <= bn || k >= n - bn) ge = std::max(ge, d);
    }
};

}  // namespace

GapStats gap_statistics(const Path& path, std::uint64_t b_n) {
    const std::uint64_t n = path.length();
    if (n < 3) throw std::invalid_argument("gap_statistics: n >= 3 required");
    if (b_n < 1 || b_n > n / 2)
        throw std::invalid_argument("gap_statistics: 1 <= b_n <= n/2 required");

    GapStats st;
    st.n = n;
    st.b_n = b_n;
    SpacingAcc acc{n, b_n};

    if (path.is_lattice()) {
        const auto& u = path.units;
        long long mn = u[0], mx = u[0];
        for (long long v : u) { mn = std::min(mn, v); mx = std::max(mx, v); }
        std::vector<std::uint32_t> cnt(static_cast<std::size_t>(mx - mn + 1), 0);
        for (long long v : u) ++cnt[static_cast<std::size_t>(v - mn)];

        long long distinct = 0;
        std::uint64_t cum = 0;
        long long prev = 0;
        bool have_prev = false;
        for (std::size_t i = 0; i < cnt.size(); ++i) {
            if (cnt[i] == 0) continue;
            ++distinct;
            const long long v = mn + static_cast<long long>(i);
            if (have_prev)
                acc.add(cum, static_cast<double>(v - prev) * path.law.lambda());
            cum += cnt[i];
            prev = v;
            have_prev = true;
        }
        st.empty_sites = (mx - mn) - (distinct - 1);
        st.min = path.law.to_real(mn);
        st.max = path.law.to_real(mx);
        for (std::size_t k = 0; k < u.size(); ++k) {
            if (u[k] == mn) { st.argmin_first = k + 1; break; }
        }
        for (std::size_t k = u.size(); k-- > 0;) {
            if (u[k] == mx) { st.argmax_last = k + 1; break; }
        }
    } else {
        std::vector<double> sorted = path.reals;
        std::sort(sorted.begin(), sorted.end());
        for (std::uint64_t k = 1; k < n; ++k) acc.add(k, sorted[k] - sorted[k - 1]);
        st.empty_sites = -1;
        st.min = sorted.front();
        st.max = sorted.back();
        for (std::size_t k = 0; k < n; ++k)
            if (path.reals[k] == st.min) { st.argmin_first = k + 1; break; }
        for (std::size_t k = n; k-- > 0;)
            if (path.reals[k] == st.max) { st.argmax_last = k + 1; break; }
    }
    st.gap = acc.g;
    st.gap_int = acc.gi;
    st.gap_ext = acc.ge;
    return st;
}

namespace {

struct Fenwick {
    std::vector<std::uint32_t> t;
    explicit Fenwick(std::size_t n) : t(n + 1, 0) {}
    void add(std::size_t i) {
        for (++i; i < t.size(); i += i & (~i + 1)) ++t[i];
    }
    std::uint32_t prefix(std::size_t i) const {  // count of indices <= i
        std::uint32_t s = 0;
        for (++i; i > 0; i -= i & (~i + 1)) s += t[i];
        return s;
    }
};

}  // namespace

long long increase_functional(const Path& path) {
    const std::size_t n = path.length();
    if (n < 1) throw std::invalid_argument("increase_functional: n >= 1 required");
    if (n == 1) return 0;

    std::vector<double> vals(n);
    for (std::size_t k = 0; k < n; ++k) vals[k] = path.position(k + 1);

    std::vector<double> sorted = vals;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    const auto rank = [&](double v) {
        return static_cast<std::size_t>(
            std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin());
    };
    const std::size_t R = sorted.size();

    // above[k] = #{j <= k: S_j > S_k}
    std::vector<std::uint32_t> above(n);
    {
        Fenwick fw(R);
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t r = rank(vals[k]);
            above[k] = static_cast<std::uint32_t>(k) - fw.prefix(r);
            fw.add(r);
        }
    }
    // below[k] = #{j >= k: S_j < S_k}
    std::vector<std::uint32_t> below(n);
    {
        Fenwick fw(R);
        for (std::size_t k = n; k-- > 0;) {
            const std::size_t r = rank(vals[k]);
            below[k] = r > 0 ? fw.prefix(r - 1) : 0;
            fw.add(r);
        }
    }
    long long best = std::numeric_limits<long long>::max();
    for (std::size_t k = 0; k + 1 < n; ++k)
        best = std::min(best, static_cast<long long>(above[k]) + below[k]);
    return best;
}

LimitGapSample sample_limit_gap(const StepLaw& law, std::uint64_t N, std::uint64_t reps,
                                std::uint64_t master_seed, unsigned workers) {
    if (!law.is_lattice())
        throw std::invalid_argument("sample_limit_gap: lattice laws only (continuous h-chains "
                                    "are out of scope)");
    if (N < 10000) throw std::invalid_argument("sample_limit_gap: N >= 1e4 required");

    auto sys = std::make_shared<LadderSystem>(law);
    auto U = std::make_shared<RenewalU>(sys);
    const long long max_state = 1 << 14;

    LimitGapSample out;
    out.N = N;
    out.reps = reps;
    out.gap.assign(reps, 0.0);
    out.empty.assign(reps, 0);
    std::vector<unsigned char> changed(reps, 0), flagged(reps, 0);

    const long long low_frontier = std::max<long long>(8, 4 * law.max_step_units());

    parallel_for(reps, workers, [&](std::size_t lo, std::size_t hi) {
        HChain up(U, HChain::Side::NonNegative, max_state);
        HChain dn(U, HChain::Side::Negative, max_state);
        std::vector<unsigned char> visited(static_cast<std::size_t>(max_state) + 1);

        for (std::size_t r = lo; r < hi; ++r) {
            RngStream rng(master_seed, r);
            std::fill(visited.begin(), visited.end(), 0);
            visited[0] = 1;
            up.reset(0);
            dn.reset(0);
            long long max_up = 0, max_dn = 0;

            const auto run = [&](std::uint64_t steps) {
                for (std::uint64_t t = 0; t < steps; ++t) {
                    const long long a = up.step(rng);
                    visited[static_cast<std::size_t>(a)] = 1;
                    max_up = std::max(max_up, a);
                    const long long b = -dn.step(rng);
                    visited[static_cast<std::size_t>(b)] = 1;
                    max_dn = std::max(max_dn, b);
                }
            };
            const auto stats = [&]() -> std::pair<double, long long> {
                const long long frontier = std::min(max_up, max_dn) / 2;
                long long prev = 0, gap_units = 0, missing = 0;
                for (long long v = 1; v <= frontier; ++v) {
                    if (visited[static_cast<std::size_t>(v)]) {
                        gap_units = std::max(gap_units, v - prev);
                        prev = v;
                    } else {
                        ++missing;
                    }
                }
                return {static_cast<double>(gap_units) * law.lambda(), missing};
            };

            run(N);
            const auto at_n = stats();
            const long long frontier_n = std::min(max_up, max_dn) / 2;
            run(N);  // continue the same chains to 2N
            const auto at_2n = stats();

            out.gap[r] = at_2n.first;
            out.empty[r] = at_2n.second;
            changed[r] = (at_n != at_2n) ? 1 : 0;
            flagged[r] = frontier_n < low_frontier ? 1 : 0;
        }
    });

    std::uint64_t ch = 0, fl = 0;
    for (std::size_t r = 0; r < reps; ++r) { ch += changed[r]; fl += flagged[r]; }
    out.changed_fraction = reps ? static_cast<double>(ch) / static_cast<double>(reps) : 0.0;
    out.flagged = fl;
    out.stabilized = out.changed_fraction < 0.01;
    return out;
}

DistanceReport distribution_distance(const std::vector<double>& a,
                                     const std::vector<double>& b) {
    DistanceReport rep;
    rep.ks = ks_two_sample(a, b);
    rep.p_proxy = ks_p_proxy(rep.ks, a.size(), b.size());
    rep.n1 = a.size();
    rep.n2 = b.size();
    return rep;
}

}  // namespace avoidwalk
