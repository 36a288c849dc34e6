#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include "avoidwalk/conditioned.hpp"
#include "avoidwalk/experiments.hpp"
#include "avoidwalk/oracle.hpp"

using namespace avoidwalk;

namespace {

// test-only oracle: Brownian meander sampled by fine discretization and
// rejection; validates the analytic marginal CDFs used by the checker
std::vector<double> discretized_meander(std::size_t samples, double t, std::uint64_t seed) {
    std::vector<double> out;
    const int m = 512;
    RngStream rng(seed, 0);
    std::vector<double> path(m + 1);
    while (out.size() < samples) {
        bool positive = true;
        path[0] = 0.0;
        for (int i = 1; i <= m && positive; ++i) {
            path[i] = path[i - 1] + rng.next_normal() / std::sqrt(static_cast<double>(m));
            if (path[i] <= 0.0) positive = false;
        }
        if (positive) out.push_back(path[static_cast<int>(t * m)]);
    }
    return out;
}

}  // namespace

TEST_SUITE("conditioned") {

TEST_CASE("acceptance rate tracks the exact survival probability") {
    auto srw = StepLaw::srw();
    auto B = AvoidSet::parse("points{0}", srw);
    const std::uint64_t n = 2000;
    DPResult dp = dp_survival(srw, B, 1.0, n);
    ConditionedSample cs = sample_conditioned(srw, B, 1.0, n, 1200, 1000000, 111, 2);
    CHECK(std::abs(cs.acceptance_rate - dp.q[n]) <
          3.0 * binomial_stderr(dp.q[n], cs.attempts) + 1e-9);
}

TEST_CASE("unit-step walk avoiding the origin stays positive: rho = 1") {
    auto srw = StepLaw::srw();
    auto B = AvoidSet::parse("points{0}", srw);
    ConditionedSample cs = sample_conditioned(srw, B, 1.0, 1000, 800, 1000000, 112, 2);
    EstimateCI v{1.0, 0.0, 0, 0, 0, 0, Method::Oracle};
    EstimateCI e{0.0, 0.0, 0, 0, 0, 0, Method::Oracle};
    ConditionedLawReport rep = conditioned_law_checks(cs, v, e, 10);
    CHECK(rep.rho_hat == 1.0);
    CHECK(rep.ties == 0);
    CHECK(rep.rho_formula == doctest::Approx(1.0));  // 1/2 + 1/(2*1)
}

TEST_CASE("degenerate start with V = 0 fails loudly") {
    // from 0, unit steps must enter {-1,1} at the first move
    auto srw = StepLaw::srw();
    auto B = AvoidSet::parse("points{-1,1}", srw);
    CHECK_THROWS_AS(
        static_cast<void>(sample_conditioned(srw, B, 0.0, 100, 10, 20000, 113, 2)),
        std::runtime_error);
}

TEST_CASE("accepted paths avoid B pointwise") {
    auto tent = StepLaw::tent();
    auto B = AvoidSet::parse("points{-1,1}", tent);
    ConditionedSample cs =
        sample_conditioned(tent, B, 3.0, 200, 100, 200000, 114, 2, /*keep_paths=*/true);
    REQUIRE(!cs.paths.empty());
    for (const auto& p : cs.paths) {
        REQUIRE(p.units.size() == 200);
        for (long long u : p.units) CHECK_FALSE(B.contains_units(u));
    }
}

TEST_CASE("[slow] tent sign law matches the hit-position formula") {
    auto tent = StepLaw::tent();
    auto B = AvoidSet::parse("points{0}", tent);
    const std::uint64_t n = 1000;
    VExtrapolation ve = extrapolate_V(tent, B, 1.0, {512, 1024, 2048}, 2);
    EstimateCI v{ve.value, ve.err, 0, 0, 0, 0, Method::Oracle};
    EstimateCI e{0.0, 0.0, 0, 0, 0, 0, Method::Oracle};  // singleton B: S_tau = 0
    ConditionedSample cs = sample_conditioned(tent, B, 1.0, n, 2500, 4000000, 115, 2);
    ConditionedLawReport rep = conditioned_law_checks(cs, v, e, resolve_bn("cbrt", n));
    const double joint = 3.0 * std::sqrt(rep.rho_stderr * rep.rho_stderr +
                                         rep.rho_formula_stderr * rep.rho_formula_stderr);
    CHECK(std::abs(rep.rho_hat - rep.rho_formula) < joint + 0.01);
}

TEST_CASE("[slow] jump-count law against the capped reference") {
    auto tent = StepLaw::tent();
    auto B = AvoidSet::parse("points{0}", tent);
    const std::uint64_t n = 2000;
    ConditionedSample cs = sample_conditioned(tent, B, 1.0, n, 2500, 4000000, 116, 2);
    VExtrapolation ve = extrapolate_V(tent, B, 1.0, {512, 1024, 2048}, 2);
    EstimateCI v{ve.value, ve.err, 0, 0, 0, 0, Method::Oracle};
    EstimateCI e{0.0, 0.0, 0, 0, 0, 0, Method::Oracle};
    ConditionedLawReport rep = conditioned_law_checks(cs, v, e, resolve_bn("cbrt", n));
    JumpCountReference ref = jump_count_reference(tent, B, 1.0, 500000, 80000, 117, 2);
    for (int i = 0; i < 5; ++i) {
        const double tol = 3.0 * std::sqrt(rep.nu_stderr[i] * rep.nu_stderr[i] +
                                           ref.cells[i].stderr_ * ref.cells[i].stderr_);
        CHECK_MESSAGE(std::abs(rep.nu_cells[i] - ref.cells[i].value) < tol + 0.02,
                      "cell ", i + 1, ": ", rep.nu_cells[i], " vs ", ref.cells[i].value);
    }
    // reference cells sum to at most one (they are V-normalized shares)
    double tot = 0.0;
    for (const auto& c : ref.cells) tot += c.value;
    CHECK(tot <= 1.0 + 1e-9);
}

TEST_CASE("reflection symmetry of the sign law") {
    auto tent = StepLaw::tent();
    auto B = AvoidSet::parse("points{-1,1}", tent);
    const std::uint64_t n = 800;
    EstimateCI v{1.0, 0.0, 0, 0, 0, 0, Method::Oracle};
    EstimateCI e{0.0, 0.0, 0, 0, 0, 0, Method::Oracle};
    ConditionedSample a = sample_conditioned(tent, B, 3.0, n, 1500, 2000000, 118, 2);
    ConditionedSample b = sample_conditioned(tent, B, -3.0, n, 1500, 2000000, 119, 2);
    ConditionedLawReport ra = conditioned_law_checks(a, v, e, 10);
    ConditionedLawReport rb = conditioned_law_checks(b, v, e, 10);
    const double joint =
        3.0 * std::sqrt(ra.rho_stderr * ra.rho_stderr + rb.rho_stderr * rb.rho_stderr);
    CHECK(std::abs(ra.rho_hat + rb.rho_hat - 1.0) < joint + 1e-6);
}

TEST_CASE("[slow] acceptance rate scales like n^{-1/2}") {
    auto srw = StepLaw::srw();
    auto B = AvoidSet::parse("points{0}", srw);
    std::vector<double> scaled;
    for (std::uint64_t n : {1000ULL, 4000ULL, 16000ULL}) {
        ConditionedSample cs = sample_conditioned(srw, B, 1.0, n, 1200, 4000000, 120, 2);
        scaled.push_back(cs.acceptance_rate * std::sqrt(static_cast<double>(n)));
    }
    for (double s : scaled) {
        CHECK(s > 0.9 * scaled[0]);
        CHECK(s < 1.1 * scaled[0]);
    }
}

TEST_CASE("[slow] far starts give a one-sided meander: rho -> 1") {
    // x = 50 with n = 1e4 sits at the x = o(sqrt n) margin; the flip
    // probability 1/2 - x/(2V(x)) is ~0.006 there
    auto tent = StepLaw::tent();
    auto B = AvoidSet::parse("points{0}", tent);
    ConditionedSample cs = sample_conditioned(tent, B, 50.0, 10000, 600, 2000000, 126, 2);
    std::uint64_t pos = 0;
    for (const auto& s : cs.accepted)
        if (s.s_end > 0) ++pos;
    const double rho = static_cast<double>(pos) / static_cast<double>(cs.accepted.size());
    CHECK(rho >= 0.98);
}

TEST_CASE("meander marginal CDFs validated by the discretized-meander oracle") {
    for (double t : {0.25, 0.5, 1.0}) {
        auto sample = discretized_meander(4000, t, 121);
        std::sort(sample.begin(), sample.end());
        const double ks =
            ks_statistic(sample, [t](double u) { return meander_marginal_cdf(t, u); });
        CHECK_MESSAGE(ks < 0.05, "t=", t, " ks=", ks);
    }
}

TEST_CASE("h-chain kernels: unit-step closed form and normalization") {
    auto sys = std::make_shared<LadderSystem>(StepLaw::srw());
    auto U = std::make_shared<RenewalU>(sys);
    HChain up(U, HChain::Side::NonNegative, 512);
    CHECK(up.max_normalization_error() < 1e-9);
    for (long long x : {0LL, 1LL, 4LL, 10LL}) {
        auto row = up.kernel_row(x);
        double up_p = 0.0;
        for (auto [y, p] : row)
            if (y == x + 1) up_p = p;
        CHECK(up_p == doctest::Approx(static_cast<double>(x + 2) /
                                      (2.0 * static_cast<double>(x + 1))));
    }
    auto row0 = up.kernel_row(0);
    REQUIRE(row0.size() == 1);
    CHECK(row0[0].first == 1);   // S>= at 0 moves to 1 with probability one

    HChain dn(U, HChain::Side::Negative, 512);
    auto nrow = dn.kernel_row(0);
    REQUIRE(nrow.size() == 1);
    CHECK(nrow[0].first == -1);  // S< at 0 moves to -1 with probability one
}

TEST_CASE("h-chains are transient: S>= from 0 tops 100 in every run here") {
    auto sys = std::make_shared<LadderSystem>(StepLaw::srw());
    auto U = std::make_shared<RenewalU>(sys);
    HChain chain(U, HChain::Side::NonNegative, 1 << 15);
    int ok = 0;
    for (int rep = 0; rep < 100; ++rep) {
        RngStream rng(122, rep);
        chain.reset(0);
        for (int t = 0; t < 1000000; ++t)
            if (chain.step(rng) > 100) { ++ok; break; }
    }
    CHECK(ok >= 99);
}

TEST_CASE("doob marginal: k = 0 is trivially exact") {
    auto tent = StepLaw::tent();
    DoobCheck dc = doob_limit_check(tent, 0, {100}, 100, 100000, 123, 2);
    CHECK(dc.tv[0] == 0.0);
}

TEST_CASE("[slow] doob marginal TV shrinks with n") {
    auto srw = StepLaw::srw();
    DoobCheck dc = doob_limit_check(srw, 1, {100, 10000}, 20000, 100000000, 124, 2);
    // one-step law from 0 given n steps nonnegative: P(S_1 = 1) -> 1
    CHECK(dc.tv[1] < dc.tv[0] + 0.01);
    CHECK(dc.tv[1] < 0.02);
    CHECK(dc.kernel_norm_error <= 1e-9);

    auto tent = StepLaw::tent();
    DoobCheck dt = doob_limit_check(tent, 3, {100, 1000}, 20000, 100000000, 125, 2);
    CHECK(dt.tv[1] < dt.tv[0] + 0.01);
}

}  // TEST_SUITE
