#include <doctest.h>

#include <cmath>

#include "avoidwalk/rng.hpp"
#include "avoidwalk/stats.hpp"
#include "avoidwalk/step_law.hpp"

using namespace avoidwalk;

TEST_SUITE("step_law") {

TEST_CASE("builtin moments and spans") {
    auto srw = StepLaw::srw();
    CHECK(srw.lambda() == 1.0);
    CHECK(srw.sigma2() == 1.0);
    CHECK(srw.max_step() == 1.0);

    auto skew = StepLaw::skew();   // -3 w.p. 2/5, +2 w.p. 3/5: the unique centring
    CHECK(skew.lambda() == 1.0);
    CHECK(skew.sigma2() == doctest::Approx(6.0).epsilon(1e-14));

    auto tent = StepLaw::tent();
    CHECK(tent.sigma2() == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(tent.lambda() == 1.0);
    CHECK(tent.max_step_units() == 2);

    auto unif = StepLaw::unif();
    CHECK_FALSE(unif.is_lattice());
    CHECK(unif.sigma2() == doctest::Approx(1.0 / 3.0));
    CHECK(std::isinf(StepLaw::gauss().max_step()));
}

TEST_CASE("textual grammar round trips to the tent law") {
    auto law = StepLaw::parse("lattice: -2:0.25, -1:0.25, 1:0.25, 2:0.25");
    auto tent = StepLaw::tent();
    REQUIRE(law.support_units() == tent.support_units());
    for (std::size_t i = 0; i < law.probs().size(); ++i)
        CHECK(law.probs()[i] == tent.probs()[i]);
    CHECK(law.lambda() == 1.0);

    auto frac = StepLaw::parse("lattice: -3:2/5, 2:3/5");
    CHECK(frac.sigma2() == doctest::Approx(6.0));
}

TEST_CASE("lambda detection on scaled and fractional supports") {
    CHECK(StepLaw::parse("lattice: -2:0.5, 2:0.5").lambda() == 2.0);
    CHECK(StepLaw::parse("lattice: -1.5:0.5, 1.5:0.5").lambda() == 1.5);
    // gcd of {3,2} is 1 even though the gap is 5
    CHECK(StepLaw::parse("lattice: -3:2/5, 2:3/5").lambda() == 1.0);
}

TEST_CASE("invalid laws are rejected") {
    CHECK_THROWS(StepLaw::parse("lattice: -1:0.5, 2:0.5"));        // mean 1/2
    CHECK_THROWS(StepLaw::parse("lattice: 0:1"));                  // zero variance
    CHECK_THROWS(StepLaw::parse("lattice: -1:-0.5, 1:1.5"));       // negative prob
    CHECK_THROWS(StepLaw::parse("lattice: -1:0.4, 1:0.4"));        // mass 0.8
    CHECK_THROWS(StepLaw::parse("cauchy"));                        // unknown family
}

TEST_CASE("paths: empty walk, determinism, lattice closure") {
    auto srw = StepLaw::srw();
    RngStream r0(5, 0);
    Path p0 = sample_path(srw, 0.0, 0, r0);
    CHECK(p0.length() == 0);
    CHECK(p0.position(0) == 0.0);

    RngStream a(5, 1), b(5, 1);
    Path pa = sample_path(srw, 0.0, 100000, a);
    Path pb = sample_path(srw, 0.0, 100000, b);
    CHECK(pa.units == pb.units);

    auto scaled = StepLaw::parse("lattice: -1.5:0.5, 1.5:0.5");
    RngStream c(5, 2);
    Path pc = sample_path(scaled, 3.0, 1000, c);
    for (std::size_t k = 1; k <= pc.length(); ++k) {
        const double pos = pc.position(k);
        CHECK(std::abs(pos / 1.5 - std::round(pos / 1.5)) < 1e-12);
    }
    CHECK_THROWS(sample_path(scaled, 1.0, 10, c));  // off-lattice start
}

TEST_CASE("empirical step means vanish for every builtin" * doctest::test_suite("step_law")) {
    for (const char* name : {"srw", "tent", "skew", "gauss", "unif"}) {
        auto law = StepLaw::parse(name);
        RngStream rng(11, 1);
        const int n = 1 << 20;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += law.sample_step_real(rng);
        const double tol = 4.0 * law.sigma() / std::sqrt(static_cast<double>(n));
        CHECK_MESSAGE(std::abs(acc / n) < tol, name);
    }
}

TEST_CASE("[slow] CLT scale of S_n/sqrt(n) for the tent law") {
    auto tent = StepLaw::tent();
    const int reps = 4000, n = 4000;
    RunningStat rs;
    for (int r = 0; r < reps; ++r) {
        RngStream rng(13, r);
        long long pos = 0;
        for (int k = 0; k < n; ++k) pos += tent.sample_step_units(rng);
        rs.add(static_cast<double>(pos) / std::sqrt(static_cast<double>(n)));
    }
    // sd of the sample sd is roughly sigma/sqrt(2 reps)
    const double sd_err = tent.sigma() / std::sqrt(2.0 * reps);
    CHECK(std::abs(rs.stddev() - tent.sigma()) < 3.0 * sd_err);
}

}  // TEST_SUITE
