#include <doctest.h>

#include <stdexcept>

#include "avoidwalk/avoid_set.hpp"

using namespace avoidwalk;

TEST_SUITE("sets") {

TEST_CASE("lattice interval truncation") {
    auto srw = StepLaw::srw();
    auto B = AvoidSet::parse("interval(-3,3,open)", srw);
    CHECK(B.points_units() == std::vector<long long>{-2, -1, 0, 1, 2});
    CHECK(B.l_units() == -2);
    CHECK(B.r_units() == 2);

    auto Bc = AvoidSet::parse("interval(-3,3,closed)", srw);
    CHECK(Bc.points_units().size() == 7);
    CHECK(Bc.l_units() == -3);
}

TEST_CASE("two points leave a hull hole") {
    auto skew = StepLaw::skew();
    auto B = AvoidSet::parse("points{-1,1}", skew);
    CHECK(B.l_units() == -1);
    CHECK(B.r_units() == 1);
    CHECK_FALSE(B.contains_units(0));
    CHECK(B.in_hull_units(0));
    CHECK(B.in_plus_units(2));
    CHECK(B.in_minus_units(-2));
    CHECK_FALSE(B.in_plus_units(1));  // 1 is in B, not in B+
}

TEST_CASE("continuous singleton rejected for empty interior") {
    auto gauss = StepLaw::gauss();
    CHECK_THROWS_WITH_AS(static_cast<void>(AvoidSet::parse("points{0}", gauss)),
                         doctest::Contains("Int_M"), std::invalid_argument);
    // but a point glued to an interval is fine
    auto B = AvoidSet::parse("interval(-1,1,open)+points{2.5}", gauss);
    CHECK(B.r() == 2.5);
    CHECK(B.contains_real(2.5));
    CHECK_FALSE(B.contains_real(1.0));   // open end
    CHECK(B.contains_real(0.999));
    CHECK(B.in_hull_real(1.0));          // hull now stretches to the point at 2.5
    CHECK_FALSE(B.in_plus_real(1.0));
    CHECK(B.in_plus_real(3.0));
    CHECK(B.in_hull_real(1.7));          // hull hole
    CHECK_FALSE(B.contains_real(1.7));

    // without the glued point the open edge belongs to B+
    auto Bi = AvoidSet::parse("interval(-1,1,open)", gauss);
    CHECK(Bi.in_plus_real(1.0));
    CHECK(Bi.in_hull_real(1.0));
}

TEST_CASE("lattice set with no lattice point is rejected") {
    auto srw = StepLaw::srw();
    CHECK_THROWS(static_cast<void>(AvoidSet::parse("interval(0.2,0.8,open)", srw)));
    CHECK_THROWS(static_cast<void>(AvoidSet::parse("points{0.5}", srw)));
}

TEST_CASE("disjointness and boundedness are enforced") {
    auto srw = StepLaw::srw();
    CHECK_THROWS(static_cast<void>(
        AvoidSet::parse("interval(-1,1,closed)+interval(0,2,closed)", srw)));
    CHECK_THROWS(static_cast<void>(AvoidSet::parse("", srw)));
    // touching closed endpoints overlap; open ones do not
    CHECK_THROWS(static_cast<void>(
        AvoidSet::parse("interval(-2,0,closed)+interval(0,2,closed)", srw)));
    CHECK_NOTHROW(static_cast<void>(
        AvoidSet::parse("interval(-2,0,open)+interval(0,2,open)", srw)));
}

TEST_CASE("open vs closed endpoints control membership (continuous)") {
    auto unif = StepLaw::unif();
    auto Bo = AvoidSet::parse("interval(-1,1,open)", unif);
    auto Bc = AvoidSet::parse("interval(-1,1,closed)", unif);
    CHECK_FALSE(Bo.contains_real(-1.0));
    CHECK(Bc.contains_real(-1.0));
    auto Bl = AvoidSet::parse("interval(-1,1,lopen)", unif);
    CHECK_FALSE(Bl.contains_real(-1.0));
    CHECK(Bl.contains_real(1.0));
}

TEST_CASE("union spec with lattice law snaps each part") {
    auto tent = StepLaw::tent();
    auto B = AvoidSet::parse("points{-1,1}+interval(3,5,closed)", tent);
    CHECK(B.points_units() == std::vector<long long>{-1, 1, 3, 4, 5});
    CHECK(B.in_hull_units(2));
    CHECK_FALSE(B.contains_units(2));
}

}  // TEST_SUITE
