#pragma once

#include <string>
#include <vector>

#include "avoidwalk/step_law.hpp"

namespace avoidwalk {

struct SetInterval {
    double lo = 0.0;
    double hi = 0.0;
    bool lo_closed = false;
    bool hi_closed = false;
};

// Where a position sits relative to B. Classification feeds the jump rule:
// the hull test and the side tests overlap on purpose (an edge point not in
// B belongs to both the hull and its side region).
// A bounded set B with nonempty interior in the state space M. Lattice laws
// normalize B to an explicit sorted point set in lambda units; continuous
// laws keep the interval/point components exactly as given.
class AvoidSet {
  public:
    // Grammar: "interval(a,b)" (open), "interval(a,b,closed|open|lopen|ropen)",
    // "points{p1,p2,...}", unions joined with '+'.
    static AvoidSet parse(const std::string& spec, const StepLaw& law);
    static AvoidSet from_components(const std::vector<SetInterval>& intervals,
                                    const std::vector<double>& points, const StepLaw& law);

    bool is_lattice() const { return lattice_; }
    const std::string& spec() const { return spec_; }

    double l() const { return l_; }   // inf B, real units
    double r() const { return r_; }   // sup B, real units
    long long l_units() const { return l_units_; }
    long long r_units() const { return r_units_; }
    const std::vector<long long>& points_units() const { return points_; }

    bool contains_units(long long u) const;
    bool contains_real(double x) const;

    // region predicates, lattice coordinates
    bool in_hull_units(long long u) const { return u >= l_units_ && u <= r_units_; }
    bool in_plus_units(long long u) const { return u >= r_units_ && !contains_units(u); }
    bool in_minus_units(long long u) const { return u <= l_units_ && !contains_units(u); }

    // region predicates, real coordinates
    bool in_hull_real(double x) const { return x >= l_ && x <= r_; }
    bool in_plus_real(double x) const { return x >= r_ && !contains_real(x); }
    bool in_minus_real(double x) const { return x <= l_ && !contains_real(x); }

  private:
    AvoidSet() = default;
    void validate_and_finalize(const StepLaw& law);

    bool lattice_ = true;
    std::string spec_;
    double lambda_ = 1.0;
    double l_ = 0.0, r_ = 0.0;
    long long l_units_ = 0, r_units_ = 0;

    std::vector<long long> points_;        // lattice mode, ascending
    std::vector<SetInterval> intervals_;   // continuous mode, ascending, disjoint
    std::vector<double> point_comps_;      // continuous mode singletons
};

AvoidSet make_avoid_set(const std::string& spec, const StepLaw& law);

}  // namespace avoidwalk
