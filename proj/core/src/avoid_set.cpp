#include "avoidwalk/avoid_set.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace avoidwalk {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

}  // namespace

AvoidSet AvoidSet::parse(const std::string& spec, const StepLaw& law) {
    std::vector<SetInterval> intervals;
    std::vector<double> points;
    for (const std::string& part : split(spec, '+')) {
        if (part.empty()) continue;
        if (part.rfind("interval(", 0) == 0 && part.back() == ')') {
            const auto args = split(part.substr(9, part.size() - 10), ',');
            if (args.size() != 2 && args.size() != 3)
                throw std::invalid_argument("interval(a,b[,flags]) expected in '" + part + "'");
            SetInterval iv;
            iv.lo = std::stod(args[0]);
            iv.hi = std::stod(args[1]);
            std::string flags = args.size() == 3 ? args[2] : "open";
            if (flags == "open") { iv.lo_closed = false; iv.hi_closed = false; }
            else if (flags == "closed") { iv.lo_closed = true; iv.hi_closed = true; }
            else if (flags == "lopen") { iv.lo_closed = false; iv.hi_closed = true; }
            else if (flags == "ropen") { iv.lo_closed = true; iv.hi_closed = false; }
            else throw std::invalid_argument("unknown interval flags '" + flags + "'");
            if (!(iv.lo < iv.hi))
                throw std::invalid_argument("interval needs lo < hi in '" + part + "'");
            intervals.push_back(iv);
        } else if (part.rfind("points{", 0) == 0 && part.back() == '}') {
            for (const std::string& p : split(part.substr(7, part.size() - 8), ','))
                if (!p.empty()) points.push_back(std::stod(p));
        } else {
            throw std::invalid_argument("unrecognized set component '" + part +
                                        "' (expected interval(...) or points{...})");
        }
    }
    AvoidSet b = from_components(intervals, points, law);
    b.spec_ = spec;
    return b;
}

AvoidSet AvoidSet::from_components(const std::vector<SetInterval>& intervals,
                                   const std::vector<double>& points, const StepLaw& law) {
    if (intervals.empty() && points.empty())
        throw std::invalid_argument("avoid set must be non-empty");
    for (const auto& iv : intervals)
        if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi))
            throw std::invalid_argument("avoid set must be bounded");

    AvoidSet b;
    b.lattice_ = law.is_lattice();
    b.lambda_ = law.is_lattice() ? law.lambda() : 0.0;
    b.intervals_ = intervals;
    b.point_comps_ = points;
    std::sort(b.intervals_.begin(), b.intervals_.end(),
              [](const SetInterval& a, const SetInterval& c) { return a.lo < c.lo; });
    for (std::size_t i = 0; i + 1 < b.intervals_.size(); ++i) {
        const auto& a = b.intervals_[i];
        const auto& c = b.intervals_[i + 1];
        const bool overlap = a.hi > c.lo || (a.hi == c.lo && a.hi_closed && c.lo_closed);
        if (overlap) throw std::invalid_argument("avoid set components must be disjoint");
    }
    std::sort(b.point_comps_.begin(), b.point_comps_.end());
    b.validate_and_finalize(law);
    return b;
}

void AvoidSet::validate_and_finalize(const StepLaw& law) {
    if (lattice_) {
        const double lam = law.lambda();
        for (const auto& iv : intervals_) {
            const long long from = static_cast<long long>(
                std::ceil(iv.lo / lam - (iv.lo_closed ? 1e-9 : -1e-9)));
            const long long to = static_cast<long long>(
                std::floor(iv.hi / lam + (iv.hi_closed ? 1e-9 : -1e-9)));
            for (long long u = from; u <= to; ++u) points_.push_back(u);
        }
        for (double p : point_comps_) {
            const double q = p / lam;
            const double r = std::round(q);
            if (std::abs(q - r) > 1e-9)
                throw std::invalid_argument(
                    "point component off the lattice has empty M-interior: " + std::to_string(p));
            points_.push_back(static_cast<long long>(r));
        }
        std::sort(points_.begin(), points_.end());
        points_.erase(std::unique(points_.begin(), points_.end()), points_.end());
        if (points_.empty())
            throw std::invalid_argument(
                "avoid set has empty M-interior (no lattice point inside); "
                "the standing assumption Int_M(B) != {} fails");
        l_units_ = points_.front();
        r_units_ = points_.back();
        l_ = law.to_real(l_units_);
        r_ = law.to_real(r_units_);
        intervals_.clear();
        point_comps_.clear();
    } else {
        if (intervals_.empty())
            throw std::invalid_argument(
                "avoid set has empty interior in R (points only); "
                "the standing assumption Int_M(B) != {} fails");
        l_ = intervals_.front().lo;
        r_ = intervals_.back().hi;
        for (double p : point_comps_) {
            l_ = std::min(l_, p);
            r_ = std::max(r_, p);
        }
        l_units_ = 0;
        r_units_ = 0;
    }
}

bool AvoidSet::contains_units(long long u) const {
    if (u < l_units_ || u > r_units_) return false;
    return std::binary_search(points_.begin(), points_.end(), u);
}

bool AvoidSet::contains_real(double x) const {
    if (lattice_) {
        const double q = x / lambda_;
        const double r = std::round(q);
        if (std::abs(q - r) > 1e-9) return false;
        return contains_units(static_cast<long long>(r));
    }
    if (x < l_ || x > r_) return false;
    for (const auto& iv : intervals_) {
        if (x < iv.lo || x > iv.hi) continue;
        if ((x > iv.lo || iv.lo_closed) && (x < iv.hi || iv.hi_closed)) return true;
    }
    for (double p : point_comps_)
        if (x == p) return true;
    return false;
}

AvoidSet make_avoid_set(const std::string& spec, const StepLaw& law) {
    return AvoidSet::parse(spec, law);
}

}  // namespace avoidwalk
