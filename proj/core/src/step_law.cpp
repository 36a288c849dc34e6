#include "avoidwalk/step_law.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
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

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

long long gcd_ll(long long a, long long b) { return std::gcd(std::abs(a), std::abs(b)); }

}  // namespace

Fraction Fraction::parse(const std::string& text) {
    const std::string t = trim(text);
    if (t.empty()) throw std::invalid_argument("empty number");
    Fraction f;
    const auto slash = t.find('/');
    if (slash != std::string::npos) {
        f.num = std::stoll(trim(t.substr(0, slash)));
        f.den = std::stoll(trim(t.substr(slash + 1)));
        if (f.den == 0) throw std::invalid_argument("zero denominator in '" + t + "'");
    } else {
        // decimal: shift the point into an integer numerator
        std::string digits = t;
        long long den = 1;
        const auto dot = digits.find('.');
        if (dot != std::string::npos) {
            const std::size_t places = digits.size() - dot - 1;
            digits.erase(dot, 1);
            for (std::size_t i = 0; i < places; ++i) {
                if (den > std::numeric_limits<long long>::max() / 10)
                    throw std::invalid_argument("too many decimal places in '" + t + "'");
                den *= 10;
            }
        }
        if (digits.empty() || digits == "-" || digits == "+")
            throw std::invalid_argument("bad number '" + t + "'");
        f.num = std::stoll(digits);
        f.den = den;
    }
    f.reduce();
    return f;
}

void Fraction::reduce() {
    if (den < 0) { num = -num; den = -den; }
    const long long g = gcd_ll(num, den);
    if (g > 1) { num /= g; den /= g; }
}

namespace {

Fraction from_i128(__int128 num, __int128 den) {
    if (den < 0) { num = -num; den = -den; }
    __int128 a = num < 0 ? -num : num, b = den;
    while (b) { const __int128 t = a % b; a = b; b = t; }
    if (a > 1) { num /= a; den /= a; }
    const __int128 lim = std::numeric_limits<long long>::max();
    if (num > lim || num < -lim || den > lim)
        throw std::overflow_error("Fraction arithmetic overflow");
    return Fraction{static_cast<long long>(num), static_cast<long long>(den)};
}

}  // namespace

Fraction frac_add(const Fraction& a, const Fraction& b) {
    return from_i128(static_cast<__int128>(a.num) * b.den + static_cast<__int128>(b.num) * a.den,
                     static_cast<__int128>(a.den) * b.den);
}

Fraction frac_mul(const Fraction& a, const Fraction& b) {
    return from_i128(static_cast<__int128>(a.num) * b.num,
                     static_cast<__int128>(a.den) * b.den);
}

bool frac_eq(const Fraction& a, const Fraction& b) {
    return static_cast<__int128>(a.num) * b.den == static_cast<__int128>(b.num) * a.den;
}

StepLaw StepLaw::make_lattice(const std::vector<Fraction>& values,
                              const std::vector<Fraction>& probs, std::string name) {
    if (values.size() != probs.size() || values.empty())
        throw std::invalid_argument("lattice law needs matching value/probability lists");

    // common denominator of support values -> integer grid
    long long vden = 1;
    for (const auto& v : values) vden = vden / gcd_ll(vden, v.den) * v.den;
    std::vector<long long> grid(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) grid[i] = values[i].num * (vden / values[i].den);

    long long g = 0;
    for (long long u : grid) g = gcd_ll(g, u);
    if (g == 0) throw std::invalid_argument("lattice law with all-zero steps has zero variance");

    StepLaw law;
    law.lattice_ = true;
    law.name_ = std::move(name);
    law.lambda_ = static_cast<double>(g) / static_cast<double>(vden);

    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return grid[a] < grid[b]; });

    __int128 prob_num_sum = 0;
    long long prob_den = 1;
    for (const auto& p : probs) prob_den = prob_den / gcd_ll(prob_den, p.den) * p.den;

    __int128 mean_num = 0;
    for (std::size_t idx : order) {
        const auto& p = probs[idx];
        if (p.num < 0) throw std::invalid_argument("negative probability");
        const long long u = grid[idx] / g;
        if (!law.support_.empty() && law.support_.back() == u)
            throw std::invalid_argument("duplicate support value");
        law.support_.push_back(u);
        law.prob_frac_.push_back(p);
        law.prob_.push_back(p.value());
        const __int128 scaled = static_cast<__int128>(p.num) * (prob_den / p.den);
        prob_num_sum += scaled;
        mean_num += scaled * u;
    }
    if (prob_num_sum != prob_den)
        throw std::invalid_argument("probabilities must sum to 1 exactly");
    if (mean_num != 0)
        throw std::invalid_argument("step law must be centred (mean exactly 0)");

    double s2_units = 0.0;
    for (std::size_t i = 0; i < law.support_.size(); ++i) {
        const double u = static_cast<double>(law.support_[i]);
        s2_units += law.prob_[i] * u * u;
    }
    law.sigma2_ = s2_units * law.lambda_ * law.lambda_;
    if (law.sigma2_ <= 0.0) throw std::invalid_argument("zero variance law rejected");

    law.max_step_units_ = std::max(std::abs(law.support_.front()), std::abs(law.support_.back()));
    law.max_step_ = static_cast<double>(law.max_step_units_) * law.lambda_;

    law.cum_.resize(law.prob_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < law.prob_.size(); ++i) {
        acc += law.prob_[i];
        law.cum_[i] = acc;
    }
    law.cum_.back() = 1.0;
    return law;
}

StepLaw StepLaw::srw() {
    return make_lattice({Fraction{-1, 1}, Fraction{1, 1}},
                        {Fraction{1, 2}, Fraction{1, 2}}, "srw");
}

StepLaw StepLaw::tent() {
    return make_lattice({Fraction{-2, 1}, Fraction{-1, 1}, Fraction{1, 1}, Fraction{2, 1}},
                        {Fraction{1, 4}, Fraction{1, 4}, Fraction{1, 4}, Fraction{1, 4}},
                        "tent");
}

StepLaw StepLaw::skew() {
    return make_lattice({Fraction{-3, 1}, Fraction{2, 1}},
                        {Fraction{2, 5}, Fraction{3, 5}}, "skew");
}

StepLaw StepLaw::gauss() {
    StepLaw law;
    law.lattice_ = false;
    law.name_ = "gauss";
    law.family_ = ContinuousFamily::Gauss;
    law.lambda_ = 0.0;
    law.sigma2_ = 1.0;
    law.max_step_ = std::numeric_limits<double>::infinity();
    return law;
}

StepLaw StepLaw::unif() {
    StepLaw law;
    law.lattice_ = false;
    law.name_ = "unif";
    law.family_ = ContinuousFamily::UniformSym;
    law.lambda_ = 0.0;
    law.sigma2_ = 1.0 / 3.0;
    law.max_step_ = 1.0;
    return law;
}

StepLaw StepLaw::parse(const std::string& spec) {
    const std::string s = trim(spec);
    const std::string ls = lower(s);
    if (ls == "srw") return srw();
    if (ls == "tent") return tent();
    if (ls == "skew") return skew();
    if (ls == "gauss") return gauss();
    if (ls == "unif") return unif();

    const std::string prefix = "lattice:";
    if (lower(s.substr(0, prefix.size())) == prefix) {
        std::vector<Fraction> values, probs;
        std::stringstream body(s.substr(prefix.size()));
        std::string item;
        while (std::getline(body, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            const auto colon = item.find(':');
            if (colon == std::string::npos)
                throw std::invalid_argument("expected 'value:prob' in '" + item + "'");
            values.push_back(Fraction::parse(item.substr(0, colon)));
            probs.push_back(Fraction::parse(item.substr(colon + 1)));
        }
        return make_lattice(values, probs);
    }
    throw std::invalid_argument("unknown step law '" + s +
                                "' (expected srw|tent|skew|gauss|unif or 'lattice: v:p, ...')");
}

double StepLaw::sigma() const { return std::sqrt(sigma2_); }

long long StepLaw::sample_step_units(RngStream& rng) const {
    const double u = rng.next_double();
    for (std::size_t i = 0; i + 1 < cum_.size(); ++i)
        if (u < cum_[i]) return support_[i];
    return support_.back();
}

double StepLaw::sample_step_real(RngStream& rng) const {
    if (lattice_) return to_real(sample_step_units(rng));
    switch (family_) {
        case ContinuousFamily::Gauss: return rng.next_normal();
        case ContinuousFamily::UniformSym: return 2.0 * rng.next_double() - 1.0;
    }
    return 0.0;
}

StepLaw StepLaw::mirrored() const {
    if (!lattice_) {
        return *this;  // builtin continuous families are symmetric
    }
    StepLaw m = *this;
    m.name_ = name_ + "-mirror";
    const std::size_t n = support_.size();
    for (std::size_t i = 0; i < n; ++i) {
        m.support_[i] = -support_[n - 1 - i];
        m.prob_[i] = prob_[n - 1 - i];
        m.prob_frac_[i] = prob_frac_[n - 1 - i];
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += m.prob_[i];
        m.cum_[i] = acc;
    }
    m.cum_.back() = 1.0;
    return m;
}

long long StepLaw::to_units(double x) const {
    if (!lattice_) throw std::logic_error("to_units on a continuous law");
    const double q = x / lambda_;
    const double r = std::round(q);
    if (std::abs(q - r) > 1e-9)
        throw std::invalid_argument("coordinate " + std::to_string(x) +
                                    " is not on the lattice (lambda=" + std::to_string(lambda_) + ")");
    return static_cast<long long>(r);
}

double Path::position(std::size_t k) const {
    if (k == 0) return x0;
    if (law.is_lattice()) return law.to_real(units.at(k - 1));
    return reals.at(k - 1);
}

Path sample_path(const StepLaw& law, double x0, std::size_t n, RngStream& rng) {
    Path p;
    p.law = law;
    p.x0 = x0;
    if (law.is_lattice()) {
        p.x0_units = law.to_units(x0);
        p.units.resize(n);
        long long pos = p.x0_units;
        for (std::size_t k = 0; k < n; ++k) {
            pos += law.sample_step_units(rng);
            p.units[k] = pos;
        }
        p.x0 = law.to_real(p.x0_units);
    } else {
        p.reals.resize(n);
        double pos = x0;
        for (std::size_t k = 0; k < n; ++k) {
            pos += law.sample_step_real(rng);
            p.reals[k] = pos;
        }
    }
    return p;
}

}  // namespace avoidwalk
