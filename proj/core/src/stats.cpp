#include "avoidwalk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace avoidwalk {

std::string to_string(Method m) {
    switch (m) {
        case Method::CappedSum: return "mc-capped";
        case Method::TailInversion: return "mc-tail";
        case Method::Oracle: return "oracle";
    }
    return "unknown";
}

double RunningStat::stddev() const { return std::sqrt(variance()); }

double RunningStat::stderr_mean() const {
    return n_ > 0 ? stddev() / std::sqrt(static_cast<double>(n_)) : 0.0;
}

double binomial_stderr(double phat, std::uint64_t n) {
    if (n == 0) return 0.0;
    return std::sqrt(std::max(phat * (1.0 - phat), 0.0) / static_cast<double>(n));
}

double ks_statistic(const std::vector<double>& sorted,
                    const std::function<double(double)>& cdf) {
    const std::size_t n = sorted.size();
    if (n == 0) throw std::invalid_argument("ks_statistic: empty sample");
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = cdf(sorted[i]);
        const double lo = static_cast<double>(i) / static_cast<double>(n);
        const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
        d = std::max(d, std::max(hi - f, f - lo));
    }
    return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double kolmogorov_q(double x) {
    if (x <= 0.0) return 1.0;
    double q = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = 2.0 * std::exp(-2.0 * k * k * x * x);
        q += (k % 2 == 1) ? term : -term;
        if (term < 1e-16) break;
    }
    return std::clamp(q, 0.0, 1.0);
}

double ks_p_proxy(double d, std::size_t n1, std::size_t n2) {
    const double ne = static_cast<double>(n1) * static_cast<double>(n2) /
                      static_cast<double>(n1 + n2);
    return kolmogorov_q(std::sqrt(ne) * d);
}

double total_variation(const std::vector<std::pair<double, double>>& p,
                       const std::vector<std::pair<double, double>>& q) {
    std::map<double, double> diff;
    for (const auto& [a, w] : p) diff[a] += w;
    for (const auto& [a, w] : q) diff[a] -= w;
    double tv = 0.0;
    for (const auto& [a, w] : diff) tv += std::abs(w);
    return 0.5 * tv;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line: need >= 2 matching points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) { sx += x[i]; sy += y[i]; }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double meander_marginal_cdf(double t, double u) {
    if (t <= 0.0 || t > 1.0) throw std::invalid_argument("meander_marginal_cdf: t in (0,1]");
    if (u <= 0.0) return 0.0;
    if (t == 1.0) return 1.0 - std::exp(-0.5 * u * u);
    const auto density = [t](double x) {
        return x / std::pow(t, 1.5) * std::exp(-x * x / (2.0 * t)) *
               std::erf(x / std::sqrt(2.0 * (1.0 - t)));
    };
    // composite Simpson, fine enough for test tolerances well below 1e-6
    const int steps = 2000;
    const double h = u / steps;
    double acc = density(0.0) + density(u);
    for (int i = 1; i < steps; ++i) acc += density(i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return std::min(1.0, acc * h / 3.0);
}

}  // namespace avoidwalk
