#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace avoidwalk {

enum class Method { CappedSum, TailInversion, Oracle };

std::string to_string(Method m);

// A Monte Carlo (or oracle) estimate with enough metadata to reproduce it.
// For oracle values `stderr_` holds the convergence-trend uncertainty
// (absolute difference between the two largest-n extrapolants), not a
// sampling error.
struct EstimateCI {
    double value = 0.0;
    double stderr_ = 0.0;
    std::uint64_t reps = 0;
    std::uint64_t cap = 0;             // trajectory cap, 0 = none
    double censored_fraction = 0.0;    // fraction of reps cut by the cap
    std::uint64_t master_seed = 0;
    Method method = Method::Oracle;
};

// Streaming mean/variance (Welford).
class RunningStat {
  public:
    void add(double x) {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }
    void merge(const RunningStat& o) {
        if (o.n_ == 0) return;
        if (n_ == 0) { *this = o; return; }
        const double na = static_cast<double>(n_), nb = static_cast<double>(o.n_);
        const double d = o.mean_ - mean_;
        mean_ += d * nb / (na + nb);
        m2_ += o.m2_ + d * d * na * nb / (na + nb);
        n_ += o.n_;
    }
    std::uint64_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double stddev() const;
    double stderr_mean() const;

  private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

double binomial_stderr(double phat, std::uint64_t n);

// One-sample KS statistic against a CDF; `sorted` must be ascending.
double ks_statistic(const std::vector<double>& sorted,
                    const std::function<double(double)>& cdf);

// Two-sample KS statistic (ties allowed; both vectors get sorted copies).
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// Asymptotic Kolmogorov survival function Q(x) = 2 sum (-1)^{k-1} e^{-2k^2x^2}.
// With ties or discrete data this is only a proxy, which is how reports
// label it.
double kolmogorov_q(double x);
double ks_p_proxy(double d, std::size_t n1, std::size_t n2);

// Total variation distance between two discrete distributions given as
// (atom, probability) pairs; atoms need not match.
double total_variation(const std::vector<std::pair<double, double>>& p,
                       const std::vector<std::pair<double, double>>& q);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

double normal_cdf(double x);

// Brownian meander marginal: P(W+(t) <= u), t in (0,1]. Closed form
// 1 - exp(-u^2/2) at t = 1, numeric quadrature of
// f_t(x) = (x/t^{3/2}) exp(-x^2/2t) erf(x/sqrt(2(1-t))) otherwise.
double meander_marginal_cdf(double t, double u);

}  // namespace avoidwalk
