#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "avoidwalk/rng.hpp"

namespace avoidwalk {

// Exact probability as a reduced fraction. Parsed inputs ("0.25", "2/5")
// stay exact so the rational DP mode can run bit-exact.
struct Fraction {
    long long num = 0;
    long long den = 1;

    static Fraction parse(const std::string& text);
    void reduce();
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

Fraction frac_add(const Fraction& a, const Fraction& b);
Fraction frac_mul(const Fraction& a, const Fraction& b);
bool frac_eq(const Fraction& a, const Fraction& b);

enum class ContinuousFamily { Gauss, UniformSym };

// A centred step distribution. Lattice laws live on lambda * Z with the
// support stored in lambda units; continuous laws are restricted to named,
// analytically centred families.
class StepLaw {
  public:
    // Empty placeholder; fill via parse()/builtins before use.
    StepLaw() = default;

    // Builtins: SRW (+-1 each 1/2), TENT (uniform on {-2,-1,1,2}),
    // SKEW (-3 w.p. 2/5, +2 w.p. 3/5), GAUSS (standard normal),
    // UNIF (uniform on [-1,1]).
    static StepLaw srw();
    static StepLaw tent();
    static StepLaw skew();
    static StepLaw gauss();
    static StepLaw unif();

    // Grammar: builtin name, or "lattice: v:p, v:p, ..." with v a decimal
    // or fraction and p a probability. Rejects nonzero mean, zero variance,
    // negative probabilities, mass not summing to one.
    static StepLaw parse(const std::string& spec);

    static StepLaw make_lattice(const std::vector<Fraction>& values,
                                const std::vector<Fraction>& probs,
                                std::string name = "lattice");

    bool is_lattice() const { return lattice_; }
    double lambda() const { return lambda_; }
    double sigma2() const { return sigma2_; }
    double sigma() const;
    // Largest |step| in real units; infinity for GAUSS.
    double max_step() const { return max_step_; }
    const std::string& name() const { return name_; }
    ContinuousFamily family() const { return family_; }

    // Lattice accessors (support ascending, in lambda units).
    const std::vector<long long>& support_units() const { return support_; }
    const std::vector<double>& probs() const { return prob_; }
    const std::vector<Fraction>& probs_exact() const { return prob_frac_; }
    long long max_step_units() const { return max_step_units_; }

    long long sample_step_units(RngStream& rng) const;
    double sample_step_real(RngStream& rng) const;

    // Law of -X_1; lattice geometry (lambda, units) preserved exactly.
    StepLaw mirrored() const;

    // Nearest lattice point, rejecting coordinates off lambda * Z.
    long long to_units(double x) const;
    double to_real(long long units) const { return static_cast<double>(units) * lambda_; }

  private:
    bool lattice_ = true;
    std::string name_;
    double lambda_ = 1.0;
    double sigma2_ = 0.0;
    double max_step_ = 0.0;
    ContinuousFamily family_ = ContinuousFamily::Gauss;

    std::vector<long long> support_;
    std::vector<double> prob_;
    std::vector<double> cum_;
    std::vector<Fraction> prob_frac_;
    long long max_step_units_ = 0;
};

// A realized trajectory S_1..S_n started at x0. Lattice paths keep exact
// integer positions in lambda units; continuous paths keep doubles.
struct Path {
    StepLaw law;
    long long x0_units = 0;
    double x0 = 0.0;
    std::vector<long long> units;
    std::vector<double> reals;

    std::size_t length() const { return law.is_lattice() ? units.size() : reals.size(); }
    bool is_lattice() const { return law.is_lattice(); }
    // position(0) == x0, position(k) == S_k
    double position(std::size_t k) const;
};

Path sample_path(const StepLaw& law, double x0, std::size_t n, RngStream& rng);

}  // namespace avoidwalk
