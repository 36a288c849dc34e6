#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace avoidwalk {

// One named experiment run: fully serializable, and re-running an identical
// config (any worker count) reproduces every emitted byte.
struct ExperimentConfig {
    std::string experiment;            // tail harmonic ladder contraction
                                       // conditioned doob gap oracle ratio
    std::string law = "srw";
    std::string set = "points{0}";
    double x = 1.0;
    std::uint64_t n = 0;               // 0 -> per-experiment default
    std::vector<std::uint64_t> n_grid;
    std::uint64_t reps = 0;
    std::uint64_t cap = 0;
    std::string bn_rule = "cbrt";      // cbrt | sqrt | const:<v>
    std::uint64_t seed = 1;
    unsigned workers = 0;              // 0 -> hardware concurrency
    std::string out = "out";
    std::uint64_t k = 3;               // doob joint-marginal size
    std::vector<double> x_grid;        // contraction grid
    bool spool = false;                // conditioned: write binary path trace

    std::string canonical_json() const;
    std::uint64_t hash() const;        // FNV-1a of canonical_json()

    static ExperimentConfig from_json_text(const std::string& text);
};

inline constexpr int kExitPass = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitCheckFailed = 2;

// Runs the experiment, writes <out>/summary.json plus CSV data files, and
// prints one line per acceptance check. Returns kExitPass or
// kExitCheckFailed; configuration/runtime errors throw.
int run_experiment(const ExperimentConfig& config);

std::uint64_t resolve_bn(const std::string& rule, std::uint64_t n);

}  // namespace avoidwalk
