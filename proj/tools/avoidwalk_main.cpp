#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "avoidwalk/experiments.hpp"

namespace {

constexpr const char* kLawHelp =
    "step law: srw | tent | skew | gauss | unif | 'lattice: v:p, v:p, ...' "
    "(v decimal or fraction, p probability; mean must be exactly 0)";
constexpr const char* kSetHelp =
    "avoid set: interval(a,b[,open|closed|lopen|ropen]) | points{p1,p2,...}; "
    "unions joined with '+'";

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"avoidwalk: numerical experiments on random walks avoiding bounded sets"};
    app.require_subcommand(0, 1);

    avoidwalk::ExperimentConfig cfg;
    std::string config_path;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--law", cfg.law, kLawHelp);
        sub->add_option("--set", cfg.set, kSetHelp);
        sub->add_option("--x", cfg.x, "start position (on the lattice for lattice laws)");
        sub->add_option("--n", cfg.n, "horizon / path length (0 = experiment default)");
        sub->add_option("--n-grid", cfg.n_grid, "explicit n grid");
        sub->add_option("--reps", cfg.reps, "replications or accepted-path target");
        sub->add_option("--cap", cfg.cap, "trajectory cap for capped estimators");
        sub->add_option("--bn", cfg.bn_rule, "b_n rule: cbrt | sqrt | const:<v>");
        sub->add_option("--seed", cfg.seed, "master seed (64-bit)");
        sub->add_option("--workers", cfg.workers, "worker threads (0 = hardware)");
        sub->add_option("--out", cfg.out, "output directory");
        sub->add_option("--k", cfg.k, "joint-marginal size (doob)");
        sub->add_option("--x-grid", cfg.x_grid, "grid of starts (contraction)");
        sub->add_flag("--spool", cfg.spool, "spool accepted paths to a binary trace");
    };

    for (const char* name : {"tail", "harmonic", "ladder", "contraction", "conditioned",
                             "doob", "gap", "oracle", "ratio"}) {
        CLI::App* sub = app.add_subcommand(name);
        add_common(sub);
        sub->callback([&cfg, name] { cfg.experiment = name; });
    }
    app.add_option("--config", config_path, "load the full config from a JSON file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) throw std::runtime_error("cannot open config file " + config_path);
            std::stringstream ss;
            ss << f.rdbuf();
            cfg = avoidwalk::ExperimentConfig::from_json_text(ss.str());
        }
        if (cfg.experiment.empty()) {
            std::fprintf(stderr, "error: no experiment selected (subcommand or --config)\n");
            return avoidwalk::kExitError;
        }
        return avoidwalk::run_experiment(cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return avoidwalk::kExitError;
    }
}
