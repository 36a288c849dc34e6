#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "avoidwalk/experiments.hpp"

using namespace avoidwalk;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f.good());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

bool dirs_equal(const fs::path& a, const fs::path& b) {
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(a)) names.push_back(e.path().filename());
    for (const auto& n : names)
        if (slurp(a / n) != slurp(b / n)) return false;
    return true;
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("oracle experiment writes a parsable report and passes its checks") {
    ExperimentConfig cfg;
    cfg.experiment = "oracle";
    cfg.law = "srw";
    cfg.set = "points{0}";
    cfg.x = 1;
    cfg.n = 256;
    cfg.out = "test_out/oracle_a";
    cfg.seed = 5;
    CHECK(run_experiment(cfg) == kExitPass);
    CHECK(fs::exists("test_out/oracle_a/summary.json"));
    CHECK(fs::exists("test_out/oracle_a/survival.csv"));
    CHECK(fs::exists("test_out/oracle_a/survival_exact.csv"));
    const std::string s = slurp("test_out/oracle_a/summary.json");
    CHECK(s.find("\"config_hash\"") != std::string::npos);
    CHECK(s.find("xoshiro256++") != std::string::npos);
}

TEST_CASE("identical configs give byte-identical reports, any worker count") {
    ExperimentConfig cfg;
    cfg.experiment = "tail";
    cfg.law = "tent";
    cfg.set = "points{0}";
    cfg.x = 1;
    cfg.n = 512;
    cfg.seed = 9;

    cfg.workers = 1;
    cfg.out = "test_out/tail_w1";
    CHECK(run_experiment(cfg) == kExitPass);
    cfg.workers = 2;
    cfg.out = "test_out/tail_w2";
    CHECK(run_experiment(cfg) == kExitPass);
    cfg.workers = 2;
    cfg.out = "test_out/tail_w2b";
    CHECK(run_experiment(cfg) == kExitPass);

    CHECK(dirs_equal("test_out/tail_w1", "test_out/tail_w2"));
    CHECK(dirs_equal("test_out/tail_w2", "test_out/tail_w2b"));
}

TEST_CASE("config round trip through JSON keeps the hash") {
    ExperimentConfig cfg;
    cfg.experiment = "gap";
    cfg.law = "tent";
    cfg.n = 4321;
    cfg.reps = 77;
    cfg.n_grid = {10, 20};
    ExperimentConfig back = ExperimentConfig::from_json_text(cfg.canonical_json());
    CHECK(back.hash() == cfg.hash());
    CHECK(back.n == cfg.n);
    CHECK(back.n_grid == cfg.n_grid);
}

TEST_CASE("bad configs throw rather than half-run") {
    ExperimentConfig cfg;
    cfg.experiment = "nonsense";
    CHECK_THROWS(static_cast<void>(run_experiment(cfg)));
    cfg.experiment = "tail";
    cfg.law = "cauchy";
    CHECK_THROWS(static_cast<void>(run_experiment(cfg)));
    cfg.law = "gauss";
    cfg.set = "points{0}";   // empty interior for a continuous law
    CHECK_THROWS(static_cast<void>(run_experiment(cfg)));
}

TEST_CASE("a failed acceptance check exits with the dedicated code") {
    // a hundred accepted paths cannot pin a 3-step joint law to TV < 0.03
    ExperimentConfig cfg;
    cfg.experiment = "doob";
    cfg.law = "tent";
    cfg.n_grid = {200};
    cfg.reps = 100;
    cfg.out = "test_out/doob_tiny";
    cfg.seed = 3;
    CHECK(run_experiment(cfg) == kExitCheckFailed);
}

TEST_CASE("b_n rules") {
    CHECK(resolve_bn("cbrt", 1000) == 10);
    CHECK(resolve_bn("sqrt", 10000) == 100);
    CHECK(resolve_bn("const:17", 5) == 17);
    CHECK_THROWS(static_cast<void>(resolve_bn("log", 10)));
}

}  // TEST_SUITE
