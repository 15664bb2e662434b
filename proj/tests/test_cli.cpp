#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(VERIBOND_CLI_PATH) + " " + args;
    const int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("veribond_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("collusion table check passes against the embedded reference") {
    CHECK(run("collusion-table --check > /dev/null") == 0);
}

TEST_CASE("capacity table check passes against the embedded reference") {
    CHECK(run("capacity-table --check > /dev/null") == 0);
}

TEST_CASE("ratios at or above one half are rejected") {
    CHECK(run("collusion-table --ratios 0.6 2> /dev/null") == 1);
    CHECK(run("collusion-table --ratios 0.5 2> /dev/null") == 1);
}

TEST_CASE("zero juror availability is rejected") {
    CHECK(run("capacity-table --posts 1000 --ratio 1/100 --panel 21 --hours 1 --avail 0/1 "
              "2> /dev/null") == 1);
}

TEST_CASE("unknown subcommands and missing arguments fail with exit 1") {
    CHECK(run("frobnicate 2> /dev/null") == 1);
    CHECK(run("min-panel 2> /dev/null") == 1);
}

TEST_CASE("min-panel prints a small panel for a loose cap") {
    CHECK(run("min-panel --ratio 0.05 --epsilon 0.001 > /dev/null") == 0);
}

TEST_CASE("simulate produces identical bytes for identical seeds") {
    const fs::path a = scratch_dir("sim_a");
    const fs::path b = scratch_dir("sim_b");
    REQUIRE(run("simulate --bundled all-honest --out " + a.string() +
                " --verify-replay > /dev/null") == 0);
    REQUIRE(run("simulate --bundled all-honest --out " + b.string() +
                " --verify-replay > /dev/null") == 0);
    CHECK(slurp(a / "metrics.json") == slurp(b / "metrics.json"));
    CHECK(slurp(a / "metrics.csv") == slurp(b / "metrics.csv"));
    CHECK(slurp(a / "events.jsonl") == slurp(b / "events.jsonl"));
    CHECK(!slurp(a / "metrics.json").empty());

    const fs::path c = scratch_dir("sim_c");
    REQUIRE(run("simulate --bundled all-honest --seed 777 --out " + c.string() +
                " > /dev/null") == 0);
    CHECK(slurp(a / "metrics.json") != slurp(c / "metrics.json"));
}

TEST_CASE("the seed environment variable overrides the config seed") {
    const fs::path a = scratch_dir("env_a");
    const fs::path b = scratch_dir("env_b");
    REQUIRE(run("simulate --bundled all-honest --seed 777 --out " + a.string() +
                " > /dev/null") == 0);
    REQUIRE(std::system(("VERACITY_SEED=777 " + std::string(VERIBOND_CLI_PATH) +
                         " simulate --bundled all-honest --out " + b.string() +
                         " > /dev/null")
                            .c_str()) == 0);
    CHECK(slurp(a / "metrics.json") == slurp(b / "metrics.json"));
}

TEST_CASE("a dumped config runs identically through --config") {
    const fs::path dir = scratch_dir("roundtrip");
    const fs::path cfg = dir / "scenario.json";
    REQUIRE(run("simulate --bundled all-honest --dump-config " + cfg.string() +
                " > /dev/null") == 0);
    const fs::path a = dir / "from_bundle";
    const fs::path b = dir / "from_file";
    REQUIRE(run("simulate --bundled all-honest --out " + a.string() + " > /dev/null") == 0);
    REQUIRE(run("simulate --config " + cfg.string() + " --out " + b.string() +
                " > /dev/null") == 0);
    CHECK(slurp(a / "metrics.json") == slurp(b / "metrics.json"));
    CHECK(slurp(a / "events.jsonl") == slurp(b / "events.jsonl"));
}

TEST_CASE("scenario config files are validated strictly") {
    const fs::path dir = scratch_dir("cfg");
    const fs::path cfg = dir / "scenario.json";
    {
        std::ofstream os(cfg);
        os << R"({"seed": 1, "contests": 2, "mystery_field": true})";
    }
    CHECK(run("simulate --config " + cfg.string() + " 2> /dev/null") == 1);
    CHECK(run("simulate --config " + (dir / "missing.json").string() + " 2> /dev/null") == 1);
}

TEST_CASE("table outputs are deterministic across runs") {
    const fs::path dir = scratch_dir("tables");
    REQUIRE(run("collusion-table --format csv --out " + (dir / "t1.csv").string() +
                " > /dev/null") == 0);
    REQUIRE(run("collusion-table --format csv --out " + (dir / "t2.csv").string() +
                " > /dev/null") == 0);
    CHECK(slurp(dir / "t1.csv") == slurp(dir / "t2.csv"));
    REQUIRE(run("capacity-table --format json --out " + (dir / "c1.json").string() +
                " > /dev/null") == 0);
    REQUIRE(run("capacity-table --format json --out " + (dir / "c2.json").string() +
                " > /dev/null") == 0);
    CHECK(slurp(dir / "c1.json") == slurp(dir / "c2.json"));
}

TEST_CASE("built-in verification suite passes") {
    CHECK(run("verify > /dev/null") == 0);
}
