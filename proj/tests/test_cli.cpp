// Exercises the installed CLI end to end; the binary path arrives via the
// XMC_CLI environment variable set by ctest.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "test_helpers.hpp"

namespace {

namespace fs = std::filesystem;

std::string cli() {
    const char* path = std::getenv("XMC_CLI");
    REQUIRE_MESSAGE(path != nullptr, "XMC_CLI must point at the CLI binary");
    return path;
}

int run_cli(const std::string& args) {
    const std::string cmd = cli() + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

} // namespace

using xmc::test::TempDir;
using xmc::test::read_file;
using xmc::test::write_file;

TEST_CASE("cli exit codes") {
    TempDir dir("cli");

    SUBCASE("no subcommand is a usage error (1)") { CHECK(run_cli("") == 1); }
    SUBCASE("unknown option is a usage error (1)") { CHECK(run_cli("synth --bogus 1") == 1); }
    SUBCASE("missing input file is a data error (2)") {
        CHECK(run_cli("train --model rf --data " + dir.file("absent.csv") + " --out " +
                      dir.file("m.json")) == 2);
    }
    SUBCASE("diverging optimizer is a numeric error (3)") {
        CHECK(run_cli("synth --rows 12 --drift 1 --seed 1 --out " + dir.file("d.csv")) == 0);
        write_file(dir.file("lr.json"), R"({"epochs": 300, "step": 1e18})");
        CHECK(run_cli("train --model lr --data " + dir.file("d.csv") + " --config " +
                      dir.file("lr.json") + " --out " + dir.file("m.json")) == 3);
    }
    SUBCASE("help exits zero") { CHECK(run_cli("--help") == 0); }
}

TEST_CASE("cli train/evaluate/explain chain") {
    TempDir dir("clichain");
    REQUIRE(run_cli("synth --rows 25 --drift 1.5 --seed 3 --out " + dir.file("d.csv")) == 0);
    write_file(dir.file("rf.json"), R"({"n_estimators": 8, "max_features": -1})");
    REQUIRE(run_cli("train --model rf --data " + dir.file("d.csv") + " --config " +
                    dir.file("rf.json") + " --seed 3 --out " + dir.file("m.json")) == 0);
    CHECK(run_cli("evaluate --model " + dir.file("m.json") + " --data " + dir.file("d.csv") +
                  " --out " + dir.file("metrics.json")) == 0);
    CHECK(run_cli("explain --model " + dir.file("m.json") + " --data " + dir.file("d.csv") +
                  " --row 0 --samples 100 --topk 5 --seed 3 --out " + dir.file("e.json")) == 0);
    CHECK(run_cli("importance --model " + dir.file("m.json") + " --out " + dir.file("imp.json")) ==
          0);
    CHECK(run_cli("factsheet --r2 0.5 --out " + dir.file("fs.json") + " --text " +
                  dir.file("fs.txt")) == 0);
    CHECK(read_file(dir.file("fs.txt")).find("U1 Soundness") != std::string::npos);

    SUBCASE("explain output is reproducible across invocations") {
        REQUIRE(run_cli("explain --model " + dir.file("m.json") + " --data " + dir.file("d.csv") +
                        " --row 4 --samples 100 --seed 9 --out " + dir.file("e1.json")) == 0);
        REQUIRE(run_cli("explain --model " + dir.file("m.json") + " --data " + dir.file("d.csv") +
                        " --row 4 --samples 100 --seed 9 --out " + dir.file("e2.json")) == 0);
        CHECK(read_file(dir.file("e1.json")) == read_file(dir.file("e2.json")));
    }
    SUBCASE("importance-lime aggregates a directory of explanations") {
        fs::create_directories(dir.file("expl"));
        for (int r = 0; r < 3; ++r) {
            REQUIRE(run_cli("explain --model " + dir.file("m.json") + " --data " +
                            dir.file("d.csv") + " --row " + std::to_string(r) +
                            " --samples 100 --seed 3 --out " + dir.file("expl") + "/r" +
                            std::to_string(r) + ".json") == 0);
        }
        CHECK(run_cli("importance-lime --explanations " + dir.file("expl") + " --out " +
                      dir.file("agg.json")) == 0);
    }
    SUBCASE("topk-retrain runs from the command line") {
        CHECK(run_cli("topk-retrain --model rf --data " + dir.file("d.csv") +
                      " --features Q4_1,Q18,Q19 --params " + dir.file("rf.json") +
                      " --seed 3 --out " + dir.file("retrain.json")) == 0);
    }
}
