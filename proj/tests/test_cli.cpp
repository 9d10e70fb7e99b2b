#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "modsym/report.hpp"

using namespace modsym;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(MODSYM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("cli: spectral run emits a reproducible bundle") {
    REQUIRE(run_cli("--outdir /tmp/modsym-out --label a spectral --level 1 --nodes 24 --m-max 512") == 0);
    REQUIRE(run_cli("--outdir /tmp/modsym-out --label b spectral --level 1 --nodes 24 --m-max 512") == 0);
    auto ra = slurp("/tmp/modsym-out/spectral-a/report.json");
    auto rb = slurp("/tmp/modsym-out/spectral-b/report.json");
    CHECK(!ra.empty());
    CHECK(ra == rb);  // byte-stable replay
    json j = json::parse(ra);
    CHECK(std::abs(j["lambda"][0].get<double>() - 1.0) < 1e-9);
    json m = json::parse(slurp("/tmp/modsym-out/spectral-a/manifest.json"));
    CHECK(m["command"] == "spectral");
    CHECK(m["output_digests"].contains("report.json"));
}

TEST_CASE("cli: clt bundle contains histogram artifacts") {
    REQUIRE(run_cli("--outdir /tmp/modsym-out --label c clt --level 2 --max-denominator 400 "
                    "--direction ones") == 0);
    CHECK(!slurp("/tmp/modsym-out/clt-c/report.json").empty());
    CHECK(!slurp("/tmp/modsym-out/clt-c/histogram.csv").empty());
    CHECK(slurp("/tmp/modsym-out/clt-c/histogram.svg").find("<svg") == 0);
}

TEST_CASE("cli: exit codes for config errors and resource bounds") {
    CHECK(run_cli("clt --level 2 --direction 1,2,3") == 2);          // wrong dimension
    CHECK(run_cli("spectral --level 20001") == 2);                   // level bound
    CHECK(run_cli("symbols --curve 1,2,3 extract") == 2);            // malformed curve
    CHECK(run_cli("key-relation --level 1 --s 0.9 --cutoff 100") == 2);  // divergent range
    CHECK(run_cli("nosuchcommand") == 2);
}

TEST_CASE("cli: symbols eval matches the library value") {
    REQUIRE(run_cli("--outdir /tmp/modsym-out --label d symbols --curve 0,-1,1,-10,-20 "
                    "--sign 1 eval --num 3 --den 11") == 0);
    json j = json::parse(slurp("/tmp/modsym-out/symbols-eval-d/report.json"));
    CHECK(j["value"].is_number_integer());
}

TEST_CASE("cli: cosets word and strict power warning") {
    CHECK(run_cli("--outdir /tmp/modsym-out --label e cosets word --level 2 --u 3 --v 0") == 0);
    json j = json::parse(slurp("/tmp/modsym-out/cosets-word-e/report.json"));
    CHECK(j["certified"] == true);
    // tiny ensemble triggers the statistical-power warning under --strict
    CHECK(run_cli("--strict --outdir /tmp/modsym-out clt --level 2 --max-denominator 40") == 5);
    CHECK(run_cli("--outdir /tmp/modsym-out clt --level 2 --max-denominator 40") == 0);
}
