#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

int run_cli(const std::string& args, const std::string& log) {
    const std::string cmd = std::string(SNSQKD_CLI_PATH) + " " + args + " >" + log + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string data(const std::string& name) { return std::string(SNSQKD_DATA_DIR) + "/" + name; }

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("simulate writes deterministic reports") {
    TempDir tmp("snsqkd_cli_sim");
    const std::string out1 = (tmp.path / "a").string();
    const std::string out2 = (tmp.path / "b").string();
    const std::string log = (tmp.path / "log.txt").string();

    REQUIRE(run_cli("simulate --config " + data("minimal.json") + " --out " + out1, log) == 0);
    REQUIRE(run_cli("simulate --config " + data("minimal.json") + " --out " + out2, log) == 0);

    const std::string csv1 = slurp(fs::path(out1) / "tallies.csv");
    const std::string csv2 = slurp(fs::path(out2) / "tallies.csv");
    CHECK(!csv1.empty());
    CHECK(csv1 == csv2);  // byte-identical
    CHECK(csv1.find("# config:") == 0);
    CHECK(fs::exists(fs::path(out1) / "simulation_report.json"));

    SUBCASE("seed override changes the tallies") {
        const std::string out3 = (tmp.path / "c").string();
        REQUIRE(run_cli("simulate --config " + data("minimal.json") + " --seed 8 --out " + out3,
                        log) == 0);
        CHECK(slurp(fs::path(out3) / "tallies.csv") != csv1);
    }
}

TEST_CASE("config validation failures exit 1 and name the problem") {
    TempDir tmp("snsqkd_cli_bad");
    const std::string log = (tmp.path / "log.txt").string();

    CHECK(run_cli("simulate --config " + data("bad_q.json"), log) == 1);
    CHECK(slurp(log).find("q") != std::string::npos);

    CHECK(run_cli("simulate --config " + data("unknown_field.json"), log) == 1);
    CHECK(slurp(log).find("muu") != std::string::npos);

    SUBCASE("parse errors carry a line anchor") {
        const fs::path broken = tmp.path / "broken.json";
        std::ofstream(broken) << "{\n  \"protocol\": {\n";
        CHECK(run_cli("simulate --config " + broken.string(), log) == 1);
        CHECK(slurp(log).find("line") != std::string::npos);
    }
}

TEST_CASE("curve emits an ordered csv") {
    TempDir tmp("snsqkd_cli_curve");
    const std::string out = (tmp.path / "out").string();
    const std::string log = (tmp.path / "log.txt").string();
    REQUIRE(run_cli("curve --config " + data("sweep.json") + " --out " + out, log) == 0);
    const std::string csv = slurp(fs::path(out) / "curve.csv");
    CHECK(csv.find("L_km,e_a,q,mu,lambda,E_Z,e_ph_upper,rate_per_window,log10_rate") !=
          std::string::npos);
    // 2 e_a values x 3 distances = 6 data rows
    int rows = 0;
    for (char c : csv) rows += c == '\n';
    CHECK(rows == 8);  // echo + header + 6
}

TEST_CASE("verify succeeds at adequate cutoff and fails loudly below it") {
    TempDir tmp("snsqkd_cli_verify");
    const std::string out = (tmp.path / "out").string();
    const std::string log = (tmp.path / "log.txt").string();
    CHECK(run_cli("verify --config " + data("verify_small.json") + " --out " + out, log) == 0);
    CHECK(slurp(log).find("all identities pass") != std::string::npos);
    CHECK(fs::exists(fs::path(out) / "oracle_report.json"));

    CHECK(run_cli("verify --config " + data("verify_lowcutoff.json") + " --out " + out, log) == 1);
    CHECK(slurp(log).find("tail mass") != std::string::npos);
}

TEST_CASE("optimize reports a positive short-range rate") {
    TempDir tmp("snsqkd_cli_opt");
    const std::string out = (tmp.path / "out").string();
    const std::string log = (tmp.path / "log.txt").string();
    REQUIRE(run_cli("optimize --config " + data("minimal.json") + " --out " + out, log) == 0);
    const std::string report = slurp(fs::path(out) / "optimize_report.json");
    CHECK(report.find("\"rate_per_window\"") != std::string::npos);
    CHECK(slurp(log).find("rate = ") != std::string::npos);
}
