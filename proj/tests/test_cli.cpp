#include <catch_amalgamated.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "decoyrate/cli.hpp"
#include "decoyrate/io.hpp"

using namespace decoyrate;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinRel;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string fx(const std::string& name) { return fixture_path(name); }

std::string tmp(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("decoyrate-test-" + name)).string();
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("rate", "[cli]") {
    SECTION("87 km fixture") {
        const Run r = run({"rate", "--config", fx("params-87km-4int-eta05.toml"), "--counts", fx("counts-87km-4int-eta05.csv"), "--record"});
        REQUIRE(r.code == kExitOk);
        std::istringstream in(r.out);
        const Record rec = parse_record(in);
        REQUIRE(rec.at("label") == "counts-87km-4int-eta05");
        const double R = std::stod(rec.at("R_per_pulse"));
        REQUIRE_THAT(R, WithinRel(6.30e-5, 0.25));
        REQUIRE_THAT(std::stod(rec.at("bps")), WithinRel(39e3, 0.25));
    }
    SECTION("human table") {
        const Run r = run({"rate", "--config", fx("params-87km-4int-eta05.toml"), "--counts", fx("counts-87km-4int-eta05.csv")});
        REQUIRE(r.code == kExitOk);
        REQUIRE_THAT(r.out, ContainsSubstring("throughput"));
    }
    SECTION("zero key under --strict") {
        const std::string cfg = fx("params-87km-4int-eta05.toml");
        const std::string path = tmp("far.csv");
        REQUIRE(run({"simulate", "--config", cfg, "--distance", "300", "--expected", "--out", path}).code == kExitOk);
        REQUIRE(run({"rate", "--config", cfg, "--counts", path}).code == kExitOk);
        REQUIRE(run({"rate", "--config", cfg, "--counts", path, "--strict"}).code == kExitZeroKey);
        std::remove(path.c_str());
    }
    SECTION("data errors") {
        const Run r = run({"rate", "--config", fx("params-87km-4int-eta05.toml"), "--counts", DECOYRATE_TEST_DATA "/error-exceeds-total.csv"});
        REQUIRE(r.code == kExitData);
        REQUIRE_THAT(r.err, ContainsSubstring("(X2, X)"));
        REQUIRE(run({"rate", "--config", fx("system.toml"), "--counts", fx("counts-87km-4int-eta05.csv")}).code == kExitData);
        REQUIRE(run({"rate", "--config", fx("params-87km-3int-sym-eta05.toml"), "--counts", fx("counts-87km-4int-eta05.csv")}).code == kExitData);
        REQUIRE(run({"rate", "--config", "/nonexistent.toml", "--counts", fx("counts-87km-4int-eta05.csv")}).code == kExitData);
    }
    SECTION("usage errors") {
        REQUIRE(run({}).code == kExitUsage);
        REQUIRE(run({"rate", "--bogus"}).code == kExitUsage);
        REQUIRE(run({"rate", "--config", fx("params-87km-4int-eta05.toml")}).code == kExitUsage);
        REQUIRE(run({"rate", "--config", "a", "--counts", "b", "--theta-log-base", "3"}).code == kExitUsage);
        REQUIRE(run({"frobnicate"}).code == kExitUsage);
        REQUIRE(run({"--help"}).code == kExitOk);
    }
    SECTION("analysis switches change the result") {
        const std::vector<std::string> base{"rate", "--config", fx("params-87km-4int-eta05.toml"), "--counts", fx("counts-87km-4int-eta05.csv"), "--record"};
        auto R = [&](std::vector<std::string> extra) {
            auto a = base;
            a.insert(a.end(), extra.begin(), extra.end());
            const Run r = run(a);
            REQUIRE(r.code == kExitOk);
            std::istringstream in(r.out);
            return std::stod(parse_record(in).at("R_per_pulse"));
        };
        const double e = R({}), ten = R({"--theta-log-base", "10"});
        REQUIRE(ten > e);
        REQUIRE(R({"--theta-log-base", "e"}) == e);
    }
}

TEST_CASE("simulate", "[cli]") {
    const std::vector<std::string> args{"simulate", "--config", fx("params-87km-4int-eta05.toml"), "--distance", "87", "--seed", "7"};
    const Run a = run(args), b = run(args);
    REQUIRE(a.code == kExitOk);
    REQUIRE(a.out == b.out);
    auto other = args;
    other.back() = "8";
    REQUIRE(run(other).out != a.out);

    // piped into rate twice: same R
    const std::string path = tmp("sim7.csv");
    {
        std::ofstream f(path, std::ios::binary);
        f << a.out;
    }
    const Run r1 = run({"rate", "--config", fx("params-87km-4int-eta05.toml"), "--counts", path, "--record"});
    const Run r2 = run({"rate", "--config", fx("params-87km-4int-eta05.toml"), "--counts", path, "--record"});
    REQUIRE(r1.code == kExitOk);
    REQUIRE(r1.out == r2.out);
    std::remove(path.c_str());

    REQUIRE(run({"simulate", "--config", fx("system.toml"), "--distance", "87"}).code == kExitData);
    REQUIRE(run({"simulate", "--config", fx("params-87km-4int-eta05.toml"), "--distance", "-3"}).code == kExitUsage);
}

TEST_CASE("optimize and sweep", "[cli]") {
    const std::string rec = tmp("opt.txt"), emitted = tmp("best.toml");
    const std::vector<std::string> args{"optimize", "--distance", "100", "--variant", "3int-asym", "--seed", "3",
                                        "--starts", "4", "--eta-z", "0.1", "--eta-x", "0.05"};
    auto withOut = args;
    withOut.insert(withOut.end(), {"--out", rec, "--emit-config", emitted});
    const Run a = run(withOut);
    REQUIRE(a.code == kExitOk);
    const Run b = run(args);
    REQUIRE(slurp(rec) == b.out);
    const Record r = parse_record_file(rec);
    REQUIRE(r.at("variant") == "3int-asym");
    REQUIRE(std::stod(r.at("R_per_pulse")) > 0);
    const ParsedConfig pc = parse_config(emitted);
    REQUIRE(pc.protocol);
    REQUIRE(pc.protocol->variant == Variant::ThreeIntensityAsym);
    std::remove(rec.c_str());
    std::remove(emitted.c_str());

    const Run s = run({"sweep", "--from", "140", "--to", "160", "--step", "10", "--starts", "4", "--eta-z", "0.1",
                       "--eta-x", "0.05"});
    REQUIRE(s.code == kExitOk);
    std::istringstream in(s.out);
    std::string line;
    std::getline(in, line);
    REQUIRE(line == "distance_km,variant,R_per_pulse,bps");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    REQUIRE(rows == 9);
    REQUIRE(run({"sweep", "--from", "160", "--to", "140"}).code == kExitData);
}

TEST_CASE("compare", "[cli]") {
    std::vector<std::string> paths;
    for (const char* v : {"4int", "3int-asym", "3int-sym"}) {
        const std::string p = tmp(std::string("rep-") + v + ".txt");
        const Run r = run({"rate", "--config", fx(std::string("params-87km-") + v + "-eta05.toml"), "--counts",
                           fx(std::string("counts-87km-") + v + "-eta05.csv"), "--out", p});
        REQUIRE(r.code == kExitOk);
        paths.push_back(p);
    }
    std::vector<std::string> args{"compare"};
    args.insert(args.end(), paths.begin(), paths.end());
    const Run c = run(args);
    REQUIRE(c.code == kExitOk);
    std::istringstream in(c.out);
    std::string line;
    std::getline(in, line);
    REQUIRE(line == "label,variant,R_per_pulse,ratio_first_over_this");
    std::vector<double> R, ratio;
    while (std::getline(in, line)) {
        std::vector<std::string> f;
        std::istringstream ls(line);
        for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
        REQUIRE(f.size() == 4);
        R.push_back(std::stod(f[2]));
        ratio.push_back(std::stod(f[3]));
    }
    REQUIRE(R.size() == 3);
    REQUIRE(ratio[0] == 1.0);
    for (std::size_t i = 1; i < 3; ++i) REQUIRE_THAT(ratio[i], WithinRel(R[0] / R[i], 1e-15));
    REQUIRE(run({"compare", paths[0]}).code == kExitUsage);
    for (const auto& p : paths) std::remove(p.c_str());
}
