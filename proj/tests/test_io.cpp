#include <catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "decoyrate/errors.hpp"
#include "decoyrate/io.hpp"
#include "oracles.hpp"

using namespace decoyrate;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinRel;

namespace {

const char* kProtocol4 = R"([protocol]
variant = "4int"
mu_z1 = 0.02
mu_z2 = 0.5
mu_x1 = 0.17
mu_x2 = 0.47
p_z1 = 0.1
p_z2 = 0.7
p_x1 = 0.1
p_x2 = 0.1
q_x = 0.2
)";

CountsTable parse_text(const std::string& s) {
    std::istringstream in(s);
    return parse_counts_stream(in);
}

std::string header = "source,basis,total,error\n";

std::string cells4() {
    return "Z1,Z,100,5\nZ1,X,10,\nZ2,Z,1000,20\nZ2,X,90,\nX1,Z,300,\nX1,X,30,2\nX2,Z,200,\nX2,X,20,1\n";
}

}  // namespace

TEST_CASE("configuration files", "[io]") {
    SECTION("system table fixture") {
        const ParsedConfig pc = parse_config(fixture_path("system.toml"));
        REQUIRE_FALSE(pc.protocol);
        REQUIRE(pc.system.darkRate == 2.5e-7);
        REQUIRE(pc.system.f == 1.14);
        REQUIRE(pc.system.eps == 1e-10);
        REQUIRE(pc.pulses == 1e10);
        REQUIRE(pc.system.etaZ == 0.10);
        REQUIRE(pc.system.etaX == 0.05);
        REQUIRE(pc.system.afterPulse == 0.01);
        REQUIRE(pc.system.deadTime == 5e-10);
        REQUIRE(pc.system.lossCoeff == 0.2);
        REQUIRE(pc.system.extraBobLoss == 2.6);
        REQUIRE(pc.system.clockRate == 625e6);
    }
    SECTION("well-formed protocol") {
        const ParsedConfig pc = parse_config_text(kProtocol4);
        REQUIRE(pc.protocol);
        REQUIRE(pc.protocol->variant == Variant::FourIntensity);
        REQUIRE(pc.protocol->qZ == 0.8);
        REQUIRE(pc.protocol->mu_of(Source::X2) == 0.47);
    }
    SECTION("probabilities summing to 0.9") {
        std::string t = kProtocol4;
        t.replace(t.find("p_z2 = 0.7"), 10, "p_z2 = 0.6");
        REQUIRE_THROWS_WITH(parse_config_text(t), ContainsSubstring("simplex"));
    }
    SECTION("sums within the rounding tolerance are rescaled") {
        std::string t = kProtocol4;
        t.replace(t.find("p_z2 = 0.7"), 10, "p_z2 = 0.701");
        const ParsedConfig pc = parse_config_text(t);
        double sum = 0;
        for (Source s : kSignalSources) sum += pc.protocol->p_of(s);
        REQUIRE_THAT(sum, WithinRel(1.0, 1e-15));
    }
    SECTION("3-intensity without the vacuum probability") {
        const std::string t = R"([protocol]
variant = "3int-asym"
mu_z1 = 0.127
mu_z2 = 0.524
mu_x1 = 0.127
mu_x2 = 0.524
p_z1 = 0.069
p_z2 = 0.421
p_x1 = 0.069
p_x2 = 0.421
q_x = 0.5
)";
        REQUIRE_THROWS_AS(parse_config_text(t), DataError);
        REQUIRE_THROWS_WITH(parse_config_text(t), ContainsSubstring("p_vac"));
    }
    SECTION("unknown key, with its line") {
        const std::string t = std::string(kProtocol4) + "\n[system]\nfoo = 1\n";
        try {
            parse_config_text(t);
            FAIL("accepted an unknown key");
        } catch (const ParseError& e) {
            REQUIRE(e.line() == 14);
            REQUIRE_THAT(e.what(), ContainsSubstring("foo"));
        }
    }
    SECTION("unknown section and duplicate key") {
        REQUIRE_THROWS_AS(parse_config_text("[bogus]\nx = 1\n"), ParseError);
        REQUIRE_THROWS_AS(parse_config_text("[system]\nf = 1.1\nf = 1.2\n"), ParseError);
        REQUIRE_THROWS_AS(parse_config_text("[system]\nf = abc\n"), ParseError);
    }
}

TEST_CASE("count tables", "[io]") {
    SECTION("fixture reproduces the measured cells") {
        const CountsTable t = parse_counts(fixture_path("counts-87km-4int-eta05.csv"));
        REQUIRE(t.total(Source::X2, Basis::X) == 5709.1);
        REQUIRE(t.errors(Source::X2, Basis::X) == 143.9);
        REQUIRE_FALSE(t.cell(Source::X2, Basis::Z).error);
        REQUIRE(t.meta.distanceKm == 87.0);
        REQUIRE(t.meta.variant == Variant::FourIntensity);
        REQUIRE(t.meta.label == "counts-87km-4int-eta05");
    }
    SECTION("error above total") {
        std::string s = header + cells4();
        s.replace(s.find("X2,X,20,1"), 9, "X2,X,100,200");
        REQUIRE_THROWS_WITH(parse_text(s), ContainsSubstring("(X2, X)"));
    }
    SECTION("missing and duplicate cells are named") {
        std::string s = header + cells4();
        const std::string missing = s.substr(0, s.find("X1,Z"));
        REQUIRE_THROWS_WITH(parse_text(missing + "X1,X,30,2\nX2,Z,200,\nX2,X,20,1\n"), ContainsSubstring("(X1, Z)"));
        REQUIRE_THROWS_WITH(parse_text(s + "Z1,X,11,\n"), ContainsSubstring("duplicate"));
    }
    SECTION("bad header, source, basis and number") {
        REQUIRE_THROWS_AS(parse_text("source,basis,total\n"), ParseError);
        REQUIRE_THROWS_AS(parse_text(header + "Z3,Z,1,0\n"), ParseError);
        REQUIRE_THROWS_AS(parse_text(header + "Z1,Y,1,0\n"), ParseError);
        REQUIRE_THROWS_AS(parse_text(header + "Z1,Z,1e,0\n"), ParseError);
        REQUIRE_THROWS_AS(parse_text(header + "Z1,Z,-1,0\n"), DataError);
    }
    SECTION("round trip") {
        for (const char* f : {"counts-87km-4int-eta05.csv", "counts-87km-3int-sym-eta05.csv", "counts-62km-3int-asym-eta01.csv"}) {
            const CountsTable t = parse_counts(fixture_path(f));
            std::ostringstream out;
            write_counts_csv(out, t);
            const CountsTable u = parse_text(out.str());
            REQUIRE(u == t);
            REQUIRE(u.meta.label == t.meta.label);
            std::ostringstream again;
            write_counts_csv(again, u);
            REQUIRE(again.str() == out.str());
        }
    }
}

TEST_CASE("number formatting", "[io]") {
    REQUIRE(format_double(5709.1) == "5709.1");
    REQUIRE(format_double(6.3e-5) == "6.3e-05");
    REQUIRE(format_double(0.1) == "0.1");
    REQUIRE(format_sci(6.3012e-5) == "6.301e-05");
    REQUIRE(format_sci(39383.2, 2) == "3.94e+04");
    REQUIRE(std::stod(format_double(1.0 / 3)) == 1.0 / 3);
}

TEST_CASE("report records", "[io]") {
    const oracle::Loaded l = oracle::load("params-87km-4int-eta05.toml", "counts-87km-4int-eta05.csv");
    const KeyRateReport rep = analyze(l.counts, l.cfg, l.sys);
    std::ostringstream out;
    write_report_record(out, rep, "x");
    std::istringstream in(out.str());
    const Record r = parse_record(in);
    REQUIRE(r.at("label") == "x");
    REQUIRE(r.at("variant") == "4int");
    REQUIRE(std::stod(r.at("R_per_pulse")) == rep.R);
    REQUIRE(std::stod(r.at("bps")) == rep.bps);
    std::ostringstream table;
    write_report_table(table, rep, "x");
    REQUIRE_THAT(table.str(), ContainsSubstring("R"));
}

TEST_CASE("protocol sections round-trip", "[io]") {
    const oracle::Loaded l = oracle::load("params-62km-3int-asym-eta01.toml", "counts-62km-3int-asym-eta01.csv");
    std::ostringstream out;
    write_protocol_toml(out, l.cfg);
    const ParsedConfig pc = parse_config_text(out.str());
    REQUIRE(pc.protocol);
    REQUIRE(pc.protocol->variant == l.cfg.variant);
    REQUIRE(pc.protocol->mu == l.cfg.mu);
    REQUIRE(pc.protocol->p == l.cfg.p);
    REQUIRE(pc.protocol->qX == l.cfg.qX);
    REQUIRE(pc.protocol->pulses == l.cfg.pulses);
}

TEST_CASE("every shipped fixture", "[io][golden]") {
    const std::filesystem::path dir = std::filesystem::path(fixture_path("system.toml")).parent_path();
    int toml = 0, csv = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        const std::string name = e.path().filename().string();
        INFO(name);
        if (e.path().extension() == ".toml") {
            REQUIRE_NOTHROW(parse_config(e.path().string()));
            ++toml;
        } else if (e.path().extension() == ".csv") {
            const CountsTable t = parse_counts(e.path().string());
            REQUIRE(t.meta.variant);
            REQUIRE_NOTHROW(t.validate(t.meta.variant));
            REQUIRE(t.meta.label + ".csv" == name);
            ++csv;
        }
    }
    REQUIRE(toml == 19);
    REQUIRE(csv == 18);
    // each counts table against its configuration, runs through the analysis
    for (const auto* tab : {&oracle::reference_eta05(), &oracle::reference_eta01()})
        for (const oracle::ReferenceCell& c : *tab) {
            INFO(c.counts);
            const oracle::Loaded l = oracle::load(c.config, c.counts);
            REQUIRE(l.counts.meta.variant == l.cfg.variant);
            REQUIRE_NOTHROW(analyze(l.counts, l.cfg, l.sys));
        }
}
