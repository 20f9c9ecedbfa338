#include "decoyrate/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "decoyrate/channel.hpp"
#include "decoyrate/errors.hpp"
#include "decoyrate/io.hpp"

namespace decoyrate {

namespace {

struct AnalysisFlags {
    std::string logBase = "e";
    std::string chernoffArg = "counts";
    std::string errorDelta = "cell";
    std::string thetaCounts = "detections";

    void add_to(CLI::App& app) {
        app.add_option("--theta-log-base", logBase, "logarithm base in the sampling correction")
            ->check(CLI::IsMember({"e", "2", "10"}));
        app.add_option("--chernoff-arg", chernoffArg, "argument of the Chernoff deviation")
            ->check(CLI::IsMember({"paper-literal", "counts"}));
        app.add_option("--error-delta", errorDelta, "deviation used for the error-yield upper bound")
            ->check(CLI::IsMember({"cell", "errors"}));
        app.add_option("--theta-counts", thetaCounts, "counts entering the sampling correction")
            ->check(CLI::IsMember({"detections", "pulses"}));
    }

    AnalysisOptions options() const {
        AnalysisOptions o;
        o.thetaLogBase = logBase == "e" ? LogBase::E : logBase == "2" ? LogBase::Two : LogBase::Ten;
        o.chernoffArg = chernoffArg == "counts" ? ChernoffArg::Counts : ChernoffArg::Product;
        o.errorDelta = errorDelta == "cell" ? ErrorDelta::Cell : ErrorDelta::Errors;
        o.thetaCounts = thetaCounts == "pulses" ? ThetaCounts::Pulses : ThetaCounts::Detections;
        return o;
    }
};

// Writes to --out when given, otherwise to the command's stdout.
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) throw DataError("cannot write " + path);
        }
    }
    std::ostream& get(std::ostream& fallback) { return file_.is_open() ? file_ : fallback; }

private:
    std::ofstream file_;
};

std::string default_label(const std::string& path) {
    auto slash = path.find_last_of('/');
    std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
    auto dot = base.find_last_of('.');
    return dot == std::string::npos ? base : base.substr(0, dot);
}

SystemModel system_from(const std::string& configPath, std::optional<double> etaZ, std::optional<double> etaX) {
    SystemModel sys = configPath.empty() ? SystemModel{} : parse_config(configPath).system;
    if (etaZ) sys.etaZ = *etaZ;
    if (etaX) sys.etaX = *etaX;
    sys.validate();
    return sys;
}

Variant variant_from(const std::string& s) {
    auto v = parse_variant(s);
    if (!v) throw DataError("unknown variant '" + s + "'");
    return *v;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Finite-key decoy-state BB84 key rates", "decoyrate"};
    app.require_subcommand(1);

    // rate
    auto* rate = app.add_subcommand("rate", "key rate from a configuration and observed counts");
    std::string rConfig, rCounts, rOut, rLabel;
    bool rStrict = false, rRecord = false;
    AnalysisFlags rFlags;
    rate->add_option("--config", rConfig, "config with [protocol] and [system]")->required();
    rate->add_option("--counts", rCounts, "counts CSV, '-' for stdin")->required();
    rate->add_option("--out", rOut, "write the key = value record here");
    rate->add_option("--label", rLabel, "label stored in the record");
    rate->add_flag("--strict", rStrict, "exit with status 3 when the key rate is zero");
    rate->add_flag("--record", rRecord, "print the record instead of the table");
    rFlags.add_to(*rate);

    // simulate
    auto* sim = app.add_subcommand("simulate", "counts table for a configuration at a distance");
    std::string sConfig, sOut, sLabel;
    double sDistance = 0;
    std::uint64_t sSeed = 1;
    std::optional<double> sEtaZ, sEtaX;
    bool sExpected = false;
    sim->add_option("--config", sConfig, "config with [protocol] (and optional [system])")->required();
    sim->add_option("--distance", sDistance, "fiber length in km")->required()->check(CLI::NonNegativeNumber);
    sim->add_option("--seed", sSeed, "sampling seed");
    sim->add_option("--eta-z", sEtaZ, "Z detector efficiency")->check(CLI::Range(0.0, 1.0));
    sim->add_option("--eta-x", sEtaX, "X detector efficiency")->check(CLI::Range(0.0, 1.0));
    sim->add_option("--label", sLabel, "label written to the CSV metadata");
    sim->add_flag("--expected", sExpected, "emit expected counts without sampling");
    sim->add_option("--out", sOut, "output CSV");

    // optimize
    auto* opt = app.add_subcommand("optimize", "search protocol parameters for one distance");
    std::string oConfig, oOut, oVariant = "4int", oEmit;
    double oDistance = 0;
    std::uint64_t oSeed = 1;
    int oStarts = 32;
    std::optional<double> oEtaZ, oEtaX;
    AnalysisFlags oFlags;
    opt->add_option("--config", oConfig, "config supplying [system]");
    opt->add_option("--eta-z", oEtaZ, "Z detector efficiency")->check(CLI::Range(0.0, 1.0));
    opt->add_option("--eta-x", oEtaX, "X detector efficiency")->check(CLI::Range(0.0, 1.0));
    opt->add_option("--distance", oDistance, "fiber length in km")->required()->check(CLI::NonNegativeNumber);
    opt->add_option("--variant", oVariant, "protocol variant")->check(CLI::IsMember({"4int", "3int-asym", "3int-sym"}));
    opt->add_option("--seed", oSeed, "seed for the initial design");
    opt->add_option("--starts", oStarts, "number of Latin-hypercube starts")->check(CLI::PositiveNumber);
    opt->add_option("--out", oOut, "write the record here");
    opt->add_option("--emit-config", oEmit, "write the best [protocol] section here");
    oFlags.add_to(*opt);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "optimized key rate of every variant over a distance range");
    std::string wConfig, wOut;
    double wFrom = 0, wTo = 0, wStep = 10;
    std::uint64_t wSeed = 1;
    int wStarts = 32;
    std::optional<double> wEtaZ, wEtaX;
    std::vector<std::string> wVariants{"4int", "3int-asym", "3int-sym"};
    AnalysisFlags wFlags;
    sweep->add_option("--config", wConfig, "config supplying [system]");
    sweep->add_option("--eta-z", wEtaZ, "Z detector efficiency")->check(CLI::Range(0.0, 1.0));
    sweep->add_option("--eta-x", wEtaX, "X detector efficiency")->check(CLI::Range(0.0, 1.0));
    sweep->add_option("--from", wFrom, "first distance in km")->required()->check(CLI::NonNegativeNumber);
    sweep->add_option("--to", wTo, "last distance in km")->required()->check(CLI::NonNegativeNumber);
    sweep->add_option("--step", wStep, "distance step in km")->check(CLI::PositiveNumber);
    sweep->add_option("--seed", wSeed, "seed for the initial designs");
    sweep->add_option("--starts", wStarts, "Latin-hypercube starts per point")->check(CLI::PositiveNumber);
    sweep->add_option("--variant", wVariants, "restrict to these variants")
        ->check(CLI::IsMember({"4int", "3int-asym", "3int-sym"}));
    sweep->add_option("--out", wOut, "output CSV");
    wFlags.add_to(*sweep);

    // compare
    auto* cmp = app.add_subcommand("compare", "rate ratios of saved reports against the first one");
    std::vector<std::string> cReports;
    std::string cOut;
    cmp->add_option("reports", cReports, "report records written by 'rate --out'")->required()->expected(2, -1);
    cmp->add_option("--out", cOut, "output CSV");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }

    try {
        if (*rate) {
            const ParsedConfig pc = parse_config(rConfig);
            if (!pc.protocol) throw DataError(rConfig + " has no [protocol] variant");
            CountsTable counts = parse_counts(rCounts);
            const KeyRateReport rep = analyze(counts, *pc.protocol, pc.system, rFlags.options());
            std::string label = !rLabel.empty() ? rLabel : !counts.meta.label.empty() ? counts.meta.label
                                                                                        : default_label(rCounts);
            if (rRecord)
                write_report_record(out, rep, label);
            else
                write_report_table(out, rep, label);
            if (!rOut.empty()) {
                Sink sink(rOut);
                write_report_record(sink.get(out), rep, label);
            }
            if (rStrict && rep.R <= 0) return kExitZeroKey;
            return kExitOk;
        }
        if (*sim) {
            const ParsedConfig pc = parse_config(sConfig);
            if (!pc.protocol) throw DataError(sConfig + " has no [protocol] variant");
            SystemModel sys = pc.system;
            if (sEtaZ) sys.etaZ = *sEtaZ;
            if (sEtaX) sys.etaX = *sEtaX;
            sys.validate();
            const ExpectedCounts ec = expected_counts(sys, *pc.protocol, sDistance);
            CountsTable t = sExpected ? to_counts_table(ec) : sample_counts(ec, sSeed);
            t.meta.label = !sLabel.empty() ? sLabel
                                           : "sim-" + format_double(sDistance) + "km-" +
                                                 std::string(to_string(pc.protocol->variant)) +
                                                 (sExpected ? "-expected" : "-seed" + std::to_string(sSeed));
            Sink sink(sOut);
            write_counts_csv(sink.get(out), t);
            return kExitOk;
        }
        if (*opt) {
            const SystemModel sys = system_from(oConfig, oEtaZ, oEtaX);
            OptimOptions oo;
            oo.starts = oStarts;
            oo.analysis = oFlags.options();
            const OptimResult res = optimize(sys, oDistance, variant_from(oVariant), oSeed, oo);
            Sink sink(oOut);
            write_optim_record(sink.get(out), res, oDistance, sys);
            if (!oEmit.empty()) {
                std::ofstream f(oEmit, std::ios::binary);
                if (!f) throw DataError("cannot write " + oEmit);
                write_protocol_toml(f, res.best);
            }
            return kExitOk;
        }
        if (*sweep) {
            const SystemModel sys = system_from(wConfig, wEtaZ, wEtaX);
            OptimOptions oo;
            oo.starts = wStarts;
            oo.analysis = wFlags.options();
            std::vector<Variant> variants;
            for (Variant v : kVariants)
                for (const auto& s : wVariants)
                    if (to_string(v) == s) variants.push_back(v);
            if (wTo < wFrom) throw DataError("--to must not be below --from");
            Sink sink(wOut);
            std::ostream& o = sink.get(out);
            o << "distance_km,variant,R_per_pulse,bps\n";
            decoyrate::sweep(sys, wFrom, wTo, wStep, variants, wSeed, oo, [&](const SweepRow& r) {
                o << format_double(r.distanceKm) << ',' << to_string(r.variant) << ',' << format_double(r.R) << ','
                  << format_double(r.bps) << '\n';
                o.flush();
            });
            return kExitOk;
        }
        if (*cmp) {
            std::vector<Record> recs;
            for (const auto& p : cReports) recs.push_back(parse_record_file(p));
            auto rOf = [&](const Record& r, const std::string& path) {
                auto it = r.find("R_per_pulse");
                if (it == r.end()) throw DataError(path + " has no R_per_pulse");
                double v = 0;
                std::istringstream ss(it->second);
                ss.imbue(std::locale::classic());
                if (!(ss >> v)) throw DataError(path + ": bad R_per_pulse");
                return v;
            };
            const double base = rOf(recs[0], cReports[0]);
            Sink sink(cOut);
            std::ostream& o = sink.get(out);
            o << "label,variant,R_per_pulse,ratio_first_over_this\n";
            for (std::size_t i = 0; i < recs.size(); ++i) {
                const double r = rOf(recs[i], cReports[i]);
                const auto lab = recs[i].count("label") ? recs[i].at("label") : default_label(cReports[i]);
                const auto var = recs[i].count("variant") ? recs[i].at("variant") : std::string("?");
                o << lab << ',' << var << ',' << format_double(r) << ','
                  << (r > 0 ? format_double(base / r) : std::string("inf")) << '\n';
            }
            return kExitOk;
        }
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace decoyrate
