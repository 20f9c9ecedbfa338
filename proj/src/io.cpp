#include "decoyrate/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <vector>

#include "decoyrate/errors.hpp"

#ifndef DECOYRATE_DEFAULT_FIXTURES
#define DECOYRATE_DEFAULT_FIXTURES "fixtures"
#endif

namespace decoyrate {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::optional<double> to_number(std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Value {
    std::string text;
    bool quoted = false;
    int line = 0;
};

double number(const std::string& key, const Value& v) {
    if (auto d = to_number(v.text); d && !v.quoted && std::isfinite(*d)) return *d;
    throw ParseError("key '" + key + "' expects a number, got '" + v.text + "'", v.line);
}

}  // namespace

ParsedConfig parse_config_text(const std::string& text) {
    static const std::set<std::string> protocolKeys{"variant", "mu_z1", "mu_z2", "mu_x1", "mu_x2", "p_z1", "p_z2",
                                                    "p_x1",    "p_x2",  "p_vac", "q_x",   "q_z",   "pulses"};
    static const std::set<std::string> systemKeys{
        "eta_z",          "eta_x",             "dark_rate", "after_pulse", "afterpulse_model", "dead_time", "e_mis",
        "e_mis_z",        "e_mis_x",           "loss_db_per_km", "extra_bob_loss_db", "f", "eps", "clock_hz"};

    std::map<std::string, std::map<std::string, Value>> sections;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int lineNo = 0;
    while (std::getline(in, raw)) {
        ++lineNo;
        std::string line = raw;
        // drop comments outside quotes
        bool inQuote = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') inQuote = !inQuote;
            if (line[i] == '#' && !inQuote) {
                line.resize(i);
                break;
            }
        }
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError("unterminated section header", lineNo);
            section = trim(line.substr(1, line.size() - 2));
            if (section != "protocol" && section != "system")
                throw ParseError("unknown section [" + section + "]", lineNo);
            sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected key = value", lineNo);
        if (section.empty()) throw ParseError("key outside of a section", lineNo);
        const std::string key = trim(line.substr(0, eq));
        Value v{trim(line.substr(eq + 1)), false, lineNo};
        if (v.text.size() >= 2 && v.text.front() == '"' && v.text.back() == '"') {
            v.text = v.text.substr(1, v.text.size() - 2);
            v.quoted = true;
        }
        if (v.text.empty() && !v.quoted) throw ParseError("missing value for '" + key + "'", lineNo);
        const auto& allowed = section == "protocol" ? protocolKeys : systemKeys;
        if (!allowed.count(key)) throw ParseError("unknown key '" + key + "' in [" + section + "]", lineNo);
        if (!sections[section].emplace(key, v).second) throw ParseError("duplicate key '" + key + "'", lineNo);
    }

    ParsedConfig out;
    SystemModel& sys = out.system;
    const auto& sv = sections["system"];
    auto setNum = [&](const std::map<std::string, Value>& m, const char* key, double& dst) {
        if (auto it = m.find(key); it != m.end()) dst = number(key, it->second);
    };
    setNum(sv, "eta_z", sys.etaZ);
    setNum(sv, "eta_x", sys.etaX);
    setNum(sv, "dark_rate", sys.darkRate);
    setNum(sv, "after_pulse", sys.afterPulse);
    setNum(sv, "dead_time", sys.deadTime);
    if (auto it = sv.find("e_mis"); it != sv.end()) sys.eMisZ = sys.eMisX = number("e_mis", it->second);
    setNum(sv, "e_mis_z", sys.eMisZ);
    setNum(sv, "e_mis_x", sys.eMisX);
    setNum(sv, "loss_db_per_km", sys.lossCoeff);
    setNum(sv, "extra_bob_loss_db", sys.extraBobLoss);
    setNum(sv, "f", sys.f);
    setNum(sv, "eps", sys.eps);
    setNum(sv, "clock_hz", sys.clockRate);
    if (auto it = sv.find("afterpulse_model"); it != sv.end()) {
        if (it->second.text == "off")
            sys.afterpulseModel = AfterpulseModel::Off;
        else if (it->second.text == "multiplicative")
            sys.afterpulseModel = AfterpulseModel::Multiplicative;
        else
            throw ParseError("afterpulse_model must be off or multiplicative", it->second.line);
    }
    sys.validate();

    const auto& pv = sections["protocol"];
    setNum(pv, "pulses", out.pulses);
    auto vit = pv.find("variant");
    if (vit == pv.end()) {
        for (const auto& [k, v] : pv)
            if (k != "pulses") throw ParseError("[protocol] needs a variant before '" + k + "'", v.line);
        return out;
    }
    const auto variant = parse_variant(vit->second.text);
    if (!variant) throw ParseError("unknown variant '" + vit->second.text + "'", vit->second.line);

    ProtocolConfig cfg;
    cfg.variant = *variant;
    cfg.pulses = out.pulses;
    auto need = [&](const char* key) -> double {
        auto it = pv.find(key);
        if (it == pv.end()) throw DataError(std::string("missing [protocol] key '") + key + "'");
        return number(key, it->second);
    };
    cfg.mu[index(Source::Z1)] = need("mu_z1");
    cfg.mu[index(Source::Z2)] = need("mu_z2");
    cfg.mu[index(Source::X1)] = need("mu_x1");
    cfg.mu[index(Source::X2)] = need("mu_x2");
    cfg.p[index(Source::Z1)] = need("p_z1");
    cfg.p[index(Source::Z2)] = need("p_z2");
    cfg.p[index(Source::X1)] = need("p_x1");
    cfg.p[index(Source::X2)] = need("p_x2");
    if (is_three_intensity(cfg.variant)) {
        if (!pv.count("p_vac")) throw DataError("invariant violated: 3-intensity variants need a vacuum source (p_vac)");
        cfg.p[index(Source::Vac)] = need("p_vac");
    } else if (pv.count("p_vac")) {
        cfg.p[index(Source::Vac)] = need("p_vac");
    }
    const bool hasQx = pv.count("q_x") > 0, hasQz = pv.count("q_z") > 0;
    if (hasQx) cfg.qX = need("q_x");
    if (hasQz) cfg.qZ = need("q_z");
    if (hasQx && !hasQz) cfg.qZ = 1 - cfg.qX;
    if (hasQz && !hasQx) cfg.qX = 1 - cfg.qZ;
    if (!hasQx && !hasQz && !is_three_intensity(cfg.variant)) throw DataError("missing [protocol] key 'q_x'");

    for (double v : cfg.p)
        if (!(v >= 0 && v <= 1)) throw DataError("invariant violated: source probabilities must lie in [0,1]");
    double sum = 0;
    for (double v : cfg.p) sum += v;
    if (std::abs(sum - 1) > kSimplexTolerance)
        throw DataError("invariant violated: source probabilities must sum to 1 (simplex), got " + format_double(sum));
    for (double& v : cfg.p) v /= sum;
    if (std::abs(cfg.qZ + cfg.qX - 1) > kSimplexTolerance)
        throw DataError("invariant violated: qZ + qX = 1, got " + format_double(cfg.qZ + cfg.qX));
    const double qs = cfg.qZ + cfg.qX;
    cfg.qZ /= qs;
    cfg.qX = 1 - cfg.qZ;
    cfg.validate();
    out.protocol = cfg;
    return out;
}

ParsedConfig parse_config(const std::string& path) { return parse_config_text(read_file(path)); }

CountsTable parse_counts_stream(std::istream& in) {
    CountsTable t;
    std::string raw;
    int lineNo = 0;
    bool header = false;
    std::set<std::string> seenMeta;
    while (std::getline(in, raw)) {
        ++lineNo;
        std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.rfind("#@", 0) == 0) {
            const std::string body = line.substr(2);
            const auto eq = body.find('=');
            if (eq == std::string::npos) throw ParseError("metadata line needs key = value", lineNo);
            const std::string key = trim(body.substr(0, eq));
            const std::string val = trim(body.substr(eq + 1));
            if (!seenMeta.insert(key).second) throw ParseError("duplicate metadata '" + key + "'", lineNo);
            auto num = [&]() {
                auto v = to_number(val);
                if (!v) throw ParseError("metadata '" + key + "' expects a number", lineNo);
                return *v;
            };
            if (key == "distance_km")
                t.meta.distanceKm = num();
            else if (key == "eta_z")
                t.meta.etaZ = num();
            else if (key == "eta_x")
                t.meta.etaX = num();
            else if (key == "label")
                t.meta.label = val;
            else if (key == "variant") {
                t.meta.variant = parse_variant(val);
                if (!t.meta.variant) throw ParseError("unknown variant '" + val + "'", lineNo);
            } else
                throw ParseError("unknown metadata key '" + key + "'", lineNo);
            continue;
        }
        if (line.front() == '#') continue;
        if (!header) {
            if (line != "source,basis,total,error")
                throw ParseError("expected header 'source,basis,total,error'", lineNo);
            header = true;
            continue;
        }
        std::vector<std::string> f;
        std::size_t start = 0;
        for (;;) {
            const auto comma = line.find(',', start);
            f.push_back(trim(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (f.size() != 4) throw ParseError("expected 4 fields, got " + std::to_string(f.size()), lineNo);
        const auto src = parse_source(f[0]);
        if (!src) throw ParseError("unknown source '" + f[0] + "'", lineNo);
        const auto basis = parse_basis(f[1]);
        if (!basis) throw ParseError("unknown basis '" + f[1] + "'", lineNo);
        if (t.has(*src, *basis)) throw ParseError("duplicate cell " + cell_name(*src, *basis), lineNo);
        const auto total = to_number(f[2]);
        if (!total) throw ParseError("bad total '" + f[2] + "'", lineNo);
        std::optional<double> err;
        if (!f[3].empty()) {
            err = to_number(f[3]);
            if (!err) throw ParseError("bad error count '" + f[3] + "'", lineNo);
        }
        if (*total < 0 || (err && *err < 0)) throw ParseError("negative count in cell " + cell_name(*src, *basis), lineNo);
        if (err && *err > *total) throw ParseError("error count exceeds total in cell " + cell_name(*src, *basis), lineNo);
        t.set(*src, *basis, *total, err);
    }
    if (!header) throw ParseError("missing header 'source,basis,total,error'", 0);
    t.validate();
    return t;
}

CountsTable parse_counts(const std::string& path) {
    if (path == "-") return parse_counts_stream(std::cin);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    return parse_counts_stream(in);
}

std::string format_double(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string format_sci(double v, int digits) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, digits);
    return std::string(buf, r.ptr);
}

void write_counts_csv(std::ostream& out, const CountsTable& t) {
    if (!t.meta.label.empty()) out << "#@ label = " << t.meta.label << '\n';
    if (t.meta.distanceKm) out << "#@ distance_km = " << format_double(*t.meta.distanceKm) << '\n';
    if (t.meta.variant) out << "#@ variant = " << to_string(*t.meta.variant) << '\n';
    if (t.meta.etaZ) out << "#@ eta_z = " << format_double(*t.meta.etaZ) << '\n';
    if (t.meta.etaX) out << "#@ eta_x = " << format_double(*t.meta.etaX) << '\n';
    out << "source,basis,total,error\n";
    for (Source s : kAllSources) {
        for (Basis b : kBases) {
            if (!t.has(s, b)) continue;
            const CountCell& c = t.cell(s, b);
            out << to_string(s) << ',' << to_string(b) << ',' << format_double(c.total) << ',';
            if (c.error) out << format_double(*c.error);
            out << '\n';
        }
    }
}

void write_report_record(std::ostream& out, const KeyRateReport& rep, const std::string& label) {
    auto kv = [&](const std::string& k, const std::string& v) { out << k << " = " << v << '\n'; };
    auto num = [&](const std::string& k, double v) { kv(k, format_double(v)); };
    kv("label", label);
    kv("variant", std::string(to_string(rep.variant)));
    num("R_per_pulse", rep.R);
    num("bps", rep.bps);
    num("R_signed_min", rep.signedMin);
    num("R_z", rep.Rz);
    num("R_x", rep.Rx);
    kv("feasible", rep.feasible ? "true" : "false");
    if (!rep.reason.empty()) kv("reason", rep.reason);
    num("s0_z_star", rep.s0ZStar);
    num("s0_x_star", rep.s0XStar);
    num("s0_z_lower", rep.rect.s0ZL);
    num("s0_z_upper", rep.rect.s0ZU);
    num("s0_x_lower", rep.rect.s0XL);
    num("s0_x_upper", rep.rect.s0XU);
    const SinglePhotonBounds& b = rep.bounds;
    for (Basis w : kBases) {
        const std::string n = w == Basis::Z ? "z" : "x";
        num("s1_mean_lower_" + n, b.s1MeanL[index(w)]);
        num("s1_lower_" + n + "1", b.s1L[index(weak(w))]);
        num("s1_lower_" + n + "2", b.s1L[index(strong(w))]);
        num("e1_upper_" + n + "1", b.e1U[index(w)]);
        num("theta_" + n, b.theta[index(w)]);
        num("e1_phase_upper_" + n, b.e1PhaseU[index(w)]);
    }
    kv("clamp_events", std::to_string(rep.clampEvents));
    num("eps_budget", rep.epsBudget);
    kv("evaluations", std::to_string(rep.evaluations));
    kv("chernoff_arg", std::string(to_string(rep.opts.chernoffArg)));
    kv("theta_log_base", std::string(to_string(rep.opts.thetaLogBase)));
    kv("error_delta", std::string(to_string(rep.opts.errorDelta)));
    kv("theta_counts", std::string(to_string(rep.opts.thetaCounts)));
}

void write_report_table(std::ostream& out, const KeyRateReport& rep, const std::string& label) {
    auto row = [&](const std::string& k, const std::string& v) {
        out << "  " << k << std::string(k.size() < 24 ? 24 - k.size() : 1, ' ') << v << '\n';
    };
    out << (label.empty() ? std::string("key rate") : label) << " (" << to_string(rep.variant) << ")\n";
    row("R per pulse", format_sci(rep.R));
    row("throughput [bit/s]", format_sci(rep.bps));
    row("R_Z / R_X at argmin", format_sci(rep.Rz) + " / " + format_sci(rep.Rx));
    row("worst-case s0 (Z, X)", format_sci(rep.s0ZStar) + ", " + format_sci(rep.s0XStar));
    row("s0 range Z", "[" + format_sci(rep.rect.s0ZL) + ", " + format_sci(rep.rect.s0ZU) + "]");
    row("s0 range X", "[" + format_sci(rep.rect.s0XL) + ", " + format_sci(rep.rect.s0XU) + "]");
    const SinglePhotonBounds& b = rep.bounds;
    row("s1 lower Z2 / X2", format_sci(b.s1L[index(Source::Z2)]) + " / " + format_sci(b.s1L[index(Source::X2)]));
    row("e1 upper X1 / Z1", format_sci(b.e1U[index(Basis::X)]) + " / " + format_sci(b.e1U[index(Basis::Z)]));
    row("phase error Z / X", format_sci(b.e1PhaseU[0]) + " / " + format_sci(b.e1PhaseU[1]));
    row("clamp events", std::to_string(rep.clampEvents));
    row("eps budget (union)", format_sci(rep.epsBudget));
    if (!rep.reason.empty()) row("note", rep.reason);
}

void write_protocol_toml(std::ostream& out, const ProtocolConfig& cfg) {
    out << "[protocol]\n";
    out << "variant = \"" << to_string(cfg.variant) << "\"\n";
    const std::pair<const char*, Source> names[] = {
        {"z1", Source::Z1}, {"z2", Source::Z2}, {"x1", Source::X1}, {"x2", Source::X2}};
    for (const auto& [n, s] : names) out << "mu_" << n << " = " << format_double(cfg.mu_of(s)) << '\n';
    for (const auto& [n, s] : names) out << "p_" << n << " = " << format_double(cfg.p_of(s)) << '\n';
    if (cfg.has_vacuum()) out << "p_vac = " << format_double(cfg.p_of(Source::Vac)) << '\n';
    out << "q_x = " << format_double(cfg.qX) << '\n';
    out << "pulses = " << format_double(cfg.pulses) << '\n';
}

void write_optim_record(std::ostream& out, const OptimResult& res, double distanceKm, const SystemModel& sys) {
    auto kv = [&](const std::string& k, const std::string& v) { out << k << " = " << v << '\n'; };
    kv("variant", std::string(to_string(res.best.variant)));
    kv("distance_km", format_double(distanceKm));
    kv("eta_z", format_double(sys.etaZ));
    kv("eta_x", format_double(sys.etaX));
    kv("R_per_pulse", format_double(res.bestR));
    kv("bps", format_double(res.bestR * sys.clockRate));
    const std::pair<const char*, Source> names[] = {
        {"z1", Source::Z1}, {"z2", Source::Z2}, {"x1", Source::X1}, {"x2", Source::X2}};
    for (const auto& [n, s] : names) kv(std::string("mu_") + n, format_double(res.best.mu_of(s)));
    for (const auto& [n, s] : names) kv(std::string("p_") + n, format_double(res.best.p_of(s)));
    kv("p_vac", format_double(res.best.p_of(Source::Vac)));
    kv("q_x", format_double(res.best.qX));
    kv("restarts", std::to_string(res.restarts));
    kv("converged", res.converged ? "true" : "false");
    kv("evaluations", std::to_string(res.evaluations));
    for (const auto& [r, v] : res.trace) kv("trace." + std::to_string(r), format_double(v));
}

Record parse_record(std::istream& in) {
    Record r;
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) throw ParseError("expected 'key = value'", lineNo);
        r[trim(line.substr(0, eq))] = trim(line.substr(eq + 3));
    }
    return r;
}

Record parse_record_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    return parse_record(in);
}

std::string fixture_path(const std::string& name) {
    const char* env = std::getenv("DECOYRATE_FIXTURES");
    const std::string dir = env && *env ? env : DECOYRATE_DEFAULT_FIXTURES;
    return dir + "/" + name;
}

}  // namespace decoyrate
