#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "decoyrate/counts.hpp"
#include "decoyrate/keyrate.hpp"
#include "decoyrate/optimizer.hpp"

namespace decoyrate {

struct ParsedConfig {
    std::optional<ProtocolConfig> protocol;  // present when [protocol] names a variant
    SystemModel system;
    double pulses = 1e10;
};

// Probability sums within this distance of 1 are rescaled; three-decimal tables do not sum exactly.
inline constexpr double kSimplexTolerance = 5e-3;

ParsedConfig parse_config(const std::string& path);
ParsedConfig parse_config_text(const std::string& text);

CountsTable parse_counts(const std::string& path);  // "-" reads stdin
CountsTable parse_counts_stream(std::istream& in);
void write_counts_csv(std::ostream& out, const CountsTable& t);

// Shortest round-trip decimal form, independent of the C locale.
std::string format_double(double v);
// Scientific with `digits` digits after the point.
std::string format_sci(double v, int digits = 3);

using Record = std::map<std::string, std::string>;

void write_report_record(std::ostream& out, const KeyRateReport& rep, const std::string& label);
void write_report_table(std::ostream& out, const KeyRateReport& rep, const std::string& label);
void write_optim_record(std::ostream& out, const OptimResult& res, double distanceKm, const SystemModel& sys);
// [protocol] section for a configuration, loadable by parse_config.
void write_protocol_toml(std::ostream& out, const ProtocolConfig& cfg);
Record parse_record(std::istream& in);
Record parse_record_file(const std::string& path);

// Locates a shipped fixture: $DECOYRATE_FIXTURES, then the compiled-in default.
std::string fixture_path(const std::string& name);

}  // namespace decoyrate
