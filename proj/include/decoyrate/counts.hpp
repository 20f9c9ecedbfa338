#pragma once

#include <array>
#include <optional>
#include <string>

#include "decoyrate/core_model.hpp"

namespace decoyrate {

struct CountCell {
    double total = 0;
    std::optional<double> error;  // blank when the source table does not report it
};

struct CountsMetadata {
    std::optional<double> distanceKm;
    std::optional<Variant> variant;
    std::optional<double> etaZ;
    std::optional<double> etaX;
    std::string label;
};

// Observed detections per (source, measured basis).
class CountsTable {
public:
    CountsMetadata meta;

    bool has(Source s, Basis b) const { return cells_[slot(s, b)].has_value(); }
    // Throws DataError naming the absent cell.
    const CountCell& cell(Source s, Basis b) const;
    double total(Source s, Basis b) const { return cell(s, b).total; }
    // Throws DataError when the error count was not reported.
    double errors(Source s, Basis b) const;

    void set(Source s, Basis b, CountCell c) { cells_[slot(s, b)] = c; }
    void set(Source s, Basis b, double total, std::optional<double> error) {
        set(s, b, CountCell{total, error});
    }
    bool has_vacuum() const { return has(Source::Vac, Basis::Z) || has(Source::Vac, Basis::X); }

    // Cell completeness and error <= total; throws DataError.
    void validate(std::optional<Variant> variant = std::nullopt) const;

    bool operator==(const CountsTable& o) const;

private:
    static std::size_t slot(Source s, Basis b) {
        return static_cast<std::size_t>(2 * index(s) + index(b));
    }
    std::array<std::optional<CountCell>, 2 * kNumSources> cells_{};
};

std::string cell_name(Source s, Basis b);

}  // namespace decoyrate
