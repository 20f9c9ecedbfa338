#include "decoyrate/counts.hpp"

#include <cmath>

#include "decoyrate/errors.hpp"

namespace decoyrate {

std::string cell_name(Source s, Basis b) {
    return "(" + std::string(to_string(s)) + ", " + std::string(to_string(b)) + ")";
}

const CountCell& CountsTable::cell(Source s, Basis b) const {
    const auto& c = cells_[slot(s, b)];
    if (!c) throw DataError("missing count cell " + cell_name(s, b));
    return *c;
}

double CountsTable::errors(Source s, Basis b) const {
    const auto& c = cell(s, b);
    if (!c.error) throw DataError("missing error count for cell " + cell_name(s, b));
    return *c.error;
}

void CountsTable::validate(std::optional<Variant> variant) const {
    if (!variant) variant = meta.variant;
    for (Source s : kAllSources) {
        for (Basis b : kBases) {
            const auto& c = cells_[slot(s, b)];
            if (!c) continue;
            if (!std::isfinite(c->total) || c->total < 0)
                throw DataError("negative or non-finite total in cell " + cell_name(s, b));
            if (c->error) {
                if (!std::isfinite(*c->error) || *c->error < 0)
                    throw DataError("negative or non-finite error count in cell " + cell_name(s, b));
                if (*c->error > c->total)
                    throw DataError("error count exceeds total in cell " + cell_name(s, b));
            }
        }
    }
    for (Source s : kSignalSources)
        for (Basis b : kBases)
            if (!has(s, b)) throw DataError("missing count cell " + cell_name(s, b));
    for (Basis b : kBases) {
        Source s1 = weak(b), s2 = strong(b);
        if (!cell(s1, b).error) throw DataError("missing error count for cell " + cell_name(s1, b));
        if (!cell(s2, b).error) throw DataError("missing error count for cell " + cell_name(s2, b));
    }
    bool needVac = (variant && is_three_intensity(*variant)) || has_vacuum();
    if (needVac)
        for (Basis b : kBases)
            if (!has(Source::Vac, b)) throw DataError("missing count cell " + cell_name(Source::Vac, b));
    if (variant && *variant == Variant::FourIntensity && has_vacuum())
        throw DataError("4-intensity counts must not contain vacuum cells");
}

bool CountsTable::operator==(const CountsTable& o) const {
    if (meta.distanceKm != o.meta.distanceKm || meta.variant != o.meta.variant ||
        meta.etaZ != o.meta.etaZ || meta.etaX != o.meta.etaX || meta.label != o.meta.label)
        return false;
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        const auto& a = cells_[i];
        const auto& b = o.cells_[i];
        if (a.has_value() != b.has_value()) return false;
        if (a && (a->total != b->total || a->error != b->error)) return false;
    }
    return true;
}

}  // namespace decoyrate
