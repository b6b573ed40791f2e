// Event-log ingestion and the empirical league / batting-order rate tables.
#pragma once

#include <array>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "matchup/outcome.hpp"

namespace matchup {

struct InsufficientDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Plate-appearance CSV, schema v1. Header must match exactly.
extern const char* const kEventCsvHeader;

struct RowError {
    int line = 0;  // 1-based file line (header is line 1)
    std::string message;
};

struct ParseResult {
    std::vector<PlateAppearanceRecord> records;
    std::vector<RowError> errors;
};

struct ParseOptions {
    // Map documented non-canonical outcome codes onto the nine canonical
    // outcomes instead of rejecting the row.
    bool map_aliases = true;
};

// Every row either yields a validated record or is reported with its line
// number and reason. A missing or misnamed column is fatal.
ParseResult parse_event_log(std::istream& in, const ParseOptions& opts = {});
ParseResult parse_event_log_file(const std::string& path,
                                 const ParseOptions& opts = {});

// Canonical serialization; parse -> serialize -> parse round-trips
// byte-identically for files already in canonical form.
std::string serialize_event_log(const std::vector<PlateAppearanceRecord>& recs);

// Relative outcome frequencies for the whole league, per handedness flag.
struct LeagueRates {
    std::array<Simplex9, 2> by_hand{};  // [h][outcome]
    const Simplex9& at(Handedness h) const {
        return by_hand[static_cast<int>(h)];
    }
};

// Outcome frequencies per (batting order, handedness), shrunk toward the
// league rates with a pseudo-count so desk-scale strata stay well defined.
struct OrderRates {
    std::array<std::array<Simplex9, 2>, 9> by_order{};  // [order-1][h][outcome]
    const Simplex9& at(int order, Handedness h) const {
        return by_order[order - 1][static_cast<int>(h)];
    }
};

LeagueRates league_rates(const std::vector<PlateAppearanceRecord>& records);

OrderRates batting_order_rates(const std::vector<PlateAppearanceRecord>& records,
                               const LeagueRates& league,
                               double shrinkage_count = 100.0);

}  // namespace matchup
