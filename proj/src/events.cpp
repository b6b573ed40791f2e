#include "matchup/events.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace matchup {

const char* const kEventCsvHeader =
    "date,pitcher_id,batter_id,pitcher_hand,batter_hand,batting_order,"
    "outcome,pre_outs,pre_bases,post_outs,post_bases,runs_scored";

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

bool parse_int(const std::string& s, int& out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

// "010" -> mask with second base occupied (first/second/third order).
bool parse_bases(const std::string& s, std::uint8_t& mask) {
    if (s.size() != 3) return false;
    mask = 0;
    for (int i = 0; i < 3; ++i) {
        if (s[i] == '1')
            mask |= static_cast<std::uint8_t>(1 << i);
        else if (s[i] != '0')
            return false;
    }
    return true;
}

std::string bases_string(std::uint8_t mask) {
    std::string s = "000";
    for (int i = 0; i < 3; ++i)
        if (mask & (1 << i)) s[i] = '1';
    return s;
}

bool plausible_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (int i : {0, 1, 2, 3, 5, 6, 8, 9})
        if (s[i] < '0' || s[i] > '9') return false;
    return true;
}

}  // namespace

ParseResult parse_event_log(std::istream& in, const ParseOptions& opts) {
    ParseResult result;
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("empty input: no header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kEventCsvHeader)
        throw SchemaError("header mismatch: expected \"" +
                          std::string(kEventCsvHeader) + "\"");

    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        auto f = split_csv(line);
        if (f.size() != 12) {
            result.errors.push_back({line_no, "expected 12 fields, got " +
                                                  std::to_string(f.size())});
            continue;
        }
        PlateAppearanceRecord rec;
        std::string err;
        rec.date = f[0];
        rec.pitcher_id = f[1];
        rec.batter_id = f[2];
        int order = 0, pre_outs = 0, post_outs = 0, runs = 0;
        std::uint8_t pre_bases = 0, post_bases = 0;
        if (!plausible_date(rec.date))
            err = "invalid date (want yyyy-mm-dd)";
        else if (f[3].size() != 1)
            err = "invalid pitcher_hand";
        else if (f[4].size() != 1)
            err = "invalid batter_hand";
        else if (!parse_int(f[5], order) || order < 1 || order > 9)
            err = "batting_order outside 1..9";
        else if (!parse_int(f[7], pre_outs) || pre_outs < 0 || pre_outs > 2 ||
                 !parse_bases(f[8], pre_bases))
            err = "invalid pre_state";
        else if (!parse_int(f[9], post_outs) || post_outs < 0 || post_outs > 3 ||
                 !parse_bases(f[10], post_bases) ||
                 (post_outs == 3 && post_bases != 0))
            err = "invalid post_state";
        else if (!parse_int(f[11], runs) || runs < 0)
            err = "invalid runs_scored";
        if (err.empty()) {
            auto oc = outcome_from_code(f[6]);
            if (!oc && opts.map_aliases) oc = outcome_from_alias(f[6]);
            if (!oc)
                err = "unknown outcome code \"" + f[6] + "\"";
            else
                rec.outcome = *oc;
        }
        if (err.empty()) {
            rec.pitcher_hand = f[3][0];
            rec.batter_hand = f[4][0];
            rec.batting_order = order;
            rec.pre_state = {static_cast<std::uint8_t>(pre_outs), pre_bases};
            rec.post_state = {static_cast<std::uint8_t>(post_outs), post_bases};
            rec.runs_scored = runs;
            err = validate_record(rec);
        }
        if (!err.empty())
            result.errors.push_back({line_no, err});
        else
            result.records.push_back(std::move(rec));
    }
    return result;
}

ParseResult parse_event_log_file(const std::string& path,
                                 const ParseOptions& opts) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open event log: " + path);
    return parse_event_log(in, opts);
}

std::string serialize_event_log(const std::vector<PlateAppearanceRecord>& recs) {
    std::ostringstream out;
    out << kEventCsvHeader << '\n';
    for (const auto& r : recs) {
        out << r.date << ',' << r.pitcher_id << ',' << r.batter_id << ','
            << r.pitcher_hand << ',' << r.batter_hand << ',' << r.batting_order
            << ',' << outcome_code(r.outcome) << ',' << int(r.pre_state.outs)
            << ',' << bases_string(r.pre_state.bases) << ','
            << int(r.post_state.outs) << ',' << bases_string(r.post_state.bases)
            << ',' << r.runs_scored << '\n';
    }
    return out.str();
}

LeagueRates league_rates(const std::vector<PlateAppearanceRecord>& records) {
    std::array<std::array<double, kNumOutcomes>, 2> counts{};
    std::array<double, 2> totals{};
    for (const auto& r : records) {
        int h = static_cast<int>(r.handedness());
        counts[h][static_cast<int>(r.outcome)] += 1.0;
        totals[h] += 1.0;
    }
    LeagueRates lr;
    for (int h = 0; h < 2; ++h) {
        if (totals[h] == 0.0)
            throw InsufficientDataError(
                std::string("no records with handedness h=") +
                (h == 1 ? "1 (same)" : "0 (opposite)"));
        for (int i = 0; i < kNumOutcomes; ++i)
            lr.by_hand[h][i] = counts[h][i] / totals[h];
    }
    return lr;
}

OrderRates batting_order_rates(const std::vector<PlateAppearanceRecord>& records,
                               const LeagueRates& league,
                               double shrinkage_count) {
    if (shrinkage_count < 0.0)
        throw std::invalid_argument("batting_order_rates: negative shrinkage");
    std::array<std::array<std::array<double, kNumOutcomes>, 2>, 9> counts{};
    std::array<std::array<double, 2>, 9> totals{};
    for (const auto& r : records) {
        int m = r.batting_order - 1;
        int h = static_cast<int>(r.handedness());
        counts[m][h][static_cast<int>(r.outcome)] += 1.0;
        totals[m][h] += 1.0;
    }
    OrderRates rates;
    for (int m = 0; m < 9; ++m) {
        for (int h = 0; h < 2; ++h) {
            double n = totals[m][h];
            const auto& c = league.by_hand[h];
            if (n == 0.0 && shrinkage_count == 0.0) {
                rates.by_order[m][h] = c;  // empty stratum falls back exactly
                continue;
            }
            for (int i = 0; i < kNumOutcomes; ++i)
                rates.by_order[m][h][i] =
                    (counts[m][h][i] + shrinkage_count * c[i]) /
                    (n + shrinkage_count);
        }
    }
    return rates;
}

}  // namespace matchup
