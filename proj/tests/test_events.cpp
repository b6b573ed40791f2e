#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>
#include <string>
#include <vector>

#include "matchup/events.hpp"
#include "matchup/outcome.hpp"
#include "synthetic.hpp"

using namespace matchup;

namespace {

std::string row(const std::string& date, const std::string& pid,
                const std::string& bid, char ph, char bh, int order,
                const std::string& outcome, int pre_outs,
                const std::string& pre_bases, int post_outs,
                const std::string& post_bases, int runs) {
    std::ostringstream ss;
    ss << date << ',' << pid << ',' << bid << ',' << ph << ',' << bh << ','
       << order << ',' << outcome << ',' << pre_outs << ',' << pre_bases << ','
       << post_outs << ',' << post_bases << ',' << runs;
    return ss.str();
}

ParseResult parse(const std::string& body) {
    std::istringstream in(std::string(kEventCsvHeader) + "\n" + body);
    return parse_event_log(in);
}

}  // namespace

TEST_CASE("outcome codes round-trip and aliases fold in") {
    const char* codes[] = {"K", "BB", "HBP", "GO", "FO", "1B", "2B", "3B", "HR"};
    for (int i = 0; i < kNumOutcomes; ++i) {
        Outcome o = static_cast<Outcome>(i);
        CHECK(outcome_code(o) == codes[i]);
        REQUIRE(outcome_from_code(codes[i]).has_value());
        CHECK(*outcome_from_code(codes[i]) == o);
    }
    CHECK(!outcome_from_code("SF").has_value());
    CHECK(*outcome_from_alias("SF") == Outcome::FlyOut);
    CHECK(*outcome_from_alias("FC") == Outcome::GroundOut);
    CHECK(*outcome_from_alias("ROE") == Outcome::Single);
    CHECK(*outcome_from_alias("IBB") == Outcome::Walk);
    CHECK(!outcome_from_alias("XYZ").has_value());
}

TEST_CASE("base-out state indexing is a bijection over the 24 states") {
    CHECK(BaseOutState::kStates == 24);
    for (int i = 0; i < 24; ++i) {
        BaseOutState s = BaseOutState::from_index(i);
        CHECK(s.valid());
        CHECK(!s.is_terminal());
        CHECK(s.index() == i);
    }
    BaseOutState t = BaseOutState::terminal();
    CHECK(t.is_terminal());
    CHECK(t.index() == BaseOutState::kTerminalIndex);
    CHECK(BaseOutState::from_index(BaseOutState::kTerminalIndex).is_terminal());
    CHECK_THROWS_AS(BaseOutState::from_index(25), std::out_of_range);
    BaseOutState loaded{1, 0b111};
    CHECK(loaded.first());
    CHECK(loaded.second());
    CHECK(loaded.third());
    CHECK(loaded.runners() == 3);
}

TEST_CASE("handedness flag is same-hand iff hands match") {
    CHECK(matchup_handedness('R', 'R') == Handedness::Same);
    CHECK(matchup_handedness('L', 'L') == Handedness::Same);
    CHECK(matchup_handedness('R', 'L') == Handedness::Opposite);
    CHECK(matchup_handedness('L', 'R') == Handedness::Opposite);
}

TEST_CASE("runs conservation accounting") {
    // Bases-empty homer: 1 runner (the batter) in, no outs added.
    CHECK(runs_conservation_ok({0, 0}, {0, 0}, 1));
    // Strikeout: batter becomes an out.
    CHECK(runs_conservation_ok({0, 0}, {1, 0}, 0));
    // Grand slam: 3 runners + batter all score.
    CHECK(runs_conservation_ok({2, 0b111}, {2, 0}, 4));
    // Walk with first occupied: force to second.
    CHECK(runs_conservation_ok({0, 0b001}, {0, 0b011}, 0));
    // A run from nowhere fails.
    CHECK(!runs_conservation_ok({0, 0}, {0, 0b001}, 1));
    // Losing a runner without an out or run fails.
    CHECK(!runs_conservation_ok({0, 0b011}, {0, 0b001}, 0));
    CHECK(!runs_conservation_ok({0, 0}, {0, 0}, -1));
}

TEST_CASE("forced successors: walks, strikeouts, home runs") {
    // Bases empty walk: runner on first.
    ForcedTransition w = walk_successor({0, 0});
    CHECK(w.post.bases == 0b001);
    CHECK(w.runs == 0);
    // Walk with bases loaded forces in a run.
    w = walk_successor({1, 0b111});
    CHECK(w.post.bases == 0b111);
    CHECK(w.runs == 1);
    // Walk with runner on second only: no force, runner holds.
    w = walk_successor({0, 0b010});
    CHECK(w.post.bases == 0b011);
    CHECK(w.runs == 0);
    // Strikeout adds an out and never advances.
    ForcedTransition k = strikeout_successor({1, 0b101});
    CHECK(k.post.outs == 2);
    CHECK(k.post.bases == 0b101);
    CHECK(k.runs == 0);
    // Third strikeout is terminal.
    k = strikeout_successor({2, 0b010});
    CHECK(k.post.is_terminal());
    // Homer clears the bases.
    ForcedTransition h = homerun_successor({2, 0b110});
    CHECK(h.post.bases == 0);
    CHECK(h.post.outs == 2);
    CHECK(h.runs == 3);
}

TEST_CASE("one well-formed row parses into one record") {
    auto res = parse(row("2024-04-01", "p1", "b1", 'R', 'L', 3, "K", 0, "000",
                         1, "000", 0));
    REQUIRE(res.errors.empty());
    REQUIRE(res.records.size() == 1);
    const auto& r = res.records[0];
    CHECK(r.pitcher_id == "p1");
    CHECK(r.batter_id == "b1");
    CHECK(r.batting_order == 3);
    CHECK(r.outcome == Outcome::Strikeout);
    CHECK(r.pre_state.index() == 0);
    CHECK(r.post_state.outs == 1);
    CHECK(r.handedness() == Handedness::Opposite);
}

TEST_CASE("rows with three pre-outs are rejected as invalid pre_state") {
    auto res = parse(row("2024-04-01", "p1", "b1", 'R', 'R', 1, "K", 3, "000",
                         3, "000", 0));
    CHECK(res.records.empty());
    REQUIRE(res.errors.size() == 1);
    CHECK(res.errors[0].message.find("invalid pre_state") != std::string::npos);
    CHECK(res.errors[0].line == 2);
}

TEST_CASE("ten-row fixture with two corrupted rows yields eight records") {
    std::ostringstream body;
    for (int i = 0; i < 10; ++i) {
        if (i == 3) {
            body << row("2024-04-01", "p1", "b1", 'R', 'R', 12, "K", 0, "000",
                        1, "000", 0)
                 << "\n";  // order out of range
        } else if (i == 7) {
            body << row("2024-04-01", "p1", "b1", 'R', 'R', 1, "ZZ", 0, "000",
                        1, "000", 0)
                 << "\n";  // unknown outcome
        } else {
            body << row("2024-04-01", "p1", "b1", 'R', 'R', 1, "K", 0, "000",
                        1, "000", 0)
                 << "\n";
        }
    }
    auto res = parse(body.str());
    CHECK(res.records.size() == 8);
    REQUIRE(res.errors.size() == 2);
    CHECK(res.errors[0].line == 5);  // 1-based, after the header
    CHECK(res.errors[1].line == 9);
    CHECK(res.errors[0].message.find("batting_order") != std::string::npos);
    CHECK(res.errors[1].message.find("unknown outcome") != std::string::npos);
}

TEST_CASE("missing header column is a fatal schema error") {
    std::istringstream in("date,pitcher_id\n");
    CHECK_THROWS_AS(parse_event_log(in), SchemaError);
}

TEST_CASE("alias outcomes map only when enabled") {
    std::string body =
        row("2024-04-01", "p1", "b1", 'R', 'R', 1, "SF", 1, "100", 2, "100", 0);
    auto mapped = parse(body);
    REQUIRE(mapped.records.size() == 1);
    CHECK(mapped.records[0].outcome == Outcome::FlyOut);

    std::istringstream in(std::string(kEventCsvHeader) + "\n" + body);
    ParseOptions strict;
    strict.map_aliases = false;
    auto rejected = parse_event_log(in, strict);
    CHECK(rejected.records.empty());
    REQUIRE(rejected.errors.size() == 1);
}

TEST_CASE("parse, serialize, parse round-trips byte-identically") {
    std::mt19937_64 g(3);
    auto recs = testsupport::draw_records(300, testsupport::league_simplex(), g);
    std::string text = serialize_event_log(recs);
    std::istringstream in(text);
    auto res = parse_event_log(in);
    REQUIRE(res.errors.empty());
    REQUIRE(res.records.size() == recs.size());
    CHECK(serialize_event_log(res.records) == text);
}

TEST_CASE("league rates: nine distinct outcomes give the uniform simplex") {
    std::vector<PlateAppearanceRecord> recs;
    std::mt19937_64 g(4);
    for (int i = 0; i < kNumOutcomes; ++i) {
        auto r = testsupport::draw_records(
            1, testsupport::one_hot(static_cast<Outcome>(i), 1e-12), g);
        r[0].pitcher_hand = 'R';
        r[0].batter_hand = 'L';  // h = opposite for every record
        recs.push_back(r[0]);
    }
    // ...plus one same-hand record so both strata are populated.
    auto extra = testsupport::draw_records(
        1, testsupport::one_hot(Outcome::Strikeout, 1e-12), g);
    recs.push_back(extra[0]);
    LeagueRates lr = league_rates(recs);
    double sum = 0.0;
    for (int i = 0; i < kNumOutcomes; ++i) {
        CHECK(lr.at(Handedness::Opposite)[i] ==
              doctest::Approx(1.0 / 9.0).epsilon(1e-12));
        sum += lr.at(Handedness::Opposite)[i];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("league rates: three strikeouts and a walk") {
    std::vector<PlateAppearanceRecord> recs;
    std::mt19937_64 g(5);
    for (int i = 0; i < 4; ++i) {
        auto r = testsupport::draw_records(
            1, testsupport::one_hot(i < 3 ? Outcome::Strikeout : Outcome::Walk,
                                    1e-12),
            g);
        recs.push_back(r[0]);  // all R vs R: same-hand stratum
    }
    auto opp = testsupport::draw_records(
        1, testsupport::one_hot(Outcome::Strikeout, 1e-12), g);
    opp[0].batter_hand = 'L';
    recs.push_back(opp[0]);
    LeagueRates lr = league_rates(recs);
    CHECK(lr.at(Handedness::Same)[0] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(lr.at(Handedness::Same)[1] == doctest::Approx(0.25).epsilon(1e-12));
    for (int i = 2; i < kNumOutcomes; ++i)
        CHECK(lr.at(Handedness::Same)[i] == doctest::Approx(0.0));
}

TEST_CASE("league rates require both handedness strata") {
    std::mt19937_64 g(6);
    auto recs =
        testsupport::draw_records(5, testsupport::league_simplex(), g);
    // All records R vs R: the opposite-hand stratum is empty.
    CHECK_THROWS_AS(league_rates(recs), InsufficientDataError);
}

TEST_CASE("order rates: single-outcome stratum before shrinkage has mass 1") {
    std::mt19937_64 g(7);
    auto recs = testsupport::draw_records(
        40, testsupport::one_hot(Outcome::HomeRun, 1e-12), g);
    for (auto& r : recs) r.batting_order = 1;
    auto opp = testsupport::draw_records(
        40, testsupport::one_hot(Outcome::HomeRun, 1e-12), g);
    for (auto& r : opp) {
        r.batting_order = 1;
        r.batter_hand = 'L';
    }
    recs.insert(recs.end(), opp.begin(), opp.end());
    LeagueRates lr = league_rates(recs);
    OrderRates orr = batting_order_rates(recs, lr, /*shrinkage=*/0);
    CHECK(orr.at(1, Handedness::Same)[8] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("order rates: empty stratum falls back to league rates") {
    std::mt19937_64 g(8);
    auto recs =
        testsupport::draw_records(200, testsupport::league_simplex(), g);
    for (auto& r : recs) r.batting_order = 1;
    auto opp = testsupport::draw_records(
        200, testsupport::league_simplex(), g,
        [] {
            testsupport::RecordGenConfig c;
            c.batter_hand = 'L';
            return c;
        }());
    for (auto& r : opp) r.batting_order = 1;
    recs.insert(recs.end(), opp.begin(), opp.end());
    LeagueRates lr = league_rates(recs);
    OrderRates orr = batting_order_rates(recs, lr, 100);
    for (int i = 0; i < kNumOutcomes; ++i) {
        CHECK(orr.at(5, Handedness::Same)[i] ==
              doctest::Approx(lr.at(Handedness::Same)[i]).epsilon(1e-12));
    }
}

TEST_CASE("order rates: 50 records shrink by the stated pseudo-count rule") {
    std::mt19937_64 g(9);
    // 50 strikeouts in order slot 2, well-spread league mix elsewhere.
    auto stratum = testsupport::draw_records(
        50, testsupport::one_hot(Outcome::Strikeout, 1e-12), g);
    for (auto& r : stratum) r.batting_order = 2;
    auto rest =
        testsupport::draw_records(400, testsupport::league_simplex(), g);
    for (auto& r : rest) r.batting_order = 7;
    auto opp = testsupport::draw_records(
        50, testsupport::league_simplex(), g,
        [] {
            testsupport::RecordGenConfig c;
            c.batter_hand = 'L';
            return c;
        }());
    std::vector<PlateAppearanceRecord> recs;
    recs.insert(recs.end(), stratum.begin(), stratum.end());
    recs.insert(recs.end(), rest.begin(), rest.end());
    recs.insert(recs.end(), opp.begin(), opp.end());
    LeagueRates lr = league_rates(recs);
    OrderRates orr = batting_order_rates(recs, lr, 100);
    const Simplex9& c = lr.at(Handedness::Same);
    for (int i = 0; i < kNumOutcomes; ++i) {
        double freq = (i == 0) ? 1.0 : 0.0;
        double want = (50.0 * freq + 100.0 * c[i]) / 150.0;
        CHECK(orr.at(2, Handedness::Same)[i] ==
              doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("emitted rate vectors are simplices") {
    std::mt19937_64 g(10);
    auto recs =
        testsupport::draw_records(700, testsupport::league_simplex(), g);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        recs[i].batting_order = static_cast<int>(i % 9) + 1;
        if (i % 3 == 0) recs[i].batter_hand = 'L';
    }
    LeagueRates lr = league_rates(recs);
    OrderRates orr = batting_order_rates(recs, lr, 100);
    for (int h = 0; h < 2; ++h) {
        double s = 0.0;
        for (double v : lr.by_hand[h]) {
            CHECK(v >= 0.0);
            s += v;
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        for (int m = 1; m <= 9; ++m) {
            double so = 0.0;
            for (double v : orr.at(m, static_cast<Handedness>(h))) {
                CHECK(v >= 0.0);
                so += v;
            }
            CHECK(so == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}
