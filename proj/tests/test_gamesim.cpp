// The game state machine: roster validation and persistence, prepared
// matchups, decision legality and application, plate-appearance stepping,
// the half-inning consultation protocol, full-game traces, extra-inning
// rules, and batched seed-stable simulation.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstring>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "matchup/gamesim.hpp"
#include "matchup/rng.hpp"
#include "synthetic.hpp"

using namespace matchup;
using namespace testsupport;
using doctest::Approx;

namespace {

// Both lineups driven by per-slot one-hot outcome distributions through a
// single shared model (batter identity selects the row, so one model can
// serve both batting sides). Bench players fall back to league rates.
struct MatchFixture {
    Roster away = simple_roster("a");
    Roster home = simple_roster("h");
    MatchupModel model;
    PreparedMatch pm;

    MatchFixture(const std::array<Outcome, 9>& away_out,
                 const std::array<Outcome, 9>& home_out,
                 GameRules rules = {}) {
        std::map<std::string, Simplex9> batters;
        for (int i = 0; i < 9; ++i) {
            batters["ab" + std::to_string(i + 1)] = one_hot(away_out[i]);
            batters["hb" + std::to_string(i + 1)] = one_hot(home_out[i]);
        }
        model = unit_model({}, batters);
        pm = PreparedMatch::build(away, home, model, model, rules);
    }
};

std::array<Outcome, 9> all_of(Outcome o) {
    std::array<Outcome, 9> a;
    a.fill(o);
    return a;
}

std::array<Outcome, 9> k_except(int slot, Outcome o) {
    std::array<Outcome, 9> a = all_of(Outcome::Strikeout);
    a[slot] = o;
    return a;
}

// Returns queued choices in consultation order, NoAction after exhaustion,
// and counts how often it was asked.
struct QueuedPolicy : GamePolicy {
    std::vector<PolicyChoice> queue;
    int consults = 0;

    PolicyChoice choose(const GameState&, int, const PreparedMatch&) override {
        int i = consults++;
        if (i < static_cast<int>(queue.size())) return queue[i];
        return {};
    }
};

PolicyChoice choice(Decision d, double mean = 0.0, double se = 0.0,
                    int alternatives = 0) {
    PolicyChoice c;
    c.decision = d;
    c.value_mean = mean;
    c.value_se = se;
    c.alternatives_considered = alternatives;
    return c;
}

bool states_equal(const GameState& a, const GameState& b) {
    return std::memcmp(&a, &b, sizeof(GameState)) == 0;
}

}  // namespace

TEST_CASE("roster validation rejects malformed clubs") {
    Roster good = simple_roster("t", 2, 2);
    CHECK_NOTHROW(good.validate());
    CHECK(good.starter_index() == 0);

    Roster r = good;
    r.starter = "tp2";
    CHECK(r.starter_index() == 1);

    r = good;
    r.lineup.resize(8);
    CHECK_THROWS_WITH_AS(r.validate(),
                         doctest::Contains("lineup must have exactly 9"),
                         std::invalid_argument);

    r = good;
    r.lineup[3].id = r.lineup[4].id;
    CHECK_THROWS_WITH_AS(r.validate(),
                         doctest::Contains("duplicate player across lineup/bench"),
                         std::invalid_argument);

    r = good;
    r.bench[0].id = r.lineup[0].id;
    CHECK_THROWS_WITH_AS(r.validate(),
                         doctest::Contains("duplicate player across lineup/bench"),
                         std::invalid_argument);

    r = good;
    r.pitchers[1].id = r.pitchers[0].id;
    CHECK_THROWS_WITH_AS(r.validate(), doctest::Contains("duplicate pitcher"),
                         std::invalid_argument);

    r = good;
    r.lineup[0].hand = 'X';
    CHECK_THROWS_WITH_AS(r.validate(), doctest::Contains("hand must be L or R"),
                         std::invalid_argument);

    r = good;
    r.bench[1].id = "";
    CHECK_THROWS_WITH_AS(r.validate(), doctest::Contains("empty player id"),
                         std::invalid_argument);

    r = good;
    r.starter = "nobody";
    CHECK_THROWS_WITH_AS(r.validate(),
                         doctest::Contains("is not among the pitchers"),
                         std::invalid_argument);

    r = good;
    r.pitchers.clear();
    CHECK_THROWS_WITH_AS(r.validate(), doctest::Contains("need 1..32 pitchers"),
                         std::invalid_argument);

    r = good;
    for (int i = 0; i < 31; ++i)
        r.pitchers.push_back({"extra_p" + std::to_string(i), 'R'});
    CHECK(r.pitchers.size() == 33);
    CHECK_THROWS_WITH_AS(r.validate(), doctest::Contains("need 1..32 pitchers"),
                         std::invalid_argument);

    r = good;
    for (int i = 0; i < 31; ++i)
        r.bench.push_back({"extra_b" + std::to_string(i), 'R'});
    CHECK(r.bench.size() == 33);
    CHECK_THROWS_WITH_AS(r.validate(),
                         doctest::Contains("bench larger than 32"),
                         std::invalid_argument);
}

TEST_CASE("roster json round trip and schema rejection") {
    Roster r = simple_roster("t", 2, 3, "LRLRLRLRL");
    std::string text = roster_to_json(r);
    Roster back = roster_from_json(text);
    CHECK(roster_to_json(back) == text);
    CHECK(back.lineup.size() == 9);
    CHECK(back.lineup[0].id == "tb1");
    CHECK(back.lineup[0].hand == 'L');
    CHECK(back.lineup[1].hand == 'R');
    CHECK(back.bench.size() == 2);
    CHECK(back.pitchers.size() == 3);
    CHECK(back.starter == "tp1");

    auto corrupt = [&](auto edit) {
        nlohmann::ordered_json j = nlohmann::ordered_json::parse(text);
        edit(j);
        return j.dump();
    };

    // A missing bench key means an empty bench, not an error.
    Roster no_bench =
        roster_from_json(corrupt([](auto& j) { j.erase("bench"); }));
    CHECK(no_bench.bench.empty());

    CHECK_THROWS_WITH_AS(roster_from_json("{not json"),
                         doctest::Contains("parse error"), SchemaError);
    CHECK_THROWS_WITH_AS(roster_from_json("[1, 2]"),
                         doctest::Contains("not an object"), SchemaError);
    CHECK_THROWS_AS(
        roster_from_json(corrupt([](auto& j) { j.erase("lineup"); })),
        SchemaError);
    CHECK_THROWS_WITH_AS(
        roster_from_json(corrupt([](auto& j) { j["lineup"][0].erase("hand"); })),
        doctest::Contains("entries need id and hand"), SchemaError);
    CHECK_THROWS_WITH_AS(
        roster_from_json(corrupt([](auto& j) { j["lineup"][0]["hand"] = "RR"; })),
        doctest::Contains("hand must be a single character"), SchemaError);
    CHECK_THROWS_WITH_AS(
        roster_from_json(corrupt([](auto& j) { j["lineup"].erase(8); })),
        doctest::Contains("lineup must have exactly 9"), SchemaError);
    CHECK_THROWS_WITH_AS(
        roster_from_json(corrupt([](auto& j) { j["starter"] = "zz"; })),
        doctest::Contains("is not among the pitchers"), SchemaError);

    auto dir = fresh_dir("roster_io");
    write_text(dir / "r.json", text);
    Roster loaded = load_roster((dir / "r.json").string());
    CHECK(roster_to_json(loaded) == text);
    CHECK_THROWS_WITH_AS(load_roster((dir / "absent.json").string()),
                         doctest::Contains("cannot open roster file"),
                         std::runtime_error);
}

TEST_CASE("prepared match resolves lineups, distributions, and tables") {
    // Away slot i bats outcome i; the nine slots cover all nine outcomes.
    std::array<Outcome, 9> away_out;
    for (int i = 0; i < 9; ++i) away_out[i] = static_cast<Outcome>(i);
    MatchFixture fix(away_out, all_of(Outcome::Strikeout));
    const PreparedMatch& pm = fix.pm;

    REQUIRE(pm.batters[kAway].size() == 10);  // 9 lineup + 1 bench
    CHECK(pm.batters[kAway][0].id == "ab1");
    CHECK(pm.batters[kAway][9].id == "ax1");
    CHECK(pm.batters[kHome][9].id == "hx1");
    CHECK(pm.starter[kAway] == 0);
    CHECK(pm.starter[kHome] == 0);

    for (int pi = 0; pi < 2; ++pi) {
        for (int uid = 0; uid < 10; ++uid) {
            for (int slot = 0; slot < 9; ++slot) {
                const Simplex9& c = pm.cum_dist(kAway, pi, uid, slot);
                for (int i = 1; i < kNumOutcomes; ++i) CHECK(c[i] >= c[i - 1]);
                CHECK(c[8] == Approx(1.0).epsilon(1e-12));
            }
        }
    }

    // Parametric batters: the lineup slot does not matter, the identity does.
    CHECK(pm.cum_dist(kAway, 0, 3, 0) == pm.cum_dist(kAway, 0, 3, 7));
    CHECK(pm.cum_dist(kAway, 0, 0, 0)[0] == Approx(1.0).epsilon(1e-5));
    const Simplex9& hr = pm.cum_dist(kAway, 0, 8, 0);
    CHECK(hr[8] - hr[7] == Approx(1.0).epsilon(1e-5));

    // Without a steal model every batter shares the league transition table.
    for (int s = 0; s < 2; ++s)
        for (int uid = 0; uid < 10; ++uid)
            CHECK(pm.tables[s][uid] == pm.tables[kAway][0]);
    CHECK(pm.tables[kAway][0] == &fix.model.transition_table("ab1"));

    GameState st = pm.initial_state();
    CHECK(st.inning == 1);
    CHECK(st.half == Half::Top);
    CHECK(st.base_out == BaseOutState{0, 0});
    CHECK(st.decisions_offered == 0);
    CHECK_FALSE(st.pending_walk);
    CHECK_FALSE(st.finished);
    CHECK(st.winner == -1);
    for (int s = 0; s < 2; ++s) {
        for (int k = 0; k < 9; ++k) CHECK(st.teams[s].slot_batter[k] == k);
        CHECK(st.teams[s].next_slot == 0);
        CHECK(st.teams[s].pitcher == 0);
        CHECK(st.teams[s].pitchers_used == 1u);
        CHECK(st.teams[s].bench_used == 0u);
        CHECK(st.teams[s].runs == 0);
        CHECK(st.teams[s].batters_faced == 0);
    }

    Roster broken = simple_roster("z");
    broken.lineup.resize(8);
    CHECK_THROWS_AS(PreparedMatch::build(broken, fix.home, fix.model,
                                         fix.model, GameRules{}),
                    std::invalid_argument);
}

TEST_CASE("legal decisions enumerate substitutions and the intentional walk") {
    MatchFixture fix(all_of(Outcome::Strikeout), all_of(Outcome::Strikeout));
    GameState st = fix.pm.initial_state();

    // Batting side: NoAction first, then a pinch hitter for the slot due up.
    auto batting = legal_decisions(st, fix.pm, kAway);
    REQUIRE(batting.size() == 2);
    CHECK(batting[0] == Decision{});
    CHECK(batting[1] == Decision{Decision::Kind::PinchHit, 0, 0});

    st.teams[kAway].next_slot = 5;
    batting = legal_decisions(st, fix.pm, kAway);
    CHECK(batting[1] == Decision{Decision::Kind::PinchHit, 0, 5});
    st.teams[kAway].next_slot = 0;

    // Fielding side, bases empty: the unused reliever and the free pass.
    auto fielding = legal_decisions(st, fix.pm, kHome);
    REQUIRE(fielding.size() == 3);
    CHECK(fielding[0] == Decision{});
    CHECK(fielding[1] == Decision{Decision::Kind::ChangePitcher, 1, -1});
    CHECK(fielding[2] == Decision{Decision::Kind::IntentionalWalk, -1, -1});

    // A runner on first removes the intentional walk.
    st.base_out = BaseOutState{0, 1};
    fielding = legal_decisions(st, fix.pm, kHome);
    REQUIRE(fielding.size() == 2);
    CHECK(fielding[1] == Decision{Decision::Kind::ChangePitcher, 1, -1});

    // Exhausted bench and bullpen leave NoAction alone.
    st.teams[kAway].bench_used = 1u;
    CHECK(legal_decisions(st, fix.pm, kAway) ==
          std::vector<Decision>{Decision{}});
    st.teams[kHome].pitchers_used = 0b11u;
    CHECK(legal_decisions(st, fix.pm, kHome) ==
          std::vector<Decision>{Decision{}});
    st.base_out = BaseOutState{0, 0};
    auto only_walk = legal_decisions(st, fix.pm, kHome);
    REQUIRE(only_walk.size() == 2);
    CHECK(only_walk[1].kind == Decision::Kind::IntentionalWalk);

    // A finished game offers nothing.
    st.finished = true;
    CHECK(legal_decisions(st, fix.pm, kAway) ==
          std::vector<Decision>{Decision{}});
    CHECK(legal_decisions(st, fix.pm, kHome) ==
          std::vector<Decision>{Decision{}});

    // Deeper roster: pitchers enumerate in bullpen order before the walk.
    Roster big_home = simple_roster("m", 3, 4);
    MatchupModel league = unit_model({}, {});
    PreparedMatch pm2 = PreparedMatch::build(fix.away, big_home, league,
                                             league, GameRules{});
    GameState st2 = pm2.initial_state();
    auto deep = legal_decisions(st2, pm2, kHome);
    REQUIRE(deep.size() == 5);
    CHECK(deep[1] == Decision{Decision::Kind::ChangePitcher, 1, -1});
    CHECK(deep[2] == Decision{Decision::Kind::ChangePitcher, 2, -1});
    CHECK(deep[3] == Decision{Decision::Kind::ChangePitcher, 3, -1});
    CHECK(deep[4].kind == Decision::Kind::IntentionalWalk);
}

TEST_CASE("decision application mutates state and rejects violations") {
    MatchFixture fix(all_of(Outcome::Strikeout), all_of(Outcome::Strikeout));
    const PreparedMatch& pm = fix.pm;
    GameState st = pm.initial_state();

    GameState before = st;
    apply_decision(st, pm, kAway, Decision{});
    CHECK(states_equal(st, before));

    SUBCASE("pitcher changes") {
        apply_decision(st, pm, kHome,
                       Decision{Decision::Kind::ChangePitcher, 1, -1});
        CHECK(st.teams[kHome].pitcher == 1);
        CHECK(st.teams[kHome].pitchers_used == 0b11u);
        CHECK(st.teams[kHome].batters_faced == 0);
        CHECK_THROWS_WITH_AS(
            apply_decision(st, pm, kHome,
                           Decision{Decision::Kind::ChangePitcher, 1, -1}),
            doctest::Contains("pitcher already used: hp2"), GameProtocolError);
        CHECK_THROWS_WITH_AS(
            apply_decision(st, pm, kHome,
                           Decision{Decision::Kind::ChangePitcher, 0, -1}),
            doctest::Contains("pitcher already used: hp1"), GameProtocolError);
        CHECK_THROWS_WITH_AS(
            apply_decision(st, pm, kHome,
                           Decision{Decision::Kind::ChangePitcher, 5, -1}),
            doctest::Contains("no such pitcher index 5"), GameProtocolError);
        CHECK_THROWS_WITH_AS(
            apply_decision(st, pm, kAway,
                           Decision{Decision::Kind::ChangePitcher, 1, -1}),
            doctest::Contains("offered by the batting side"),
            GameProtocolError);
    }

    SUBCASE("pinch hits") {
        apply_decision(st, pm, kAway, Decision{Decision::Kind::PinchHit, 0, 0});
        CHECK(st.teams[kAway].slot_batter[0] == 9);
        CHECK(st.teams[kAway].bench_used == 1u);
        CHECK_THROWS_WITH_AS(
            apply_decision(st, pm, kAway,
                           Decision{Decision::Kind::PinchHit, 0, 0}),
            doctest::Contains("bench player already used: ax1"),
            GameProtocolError);
        GameState fresh = pm.initial_state();
        CHECK_THROWS_WITH_AS(
            apply_decision(fresh, pm, kAway,
                           Decision{Decision::Kind::PinchHit, 0, 3}),
            doctest::Contains("only the current lineup slot"),
            GameProtocolError);
        CHECK_THROWS_WITH_AS(
            apply_decision(fresh, pm, kAway,
                           Decision{Decision::Kind::PinchHit, 7, 0}),
            doctest::Contains("no such bench index 7"), GameProtocolError);
        CHECK_THROWS_WITH_AS(
            apply_decision(fresh, pm, kHome,
                           Decision{Decision::Kind::PinchHit, 0, 0}),
            doctest::Contains("offered by the fielding side"),
            GameProtocolError);
    }

    SUBCASE("intentional walks") {
        apply_decision(st, pm, kHome,
                       Decision{Decision::Kind::IntentionalWalk, -1, -1});
        CHECK(st.pending_walk);
        GameState occupied = pm.initial_state();
        occupied.base_out = BaseOutState{0, 1};
        CHECK_THROWS_WITH_AS(
            apply_decision(occupied, pm, kHome,
                           Decision{Decision::Kind::IntentionalWalk, -1, -1}),
            doctest::Contains("first base occupied"), GameProtocolError);
        CHECK_THROWS_WITH_AS(
            apply_decision(occupied, pm, kAway,
                           Decision{Decision::Kind::IntentionalWalk, -1, -1}),
            doctest::Contains("offered by the batting side"),
            GameProtocolError);
    }
}

TEST_CASE("plate appearance stepping samples, forces walks, and walks off") {
    SUBCASE("a sampled home run scores and advances the lineup") {
        MatchFixture fix(k_except(0, Outcome::HomeRun),
                         all_of(Outcome::Strikeout));
        GameState st = fix.pm.initial_state();
        Engine eng = make_engine(1, 2);
        step_plate_appearance(st, fix.pm, eng);
        CHECK(st.teams[kAway].runs == 1);
        CHECK(st.base_out == BaseOutState{0, 0});
        CHECK(st.teams[kAway].next_slot == 1);
        CHECK(st.teams[kHome].batters_faced == 1);
        CHECK_FALSE(st.finished);
    }

    SUBCASE("a pending walk resolves without sampling, to the pinch hitter") {
        MatchFixture fix(all_of(Outcome::Strikeout), all_of(Outcome::Strikeout));
        GameState st = fix.pm.initial_state();
        apply_decision(st, fix.pm, kHome,
                       Decision{Decision::Kind::IntentionalWalk, -1, -1});
        apply_decision(st, fix.pm, kAway,
                       Decision{Decision::Kind::PinchHit, 0, 0});
        CHECK(st.pending_walk);  // survives the pinch hit
        Engine eng = make_engine(3, 4);
        Engine untouched = make_engine(3, 4);
        step_plate_appearance(st, fix.pm, eng);
        CHECK(eng == untouched);  // forced transition consumed no randomness
        CHECK_FALSE(st.pending_walk);
        CHECK(st.base_out == BaseOutState{0, 1});
        CHECK(st.teams[kAway].runs == 0);
        CHECK(st.teams[kAway].next_slot == 1);
        CHECK(st.teams[kAway].slot_batter[0] == 9);
        CHECK(st.teams[kHome].batters_faced == 1);
    }

    SUBCASE("the walk-off check ends the game the moment home leads late") {
        MatchFixture fix(all_of(Outcome::Strikeout),
                         k_except(0, Outcome::HomeRun));
        GameState st = fix.pm.initial_state();
        st.inning = 9;
        st.half = Half::Bottom;
        st.base_out = BaseOutState{1, 1};
        st.teams[kAway].runs = 3;
        st.teams[kHome].runs = 3;
        Engine eng = make_engine(5, 6);
        step_plate_appearance(st, fix.pm, eng);
        CHECK(st.teams[kHome].runs == 5);
        CHECK(st.finished);
        CHECK(st.winner == kHome);

        // Same swing in the eighth merely changes the score.
        GameState early = fix.pm.initial_state();
        early.inning = 8;
        early.half = Half::Bottom;
        early.base_out = BaseOutState{1, 1};
        early.teams[kAway].runs = 3;
        early.teams[kHome].runs = 3;
        step_plate_appearance(early, fix.pm, eng);
        CHECK(early.teams[kHome].runs == 5);
        CHECK_FALSE(early.finished);

        // Still trailing after the swing: play continues in the ninth.
        GameState behind = fix.pm.initial_state();
        behind.inning = 9;
        behind.half = Half::Bottom;
        behind.teams[kAway].runs = 3;
        step_plate_appearance(behind, fix.pm, eng);
        CHECK(behind.teams[kHome].runs == 1);
        CHECK_FALSE(behind.finished);
    }
}

TEST_CASE("half inning protocol: consultation order, re-offers, and logging") {
    SUBCASE("scripted outcomes produce the hand trace") {
        // Single, home run, then three strikeouts: two runs, five batters.
        std::array<Outcome, 9> seq = all_of(Outcome::Strikeout);
        seq[0] = Outcome::Single;
        seq[1] = Outcome::HomeRun;
        MatchFixture fix(seq, all_of(Outcome::Strikeout));
        GameState st = fix.pm.initial_state();
        Engine eng = make_engine(7, 8);
        GameResult res;
        simulate_half_inning(st, fix.pm, nullptr, nullptr, eng, &res);
        CHECK(st.teams[kAway].runs == 2);
        CHECK(st.teams[kAway].next_slot == 5);
        CHECK(st.base_out.is_terminal());
        CHECK(st.decisions_offered == 0);
        CHECK(res.decisions.empty());
        CHECK(st.teams[kHome].batters_faced == 5);
        CHECK_FALSE(st.finished);
        CHECK(st.half == Half::Top);  // the caller owns half transitions
    }

    SUBCASE("a tied bottom ninth ends immediately on the winning swing") {
        MatchFixture fix(all_of(Outcome::Strikeout),
                         k_except(0, Outcome::HomeRun));
        GameState st = fix.pm.initial_state();
        st.inning = 9;
        st.half = Half::Bottom;
        Engine eng = make_engine(9, 10);
        GameResult res;
        simulate_half_inning(st, fix.pm, nullptr, nullptr, eng, &res);
        CHECK(st.finished);
        CHECK(st.winner == kHome);
        CHECK(st.teams[kHome].runs == 1);
        CHECK(st.teams[kHome].next_slot == 1);  // exactly one plate appearance
    }

    SUBCASE("a fielding move re-offers the batting side once") {
        MatchFixture fix(all_of(Outcome::Strikeout), all_of(Outcome::Strikeout));
        GameState st = fix.pm.initial_state();
        QueuedPolicy batting;  // always NoAction, counts consultations
        QueuedPolicy fielding;
        fielding.queue = {
            choice(Decision{Decision::Kind::ChangePitcher, 1, -1}, 0.61, 0.02,
                   3)};
        Engine eng = make_engine(11, 12);
        GameResult res;
        simulate_half_inning(st, fix.pm, &batting, &fielding, eng, &res);
        // PA 1: batting, fielding acts, batting again. PAs 2 and 3: both
        // sides once. Seven consultations, four for the batting side.
        CHECK(st.decisions_offered == 7);
        CHECK(batting.consults == 4);
        CHECK(fielding.consults == 3);
        REQUIRE(res.decisions.size() == 1);
        const DecisionLogEntry& e = res.decisions[0];
        CHECK(e.inning == 1);
        CHECK(e.half == Half::Top);
        CHECK(e.side == kHome);
        CHECK(e.decision == Decision{Decision::Kind::ChangePitcher, 1, -1});
        CHECK(e.player_id == "hp2");
        CHECK(e.value_mean == 0.61);
        CHECK(e.value_se == 0.02);
        CHECK(e.alternatives_considered == 3);
        CHECK(st.teams[kHome].pitcher == 1);
        CHECK(st.teams[kHome].batters_faced == 3);
    }

    SUBCASE("an ordered walk survives the batting side's pinch hit") {
        MatchFixture fix(all_of(Outcome::Strikeout), all_of(Outcome::Strikeout));
        GameState st = fix.pm.initial_state();
        QueuedPolicy batting;
        batting.queue = {choice(Decision{}),
                         choice(Decision{Decision::Kind::PinchHit, 0, 0})};
        QueuedPolicy fielding;
        fielding.queue = {
            choice(Decision{Decision::Kind::IntentionalWalk, -1, -1}, 0.25,
                   0.125, 2)};
        Engine eng = make_engine(13, 14);
        GameResult res;
        simulate_half_inning(st, fix.pm, &batting, &fielding, eng, &res);
        // Walk plus three strikeouts; the runner dies on first.
        CHECK(st.teams[kAway].runs == 0);
        CHECK(st.teams[kAway].next_slot == 4);
        CHECK(st.base_out.is_terminal());
        CHECK(st.decisions_offered == 9);
        REQUIRE(res.decisions.size() == 2);
        CHECK(res.decisions[0].side == kHome);
        CHECK(res.decisions[0].decision.kind ==
              Decision::Kind::IntentionalWalk);
        CHECK(res.decisions[0].player_id == "");
        CHECK(res.decisions[0].value_mean == 0.25);
        CHECK(res.decisions[0].alternatives_considered == 2);
        CHECK(res.decisions[1].side == kAway);
        CHECK(res.decisions[1].decision.kind == Decision::Kind::PinchHit);
        CHECK(res.decisions[1].player_id == "ax1");
        CHECK(st.teams[kAway].slot_batter[0] == 9);
    }
}

TEST_CASE("full games: hand-traced outcomes") {
    SUBCASE("leadoff home runs every cycle beat silence four to nothing") {
        // Away plate appearances 1, 10, 19, 28 belong to the leadoff slot;
        // 31 away PAs fit exactly 27 outs plus those four home runs. Home
        // trails, so the bottom of the ninth is still played.
        MatchFixture fix(k_except(0, Outcome::HomeRun),
                         all_of(Outcome::Strikeout));
        GameResult res = simulate_game(fix.pm, nullptr, nullptr, 21);
        CHECK(res.winner == kAway);
        CHECK(res.score == std::array<int, 2>{4, 0});
        CHECK(res.innings == 9);
        CHECK_FALSE(res.capped);
        CHECK(res.decisions.empty());
    }

    SUBCASE("a home lead after the top of the ninth skips the bottom") {
        // Home's leadoff slot bats in the first, third, and sixth innings
        // only (27 PAs through eight frames), so the lead is exactly three
        // when the check fires; a played bottom ninth would make it four.
        MatchFixture fix(all_of(Outcome::Strikeout),
                         k_except(0, Outcome::HomeRun));
        GameResult res = simulate_game(fix.pm, nullptr, nullptr, 22);
        CHECK(res.winner == kHome);
        CHECK(res.score == std::array<int, 2>{0, 3});
        CHECK(res.innings == 9);
        CHECK_FALSE(res.capped);
    }

    SUBCASE("the placed runner decides the tenth on a leadoff double") {
        // Home slot four doubles in innings 2, 4, and 7 with the bases
        // empty each time, so regulation ends scoreless with the slot due
        // up first in the tenth. The double then scores only the runner
        // placed on second: an immediate one-run walk-off, tenth inning.
        MatchFixture fix(all_of(Outcome::Strikeout),
                         k_except(3, Outcome::Double));
        GameResult res = simulate_game(fix.pm, nullptr, nullptr, 23);
        CHECK(res.winner == kHome);
        CHECK(res.score == std::array<int, 2>{0, 1});
        CHECK(res.innings == 10);
        CHECK_FALSE(res.capped);
    }

    SUBCASE("identical seeds reproduce the game exactly") {
        MatchupModel league = unit_model({}, {});
        Roster away = simple_roster("a");
        Roster home = simple_roster("h");
        PreparedMatch pm =
            PreparedMatch::build(away, home, league, league, GameRules{});
        GameResult a = simulate_game(pm, nullptr, nullptr, 424242);
        GameResult b = simulate_game(pm, nullptr, nullptr, 424242);
        CHECK(a.winner == b.winner);
        CHECK(a.score == b.score);
        CHECK(a.innings == b.innings);
        CHECK(a.capped == b.capped);
        CHECK(a.decisions.size() == b.decisions.size());
    }
}

TEST_CASE("extra innings: strict cap error, tournament flip, rollout flip") {
    MatchFixture strict(all_of(Outcome::Strikeout), all_of(Outcome::Strikeout));
    CHECK_THROWS_WITH_AS(simulate_game(strict.pm, nullptr, nullptr, 31),
                         doctest::Contains("tied after inning 30"),
                         GameCapError);

    MatchFixture tourney(all_of(Outcome::Strikeout), all_of(Outcome::Strikeout),
                         GameRules{0, true});
    GameResult res = simulate_game(tourney.pm, nullptr, nullptr, 32);
    CHECK(res.capped);
    CHECK(res.innings == 30);
    CHECK(res.score == std::array<int, 2>{0, 0});
    CHECK((res.winner == kAway || res.winner == kHome));

    // Rollouts must never abort: the same deadlock resolves by coin flip
    // even under strict rules.
    GameState st = strict.pm.initial_state();
    Engine eng = make_engine(33, 34);
    int w = play_out_passive(st, strict.pm, eng);
    CHECK((w == kAway || w == kHome));
}

TEST_CASE("the placed runner appears for the visitors as well") {
    // Hand the away side a leadoff double to open the tenth. Strikeouts
    // never advance the placed runner, so a run here can only be the
    // runner scoring from second; home then strands its own placed runner.
    MatchFixture fix(k_except(0, Outcome::Double), all_of(Outcome::Strikeout));
    GameState st = fix.pm.initial_state();
    st.inning = 9;
    st.half = Half::Bottom;
    st.base_out = BaseOutState::terminal();
    Engine eng = make_engine(35, 36);
    CHECK(play_out_passive(st, fix.pm, eng) == kAway);
}

TEST_CASE("pitcher fatigue cap forces automatic replacements") {
    MatchFixture fix(all_of(Outcome::Strikeout), all_of(Outcome::Strikeout),
                     GameRules{3, true});
    GameResult res = simulate_game(fix.pm, nullptr, nullptr, 40);
    CHECK(res.capped);  // still scoreless, decided by the tournament flip
    // Each starter faces three batters in the first inning and must be
    // replaced before the second; no pitchers remain after that.
    REQUIRE(res.decisions.size() == 2);
    const DecisionLogEntry& top = res.decisions[0];
    CHECK(top.inning == 2);
    CHECK(top.half == Half::Top);
    CHECK(top.side == kHome);
    CHECK(top.decision == Decision{Decision::Kind::ChangePitcher, 1, -1});
    CHECK(top.player_id == "hp2");
    CHECK(top.value_mean == 0.0);
    CHECK(top.value_se == 0.0);
    CHECK(top.alternatives_considered == 0);
    const DecisionLogEntry& bottom = res.decisions[1];
    CHECK(bottom.inning == 2);
    CHECK(bottom.half == Half::Bottom);
    CHECK(bottom.side == kAway);
    CHECK(bottom.player_id == "ap2");
}

TEST_CASE("batched simulation is seed stable across worker counts") {
    MatchupModel league = unit_model({}, {});
    Roster away = simple_roster("a");
    Roster home = simple_roster("h");
    PreparedMatch pm =
        PreparedMatch::build(away, home, league, league, GameRules{});

    ManyResult r1 = simulate_many(pm, nullptr, nullptr, 12, 99, 1, true);
    ManyResult r3 = simulate_many(pm, nullptr, nullptr, 12, 99, 3, true);
    ManyResult r0 = simulate_many(pm, nullptr, nullptr, 12, 99, 0, false);
    CHECK(serialize_game_summaries(r1.games) ==
          serialize_game_summaries(r3.games));
    CHECK(serialize_game_summaries(r1.games) ==
          serialize_game_summaries(r0.games));
    CHECK(r1.wins == r3.wins);
    CHECK(r1.wins[kAway] + r1.wins[kHome] == 12);
    CHECK(r1.games.size() == 12);
    REQUIRE(r1.full.size() == 12);
    CHECK(r0.full.empty());

    // Summaries agree with the retained full results, and each game is the
    // one a direct call with the derived per-game seed produces.
    for (std::size_t i = 0; i < r1.games.size(); ++i) {
        CHECK(r1.games[i].winner == r1.full[i].winner);
        CHECK(r1.games[i].home_runs == r1.full[i].score[kHome]);
        CHECK(r1.games[i].away_runs == r1.full[i].score[kAway]);
        CHECK(r1.games[i].innings == r1.full[i].innings);
        CHECK(r1.games[i].capped == r1.full[i].capped);
        CHECK(r1.games[i].innings >= 9);
    }
    GameResult direct = simulate_game(pm, nullptr, nullptr, mix64(99, 5));
    CHECK(direct.winner == r1.full[5].winner);
    CHECK(direct.score == r1.full[5].score);
    CHECK(direct.innings == r1.full[5].innings);

    CHECK_THROWS_WITH_AS(simulate_many(pm, nullptr, nullptr, 0, 1),
                         doctest::Contains("n must be >= 1"),
                         std::invalid_argument);
    CHECK_THROWS_AS(simulate_many(pm, nullptr, nullptr, -4, 1),
                    std::invalid_argument);
}

TEST_CASE("result serializers emit stable csv") {
    CHECK(serialize_game_summaries({}) ==
          "game_index,winner,home_runs,away_runs,innings,capped\n");

    GameSummary a;
    a.winner = kHome;
    a.home_runs = 5;
    a.away_runs = 2;
    a.innings = 9;
    a.capped = false;
    GameSummary b;
    b.winner = kAway;
    b.home_runs = 1;
    b.away_runs = 7;
    b.innings = 11;
    b.capped = true;
    CHECK(serialize_game_summaries({a, b}) ==
          "game_index,winner,home_runs,away_runs,innings,capped\n"
          "0,home,5,2,9,0\n"
          "1,away,1,7,11,1\n");

    CHECK(serialize_decision_log({}) ==
          "inning,half,side,decision,player_id,value_mean,value_se,"
          "alternatives_considered\n");

    GameResult g0;
    GameResult g1;
    DecisionLogEntry e;
    e.inning = 7;
    e.half = Half::Bottom;
    e.side = kAway;
    e.decision = Decision{Decision::Kind::PinchHit, 0, 2};
    e.player_id = "px";
    e.value_mean = 0.5;
    e.value_se = 0.25;
    e.alternatives_considered = 3;
    g1.decisions.push_back(e);
    CHECK(serialize_decision_log({g0, g1}) ==
          "inning,half,side,decision,player_id,value_mean,value_se,"
          "alternatives_considered\n"
          "# game 0\n"
          "# game 1\n"
          "7,bottom,away,pinch_hit,px,0.5,0.25,3\n");

    CHECK(decision_kind_name(Decision::Kind::NoAction) == "no_action");
    CHECK(decision_kind_name(Decision::Kind::ChangePitcher) ==
          "change_pitcher");
    CHECK(decision_kind_name(Decision::Kind::PinchHit) == "pinch_hit");
    CHECK(decision_kind_name(Decision::Kind::IntentionalWalk) ==
          "intentional_walk");
}
