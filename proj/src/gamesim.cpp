#include "matchup/gamesim.hpp"

#include <algorithm>
#include <charconv>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace matchup {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kGameStream = 0x6A3E5EEDULL;

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

}  // namespace

int Roster::starter_index() const {
    for (std::size_t i = 0; i < pitchers.size(); ++i)
        if (pitchers[i].id == starter) return static_cast<int>(i);
    throw std::invalid_argument("starter '" + starter +
                                "' is not among the pitchers");
}

void Roster::validate() const {
    if (lineup.size() != 9)
        throw std::invalid_argument("lineup must have exactly 9 batters");
    if (bench.size() > 32)
        throw std::invalid_argument("bench larger than 32 not supported");
    if (pitchers.empty() || pitchers.size() > 32)
        throw std::invalid_argument("need 1..32 pitchers");
    auto check_player = [](const Player& p, const char* where) {
        if (p.id.empty())
            throw std::invalid_argument(std::string(where) +
                                        ": empty player id");
        if (p.hand != 'L' && p.hand != 'R')
            throw std::invalid_argument(std::string(where) + ": player " +
                                        p.id + " hand must be L or R");
    };
    std::vector<std::string> batter_ids;
    for (const auto& p : lineup) {
        check_player(p, "lineup");
        batter_ids.push_back(p.id);
    }
    for (const auto& p : bench) {
        check_player(p, "bench");
        batter_ids.push_back(p.id);
    }
    std::sort(batter_ids.begin(), batter_ids.end());
    if (std::adjacent_find(batter_ids.begin(), batter_ids.end()) !=
        batter_ids.end())
        throw std::invalid_argument("duplicate player across lineup/bench");
    std::vector<std::string> pids;
    for (const auto& p : pitchers) {
        check_player(p, "pitchers");
        pids.push_back(p.id);
    }
    std::sort(pids.begin(), pids.end());
    if (std::adjacent_find(pids.begin(), pids.end()) != pids.end())
        throw std::invalid_argument("duplicate pitcher");
    starter_index();
}

namespace {

Player player_from_json(const ordered_json& j, const char* where) {
    if (!j.is_object() || !j.contains("id") || !j.contains("hand"))
        throw SchemaError(std::string("roster json: ") + where +
                          " entries need id and hand");
    std::string hand = j["hand"].get<std::string>();
    if (hand.size() != 1)
        throw SchemaError("roster json: hand must be a single character");
    return Player{j["id"].get<std::string>(), hand[0]};
}

ordered_json player_json(const Player& p) {
    return ordered_json{{"id", p.id}, {"hand", std::string(1, p.hand)}};
}

}  // namespace

Roster roster_from_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded()) throw SchemaError("roster json: parse error");
    if (!j.is_object()) throw SchemaError("roster json: not an object");
    Roster r;
    try {
        for (const auto& p : j.at("lineup"))
            r.lineup.push_back(player_from_json(p, "lineup"));
        if (j.contains("bench"))
            for (const auto& p : j["bench"])
                r.bench.push_back(player_from_json(p, "bench"));
        for (const auto& p : j.at("pitchers"))
            r.pitchers.push_back(player_from_json(p, "pitchers"));
        r.starter = j.at("starter").get<std::string>();
    } catch (const ordered_json::exception& e) {
        throw SchemaError(std::string("roster json: ") + e.what());
    }
    try {
        r.validate();
    } catch (const std::invalid_argument& e) {
        throw SchemaError(std::string("roster json: ") + e.what());
    }
    return r;
}

std::string roster_to_json(const Roster& r) {
    ordered_json j;
    ordered_json lineup = ordered_json::array();
    for (const auto& p : r.lineup) lineup.push_back(player_json(p));
    j["lineup"] = std::move(lineup);
    ordered_json bench = ordered_json::array();
    for (const auto& p : r.bench) bench.push_back(player_json(p));
    j["bench"] = std::move(bench);
    ordered_json pitchers = ordered_json::array();
    for (const auto& p : r.pitchers) pitchers.push_back(player_json(p));
    j["pitchers"] = std::move(pitchers);
    j["starter"] = r.starter;
    return j.dump(2) + "\n";
}

Roster load_roster(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open roster file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return roster_from_json(buf.str());
}

std::string_view decision_kind_name(Decision::Kind k) {
    switch (k) {
        case Decision::Kind::NoAction: return "no_action";
        case Decision::Kind::ChangePitcher: return "change_pitcher";
        case Decision::Kind::PinchHit: return "pinch_hit";
        case Decision::Kind::IntentionalWalk: return "intentional_walk";
    }
    throw std::logic_error("decision_kind_name: bad kind");
}

PreparedMatch PreparedMatch::build(const Roster& away, const Roster& home,
                                   const MatchupModel& away_model,
                                   const MatchupModel& home_model,
                                   const GameRules& rules) {
    away.validate();
    home.validate();
    PreparedMatch pm;
    pm.rosters = {&away, &home};
    pm.models = {&away_model, &home_model};
    pm.rules = rules;
    for (int s = 0; s < 2; ++s) {
        pm.starter[s] = pm.rosters[s]->starter_index();
        auto& bat = pm.batters[s];
        bat = pm.rosters[s]->lineup;
        bat.insert(bat.end(), pm.rosters[s]->bench.begin(),
                   pm.rosters[s]->bench.end());
    }
    for (int s = 0; s < 2; ++s) {
        const auto& pitchers = pm.rosters[1 - s]->pitchers;
        const auto& bat = pm.batters[s];
        const MatchupModel& model = *pm.models[s];
        auto& cum = pm.cum[s];
        cum.resize(pitchers.size() * bat.size() * 9);
        for (std::size_t pi = 0; pi < pitchers.size(); ++pi) {
            for (std::size_t b = 0; b < bat.size(); ++b) {
                Handedness h =
                    matchup_handedness(pitchers[pi].hand, bat[b].hand);
                for (int slot = 0; slot < 9; ++slot) {
                    Simplex9 d = model.predict(pitchers[pi].id, bat[b].id,
                                               slot + 1, h);
                    Simplex9 c{};
                    double acc = 0.0;
                    for (int i = 0; i < kNumOutcomes; ++i) {
                        acc += d[i];
                        c[i] = acc;
                    }
                    cum[(pi * bat.size() + b) * 9 + slot] = c;
                }
            }
        }
        auto& tabs = pm.tables[s];
        tabs.resize(bat.size());
        for (std::size_t b = 0; b < bat.size(); ++b)
            tabs[b] = &model.transition_table(bat[b].id);
    }
    return pm;
}

GameState PreparedMatch::initial_state() const {
    GameState st;
    for (int s = 0; s < 2; ++s) {
        TeamState& t = st.teams[s];
        for (int k = 0; k < 9; ++k)
            t.slot_batter[k] = static_cast<std::uint8_t>(k);
        t.pitcher = static_cast<std::uint8_t>(starter[s]);
        t.pitchers_used = 1u << starter[s];
    }
    return st;
}

std::vector<Decision> legal_decisions(const GameState& state,
                                      const PreparedMatch& pm, int side) {
    std::vector<Decision> out;
    out.push_back(Decision{});
    if (state.finished) return out;
    if (side == state.batting_side()) {
        const TeamState& t = state.teams[side];
        std::size_t nb = pm.rosters[side]->bench.size();
        for (std::size_t b = 0; b < nb; ++b)
            if (!(t.bench_used & (1u << b)))
                out.push_back(Decision{Decision::Kind::PinchHit,
                                       static_cast<int>(b), t.next_slot});
    } else {
        const TeamState& t = state.teams[side];
        std::size_t np = pm.rosters[side]->pitchers.size();
        for (std::size_t p = 0; p < np; ++p)
            if (!(t.pitchers_used & (1u << p)))
                out.push_back(Decision{Decision::Kind::ChangePitcher,
                                       static_cast<int>(p), -1});
        if (!state.base_out.first())
            out.push_back(Decision{Decision::Kind::IntentionalWalk, -1, -1});
    }
    return out;
}

void apply_decision(GameState& state, const PreparedMatch& pm, int side,
                    const Decision& d) {
    TeamState& t = state.teams[side];
    switch (d.kind) {
        case Decision::Kind::NoAction:
            return;
        case Decision::Kind::ChangePitcher: {
            if (side != state.fielding_side())
                throw GameProtocolError(
                    "change_pitcher offered by the batting side");
            std::size_t np = pm.rosters[side]->pitchers.size();
            if (d.player < 0 || static_cast<std::size_t>(d.player) >= np)
                throw GameProtocolError("change_pitcher: no such pitcher index " +
                                        std::to_string(d.player));
            if (t.pitchers_used & (1u << d.player))
                throw GameProtocolError(
                    "change_pitcher: pitcher already used: " +
                    pm.rosters[side]->pitchers[d.player].id);
            t.pitcher = static_cast<std::uint8_t>(d.player);
            t.pitchers_used |= 1u << d.player;
            t.batters_faced = 0;
            return;
        }
        case Decision::Kind::PinchHit: {
            if (side != state.batting_side())
                throw GameProtocolError("pinch_hit offered by the fielding side");
            std::size_t nb = pm.rosters[side]->bench.size();
            if (d.player < 0 || static_cast<std::size_t>(d.player) >= nb)
                throw GameProtocolError("pinch_hit: no such bench index " +
                                        std::to_string(d.player));
            if (t.bench_used & (1u << d.player))
                throw GameProtocolError("pinch_hit: bench player already used: " +
                                        pm.rosters[side]->bench[d.player].id);
            if (d.slot != t.next_slot)
                throw GameProtocolError(
                    "pinch_hit: only the current lineup slot may be replaced");
            t.slot_batter[d.slot] = static_cast<std::uint8_t>(9 + d.player);
            t.bench_used |= 1u << d.player;
            return;
        }
        case Decision::Kind::IntentionalWalk: {
            if (side != state.fielding_side())
                throw GameProtocolError(
                    "intentional_walk offered by the batting side");
            if (state.base_out.first())
                throw GameProtocolError(
                    "intentional_walk with first base occupied");
            state.pending_walk = true;
            return;
        }
    }
    throw GameProtocolError("unknown decision kind");
}

void step_plate_appearance(GameState& state, const PreparedMatch& pm,
                           Engine& eng) {
    const int bs = state.batting_side();
    const int fs = 1 - bs;
    TeamState& bat = state.teams[bs];
    TeamState& fld = state.teams[fs];
    BaseOutState post;
    int runs = 0;
    if (state.pending_walk) {
        state.pending_walk = false;
        ForcedTransition f = walk_successor(state.base_out);
        post = f.post;
        runs = f.runs;
    } else {
        int uid = bat.slot_batter[bat.next_slot];
        const Simplex9& cum =
            pm.cum_dist(bs, fld.pitcher, uid, bat.next_slot);
        double u = rnd_uniform(eng);
        int oi = 0;
        while (oi < kNumOutcomes - 1 && u > cum[oi]) ++oi;
        auto tr = pm.tables[bs][uid]->sample(state.base_out,
                                             static_cast<Outcome>(oi), eng);
        post = tr.state;
        runs = tr.runs;
    }
    bat.runs += runs;
    state.base_out = post;
    bat.next_slot = static_cast<std::uint8_t>((bat.next_slot + 1) % 9);
    fld.batters_faced += 1;
    if (bs == kHome && state.inning >= 9 &&
        state.teams[kHome].runs > state.teams[kAway].runs) {
        state.finished = true;
        state.winner = kHome;
    }
}

namespace {

DecisionLogEntry log_entry(const GameState& state, const PreparedMatch& pm,
                           int side, const PolicyChoice& c) {
    DecisionLogEntry e;
    e.inning = state.inning;
    e.half = state.half;
    e.side = side;
    e.decision = c.decision;
    e.value_mean = c.value_mean;
    e.value_se = c.value_se;
    e.alternatives_considered = c.alternatives_considered;
    switch (c.decision.kind) {
        case Decision::Kind::ChangePitcher:
            e.player_id = pm.rosters[side]->pitchers[c.decision.player].id;
            break;
        case Decision::Kind::PinchHit:
            e.player_id = pm.rosters[side]->bench[c.decision.player].id;
            break;
        default:
            break;
    }
    return e;
}

}  // namespace

namespace {

// Hard batters-faced cap: when the current pitcher has hit the cap and an
// unused pitcher remains, that pitcher comes in automatically. Returns the
// forced decision, or NoAction when nothing was forced.
Decision enforce_faced_cap(GameState& state, const PreparedMatch& pm) {
    const int fs = state.fielding_side();
    if (pm.rules.batters_faced_cap <= 0 ||
        state.teams[fs].batters_faced < pm.rules.batters_faced_cap)
        return {};
    std::size_t np = pm.rosters[fs]->pitchers.size();
    for (std::size_t p = 0; p < np; ++p) {
        if (!(state.teams[fs].pitchers_used & (1u << p))) {
            Decision d{Decision::Kind::ChangePitcher, static_cast<int>(p), -1};
            apply_decision(state, pm, fs, d);
            return d;
        }
    }
    return {};
}

}  // namespace

void simulate_half_inning(GameState& state, const PreparedMatch& pm,
                          GamePolicy* batting, GamePolicy* fielding,
                          Engine& eng, GameResult* result) {
    const int bs = state.batting_side();
    const int fs = 1 - bs;
    while (!state.finished && !state.base_out.is_terminal()) {
        auto consult = [&](GamePolicy* pol, int side) -> Decision {
            if (!pol) return {};
            state.decisions_offered += 1;
            PolicyChoice c = pol->choose(state, side, pm);
            if (c.decision.kind != Decision::Kind::NoAction) {
                apply_decision(state, pm, side, c.decision);
                if (result)
                    result->decisions.push_back(log_entry(state, pm, side, c));
            }
            return c.decision;
        };
        consult(batting, bs);
        Decision fd = consult(fielding, fs);
        if (fd.kind != Decision::Kind::NoAction) consult(batting, bs);

        Decision forced = enforce_faced_cap(state, pm);
        if (forced.kind != Decision::Kind::NoAction && result) {
            PolicyChoice pc;
            pc.decision = forced;
            result->decisions.push_back(log_entry(state, pm, fs, pc));
        }
        step_plate_appearance(state, pm, eng);
    }
}

namespace {

BaseOutState half_start_bases(int inning) {
    // Placed runner on second from the 10th inning on.
    return inning >= 10 ? BaseOutState{0, 2} : BaseOutState{0, 0};
}

}  // namespace

int play_out_passive(GameState state, const PreparedMatch& pm, Engine& eng) {
    // Continue the in-progress half first.
    while (!state.finished) {
        while (!state.finished && !state.base_out.is_terminal()) {
            enforce_faced_cap(state, pm);
            step_plate_appearance(state, pm, eng);
        }
        if (state.finished) break;
        if (state.half == Half::Top) {
            if (state.inning >= 9 &&
                state.teams[kHome].runs > state.teams[kAway].runs) {
                state.finished = true;
                state.winner = kHome;
                break;
            }
            state.half = Half::Bottom;
            state.base_out = half_start_bases(state.inning);
        } else {
            if (state.inning >= 9 &&
                state.teams[kHome].runs != state.teams[kAway].runs) {
                state.finished = true;
                state.winner = state.teams[kHome].runs > state.teams[kAway].runs
                                   ? kHome
                                   : kAway;
                break;
            }
            if (state.inning >= 30) {
                // Rollouts always resolve the cap by coin flip; an estimate
                // must not abort the outer game.
                state.finished = true;
                state.capped = true;
                state.winner = rnd_uniform(eng) < 0.5 ? kAway : kHome;
                break;
            }
            state.inning += 1;
            state.half = Half::Top;
            state.base_out = half_start_bases(state.inning);
        }
    }
    return state.winner;
}

GameResult simulate_game(const PreparedMatch& pm, const DecisionPolicy* away,
                         const DecisionPolicy* home, std::uint64_t game_seed) {
    GameState st = pm.initial_state();
    GameResult res;
    std::unique_ptr<GamePolicy> ap =
        away ? away->start_game(game_seed, kAway) : nullptr;
    std::unique_ptr<GamePolicy> hp =
        home ? home->start_game(game_seed, kHome) : nullptr;
    Engine eng = make_engine(game_seed, kGameStream);
    while (!st.finished) {
        st.half = Half::Top;
        st.base_out = half_start_bases(st.inning);
        simulate_half_inning(st, pm, ap.get(), hp.get(), eng, &res);
        if (st.finished) break;
        if (st.inning >= 9 &&
            st.teams[kHome].runs > st.teams[kAway].runs) {
            st.finished = true;
            st.winner = kHome;
            break;
        }
        st.half = Half::Bottom;
        st.base_out = half_start_bases(st.inning);
        simulate_half_inning(st, pm, hp.get(), ap.get(), eng, &res);
        if (st.finished) break;
        if (st.inning >= 9 &&
            st.teams[kHome].runs != st.teams[kAway].runs) {
            st.finished = true;
            st.winner =
                st.teams[kHome].runs > st.teams[kAway].runs ? kHome : kAway;
            break;
        }
        if (st.inning >= 30) {
            if (!pm.rules.tournament_mode)
                throw GameCapError("game still tied after inning 30");
            st.finished = true;
            st.capped = true;
            st.winner = rnd_uniform(eng) < 0.5 ? kAway : kHome;
            break;
        }
        st.inning += 1;
    }
    res.winner = st.winner;
    res.score = {st.teams[kAway].runs, st.teams[kHome].runs};
    res.innings = st.inning;
    res.capped = st.capped;
    return res;
}

ManyResult simulate_many(const PreparedMatch& pm, const DecisionPolicy* away,
                         const DecisionPolicy* home, long long n,
                         std::uint64_t seed, int workers, bool keep_full) {
    if (n < 1) throw std::invalid_argument("simulate_many: n must be >= 1");
    if (workers < 1) workers = 1;
    ManyResult out;
    out.games.resize(static_cast<std::size_t>(n));
    if (keep_full) out.full.resize(static_cast<std::size_t>(n));

    std::exception_ptr first_error;
    std::mutex err_mu;
    auto run_stride = [&](int offset, int stride) {
        try {
            for (long long i = offset; i < n; i += stride) {
                GameResult r = simulate_game(
                    pm, away, home, mix64(seed, static_cast<std::uint64_t>(i)));
                GameSummary& s = out.games[static_cast<std::size_t>(i)];
                s.winner = static_cast<std::int8_t>(r.winner);
                s.home_runs = r.score[kHome];
                s.away_runs = r.score[kAway];
                s.innings = static_cast<std::uint8_t>(r.innings);
                s.capped = r.capped;
                if (keep_full) out.full[static_cast<std::size_t>(i)] = std::move(r);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lk(err_mu);
            if (!first_error) first_error = std::current_exception();
        }
    };

    if (workers == 1) {
        run_stride(0, 1);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(run_stride, w, workers);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    for (const auto& g : out.games) out.wins[g.winner] += 1;
    return out;
}

std::string serialize_game_summaries(const std::vector<GameSummary>& games) {
    std::string out = "game_index,winner,home_runs,away_runs,innings,capped\n";
    for (std::size_t i = 0; i < games.size(); ++i) {
        const GameSummary& g = games[i];
        out += std::to_string(i);
        out += g.winner == kHome ? ",home," : ",away,";
        out += std::to_string(g.home_runs);
        out += ',';
        out += std::to_string(g.away_runs);
        out += ',';
        out += std::to_string(static_cast<int>(g.innings));
        out += ',';
        out += g.capped ? '1' : '0';
        out += '\n';
    }
    return out;
}

std::string serialize_decision_log(const std::vector<GameResult>& games) {
    std::string out =
        "inning,half,side,decision,player_id,value_mean,value_se,"
        "alternatives_considered\n";
    for (std::size_t i = 0; i < games.size(); ++i) {
        out += "# game " + std::to_string(i) + "\n";
        for (const auto& d : games[i].decisions) {
            out += std::to_string(d.inning);
            out += d.half == Half::Top ? ",top," : ",bottom,";
            out += d.side == kHome ? "home," : "away,";
            out += decision_kind_name(d.decision.kind);
            out += ',';
            out += d.player_id;
            out += ',';
            out += format_double(d.value_mean);
            out += ',';
            out += format_double(d.value_se);
            out += ',';
            out += std::to_string(d.alternatives_considered);
            out += '\n';
        }
    }
    return out;
}

}  // namespace matchup
