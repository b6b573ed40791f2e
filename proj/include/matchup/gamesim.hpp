// Full-game state machine and Monte Carlo engine: innings, lineups, pitcher
// usage, substitutions, walk-offs, extra-inning rules, and batched
// simulation with seed-stable parallelism.
#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "matchup/model.hpp"
#include "matchup/outcome.hpp"
#include "matchup/rng.hpp"

namespace matchup {

struct GameProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct GameCapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Player {
    std::string id;
    char hand = 'R';  // 'L' or 'R'
};

// Sides index arrays as [0]=away, [1]=home throughout.
constexpr int kAway = 0;
constexpr int kHome = 1;

struct Roster {
    std::vector<Player> lineup;    // exactly 9, batting order
    std::vector<Player> bench;     // at most 32
    std::vector<Player> pitchers;  // at most 32, bullpen order
    std::string starter;           // id, must appear in pitchers

    int starter_index() const;
    void validate() const;  // throws std::invalid_argument
};

Roster roster_from_json(const std::string& text);
std::string roster_to_json(const Roster& r);
Roster load_roster(const std::string& path);

enum class Half : std::uint8_t { Top = 0, Bottom = 1 };

// Batters are addressed by uid: 0..8 are the starting lineup slots, 9+ are
// bench entries in roster order. Pitchers by roster index. This keeps
// GameState trivially copyable for rollouts.
struct TeamState {
    std::array<std::uint8_t, 9> slot_batter{};  // uid occupying each slot
    std::uint8_t next_slot = 0;
    std::uint8_t pitcher = 0;
    std::uint32_t pitchers_used = 0;  // bitmask
    std::uint32_t bench_used = 0;     // bitmask
    int runs = 0;
    int batters_faced = 0;  // by the current pitcher
};

struct GameState {
    std::uint8_t inning = 1;
    Half half = Half::Top;
    BaseOutState base_out;
    std::array<TeamState, 2> teams;
    std::uint16_t decisions_offered = 0;  // policy consultations so far
    bool pending_walk = false;  // intentional walk ordered for the next PA
    bool finished = false;
    bool capped = false;
    std::int8_t winner = -1;  // kAway or kHome once finished

    int batting_side() const { return half == Half::Top ? kAway : kHome; }
    int fielding_side() const { return 1 - batting_side(); }
};

struct Decision {
    enum class Kind : std::uint8_t {
        NoAction,
        ChangePitcher,    // player = pitcher index
        PinchHit,         // player = bench index, slot = lineup slot
        IntentionalWalk,
    };
    Kind kind = Kind::NoAction;
    int player = -1;
    int slot = -1;

    bool operator==(const Decision&) const = default;
};

std::string_view decision_kind_name(Decision::Kind k);

struct DecisionLogEntry {
    int inning = 0;
    Half half = Half::Top;
    int side = kAway;  // deciding side
    Decision decision;
    std::string player_id;  // resolved target ("" for intentional walk)
    double value_mean = 0.0;
    double value_se = 0.0;
    int alternatives_considered = 0;
};

struct GameResult {
    int winner = -1;
    std::array<int, 2> score{};  // [away, home]
    int innings = 0;
    bool capped = false;
    std::vector<DecisionLogEntry> decisions;
};

// What a policy returns when consulted. Non-NoAction choices are logged with
// the attached value diagnostics.
struct PolicyChoice {
    Decision decision;
    double value_mean = 0.0;
    double value_se = 0.0;
    int alternatives_considered = 0;
};

struct PreparedMatch;

// Per-game policy instance; may carry mutable per-game state (e.g. a script
// cursor). Created fresh for every simulated game.
class GamePolicy {
public:
    virtual ~GamePolicy() = default;
    virtual PolicyChoice choose(const GameState& state, int side,
                                const PreparedMatch& pm) = 0;
};

// Immutable shared policy factory, selected by name.
class DecisionPolicy {
public:
    virtual ~DecisionPolicy() = default;
    virtual std::unique_ptr<GamePolicy> start_game(std::uint64_t game_seed,
                                                   int side) const = 0;
    virtual std::string_view name() const = 0;
};

struct GameRules {
    int batters_faced_cap = 0;  // 0 = no cap
    bool tournament_mode = false;  // inning-30 tie: coin flip instead of error
};

// Matchup-level precomputation: outcome distributions for every
// (batting side, pitcher, batter, slot) and per-batter transition tables,
// resolved once so the per-PA hot path is integer indexing.
struct PreparedMatch {
    std::array<const Roster*, 2> rosters{};
    std::array<const MatchupModel*, 2> models{};  // generation model per
                                                  // batting side
    GameRules rules;

    std::array<std::vector<Player>, 2> batters;  // uid -> player
    std::array<int, 2> starter{};

    // Flattened cumulative distributions:
    // index = ((pitcher * n_batters) + batter_uid) * 9 + slot.
    std::array<std::vector<Simplex9>, 2> cum;
    std::array<std::vector<const TransitionTable*>, 2> tables;  // by uid

    static PreparedMatch build(const Roster& away, const Roster& home,
                               const MatchupModel& away_model,
                               const MatchupModel& home_model,
                               const GameRules& rules = {});

    const Simplex9& cum_dist(int batting_side, int pitcher, int batter_uid,
                             int slot) const {
        const auto& v = cum[batting_side];
        std::size_t n_b = batters[batting_side].size();
        return v[((static_cast<std::size_t>(pitcher) * n_b) + batter_uid) * 9 +
                 slot];
    }

    GameState initial_state() const;
};

// All decisions a side may legally take right now. NoAction is always first.
std::vector<Decision> legal_decisions(const GameState& state,
                                      const PreparedMatch& pm, int side);

// Validates and applies; throws GameProtocolError on an illegal decision.
// IntentionalWalk sets pending_walk; it resolves with the next plate
// appearance, surviving any pinch-hit made in response.
void apply_decision(GameState& state, const PreparedMatch& pm, int side,
                    const Decision& d);

// One plate appearance: sample outcome (or force the pending walk), apply
// the transition, advance the lineup, credit runs, run the walk-off check.
void step_plate_appearance(GameState& state, const PreparedMatch& pm,
                           Engine& eng);

// One half-inning from the current base_out. Policies may be null (Passive).
// Decision log entries are appended to result if non-null.
void simulate_half_inning(GameState& state, const PreparedMatch& pm,
                          GamePolicy* batting, GamePolicy* fielding,
                          Engine& eng, GameResult* result);

// Plays a copied state to completion with both sides passive; returns the
// winning side. The cheap rollout primitive.
int play_out_passive(GameState state, const PreparedMatch& pm, Engine& eng);

// Full game. Policies may be null for Passive behavior. Deterministic given
// game_seed.
GameResult simulate_game(const PreparedMatch& pm, const DecisionPolicy* away,
                         const DecisionPolicy* home, std::uint64_t game_seed);

struct GameSummary {
    std::int8_t winner = -1;
    int home_runs = 0;
    int away_runs = 0;
    std::uint8_t innings = 0;
    bool capped = false;
};

struct ManyResult {
    std::array<long long, 2> wins{};  // [away, home]
    std::vector<GameSummary> games;
    std::vector<GameResult> full;  // populated only when keep_full
};

// n games with per-game seeds mix64(seed, game index). The worker count
// changes scheduling only; outputs are identical for any value.
ManyResult simulate_many(const PreparedMatch& pm, const DecisionPolicy* away,
                         const DecisionPolicy* home, long long n,
                         std::uint64_t seed, int workers = 1,
                         bool keep_full = false);

std::string serialize_game_summaries(const std::vector<GameSummary>& games);
std::string serialize_decision_log(const std::vector<GameResult>& games);

}  // namespace matchup
