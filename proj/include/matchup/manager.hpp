// Decision policies: passive baseline, scripted replay, and the
// rollout-based win-probability optimizer that approximates equilibrium
// play over substitutions and intentional walks.
#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

#include "matchup/gamesim.hpp"

namespace matchup {

// Always NoAction.
class PassivePolicy : public DecisionPolicy {
public:
    std::unique_ptr<GamePolicy> start_game(std::uint64_t game_seed,
                                           int side) const override;
    std::string_view name() const override { return "passive"; }
};

// Replays recorded decisions for one side: each step fires at the first
// consultation whose inning and half match, in recorded order; NoAction
// otherwise and after exhaustion.
class ScriptedPolicy : public DecisionPolicy {
public:
    struct Step {
        int inning = 0;
        Half half = Half::Top;
        Decision decision;
    };

    explicit ScriptedPolicy(std::vector<Step> steps);
    std::unique_ptr<GamePolicy> start_game(std::uint64_t game_seed,
                                           int side) const override;
    std::string_view name() const override { return "scripted"; }

private:
    std::vector<Step> steps_;
};

// Splits a logged game back into per-side scripts, resolving player ids to
// roster indices. [0]=away script, [1]=home script.
std::array<std::vector<ScriptedPolicy::Step>, 2> scripts_from_log(
    const std::vector<DecisionLogEntry>& log, const Roster& away,
    const Roster& home);

struct ValueEstimate {
    double win_prob = 0.0;
    int rollouts = 0;
    double se = 0.0;
};

// Win probability for `side` after taking decision `d`: the decision is
// applied to a copy and the game is completed `rollouts` times with both
// sides passive. A finished state short-circuits to the exact value with
// zero rollouts. Throws GameProtocolError on an illegal decision.
ValueEstimate estimate_value(const GameState& state, const PreparedMatch& pm,
                             int side, const Decision& d, int rollouts,
                             Engine& eng);

struct EquilibriumConfig {
    int rollouts = 2000;         // per candidate decision
    double tie_epsilon = 0.005;  // win-probability margin NoAction keeps
    int max_pitcher_options = 3;  // next in bullpen order
    int max_bench_options = 2;    // next in bench order

    void validate() const;  // throws std::invalid_argument
};

// Candidate set for one consultation: the legal set pruned to NoAction, the
// first max_pitcher_options unused pitchers, the intentional walk when
// available, and the first max_bench_options unused bench batters.
std::vector<Decision> pruned_decisions(const GameState& state,
                                       const PreparedMatch& pm, int side,
                                       const EquilibriumConfig& cfg);

// Pure argmax over estimated values with the NoAction tie rule. values[0]
// must belong to NoAction; any other candidate must beat it by more than
// tie_epsilon to be chosen. Earlier index wins exact ties elsewhere.
int select_candidate(const std::vector<double>& values, double tie_epsilon);

// One consultation of the optimizer: evaluates the pruned candidates with
// estimate_value and picks via select_candidate. A singleton candidate set
// returns immediately with no rollouts.
PolicyChoice decide(const GameState& state, const PreparedMatch& pm, int side,
                    const EquilibriumConfig& cfg, Engine& eng);

// One-step-lookahead optimizer. Evaluates candidates under its own belief
// model (which may differ from the model generating the game) by passive
// Monte Carlo completion, re-deriving its rng from
// (game seed, side, consultation counter) so decisions are reproducible.
// Holds roster copies; not copyable.
class EquilibriumPolicy : public DecisionPolicy {
public:
    EquilibriumPolicy(const Roster& away, const Roster& home,
                      const MatchupModel& belief, EquilibriumConfig cfg = {},
                      GameRules rules = {});
    EquilibriumPolicy(const EquilibriumPolicy&) = delete;
    EquilibriumPolicy& operator=(const EquilibriumPolicy&) = delete;

    std::unique_ptr<GamePolicy> start_game(std::uint64_t game_seed,
                                           int side) const override;
    std::string_view name() const override { return "equilibrium"; }

    const PreparedMatch& belief_match() const { return belief_; }
    const EquilibriumConfig& config() const { return cfg_; }

private:
    Roster away_;
    Roster home_;
    const MatchupModel* belief_model_;
    EquilibriumConfig cfg_;
    PreparedMatch belief_;
};

// Truth-model match with policy wiring; thin front for simulate_many.
struct MatchSpec {
    const Roster* away = nullptr;
    const Roster* home = nullptr;
    const MatchupModel* away_model = nullptr;  // generates away batting
    const MatchupModel* home_model = nullptr;  // generates home batting
    const DecisionPolicy* away_policy = nullptr;  // null = passive
    const DecisionPolicy* home_policy = nullptr;
    GameRules rules;
};

ManyResult play_policy_match(const MatchSpec& spec, long long n,
                             std::uint64_t seed, int workers = 1,
                             bool keep_full = false);

}  // namespace matchup
