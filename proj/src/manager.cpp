#include "matchup/manager.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace matchup {

namespace {

class PassiveGame : public GamePolicy {
public:
    PolicyChoice choose(const GameState&, int, const PreparedMatch&) override {
        return {};
    }
};

class ScriptedGame : public GamePolicy {
public:
    explicit ScriptedGame(const std::vector<ScriptedPolicy::Step>* steps)
        : steps_(steps) {}

    PolicyChoice choose(const GameState& state, int side,
                        const PreparedMatch&) override {
        if (cursor_ >= steps_->size()) return {};
        const auto& s = (*steps_)[cursor_];
        if (s.inning != state.inning || s.half != state.half) return {};
        ++cursor_;
        PolicyChoice c;
        c.decision = s.decision;
        // Logged pinch hits may omit the slot; it is always the slot at bat.
        if (c.decision.kind == Decision::Kind::PinchHit && c.decision.slot < 0)
            c.decision.slot = state.teams[side].next_slot;
        return c;
    }

private:
    const std::vector<ScriptedPolicy::Step>* steps_;
    std::size_t cursor_ = 0;
};

}  // namespace

std::unique_ptr<GamePolicy> PassivePolicy::start_game(std::uint64_t,
                                                      int) const {
    return std::make_unique<PassiveGame>();
}

ScriptedPolicy::ScriptedPolicy(std::vector<Step> steps)
    : steps_(std::move(steps)) {}

std::unique_ptr<GamePolicy> ScriptedPolicy::start_game(std::uint64_t,
                                                       int) const {
    return std::make_unique<ScriptedGame>(&steps_);
}

namespace {

int index_of(const std::vector<Player>& players, const std::string& id) {
    for (std::size_t i = 0; i < players.size(); ++i)
        if (players[i].id == id) return static_cast<int>(i);
    return -1;
}

}  // namespace

std::array<std::vector<ScriptedPolicy::Step>, 2> scripts_from_log(
    const std::vector<DecisionLogEntry>& log, const Roster& away,
    const Roster& home) {
    std::array<const Roster*, 2> rosters{&away, &home};
    std::array<std::vector<ScriptedPolicy::Step>, 2> out;
    for (const auto& e : log) {
        if (e.side != kAway && e.side != kHome)
            throw std::invalid_argument("decision log: bad side");
        ScriptedPolicy::Step s;
        s.inning = e.inning;
        s.half = e.half;
        s.decision = e.decision;
        // Entries parsed from text carry the player id only.
        if (s.decision.player < 0) {
            switch (s.decision.kind) {
                case Decision::Kind::ChangePitcher:
                    s.decision.player =
                        index_of(rosters[e.side]->pitchers, e.player_id);
                    break;
                case Decision::Kind::PinchHit:
                    s.decision.player =
                        index_of(rosters[e.side]->bench, e.player_id);
                    break;
                default:
                    break;
            }
            if ((s.decision.kind == Decision::Kind::ChangePitcher ||
                 s.decision.kind == Decision::Kind::PinchHit) &&
                s.decision.player < 0)
                throw std::invalid_argument(
                    "decision log: player not on roster: " + e.player_id);
        }
        out[e.side].push_back(std::move(s));
    }
    return out;
}

ValueEstimate estimate_value(const GameState& state, const PreparedMatch& pm,
                             int side, const Decision& d, int rollouts,
                             Engine& eng) {
    if (rollouts < 1)
        throw std::invalid_argument("estimate_value: rollouts must be >= 1");
    if (state.finished)
        return ValueEstimate{state.winner == side ? 1.0 : 0.0, 0, 0.0};
    GameState base = state;
    apply_decision(base, pm, side, d);
    long long wins = 0;
    for (int r = 0; r < rollouts; ++r)
        if (play_out_passive(base, pm, eng) == side) ++wins;
    double mean = static_cast<double>(wins) / rollouts;
    double se = std::sqrt(mean * (1.0 - mean) / rollouts);
    return ValueEstimate{mean, rollouts, se};
}

void EquilibriumConfig::validate() const {
    if (rollouts < 1)
        throw std::invalid_argument("rollouts must be >= 1");
    if (!(tie_epsilon >= 0.0))
        throw std::invalid_argument("tie_epsilon must be >= 0");
    if (max_pitcher_options < 0 || max_bench_options < 0)
        throw std::invalid_argument("option caps must be >= 0");
}

std::vector<Decision> pruned_decisions(const GameState& state,
                                       const PreparedMatch& pm, int side,
                                       const EquilibriumConfig& cfg) {
    std::vector<Decision> all = legal_decisions(state, pm, side);
    std::vector<Decision> out;
    out.reserve(all.size());
    int pitchers = 0;
    int bench = 0;
    for (const Decision& d : all) {
        switch (d.kind) {
            case Decision::Kind::NoAction:
                out.push_back(d);
                break;
            case Decision::Kind::ChangePitcher:
                if (pitchers < cfg.max_pitcher_options) {
                    out.push_back(d);
                    ++pitchers;
                }
                break;
            case Decision::Kind::PinchHit:
                if (bench < cfg.max_bench_options) {
                    out.push_back(d);
                    ++bench;
                }
                break;
            case Decision::Kind::IntentionalWalk:
                out.push_back(d);
                break;
        }
    }
    return out;
}

int select_candidate(const std::vector<double>& values, double tie_epsilon) {
    if (values.empty())
        throw std::invalid_argument("select_candidate: no candidates");
    int best = 0;
    for (int i = 1; i < static_cast<int>(values.size()); ++i)
        if (values[i] > values[best]) best = i;
    if (best != 0 && values[best] <= values[0] + tie_epsilon) return 0;
    return best;
}

PolicyChoice decide(const GameState& state, const PreparedMatch& pm, int side,
                    const EquilibriumConfig& cfg, Engine& eng) {
    std::vector<Decision> cands = pruned_decisions(state, pm, side, cfg);
    PolicyChoice out;
    out.alternatives_considered = static_cast<int>(cands.size());
    if (cands.size() == 1) return out;  // NoAction, no rollouts
    std::vector<double> vals(cands.size());
    std::vector<double> ses(cands.size());
    for (std::size_t i = 0; i < cands.size(); ++i) {
        ValueEstimate ve =
            estimate_value(state, pm, side, cands[i], cfg.rollouts, eng);
        vals[i] = ve.win_prob;
        ses[i] = ve.se;
    }
    int pick = select_candidate(vals, cfg.tie_epsilon);
    out.decision = cands[pick];
    out.value_mean = vals[pick];
    out.value_se = ses[pick];
    return out;
}

namespace {

class EquilibriumGame : public GamePolicy {
public:
    EquilibriumGame(const PreparedMatch* belief, const EquilibriumConfig* cfg,
                    std::uint64_t game_seed)
        : belief_(belief), cfg_(cfg), game_seed_(game_seed) {}

    PolicyChoice choose(const GameState& state, int side,
                        const PreparedMatch&) override {
        Engine eng = make_engine(game_seed_, static_cast<std::uint64_t>(side),
                                 state.decisions_offered);
        return decide(state, *belief_, side, *cfg_, eng);
    }

private:
    const PreparedMatch* belief_;
    const EquilibriumConfig* cfg_;
    std::uint64_t game_seed_;
};

}  // namespace

EquilibriumPolicy::EquilibriumPolicy(const Roster& away, const Roster& home,
                                     const MatchupModel& belief,
                                     EquilibriumConfig cfg, GameRules rules)
    : away_(away), home_(home), belief_model_(&belief), cfg_(cfg) {
    cfg_.validate();
    belief_ = PreparedMatch::build(away_, home_, belief, belief, rules);
}

std::unique_ptr<GamePolicy> EquilibriumPolicy::start_game(
    std::uint64_t game_seed, int) const {
    return std::make_unique<EquilibriumGame>(&belief_, &cfg_, game_seed);
}

ManyResult play_policy_match(const MatchSpec& spec, long long n,
                             std::uint64_t seed, int workers, bool keep_full) {
    if (!spec.away || !spec.home || !spec.away_model || !spec.home_model)
        throw std::invalid_argument(
            "play_policy_match: rosters and models are required");
    PreparedMatch pm =
        PreparedMatch::build(*spec.away, *spec.home, *spec.away_model,
                             *spec.home_model, spec.rules);
    return simulate_many(pm, spec.away_policy, spec.home_policy, n, seed,
                         workers, keep_full);
}

}  // namespace matchup
