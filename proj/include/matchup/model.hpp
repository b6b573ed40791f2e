// The fitted-model aggregate: posterior parameter means, rate tables,
// base-running tables, and versioned JSON persistence, plus the variant
// fitting pipeline that assembles all of it.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "matchup/baserunning.hpp"
#include "matchup/inference.hpp"
#include "matchup/log5.hpp"

namespace matchup {

// P:   pitcher parameters sampled, batter side from batting-order tables.
// PB:  batter parameters sampled too.
// PBR: PB refit on the four recency chains, posterior means averaged.
// BR:  PBR plus steal-stratified base-running tables.
enum class Variant { P, PB, PBR, BR };

std::string_view variant_name(Variant v);
Variant variant_from_name(std::string_view s);  // throws std::invalid_argument

struct FitConfig {
    SamplerConfig sampler;
    int chains = 4;  // recency chains used by PBR/BR, 1..4 (1 widest only)
    long long min_pa = 100;          // prior-fit qualification threshold
    long long min_steal_opps = 200;  // steal-prior qualification threshold
    int steal_groups = 5;
    double table_smoothing = 5.0;

    void validate() const;
};

struct ModelDiagnostics {
    double acceptance_rate = 0.0;
    double effective_samples = 0.0;
};

// Steal-stratified base running (BR variant): group tables in ascending
// steal-rate order, posterior mixture weights per batter, and a prior-only
// default for batters never seen in training.
struct StealModel {
    BetaParams prior;
    std::vector<double> boundaries;
    std::vector<TransitionTable> group_tables;
    std::map<std::string, GroupWeights> batter_weights;
    GroupWeights default_weights;
};

struct MatchupModel {
    Variant variant = Variant::P;
    PriorSpec pitcher_priors;
    PriorSpec batter_priors;
    LeagueRates league;
    OrderRates order;
    Log5Weights weights;
    std::map<std::string, PlayerPosterior> pitchers;
    std::map<std::string, PlayerPosterior> batters;  // empty for P
    TransitionTable league_table;
    std::optional<StealModel> steal;  // engaged only for BR
    ModelDiagnostics diagnostics;
    std::map<std::string, std::string> provenance;

    bool parametric_batters() const { return variant != Variant::P; }

    // Posterior means; players absent from the fit fall back to prior means.
    PlayerParams pitcher_params(const std::string& id) const;
    PlayerParams batter_params(const std::string& id) const;

    Simplex9 predict(const std::string& pitcher_id, const std::string& batter_id,
                     int batting_order, Handedness h) const;

    // BR: the batter's mixture table; other variants: the league table.
    const TransitionTable& transition_table(const std::string& batter_id) const;

    // Builds the per-batter mixture tables from the steal model. Called by
    // fit_variant and load_model; must be re-called if steal data is edited.
    void materialize_tables();

private:
    std::map<std::string, TransitionTable> batter_tables_;
    TransitionTable default_table_;
    bool materialized_ = false;
};

MatchupModel fit_variant(Variant v,
                         const std::vector<PlateAppearanceRecord>& records,
                         const FitConfig& cfg,
                         const std::vector<StealCounts>& steals = {});

// Versioned JSON document; round-trips losslessly (doubles serialized with
// shortest round-trip representation).
std::string model_to_json(const MatchupModel& m);
MatchupModel model_from_json(const std::string& text);  // SchemaError on bad input

void save_model(const MatchupModel& m, const std::string& path);
MatchupModel load_model(const std::string& path);

// FNV-1a; used for input-data digests in provenance headers.
std::uint64_t fnv1a64(std::string_view data);

}  // namespace matchup
