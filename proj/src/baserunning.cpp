#include "matchup/baserunning.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace matchup {

namespace {

constexpr double kRowTol = 1e-12;

int row_index(int state_index, Outcome o) {
    return state_index * kNumOutcomes + static_cast<int>(o);
}

int cell_index(int succ_index, int runs) {
    return succ_index * TransitionTable::kRuns + runs;
}

bool transition_conserves(const BaseOutState& pre, int succ_index, int runs) {
    BaseOutState post = BaseOutState::from_index(succ_index);
    if (post.outs < pre.outs) return false;
    return runs_conservation_ok(pre, post, runs);
}

}  // namespace

TransitionTable::TransitionTable()
    : cells_(static_cast<std::size_t>(kRows) * kCellsPerRow, 0.0),
      support_(kRows) {}

double& TransitionTable::cell(int state_index, Outcome o, int succ_index,
                              int runs) {
    finalized_ = false;
    return cells_[static_cast<std::size_t>(row_index(state_index, o)) *
                      kCellsPerRow +
                  cell_index(succ_index, runs)];
}

double TransitionTable::cell(int state_index, Outcome o, int succ_index,
                             int runs) const {
    return cells_[static_cast<std::size_t>(row_index(state_index, o)) *
                      kCellsPerRow +
                  cell_index(succ_index, runs)];
}

void TransitionTable::finalize() {
    for (int r = 0; r < kRows; ++r) {
        const double* row = &cells_[static_cast<std::size_t>(r) * kCellsPerRow];
        double sum = 0.0;
        auto& sup = support_[r];
        sup.clear();
        for (int c = 0; c < kCellsPerRow; ++c) {
            double p = row[c];
            if (p < 0.0)
                throw std::logic_error("transition table: negative probability");
            sum += p;
            if (p > 0.0) {
                sup.push_back(Entry{static_cast<std::uint8_t>(c / kRuns),
                                    static_cast<std::uint8_t>(c % kRuns), p});
            }
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::logic_error("transition table: row does not sum to 1");
    }
    finalized_ = true;
}

const std::vector<TransitionTable::Entry>& TransitionTable::row_support(
    int state_index, Outcome o) const {
    if (!finalized_)
        throw std::logic_error("transition table: not finalized");
    return support_[row_index(state_index, o)];
}

TransitionTable::Transition TransitionTable::sample(const BaseOutState& state,
                                                    Outcome o,
                                                    Engine& rng) const {
    const auto& sup = row_support(state.index(), o);
    if (sup.empty())
        throw std::logic_error("transition table: empty row sampled");
    double u = rnd_uniform(rng);
    double acc = 0.0;
    for (const Entry& e : sup) {
        acc += e.prob;
        if (u <= acc)
            return Transition{BaseOutState::from_index(e.succ_index), e.runs};
    }
    const Entry& last = sup.back();
    return Transition{BaseOutState::from_index(last.succ_index), last.runs};
}

std::string TransitionTable::validate() const {
    for (int s = 0; s < BaseOutState::kStates; ++s) {
        BaseOutState pre = BaseOutState::from_index(s);
        for (int oi = 0; oi < kNumOutcomes; ++oi) {
            Outcome o = static_cast<Outcome>(oi);
            double sum = 0.0;
            for (int succ = 0; succ < kSucc; ++succ) {
                for (int runs = 0; runs < kRuns; ++runs) {
                    double p = cell(s, o, succ, runs);
                    if (p < 0.0) {
                        std::ostringstream os;
                        os << "negative probability in state " << s
                           << " outcome " << outcome_code(o);
                        return os.str();
                    }
                    sum += p;
                    if (p > 0.0 && !transition_conserves(pre, succ, runs)) {
                        std::ostringstream os;
                        os << "conservation violated: state " << s
                           << " outcome " << outcome_code(o) << " succ "
                           << succ << " runs " << runs;
                        return os.str();
                    }
                }
            }
            if (std::abs(sum - 1.0) > kRowTol) {
                std::ostringstream os;
                os << "row for state " << s << " outcome " << outcome_code(o)
                   << " sums to " << sum;
                return os.str();
            }
            if (o == Outcome::Strikeout || o == Outcome::Walk ||
                o == Outcome::HitByPitch || o == Outcome::HomeRun) {
                ForcedTransition f = o == Outcome::Strikeout
                                         ? strikeout_successor(pre)
                                     : o == Outcome::HomeRun
                                         ? homerun_successor(pre)
                                         : walk_successor(pre);
                double mass = cell(s, o, f.post.index(), f.runs);
                if (std::abs(mass - 1.0) > kRowTol) {
                    std::ostringstream os;
                    os << "deterministic outcome " << outcome_code(o)
                       << " in state " << s << " not concentrated";
                    return os.str();
                }
            }
        }
    }
    return {};
}

TransitionTable::Transition canonical_transition(const BaseOutState& pre,
                                                 Outcome o) {
    auto from_forced = [](const ForcedTransition& f) {
        return TransitionTable::Transition{f.post, f.runs};
    };
    switch (o) {
        case Outcome::Strikeout:
            return from_forced(strikeout_successor(pre));
        case Outcome::Walk:
        case Outcome::HitByPitch:
            return from_forced(walk_successor(pre));
        case Outcome::HomeRun:
            return from_forced(homerun_successor(pre));
        case Outcome::GroundOut:
        case Outcome::FlyOut: {
            // Batter out, runners hold.
            int outs = pre.outs + 1;
            if (outs == 3) return {BaseOutState::terminal(), 0};
            return {BaseOutState{static_cast<std::uint8_t>(outs), pre.bases},
                    0};
        }
        case Outcome::Single: {
            // Everyone up one base.
            int runs = pre.third() ? 1 : 0;
            std::uint8_t bases = static_cast<std::uint8_t>(
                1 | (pre.first() ? 2 : 0) | (pre.second() ? 4 : 0));
            return {BaseOutState{pre.outs, bases}, runs};
        }
        case Outcome::Double: {
            // Batter to second, everyone else up two.
            int runs = (pre.second() ? 1 : 0) + (pre.third() ? 1 : 0);
            std::uint8_t bases =
                static_cast<std::uint8_t>(2 | (pre.first() ? 4 : 0));
            return {BaseOutState{pre.outs, bases}, runs};
        }
        case Outcome::Triple:
            return {BaseOutState{pre.outs, 4},
                    pre.runners()};
    }
    throw std::logic_error("canonical_transition: bad outcome");
}

TransitionTable league_transition_table(
    const std::vector<PlateAppearanceRecord>& records) {
    std::vector<double> counts(
        static_cast<std::size_t>(TransitionTable::kRows) *
            TransitionTable::kCellsPerRow,
        0.0);
    std::vector<double> row_totals(TransitionTable::kRows, 0.0);
    for (const auto& rec : records) {
        int r = rec.pre_state.index() * kNumOutcomes +
                static_cast<int>(rec.outcome);
        int c = rec.post_state.index() * TransitionTable::kRuns +
                rec.runs_scored;
        counts[static_cast<std::size_t>(r) * TransitionTable::kCellsPerRow +
               c] += 1.0;
        row_totals[r] += 1.0;
    }
    TransitionTable table;
    for (int s = 0; s < BaseOutState::kStates; ++s) {
        for (int oi = 0; oi < kNumOutcomes; ++oi) {
            Outcome o = static_cast<Outcome>(oi);
            int r = s * kNumOutcomes + oi;
            if (row_totals[r] > 0.0) {
                for (int succ = 0; succ < TransitionTable::kSucc; ++succ)
                    for (int runs = 0; runs < TransitionTable::kRuns; ++runs)
                        table.cell(s, o, succ, runs) =
                            counts[static_cast<std::size_t>(r) *
                                       TransitionTable::kCellsPerRow +
                                   succ * TransitionTable::kRuns + runs] /
                            row_totals[r];
            } else {
                auto t = canonical_transition(BaseOutState::from_index(s), o);
                table.cell(s, o, t.state.index(), t.runs) = 1.0;
            }
        }
    }
    table.finalize();
    return table;
}

double StealProfile::posterior_rate() const {
    return steal_rate_posterior(steals, opportunities, prior.alpha,
                                prior.beta);
}

BetaParams StealProfile::posterior() const {
    return BetaParams{prior.alpha + static_cast<double>(steals),
                      prior.beta +
                          static_cast<double>(opportunities - steals)};
}

double steal_rate_posterior(long long steals, long long opportunities,
                            double alpha, double beta) {
    if (alpha <= 0.0 || beta <= 0.0)
        throw std::invalid_argument("steal prior must be positive");
    if (steals < 0 || opportunities < steals)
        throw std::invalid_argument("steal counts out of range");
    return (alpha + static_cast<double>(steals)) /
           (alpha + beta + static_cast<double>(opportunities));
}

std::vector<StealCounts> parse_steal_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open steal csv: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw SchemaError("steal csv is empty: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "batter_id,opportunities,steals")
        throw SchemaError("steal csv header mismatch: got '" + line + "'");
    std::vector<StealCounts> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t c1 = line.find(',');
        std::size_t c2 = c1 == std::string::npos ? std::string::npos
                                                 : line.find(',', c1 + 1);
        if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos)
            throw SchemaError("steal csv line " + std::to_string(lineno) +
                              ": expected 3 fields");
        StealCounts sc;
        sc.batter_id = line.substr(0, c1);
        auto parse_ll = [&](std::size_t b, std::size_t e, const char* what) {
            long long v = 0;
            auto res = std::from_chars(line.data() + b, line.data() + e, v);
            if (res.ec != std::errc{} || res.ptr != line.data() + e || v < 0)
                throw SchemaError("steal csv line " + std::to_string(lineno) +
                                  ": bad " + what);
            return v;
        };
        sc.opportunities = parse_ll(c1 + 1, c2, "opportunities");
        sc.steals = parse_ll(c2 + 1, line.size(), "steals");
        if (sc.batter_id.empty())
            throw SchemaError("steal csv line " + std::to_string(lineno) +
                              ": empty batter_id");
        if (sc.steals > sc.opportunities)
            throw SchemaError("steal csv line " + std::to_string(lineno) +
                              ": steals exceed opportunities");
        out.push_back(std::move(sc));
    }
    return out;
}

BetaParams fit_steal_prior(const std::vector<StealCounts>& players,
                           long long min_opportunities) {
    std::vector<double> rates;
    for (const auto& p : players)
        if (p.opportunities >= min_opportunities)
            rates.push_back(static_cast<double>(p.steals) /
                            static_cast<double>(p.opportunities));
    if (rates.size() < 2)
        throw InsufficientDataError(
            "steal prior needs at least 2 players with " +
            std::to_string(min_opportunities) + "+ opportunities, have " +
            std::to_string(rates.size()));
    return beta_moment_match(mean_of(rates), variance_of(rates));
}

GroupedTables build_group_tables(
    const std::vector<PlateAppearanceRecord>& records,
    const std::map<std::string, double>& batter_rates, int k,
    double smoothing_pseudo_count) {
    if (k < 1) throw std::invalid_argument("group count must be >= 1");
    if (records.size() < static_cast<std::size_t>(k))
        throw InsufficientDataError(
            "fewer records than steal-rate groups: " +
            std::to_string(records.size()) + " < " + std::to_string(k));
    std::vector<int> order(records.size());
    std::vector<double> rate_of(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        order[i] = static_cast<int>(i);
        auto it = batter_rates.find(records[i].batter_id);
        if (it == batter_rates.end())
            throw std::invalid_argument("no steal rate for batter " +
                                        records[i].batter_id);
        rate_of[i] = it->second;
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return rate_of[a] < rate_of[b];
    });

    TransitionTable league = league_transition_table(records);

    GroupedTables out;
    out.tables.reserve(k);
    std::size_t n = records.size();
    std::size_t base = n / static_cast<std::size_t>(k);
    std::size_t rem = n % static_cast<std::size_t>(k);
    std::size_t pos = 0;
    for (int g = 0; g < k; ++g) {
        std::size_t size = base + (static_cast<std::size_t>(g) < rem ? 1 : 0);
        std::vector<double> counts(
            static_cast<std::size_t>(TransitionTable::kRows) *
                TransitionTable::kCellsPerRow,
            0.0);
        std::vector<double> row_totals(TransitionTable::kRows, 0.0);
        for (std::size_t j = pos; j < pos + size; ++j) {
            const auto& rec = records[order[j]];
            int r = rec.pre_state.index() * kNumOutcomes +
                    static_cast<int>(rec.outcome);
            int c = rec.post_state.index() * TransitionTable::kRuns +
                    rec.runs_scored;
            counts[static_cast<std::size_t>(r) *
                       TransitionTable::kCellsPerRow +
                   c] += 1.0;
            row_totals[r] += 1.0;
        }
        pos += size;

        TransitionTable table;
        for (int s = 0; s < BaseOutState::kStates; ++s) {
            for (int oi = 0; oi < kNumOutcomes; ++oi) {
                Outcome o = static_cast<Outcome>(oi);
                int r = s * kNumOutcomes + oi;
                double denom = row_totals[r] + smoothing_pseudo_count;
                for (int succ = 0; succ < TransitionTable::kSucc; ++succ) {
                    for (int runs = 0; runs < TransitionTable::kRuns; ++runs) {
                        double cnt =
                            counts[static_cast<std::size_t>(r) *
                                       TransitionTable::kCellsPerRow +
                                   succ * TransitionTable::kRuns + runs];
                        double lg = league.cell(s, o, succ, runs);
                        table.cell(s, o, succ, runs) =
                            (cnt + smoothing_pseudo_count * lg) / denom;
                    }
                }
            }
        }
        table.finalize();
        out.tables.push_back(std::move(table));
    }

    // Boundary g sits at the g/k percentile of the per-record rates, which
    // for equal-count groups is the seam between group g-1 and group g.
    std::vector<double> sorted_rates(records.size());
    for (std::size_t i = 0; i < records.size(); ++i)
        sorted_rates[i] = rate_of[order[i]];
    for (int g = 1; g < k; ++g)
        out.boundaries.push_back(percentile_of(
            sorted_rates, static_cast<double>(g) / static_cast<double>(k)));
    return out;
}

GroupWeights batter_mixture_weights(const StealProfile& profile,
                                    const std::vector<double>& boundaries) {
    for (std::size_t i = 0; i < boundaries.size(); ++i) {
        if (boundaries[i] < 0.0 || boundaries[i] > 1.0)
            throw std::invalid_argument("group boundary outside [0,1]");
        if (i > 0 && boundaries[i] < boundaries[i - 1])
            throw std::invalid_argument("group boundaries not sorted");
    }
    BetaParams post = profile.posterior();
    GroupWeights w(boundaries.size() + 1, 0.0);
    double prev = 0.0;
    for (std::size_t g = 0; g < w.size(); ++g) {
        double hi = g < boundaries.size() ? beta_cdf(boundaries[g], post) : 1.0;
        w[g] = std::max(0.0, hi - prev);
        prev = hi;
    }
    double sum = 0.0;
    for (double x : w) sum += x;
    for (double& x : w) x /= sum;
    return w;
}

TransitionTable batter_transition_table(
    const GroupWeights& weights, const std::vector<TransitionTable>& tables) {
    if (weights.size() != tables.size() || tables.empty())
        throw std::invalid_argument(
            "mixture needs matching nonempty weights and tables");
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("negative mixture weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("mixture weights do not sum to 1");

    TransitionTable out;
    for (int s = 0; s < BaseOutState::kStates; ++s) {
        for (int oi = 0; oi < kNumOutcomes; ++oi) {
            Outcome o = static_cast<Outcome>(oi);
            for (int succ = 0; succ < TransitionTable::kSucc; ++succ) {
                for (int runs = 0; runs < TransitionTable::kRuns; ++runs) {
                    double acc = 0.0;
                    for (std::size_t g = 0; g < tables.size(); ++g)
                        acc += weights[g] / sum *
                               tables[g].cell(s, o, succ, runs);
                    out.cell(s, o, succ, runs) = acc;
                }
            }
        }
    }
    out.finalize();
    return out;
}

TransitionTable::Transition apply_transition(const BaseOutState& state,
                                             Outcome o,
                                             const TransitionTable& table,
                                             Engine& rng) {
    if (state.is_terminal())
        throw std::logic_error("apply_transition: terminal pre-state");
    return table.sample(state, o, rng);
}

}  // namespace matchup
