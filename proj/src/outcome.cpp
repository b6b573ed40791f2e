#include "matchup/outcome.hpp"

#include <bit>
#include <stdexcept>

namespace matchup {

namespace {
constexpr std::array<std::string_view, kNumOutcomes> kCodes = {
    "K", "BB", "HBP", "GO", "FO", "1B", "2B", "3B", "HR"};
}

std::string_view outcome_code(Outcome o) {
    return kCodes[static_cast<int>(o)];
}

std::optional<Outcome> outcome_from_code(std::string_view s) {
    for (int i = 0; i < kNumOutcomes; ++i)
        if (kCodes[i] == s) return static_cast<Outcome>(i);
    return std::nullopt;
}

std::optional<Outcome> outcome_from_alias(std::string_view s) {
    // Rare event types folded into the closest canonical outcome so the
    // nine-way taxonomy stays closed.
    if (s == "SO") return Outcome::Strikeout;
    if (s == "IBB" || s == "W") return Outcome::Walk;
    if (s == "CI") return Outcome::HitByPitch;   // batter awarded first, ball dead
    if (s == "FC" || s == "SH" || s == "DP") return Outcome::GroundOut;
    if (s == "SF" || s == "LO" || s == "PO") return Outcome::FlyOut;
    if (s == "ROE" || s == "E") return Outcome::Single;  // batter reaches one base
    return std::nullopt;
}

int BaseOutState::runners() const { return std::popcount(bases); }

BaseOutState BaseOutState::from_index(int idx) {
    if (idx == kTerminalIndex) return terminal();
    if (idx < 0 || idx >= kStates)
        throw std::out_of_range("BaseOutState::from_index: bad index");
    return BaseOutState{static_cast<std::uint8_t>(idx / 8),
                        static_cast<std::uint8_t>(idx % 8)};
}

Handedness matchup_handedness(char pitcher_hand, char batter_hand) {
    return pitcher_hand == batter_hand ? Handedness::Same : Handedness::Opposite;
}

bool runs_conservation_ok(const BaseOutState& pre, const BaseOutState& post,
                          int runs) {
    if (!pre.valid() || pre.is_terminal() || !post.valid()) return false;
    if (runs < 0 || runs > kMaxRunsPerPa) return false;
    const int before = pre.runners() + 1;  // runners plus the batter
    const int outs_made = post.outs - pre.outs;
    if (outs_made < 0) return false;
    if (post.is_terminal()) {
        // Stranded runners are invisible in the terminal encoding; they show
        // up as slack between 0 and 3.
        if (outs_made < 1) return false;
        int stranded = before - outs_made - runs;
        return stranded >= 0 && stranded <= 3;
    }
    return before == post.runners() + outs_made + runs;
}

ForcedTransition walk_successor(const BaseOutState& pre) {
    int runs = 0;
    std::uint8_t bases = pre.bases;
    if (bases & 1) {              // runner on first is forced
        if (bases & 2) {          // second also occupied
            if (bases & 4) runs = 1;  // bases loaded: third scores
            bases |= 4;
        }
        bases |= 2;
    }
    bases |= 1;  // batter to first
    return {BaseOutState{pre.outs, bases}, runs};
}

ForcedTransition strikeout_successor(const BaseOutState& pre) {
    if (pre.outs == 2) return {BaseOutState::terminal(), 0};
    return {BaseOutState{static_cast<std::uint8_t>(pre.outs + 1), pre.bases}, 0};
}

ForcedTransition homerun_successor(const BaseOutState& pre) {
    return {BaseOutState{pre.outs, 0}, pre.runners() + 1};
}

std::string validate_record(const PlateAppearanceRecord& rec) {
    if (!rec.pre_state.valid() || rec.pre_state.is_terminal())
        return "invalid pre_state";
    if (!rec.post_state.valid()) return "invalid post_state";
    if (rec.batting_order < 1 || rec.batting_order > 9)
        return "batting_order outside 1..9";
    if (rec.pitcher_hand != 'L' && rec.pitcher_hand != 'R')
        return "invalid pitcher_hand";
    if (rec.batter_hand != 'L' && rec.batter_hand != 'R')
        return "invalid batter_hand";
    if (!runs_conservation_ok(rec.pre_state, rec.post_state, rec.runs_scored))
        return "runs-conservation violation";

    ForcedTransition forced;
    switch (rec.outcome) {
        case Outcome::Strikeout:
            forced = strikeout_successor(rec.pre_state);
            break;
        case Outcome::Walk:
        case Outcome::HitByPitch:
            forced = walk_successor(rec.pre_state);
            break;
        case Outcome::HomeRun:
            forced = homerun_successor(rec.pre_state);
            break;
        case Outcome::GroundOut:
        case Outcome::FlyOut:
            if (rec.post_state.outs == rec.pre_state.outs)
                return "out-type outcome without an out recorded";
            return {};
        default:
            return {};
    }
    if (!(rec.post_state == forced.post) || rec.runs_scored != forced.runs)
        return "outcome does not match its forced transition";
    return {};
}

}  // namespace matchup
