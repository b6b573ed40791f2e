// Canonical plate-appearance data model: the nine-way outcome taxonomy, the
// 24 base-out states, and the observed-record type everything downstream
// consumes.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace matchup {

// Index mapping is fixed and serialized by these codes:
//   0=K  1=BB  2=HBP  3=GO  4=FO  5=1B  6=2B  7=3B  8=HR
enum class Outcome : std::uint8_t {
    Strikeout = 0,
    Walk = 1,
    HitByPitch = 2,
    GroundOut = 3,
    FlyOut = 4,
    Single = 5,
    Double = 6,
    Triple = 7,
    HomeRun = 8,
};

constexpr int kNumOutcomes = 9;
using Simplex9 = std::array<double, kNumOutcomes>;

std::string_view outcome_code(Outcome o);                  // "K", "BB", ...
std::optional<Outcome> outcome_from_code(std::string_view s);
// Non-canonical event codes mapped to their closest canonical outcome
// (e.g. "SF" -> FO, "FC" -> GO, "ROE" -> 1B). Returns nullopt for unknowns.
std::optional<Outcome> outcome_from_alias(std::string_view s);

// Outs 0..2 with a 3-bit occupancy mask (bit0=first, bit1=second, bit2=third)
// gives the 24 in-play states. The terminal half-inning marker is outs==3
// with empty bases and lives outside the 24-state index space.
struct BaseOutState {
    std::uint8_t outs = 0;
    std::uint8_t bases = 0;

    static constexpr int kStates = 24;       // in-play states
    static constexpr int kTerminalIndex = 24;

    static BaseOutState terminal() { return BaseOutState{3, 0}; }
    bool is_terminal() const { return outs == 3; }
    bool valid() const {
        return (outs <= 2 && bases <= 7) || (outs == 3 && bases == 0);
    }
    int runners() const;
    // In-play index 0..23; terminal maps to kTerminalIndex.
    int index() const { return is_terminal() ? kTerminalIndex : outs * 8 + bases; }
    static BaseOutState from_index(int idx);

    bool first() const { return bases & 1; }
    bool second() const { return bases & 2; }
    bool third() const { return bases & 4; }

    bool operator==(const BaseOutState&) const = default;
};

// Same-handed = 1, opposite-handed = 0. A matchup is "same" exactly when the
// pitcher and batter hands agree.
enum class Handedness : std::uint8_t { Opposite = 0, Same = 1 };

Handedness matchup_handedness(char pitcher_hand, char batter_hand);

constexpr int kMaxRunsPerPa = 4;  // bases loaded + batter

struct PlateAppearanceRecord {
    std::string date;  // ISO yyyy-mm-dd; lexicographic order is time order
    std::string pitcher_id;
    std::string batter_id;
    char pitcher_hand = 'R';  // 'L' or 'R'
    char batter_hand = 'R';
    int batting_order = 1;  // 1..9
    Outcome outcome = Outcome::Strikeout;
    BaseOutState pre_state;
    BaseOutState post_state;  // may be terminal
    int runs_scored = 0;

    Handedness handedness() const {
        return matchup_handedness(pitcher_hand, batter_hand);
    }
};

// Accounting identity for a transition: the runners present before the PA
// plus the batter must be accounted for by runners left on base, outs
// recorded, and runs scored. A terminal successor zeroes its base mask, so
// stranded runners appear there as nonnegative slack.
bool runs_conservation_ok(const BaseOutState& pre, const BaseOutState& post,
                          int runs);

// Deterministic successors. Walks (and HBP) advance only forced runners;
// strikeouts never advance anyone; home runs clear the bases.
struct ForcedTransition {
    BaseOutState post;
    int runs = 0;
};
ForcedTransition walk_successor(const BaseOutState& pre);
ForcedTransition strikeout_successor(const BaseOutState& pre);
ForcedTransition homerun_successor(const BaseOutState& pre);

// Validity of one observed record beyond field ranges: conservation holds,
// outs never decrease, and the deterministic outcomes (K/BB/HBP/HR) match
// their forced successors exactly. Returns an error message or empty.
std::string validate_record(const PlateAppearanceRecord& rec);

}  // namespace matchup
