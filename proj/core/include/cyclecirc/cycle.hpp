#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

#include "cyclecirc/state_space.hpp"

namespace cyclecirc {

// A cycle is an equivalence class of directed circuits of distinct states
// under cyclic rotation. The stored representative is the rotation that puts
// the smallest state index first, so equality of Cycle values coincides with
// equivalence of circuits.
class Cycle {
public:
    // Canonicalizes on construction. States must be distinct and nonempty.
    explicit Cycle(std::vector<int> states);

    int length() const { return static_cast<int>(states_.size()); }
    const std::vector<int>& states() const { return states_; }

    // k-th state with wrap-around, so edges are (state(k), state(k+1)).
    int state(int k) const {
        int s = length();
        return states_[static_cast<std::size_t>(((k % s) + s) % s)];
    }

    bool passes_through(int state) const;

    // The conjugate cycle (i1, is, ..., i2).
    Cycle reversed() const;

    auto operator<=>(const Cycle&) const = default;

private:
    std::vector<int> states_;
};

Cycle canonicalize(std::vector<int> states);
Cycle reversed_cycle(const Cycle& c);

// Same length and same state set.
bool is_similar(const Cycle& a, const Cycle& b);

// True if every cycle of the family passes through `state`.
bool all_pass_through(const std::vector<Cycle>& family, int state);
// A state shared by every cycle of the family, if one exists.
std::vector<int> common_states(const std::vector<Cycle>& family);

// Text syntax used by CLI and config files: "(E,ES,EP)".
std::string format_cycle(const Cycle& c, const StateSpace& states);
Cycle parse_cycle(std::string_view text, const StateSpace& states);
// Comma-separated list of parenthesized cycles: "(E,ES,EP),(E,EP,ES)".
std::vector<Cycle> parse_cycle_list(std::string_view text, const StateSpace& states);

} // namespace cyclecirc
