#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cyclecirc/cycle.hpp"

namespace cyclecirc {

// State of the derived chain: the stack of distinct states left over after
// discarding completed cycles. Keeps an O(1) position lookup per state.
class DerivedState {
public:
    // num_states: size of the underlying state space.
    DerivedState(int num_states, int initial_state);

    const std::vector<int>& stack() const { return stack_; }
    int top() const { return stack_.back(); }
    bool contains(int state) const { return pos_[static_cast<std::size_t>(state)] >= 0; }

    // Advance by one observed state. If `next_state` is already on the stack,
    // truncates and returns the popped cycle; otherwise pushes and returns
    // nothing.
    std::optional<Cycle> advance(int next_state);

    bool operator==(const DerivedState& other) const { return stack_ == other.stack_; }

private:
    std::vector<int> stack_;
    std::vector<int> pos_; // pos_[s] = index of s in stack_, or -1
};

struct PopResult {
    DerivedState next;
    std::optional<Cycle> popped;
};

// Pure single-step version of DerivedState::advance.
PopResult derived_step(const DerivedState& y, int next_state);

struct CycleEvent {
    long long step; // index into the trajectory at which the cycle closed
    Cycle cycle;
};

// Folds the derived chain over a trajectory and returns every popped cycle
// with the step at which it was popped.
std::vector<CycleEvent> run_derived(std::span<const int> trajectory, int num_states);

} // namespace cyclecirc
