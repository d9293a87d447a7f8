#include "cyclecirc/derived.hpp"

#include <algorithm>

namespace cyclecirc {

DerivedState::DerivedState(int num_states, int initial_state)
    : pos_(static_cast<std::size_t>(num_states), -1) {
    if (initial_state < 0 || initial_state >= num_states)
        raise("UnknownState", "initial state " + std::to_string(initial_state) + " out of range");
    stack_.push_back(initial_state);
    pos_[static_cast<std::size_t>(initial_state)] = 0;
}

std::optional<Cycle> DerivedState::advance(int next_state) {
    if (next_state < 0 || next_state >= static_cast<int>(pos_.size()))
        raise("UnknownState", "state " + std::to_string(next_state) + " out of range");
    int at = pos_[static_cast<std::size_t>(next_state)];
    if (at < 0) {
        pos_[static_cast<std::size_t>(next_state)] = static_cast<int>(stack_.size());
        stack_.push_back(next_state);
        return std::nullopt;
    }
    // next_state == stack_[at]: the segment stack_[at..top] closes a cycle.
    std::vector<int> cycle_states(stack_.begin() + at, stack_.end());
    for (std::size_t k = static_cast<std::size_t>(at) + 1; k < stack_.size(); ++k)
        pos_[static_cast<std::size_t>(stack_[k])] = -1;
    stack_.resize(static_cast<std::size_t>(at) + 1);
    return Cycle(std::move(cycle_states));
}

PopResult derived_step(const DerivedState& y, int next_state) {
    PopResult r{y, std::nullopt};
    r.popped = r.next.advance(next_state);
    return r;
}

std::vector<CycleEvent> run_derived(std::span<const int> trajectory, int num_states) {
    if (trajectory.empty()) raise("EmptyTrajectory", "trajectory must contain at least one state");
    std::vector<CycleEvent> events;
    DerivedState y(num_states, trajectory[0]);
    for (std::size_t n = 1; n < trajectory.size(); ++n) {
        if (auto popped = y.advance(trajectory[n]))
            events.push_back({static_cast<long long>(n), std::move(*popped)});
    }
    return events;
}

} // namespace cyclecirc
