#pragma once

#include <optional>
#include <vector>

#include "cyclecirc/chain.hpp"
#include "cyclecirc/cycle.hpp"

namespace cyclecirc {

// The derived chain restricted to stacks reachable from [start]. Edges carry
// the destination state and the cycle the move pops, if any; transition
// weights are applied by the consumer (step probabilities or rates).
class AugmentedChain {
public:
    struct Edge {
        int to_state = -1;  // state j the underlying chain moves to
        int target = -1;    // node index of the resulting stack
        std::optional<Cycle> popped;
    };

    struct Node {
        std::vector<int> stack;
        int top = -1;
        std::vector<Edge> edges;
    };

    // `support` supplies the positive-probability moves (use the embedded
    // chain of a CTMC; its support equals the rate support).
    AugmentedChain(const DtmcSpec& support, int start);

    int size() const { return static_cast<int>(nodes_.size()); }
    int root() const { return 0; }
    const Node& node(int v) const { return nodes_[static_cast<std::size_t>(v)]; }

private:
    std::vector<Node> nodes_;
};

} // namespace cyclecirc
