#include "cyclecirc/augmented.hpp"

#include <map>

#include "cyclecirc/derived.hpp"

namespace cyclecirc {

AugmentedChain::AugmentedChain(const DtmcSpec& support, int start) {
    if (!support.states.contains(start))
        raise("UnknownState", "start state " + std::to_string(start) + " out of range");
    int n_states = support.states.size();

    std::map<std::vector<int>, int> index;
    auto intern = [&](std::vector<int> stack) {
        auto [it, inserted] = index.try_emplace(std::move(stack), static_cast<int>(nodes_.size()));
        if (inserted) {
            Node node;
            node.stack = it->first;
            node.top = node.stack.back();
            nodes_.push_back(std::move(node));
        }
        return it->second;
    };

    intern({start});
    // Nodes are appended while scanning, which doubles as the BFS worklist.
    // intern() may reallocate nodes_, so work on a copy of the stack.
    for (std::size_t v = 0; v < nodes_.size(); ++v) {
        const std::vector<int> stack = nodes_[v].stack;
        std::vector<Edge> edges;
        for (int j = 0; j < n_states; ++j) {
            if (support.P(stack.back(), j) <= 0.0) continue;
            DerivedState y(n_states, stack.front());
            for (std::size_t k = 1; k < stack.size(); ++k) y.advance(stack[k]);
            auto popped = y.advance(j);
            int target = intern(y.stack());
            edges.push_back(Edge{j, target, std::move(popped)});
        }
        nodes_[v].edges = std::move(edges);
    }
}

} // namespace cyclecirc
