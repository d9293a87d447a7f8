#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cyclecirc/error.hpp"

namespace cyclecirc {

// Finite set of labeled states. State indices are [0, size()).
class StateSpace {
public:
    explicit StateSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
        for (std::size_t i = 0; i < labels_.size(); ++i)
            for (std::size_t j = i + 1; j < labels_.size(); ++j)
                if (labels_[i] == labels_[j])
                    raise("DuplicateLabel", "state label '" + labels_[i] + "' appears twice");
    }

    // Unlabeled space with labels "0", "1", ...
    static StateSpace indexed(int n) {
        std::vector<std::string> labels;
        labels.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) labels.push_back(std::to_string(i));
        return StateSpace(std::move(labels));
    }

    int size() const { return static_cast<int>(labels_.size()); }

    const std::string& label(int i) const { return labels_.at(static_cast<std::size_t>(i)); }

    std::optional<int> find(const std::string& label) const {
        for (int i = 0; i < size(); ++i)
            if (labels_[static_cast<std::size_t>(i)] == label) return i;
        return std::nullopt;
    }

    int index(const std::string& label) const {
        auto i = find(label);
        if (!i) raise("UnknownState", "no state named '" + label + "'");
        return *i;
    }

    bool contains(int i) const { return i >= 0 && i < size(); }

    const std::vector<std::string>& labels() const { return labels_; }

    bool operator==(const StateSpace&) const = default;

private:
    std::vector<std::string> labels_;
};

} // namespace cyclecirc
