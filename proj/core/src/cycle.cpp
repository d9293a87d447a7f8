#include "cyclecirc/cycle.hpp"

#include <algorithm>
#include <set>

namespace cyclecirc {

namespace {

void rotate_min_first(std::vector<int>& states) {
    auto min_it = std::min_element(states.begin(), states.end());
    std::rotate(states.begin(), min_it, states.end());
}

} // namespace

Cycle::Cycle(std::vector<int> states) : states_(std::move(states)) {
    if (states_.empty()) raise("EmptyCycle", "a cycle needs at least one state");
    std::set<int> seen(states_.begin(), states_.end());
    if (seen.size() != states_.size())
        raise("DuplicateState", "cycle states must be distinct");
    rotate_min_first(states_);
}

bool Cycle::passes_through(int state) const {
    return std::find(states_.begin(), states_.end(), state) != states_.end();
}

Cycle Cycle::reversed() const {
    std::vector<int> rev(states_.rbegin(), states_.rend());
    return Cycle(std::move(rev));
}

Cycle canonicalize(std::vector<int> states) { return Cycle(std::move(states)); }

Cycle reversed_cycle(const Cycle& c) { return c.reversed(); }

bool is_similar(const Cycle& a, const Cycle& b) {
    if (a.length() != b.length()) return false;
    std::set<int> sa(a.states().begin(), a.states().end());
    std::set<int> sb(b.states().begin(), b.states().end());
    return sa == sb;
}

bool all_pass_through(const std::vector<Cycle>& family, int state) {
    return std::all_of(family.begin(), family.end(),
                       [&](const Cycle& c) { return c.passes_through(state); });
}

std::vector<int> common_states(const std::vector<Cycle>& family) {
    std::vector<int> common;
    if (family.empty()) return common;
    for (int s : family.front().states())
        if (all_pass_through(family, s)) common.push_back(s);
    return common;
}

std::string format_cycle(const Cycle& c, const StateSpace& states) {
    std::string out = "(";
    for (int k = 0; k < c.length(); ++k) {
        if (k) out += ',';
        out += states.label(c.states()[static_cast<std::size_t>(k)]);
    }
    out += ')';
    return out;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

} // namespace

Cycle parse_cycle(std::string_view text, const StateSpace& states) {
    std::string_view body = trim(text);
    if (body.size() < 2 || body.front() != '(' || body.back() != ')')
        raise("BadCycle", "expected '(label,label,...)', got '" + std::string(text) + "'");
    body = body.substr(1, body.size() - 2);
    std::vector<int> indices;
    std::size_t pos = 0;
    while (pos <= body.size()) {
        std::size_t comma = body.find(',', pos);
        std::string_view token =
            trim(comma == std::string_view::npos ? body.substr(pos) : body.substr(pos, comma - pos));
        if (token.empty())
            raise("BadCycle", "empty state label in '" + std::string(text) + "'");
        indices.push_back(states.index(std::string(token)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return Cycle(std::move(indices));
}

std::vector<Cycle> parse_cycle_list(std::string_view text, const StateSpace& states) {
    std::vector<Cycle> cycles;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t open = text.find('(', pos);
        if (open == std::string_view::npos) {
            if (!trim(text.substr(pos)).empty() && trim(text.substr(pos)) != ",")
                raise("BadCycle", "trailing junk in cycle list: '" + std::string(text.substr(pos)) + "'");
            break;
        }
        std::size_t close = text.find(')', open);
        if (close == std::string_view::npos)
            raise("BadCycle", "unbalanced '(' in cycle list");
        cycles.push_back(parse_cycle(text.substr(open, close - open + 1), states));
        pos = close + 1;
    }
    if (cycles.empty()) raise("BadCycle", "no cycles found in '" + std::string(text) + "'");
    return cycles;
}

} // namespace cyclecirc
