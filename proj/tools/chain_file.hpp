#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "cyclecirc/chain.hpp"

namespace cyclecirc::cli {

struct ChainFile {
    ChainSpec chain;
    std::optional<int> start;
    std::string digest; // content digest, embedded in reports
    std::string origin; // path or "<memory>"
};

// Plain-text format ("key: value" lines, matrix rows after "matrix:", '#'
// comments) or a JSON object with the same keys: kind, states, matrix, start.
// The format is sniffed from the first non-space byte.
ChainFile parse_chain_text(std::string_view text, const std::string& origin,
                           bool renormalize = false);
ChainFile load_chain_file(const std::string& path, bool renormalize = false);

// "a:b:step" inclusive numeric grid.
std::vector<double> parse_grid(std::string_view text);

} // namespace cyclecirc::cli
