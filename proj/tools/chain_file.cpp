#include "chain_file.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "cyclecirc/report.hpp"

namespace cyclecirc::cli {

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& origin, int line, const std::string& message) {
    raise("ParseError", origin + ":" + std::to_string(line) + ": " + message);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

ChainFile from_parts(const std::string& origin, std::string_view text, const std::string& kind_text,
                     std::vector<std::string> labels, std::vector<std::vector<double>> matrix,
                     std::optional<std::string> start_label, bool renormalize) {
    ChainKind kind;
    if (kind_text == "dtmc")
        kind = ChainKind::dtmc;
    else if (kind_text == "ctmc")
        kind = ChainKind::ctmc;
    else
        raise("ParseError", origin + ": kind must be 'dtmc' or 'ctmc', got '" + kind_text + "'");
    if (labels.empty()) raise("ParseError", origin + ": missing 'states'");
    if (matrix.empty()) raise("ParseError", origin + ": missing 'matrix'");

    StateSpace states(std::move(labels));
    ValidateOptions opt;
    opt.renormalize = renormalize;
    ChainFile file{validate_chain(states, matrix, kind, opt), std::nullopt, digest_hex(text), origin};
    if (start_label) file.start = file.chain.states().index(*start_label);
    return file;
}

ChainFile parse_json(std::string_view text, const std::string& origin, bool renormalize) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        raise("ParseError", origin + ": " + e.what());
    }
    if (!j.is_object()) raise("ParseError", origin + ": expected a JSON object");
    for (const char* key : {"kind", "states", "matrix"})
        if (!j.contains(key)) raise("ParseError", origin + ": missing key '" + std::string(key) + "'");
    std::vector<std::string> labels = j["states"].get<std::vector<std::string>>();
    std::vector<std::vector<double>> matrix = j["matrix"].get<std::vector<std::vector<double>>>();
    std::optional<std::string> start;
    if (j.contains("start")) start = j["start"].get<std::string>();
    return from_parts(origin, text, j["kind"].get<std::string>(), std::move(labels), std::move(matrix),
                      start, renormalize);
}

} // namespace

ChainFile parse_chain_text(std::string_view text, const std::string& origin, bool renormalize) {
    std::string_view probe = text;
    while (!probe.empty() && (probe.front() == ' ' || probe.front() == '\n' || probe.front() == '\t' ||
                              probe.front() == '\r'))
        probe.remove_prefix(1);
    if (!probe.empty() && probe.front() == '{') return parse_json(text, origin, renormalize);

    std::string kind_text;
    std::vector<std::string> labels;
    std::vector<std::vector<double>> matrix;
    std::optional<std::string> start_label;
    bool in_matrix = false;

    int line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;

        auto colon = line.find(':');
        std::string_view key = colon == std::string_view::npos ? "" : trim(line.substr(0, colon));
        bool is_key = colon != std::string_view::npos && !key.empty() &&
                      key.find(' ') == std::string_view::npos &&
                      (key == "kind" || key == "states" || key == "matrix" || key == "start");
        if (is_key) {
            std::string_view value = trim(line.substr(colon + 1));
            in_matrix = false;
            if (key == "kind") {
                kind_text = std::string(value);
            } else if (key == "states") {
                labels = split_ws(value);
                if (labels.empty()) parse_fail(origin, line_no, "'states' needs at least one label");
            } else if (key == "start") {
                if (value.empty()) parse_fail(origin, line_no, "'start' needs a state label");
                start_label = std::string(value);
            } else { // matrix
                in_matrix = true;
                if (!value.empty()) parse_fail(origin, line_no, "matrix rows start on the next line");
            }
            continue;
        }
        if (!in_matrix) parse_fail(origin, line_no, "unexpected line '" + std::string(line) + "'");
        std::vector<double> row;
        for (const auto& tok : split_ws(line)) {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc{} || ptr != tok.data() + tok.size())
                parse_fail(origin, line_no, "bad number '" + tok + "'");
            row.push_back(v);
        }
        matrix.push_back(std::move(row));
    }
    if (kind_text.empty()) raise("ParseError", origin + ": missing 'kind'");
    return from_parts(origin, text, kind_text, std::move(labels), std::move(matrix), start_label,
                      renormalize);
}

ChainFile load_chain_file(const std::string& path, bool renormalize) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise("ParseError", "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_chain_text(buf.str(), path, renormalize);
}

std::vector<double> parse_grid(std::string_view text) {
    double a = 0.0, b = 0.0, step = 0.0;
    std::string s(text);
    std::istringstream in(s);
    char c1 = 0, c2 = 0;
    if (!(in >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0.0)
        raise("ParseError", "grid must be 'a:b:step' with step > 0, got '" + s + "'");
    if (b < a) raise("ParseError", "grid bounds out of order in '" + s + "'");
    std::vector<double> grid;
    long long steps = static_cast<long long>(std::floor((b - a) / step + 1e-9));
    for (long long k = 0; k <= steps; ++k) grid.push_back(a + static_cast<double>(k) * step);
    return grid;
}

} // namespace cyclecirc::cli
