#include "torapp/text.hpp"

#include "torapp/error.hpp"

#include <charconv>
#include <cmath>

namespace torapp::text {

std::string format_double(double x) {
    if (x == 0) return "0"; // folds -0
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, end);
}

double parse_double(std::string_view field) {
    double x = 0;
    auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), x);
    if (ec != std::errc{} || end != field.data() + field.size() || field.empty())
        throw ParseError("invalid number '" + std::string(field) + "'");
    return x;
}

long long parse_int(std::string_view field) {
    long long x = 0;
    auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), x);
    if (ec != std::errc{} || end != field.data() + field.size() || field.empty())
        throw ParseError("invalid integer '" + std::string(field) + "'");
    return x;
}

unsigned long long parse_uint(std::string_view field) {
    unsigned long long x = 0;
    auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), x);
    if (ec != std::errc{} || end != field.data() + field.size() || field.empty())
        throw ParseError("invalid unsigned integer '" + std::string(field) + "'");
    return x;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? line.npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::vector<std::string_view> tokenize(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const auto start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view line) {
    std::vector<std::pair<std::string, std::string>> out;
    for (auto tok : tokenize(line)) {
        const auto eq = tok.find('=');
        if (eq == std::string_view::npos) continue;
        std::string key(tok.substr(0, eq));
        for (const auto& [k, v] : out)
            if (k == key) throw ParseError("duplicate key '" + key + "'");
        out.emplace_back(std::move(key), std::string(tok.substr(eq + 1)));
    }
    return out;
}

} // namespace torapp::text
