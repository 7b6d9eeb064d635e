#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mtconv {

/// Known-answer vectors: a `seed=<n>` header, then one decimal 32-bit output
/// per line.
struct known_answer {
    std::uint32_t seed = 0;
    std::vector<std::uint32_t> outputs;
};

namespace detail {

inline std::uint64_t parse_decimal(const std::string& text, std::uint64_t max, std::size_t line) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || v > max)
        throw std::runtime_error("known-answer line " + std::to_string(line) + ": bad value '" + text + "'");
    return v;
}

}  // namespace detail

[[nodiscard]] inline known_answer read_known_answer(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("known-answer: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("seed=", 0) != 0) throw std::runtime_error("known-answer: missing seed= header");
    known_answer kat;
    kat.seed = static_cast<std::uint32_t>(detail::parse_decimal(line.substr(5), 0xffffffffu, 1));
    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        kat.outputs.push_back(static_cast<std::uint32_t>(detail::parse_decimal(line, 0xffffffffu, number)));
    }
    return kat;
}

inline void write_known_answer(std::ostream& out, const known_answer& kat) {
    out << "seed=" << kat.seed << '\n';
    for (auto v : kat.outputs) out << v << '\n';
}

}  // namespace mtconv
