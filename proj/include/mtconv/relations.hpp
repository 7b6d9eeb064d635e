#pragma once

#include <algorithm>
#include <bit>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mtconv/equidist.hpp"
#include "mtconv/f2matrix.hpp"
#include "mtconv/generator.hpp"
#include "mtconv/streams.hpp"

namespace mtconv {

/// Bit `bit` (from the MSB) of stream value i + lag.
struct relation_term {
    std::uint64_t lag = 0;
    unsigned bit = 0;
    friend constexpr auto operator<=>(const relation_term&, const relation_term&) = default;
};

/// A set of terms whose bits sum to zero over F2 at every index i.
class linear_relation {
public:
    linear_relation() = default;
    explicit linear_relation(std::vector<relation_term> terms, std::string stream = "raw32")
        : terms_(std::move(terms)), stream_(std::move(stream)) {
        if (terms_.empty()) throw std::invalid_argument("linear_relation: no terms");
        std::sort(terms_.begin(), terms_.end());
        if (std::adjacent_find(terms_.begin(), terms_.end()) != terms_.end())
            throw std::invalid_argument("linear_relation: duplicate term");
    }

    [[nodiscard]] const std::vector<relation_term>& terms() const noexcept { return terms_; }
    [[nodiscard]] const std::string& stream() const noexcept { return stream_; }
    [[nodiscard]] std::size_t weight() const noexcept { return terms_.size(); }
    [[nodiscard]] std::uint64_t max_lag() const noexcept { return terms_.empty() ? 0 : terms_.back().lag; }
    [[nodiscard]] unsigned max_bit() const noexcept {
        unsigned m = 0;
        for (const auto& t : terms_) m = std::max(m, t.bit);
        return m;
    }
    /// Distinct lags in increasing order.
    [[nodiscard]] std::vector<std::uint64_t> lags() const {
        std::vector<std::uint64_t> out;
        for (const auto& t : terms_)
            if (out.empty() || out.back() != t.lag) out.push_back(t.lag);
        return out;
    }

    /// "x[i+0,2] + x[i+792,4] + ..." style text.
    [[nodiscard]] std::string to_string() const {
        std::string s;
        for (const auto& t : terms_) {
            if (!s.empty()) s += " + ";
            s += "x[i+" + std::to_string(t.lag) + "," + std::to_string(t.bit) + "]";
        }
        return s + " = 0";
    }

    /// Ordered by weight, then lexicographically by terms.
    friend bool operator<(const linear_relation& a, const linear_relation& b) {
        if (a.weight() != b.weight()) return a.weight() < b.weight();
        return a.terms_ < b.terms_;
    }
    friend bool operator==(const linear_relation& a, const linear_relation& b) { return a.terms_ == b.terms_; }

private:
    std::vector<relation_term> terms_;
    std::string stream_ = "raw32";
};

/// JSON array of [lag, bit] pairs.
[[nodiscard]] inline nlohmann::json to_json(const linear_relation& rel) {
    auto arr = nlohmann::json::array();
    for (const auto& t : rel.terms()) arr.push_back({t.lag, t.bit});
    return arr;
}

/// Accepts either a bare [[lag, bit], ...] array or
/// {"stream": "raw32", "terms": [[lag, bit], ...]}.
[[nodiscard]] inline linear_relation relation_from_json(const nlohmann::json& j) {
    const nlohmann::json* terms = &j;
    std::string stream = "raw32";
    if (j.is_object()) {
        if (!j.contains("terms")) throw std::invalid_argument("relation JSON: missing \"terms\"");
        terms = &j.at("terms");
        stream = j.value("stream", stream);
    }
    if (!terms->is_array()) throw std::invalid_argument("relation JSON: terms must be an array");
    std::vector<relation_term> out;
    for (const auto& item : *terms) {
        if (!item.is_array() || item.size() != 2) throw std::invalid_argument("relation JSON: each term is [lag, bit]");
        out.push_back({item.at(0).get<std::uint64_t>(), item.at(1).get<unsigned>()});
    }
    return linear_relation(std::move(out), std::move(stream));
}

// ---------------------------------------------------------------------------
// Empirical verification.

struct verify_outcome {
    std::uint32_t seed = 0;
    std::uint64_t checked = 0;
    std::optional<std::uint64_t> first_failure;
    [[nodiscard]] bool holds() const noexcept { return !first_failure.has_value(); }
};

/// Checks the relation at indices i = 0 .. trials-1 of the conversion's
/// value stream; stops at the first index where the bits do not cancel.
template <class Engine = mt19937>
[[nodiscard]] verify_outcome verify(const linear_relation& rel, conversion conv, std::uint64_t trials,
                                    std::uint32_t seed) {
    const unsigned width = output_width(conv);
    if (rel.max_bit() >= width) throw std::out_of_range("verify: relation bit outside the stream width");
    sample_stream<Engine> stream(Engine(seed), stream_config{conv, std::nullopt, 0});
    const std::size_t span = static_cast<std::size_t>(rel.max_lag()) + 1;
    std::vector<std::uint64_t> ring(span);
    for (std::size_t k = 0; k + 1 < span; ++k) ring[k] = stream.next().bits;

    struct prepared_term {
        std::uint64_t lag;
        unsigned shift;
    };
    std::vector<prepared_term> terms;
    for (const auto& t : rel.terms()) terms.push_back({t.lag, width - 1 - t.bit});

    verify_outcome out{seed, 0, std::nullopt};
    for (std::uint64_t i = 0; i < trials; ++i) {
        ring[(i + span - 1) % span] = stream.next().bits;
        std::uint64_t parity = 0;
        for (const auto& t : terms) parity ^= ring[(i + t.lag) % span] >> t.shift;
        out.checked = i + 1;
        if (parity & 1u) {
            out.first_failure = i;
            break;
        }
    }
    return out;
}

template <class Engine = mt19937>
[[nodiscard]] std::vector<verify_outcome> verify(const linear_relation& rel, conversion conv, std::uint64_t trials,
                                                 std::span<const std::uint32_t> seeds) {
    std::vector<verify_outcome> out;
    for (auto s : seeds) out.push_back(verify<Engine>(rel, conv, trials, s));
    return out;
}

// ---------------------------------------------------------------------------
// Discovery through the left kernel of the state -> window-bits map.

struct discover_options {
    /// Enumeration covers 2^dim - 1 combinations; larger kernels are refused.
    std::size_t max_kernel_dim = 20;
    /// Keep only this many lowest-weight relations (all when unset).
    std::optional<std::size_t> max_results;
};

/// The rows (value j, window bit l), j < k, as functionals of the state.
[[nodiscard]] inline f2_matrix window_map(const generator_params& params, const output_layout& layout,
                                          bit_window window, std::size_t k) {
    window_functionals source(params, layout, window);
    f2_matrix g(0, params.state_bits());
    for (std::size_t j = 0; j < k; ++j) {
        const f2_matrix& rows = source.next_value();
        for (std::size_t l = 0; l < rows.rows(); ++l) g.append_row(rows.row(l));
    }
    return g;
}

/// All F2-linear relations among the window bits of k consecutive values,
/// sorted by weight (ties: lexicographic term order). Term bits are output
/// bit positions (window.first + l).
[[nodiscard]] inline std::vector<linear_relation> discover(const generator_params& params, const output_layout& layout,
                                                           bit_window window, std::size_t k,
                                                           const discover_options& options = {},
                                                           const std::string& label = "raw32") {
    if (k == 0) throw std::invalid_argument("discover: k must be positive");
    const f2_matrix g = window_map(params, layout, window, k);
    const std::vector<bit_vector> basis = kernel_basis(g.transpose());
    if (basis.size() > options.max_kernel_dim || basis.size() >= 63)
        throw std::length_error("discover: kernel dimension " + std::to_string(basis.size()) +
                                " exceeds the enumeration bound");
    if (basis.empty()) return {};

    const std::size_t coords = g.rows();
    auto to_relation = [&](const bit_vector& v) {
        std::vector<relation_term> terms;
        for (auto c : v.ones()) terms.push_back({c / window.width, window.first + static_cast<unsigned>(c % window.width)});
        return linear_relation(std::move(terms), label);
    };
    auto combination = [&](std::uint64_t mask) {
        bit_vector v(coords);
        for (std::size_t b = 0; b < basis.size(); ++b)
            if ((mask >> b) & 1u) v ^= basis[b];
        return v;
    };

    // Gray-code walk over all nonzero combinations, recording weights.
    const std::uint64_t total = (std::uint64_t{1} << basis.size()) - 1;
    std::vector<std::pair<std::size_t, std::uint64_t>> weighted;  // (weight, mask)
    weighted.reserve(static_cast<std::size_t>(total));
    bit_vector current(coords);
    std::uint64_t gray = 0;
    for (std::uint64_t i = 1; i <= total; ++i) {
        const unsigned flip = static_cast<unsigned>(std::countr_zero(i));
        current ^= basis[flip];
        gray ^= std::uint64_t{1} << flip;
        weighted.emplace_back(current.popcount(), gray);
    }
    std::sort(weighted.begin(), weighted.end());

    std::size_t keep = weighted.size();
    if (options.max_results && *options.max_results < keep) {
        // Extend the cut to the end of the tie group so the tie-break is exact.
        keep = *options.max_results;
        const std::size_t cut_weight = keep > 0 ? weighted[keep - 1].first : 0;
        while (keep > 0 && keep < weighted.size() && weighted[keep].first == cut_weight) ++keep;
    }
    std::vector<linear_relation> out;
    out.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) out.push_back(to_relation(combination(weighted[i].second)));
    std::sort(out.begin(), out.end());
    if (options.max_results && out.size() > *options.max_results) out.resize(*options.max_results);
    return out;
}

/// Re-addresses a relation on raw words onto the values of a multi-word
/// conversion: raw index phase + lag becomes value (phase + lag) / block, and
/// the bit moves to wherever the layout places it. `phase` is the position
/// of index i inside its block.
[[nodiscard]] inline linear_relation fold(const linear_relation& rel, const output_layout& layout, unsigned phase = 0,
                                          const std::string& label = "") {
    const unsigned block = layout.words_per_output;
    if (block == 0) throw std::invalid_argument("fold: block must be >= 1");
    if (phase >= block) throw std::invalid_argument("fold: phase must be below the block size");
    std::vector<relation_term> terms;
    for (const auto& t : rel.terms()) {
        const std::uint64_t raw = phase + t.lag;
        const auto pos = layout.position_of({static_cast<unsigned>(raw % block), t.bit});
        if (!pos) throw std::invalid_argument("fold: raw bit not carried by the conversion");
        terms.push_back({raw / block, *pos});
    }
    return linear_relation(std::move(terms), label.empty() ? rel.stream() : label);
}

/// The low-weight relations of MT19937 used throughout the toolkit.
namespace known_relations {

/// Five terms on the 12 MSBs, lags {0, 792, 1246}.
inline linear_relation msb12() { return linear_relation({{0, 2}, {792, 4}, {792, 11}, {1246, 4}, {1246, 11}}); }

/// Five terms on bits 20..29, lags {0, 792, 1246}.
inline linear_relation bits20_29() {
    return linear_relation({{0, 20}, {792, 22}, {792, 29}, {1246, 22}, {1246, 29}});
}

/// Six terms, lags {0, 396, 623}.
inline linear_relation six_term() {
    return linear_relation({{0, 1}, {0, 16}, {396, 2}, {396, 17}, {623, 2}, {623, 17}});
}

}  // namespace known_relations

}  // namespace mtconv
