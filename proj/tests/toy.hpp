#pragma once

// Miniature MT-type generators and full-period brute-force oracles.

#include <cstdint>
#include <set>
#include <vector>

#include "mtconv/generator.hpp"
#include "mtconv/streams.hpp"

namespace toy {

using mtconv::generator_params;

// (w, N, M, r, a, tempering...) chosen so that the characteristic polynomial
// is primitive; period_of() re-checks this.
inline constexpr generator_params p12{5, 3, 1, 3, 0x1b, 1, 0x1f, 1, 0x16, 2, 0x18, 3};
inline constexpr generator_params p13{4, 4, 1, 3, 0xb, 1, 0xf, 1, 0xa, 2, 0xc, 3};
inline constexpr generator_params p16{6, 3, 1, 2, 0x31, 2, 0x3f, 1, 0x2a, 3, 0x38, 4};

/// Steps the raw recurrence on a window until it returns; 0 if it does not
/// return within `limit` steps.
inline std::uint64_t period_of(const generator_params& p, std::vector<std::uint32_t> window, std::uint64_t limit) {
    const std::vector<std::uint32_t> start = window;
    const std::uint32_t low = p.lower_mask();
    auto same_state = [&] {
        if ((window[0] & ~low) != (start[0] & ~low)) return false;
        for (std::size_t i = 1; i < window.size(); ++i)
            if (window[i] != start[i]) return false;
        return true;
    };
    for (std::uint64_t step = 1; step <= limit; ++step) {
        const std::uint32_t next = mtconv::recurrence(p, window[p.m], window[0], window[1]);
        window.erase(window.begin());
        window.push_back(next);
        if (same_state()) return step;
    }
    return 0;
}

/// Tempered outputs over one full period (2^p - 1 words), starting from the
/// window (0, ..., 0, 1).
inline std::vector<std::uint32_t> full_period(const generator_params& p) {
    std::vector<std::uint32_t> window(p.n, 0);
    window.back() = 1;
    const std::uint64_t period = (std::uint64_t{1} << p.state_bits()) - 1;
    std::vector<std::uint32_t> out;
    out.reserve(period);
    for (std::uint64_t i = 0; i < period; ++i) {
        const std::uint32_t next = mtconv::recurrence(p, window[p.m], window[0], window[1]);
        window.erase(window.begin());
        window.push_back(next);
        out.push_back(mtconv::temper(p, next));
    }
    return out;
}

/// Value j of a layout over a periodic word sequence.
inline std::uint64_t value_at(const mtconv::output_layout& layout, const std::vector<std::uint32_t>& seq, std::uint64_t j) {
    std::vector<std::uint32_t> words(layout.words_per_output);
    for (unsigned q = 0; q < layout.words_per_output; ++q) words[q] = seq[(j * layout.words_per_output + q) % seq.size()];
    return mtconv::compose(layout, words);
}

/// Window bits [first, first + width) of value j.
inline std::uint64_t window_bits(const mtconv::output_layout& layout, const std::vector<std::uint32_t>& seq,
                                 std::uint64_t j, unsigned first, unsigned width) {
    const std::uint64_t v = value_at(layout, seq, j);
    return (v >> (layout.width() - first - width)) & ((std::uint64_t{1} << width) - 1);
}

/// k(v) by counting every k-tuple of v-bit prefixes over the full period.
inline std::size_t counted_kv(const generator_params& p, const mtconv::output_layout& layout,
                              const std::vector<std::uint32_t>& seq, unsigned v) {
    const std::size_t bits = p.state_bits();
    const std::uint64_t period = seq.size();
    std::size_t best = 0;
    for (std::size_t k = 1; k * v <= bits; ++k) {
        std::vector<std::uint32_t> hist(std::size_t{1} << (k * v), 0);
        for (std::uint64_t i = 0; i < period; ++i) {
            std::uint64_t tuple = 0;
            for (std::size_t j = 0; j < k; ++j) tuple = (tuple << v) | window_bits(layout, seq, i + j, 0, v);
            ++hist[tuple];
        }
        const std::uint32_t each = std::uint32_t{1} << (bits - k * v);
        bool uniform = hist[0] == each - 1;
        for (std::size_t c = 1; c < hist.size() && uniform; ++c) uniform = hist[c] == each;
        if (!uniform) break;
        best = k;
    }
    return best;
}

/// Every nonzero set of coordinates (value j < k, window bit l) whose bits
/// XOR to zero at every index of the period; coordinates are j * width + l.
inline std::set<std::vector<std::size_t>> brute_force_relations(const mtconv::output_layout& layout,
                                                                 const std::vector<std::uint32_t>& seq, unsigned first,
                                                                 unsigned width, std::size_t k) {
    const std::uint64_t period = seq.size();
    const std::size_t coords = k * width;
    const std::size_t words = (period + 63) / 64;
    // Column c: the bit of coordinate c at every index i, packed.
    std::vector<std::vector<std::uint64_t>> columns(coords, std::vector<std::uint64_t>(words, 0));
    for (std::uint64_t i = 0; i < period; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            const std::uint64_t bits = window_bits(layout, seq, i + j, first, width);
            for (unsigned l = 0; l < width; ++l)
                if ((bits >> (width - 1 - l)) & 1u) columns[j * width + l][i / 64] |= std::uint64_t{1} << (i % 64);
        }
    std::set<std::vector<std::size_t>> out;
    std::vector<std::uint64_t> acc(words, 0);
    std::uint64_t gray = 0;
    for (std::uint64_t step = 1; step < (std::uint64_t{1} << coords); ++step) {
        const unsigned flip = static_cast<unsigned>(__builtin_ctzll(step));
        gray ^= std::uint64_t{1} << flip;
        for (std::size_t w = 0; w < words; ++w) acc[w] ^= columns[flip][w];
        bool zero = true;
        for (std::size_t w = 0; w < words && zero; ++w) zero = acc[w] == 0;
        if (!zero) continue;
        std::vector<std::size_t> set;
        for (std::size_t c = 0; c < coords; ++c)
            if ((gray >> c) & 1u) set.push_back(c);
        out.insert(set);
    }
    return out;
}

}  // namespace toy
