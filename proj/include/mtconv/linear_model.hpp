#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "mtconv/f2matrix.hpp"
#include "mtconv/generator.hpp"

// The state of an MT-type generator is the p-dimensional vector made of the
// w-r MSBs of the oldest window word followed by the remaining N-1 words.
// Coordinates run MSB-first inside each word:
//   coordinate c < w-r            <-> bit c (from the MSB) of window[0]
//   coordinate (w-r) + (i-1)*w + b <-> bit b (from the MSB) of window[i]

namespace mtconv {

/// Bit `b` (counted from the MSB) of a w-bit word.
[[nodiscard]] constexpr bool msb_bit(std::uint32_t word, unsigned b, unsigned w) noexcept {
    return (word >> (w - 1 - b)) & 1u;
}

/// The window of a generator as a p-vector.
[[nodiscard]] inline bit_vector state_vector(const generator_params& p, std::span<const std::uint32_t> window) {
    if (window.size() != p.n) throw std::invalid_argument("state_vector: wrong window length");
    bit_vector s(p.state_bits());
    const unsigned head = p.w - p.r;
    for (unsigned b = 0; b < head; ++b)
        if (msb_bit(window[0], b, p.w)) s.set(b);
    for (std::size_t i = 1; i < p.n; ++i)
        for (unsigned b = 0; b < p.w; ++b)
            if (msb_bit(window[i], b, p.w)) s.set(head + (i - 1) * p.w + b);
    return s;
}

/// Inverse of state_vector(); the r low bits of window[0] are zero.
[[nodiscard]] inline std::vector<std::uint32_t> window_from_state(const generator_params& p, const bit_vector& s) {
    if (s.size() != p.state_bits()) throw std::invalid_argument("window_from_state: wrong state dimension");
    std::vector<std::uint32_t> window(p.n, 0);
    const unsigned head = p.w - p.r;
    for (unsigned b = 0; b < head; ++b)
        if (s[b]) window[0] |= std::uint32_t{1} << (p.w - 1 - b);
    for (std::size_t i = 1; i < p.n; ++i)
        for (unsigned b = 0; b < p.w; ++b)
            if (s[head + (i - 1) * p.w + b]) window[i] |= std::uint32_t{1} << (p.w - 1 - b);
    return window;
}

template <generator_params P>
[[nodiscard]] bit_vector state_vector(const twister<P>& g) {
    return state_vector(P, g.window());
}

template <generator_params P>
[[nodiscard]] twister<P> twister_from_state(const bit_vector& s) {
    const auto window = window_from_state(P, s);
    return twister<P>::from_window(window);
}

/// Tempering as a w x w matrix on MSB-first bit vectors: row b lists the
/// input bits whose XOR is output bit b.
[[nodiscard]] inline std::vector<std::uint32_t> tempering_rows(const generator_params& p) {
    std::vector<std::uint32_t> rows(p.w, 0);
    for (unsigned c = 0; c < p.w; ++c) {
        const std::uint32_t out = temper(p, std::uint32_t{1} << (p.w - 1 - c));
        for (unsigned b = 0; b < p.w; ++b)
            if (msb_bit(out, b, p.w)) rows[b] |= std::uint32_t{1} << c;
    }
    return rows;
}

/// Tracks every window bit as a linear functional of an initial state.
///
/// Starting from the identity (each state coordinate is its own functional),
/// step() applies the recurrence to the functionals, so after j steps the
/// newest word's bits are the maps from the initial state to w[i+N+j-1].
/// With `initial` given, tracking starts from those functionals instead
/// (one row per state coordinate), which composes maps.
class functional_tracker {
public:
    explicit functional_tracker(const generator_params& params)
        : params_(params),
          p_(params.state_bits()),
          window_(std::size_t{params.n} * params.w, params.state_bits()),
          scratch_(params.w, params.state_bits()),
          temper_rows_(tempering_rows(params)) {
        validate(params);
        const unsigned head = params.w - params.r;
        for (unsigned b = 0; b < head; ++b) window_.set(b, b);
        for (std::size_t i = 1; i < params.n; ++i)
            for (unsigned b = 0; b < params.w; ++b) window_.set(i * params.w + b, head + (i - 1) * params.w + b);
    }

    [[nodiscard]] std::size_t state_bits() const noexcept { return p_; }
    [[nodiscard]] const generator_params& params() const noexcept { return params_; }
    [[nodiscard]] std::uint64_t steps() const noexcept { return steps_; }

    /// Computes the functionals of the next word, which replaces the oldest.
    void step() {
        const unsigned w = params_.w;
        const std::size_t n = params_.n;
        const std::size_t oldest = oldest_;
        const std::size_t next = (oldest + 1) % n;
        const std::size_t mid = (oldest + params_.m) % n;
        const unsigned head = w - params_.r;
        const std::size_t stride = window_.stride();
        auto y_row = [&](unsigned c) -> const std::uint64_t* {
            return window_.row((c < head ? oldest : next) * w + c).data();
        };
        const std::uint64_t* y_lsb = y_row(w - 1);
        for (unsigned b = 0; b < w; ++b) {
            std::uint64_t* dst = scratch_.row(b).data();
            const std::uint64_t* m_row = window_.row(mid * w + b).data();
            std::copy(m_row, m_row + stride, dst);
            if (b > 0) detail::xor_words(dst, y_row(b - 1), stride);
            if (msb_bit(params_.twist, b, w)) detail::xor_words(dst, y_lsb, stride);
        }
        for (unsigned b = 0; b < w; ++b) {
            auto src = scratch_.row(b);
            std::copy(src.begin(), src.end(), window_.row(oldest * w + b).begin());
        }
        newest_ = oldest;
        oldest_ = next;
        ++steps_;
    }

    /// Functional of bit b (MSB-first) of the newest untempered word.
    [[nodiscard]] std::span<const std::uint64_t> newest_raw_bit(unsigned b) const {
        return window_.row(newest_ * params_.w + b);
    }

    /// Writes the functional of bit b (MSB-first) of the newest tempered word.
    void newest_tempered_bit(unsigned b, std::span<std::uint64_t> out) const {
        if (steps_ == 0) throw std::logic_error("functional_tracker: no word generated yet");
        std::fill(out.begin(), out.end(), 0);
        for (std::uint32_t mask = temper_rows_[b]; mask != 0; mask &= mask - 1) {
            const unsigned c = static_cast<unsigned>(std::countr_zero(mask));
            detail::xor_words(out.data(), window_.row(newest_ * params_.w + c).data(), window_.stride());
        }
    }

    [[nodiscard]] bit_vector newest_tempered_bit(unsigned b) const {
        bit_vector v(p_);
        newest_tempered_bit(b, v.words());
        return v;
    }

    /// Current window as functionals: the p x p map from the initial state to
    /// the current state.
    [[nodiscard]] f2_matrix state_map() const {
        f2_matrix out(p_, p_);
        const unsigned w = params_.w;
        const unsigned head = w - params_.r;
        for (unsigned b = 0; b < head; ++b) copy_row(window_.row(oldest_ * w + b), out.row(b));
        for (std::size_t i = 1; i < params_.n; ++i) {
            const std::size_t slot = (oldest_ + i) % params_.n;
            for (unsigned b = 0; b < w; ++b) copy_row(window_.row(slot * w + b), out.row(head + (i - 1) * w + b));
        }
        return out;
    }

private:
    static void copy_row(std::span<const std::uint64_t> src, std::span<std::uint64_t> dst) {
        std::copy(src.begin(), src.end(), dst.begin());
    }

    generator_params params_;
    std::size_t p_;
    f2_matrix window_;
    f2_matrix scratch_;
    std::vector<std::uint32_t> temper_rows_;
    std::size_t oldest_ = 0;
    std::size_t newest_ = 0;
    std::uint64_t steps_ = 0;
};

/// The p x p matrix B with (state after one step) = B * (state).
[[nodiscard]] inline f2_matrix transition_matrix(const generator_params& params) {
    functional_tracker tracker(params);
    tracker.step();
    return tracker.state_map();
}

/// The w x p matrix O mapping a state to the next tempered output, MSB-first
/// rows.
[[nodiscard]] inline f2_matrix output_matrix(const generator_params& params) {
    functional_tracker tracker(params);
    tracker.step();
    f2_matrix out(params.w, params.state_bits());
    for (unsigned b = 0; b < params.w; ++b) tracker.newest_tempered_bit(b, out.row(b));
    return out;
}

}  // namespace mtconv
