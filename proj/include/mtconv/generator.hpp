#pragma once

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

namespace mtconv {

/// Parameters of an MT-type generator on w-bit words (w <= 32).
///
/// The recurrence is
///   w[i+N] = w[i+M] ^ ((upper_{w-r}(w[i]) | lower_r(w[i+1])) * A)
/// where multiplication by A is `(y >> 1) ^ (y & 1 ? twist : 0)`, and the
/// output is w[i+N] * T with T given by four shift/mask tempering steps.
struct generator_params {
    unsigned w;
    unsigned n;
    unsigned m;
    unsigned r;
    std::uint32_t twist;
    unsigned temper_u;
    std::uint32_t temper_d;
    unsigned temper_s;
    std::uint32_t temper_b;
    unsigned temper_t;
    std::uint32_t temper_c;
    unsigned temper_l;
    std::uint32_t init_multiplier = 1812433253u;

    [[nodiscard]] constexpr std::uint32_t word_mask() const noexcept {
        return w == 32 ? 0xffffffffu : ((std::uint32_t{1} << w) - 1u);
    }
    /// Mask of the w-r most significant bits.
    [[nodiscard]] constexpr std::uint32_t upper_mask() const noexcept {
        return word_mask() & ~lower_mask();
    }
    /// Mask of the r least significant bits.
    [[nodiscard]] constexpr std::uint32_t lower_mask() const noexcept {
        return (std::uint32_t{1} << r) - 1u;
    }
    /// Dimension p = N*w - r of the state space over F2.
    [[nodiscard]] constexpr std::size_t state_bits() const noexcept {
        return std::size_t{n} * w - r;
    }

    friend constexpr bool operator==(const generator_params&, const generator_params&) = default;
};

/// The mt19937ar (2002) parameter set: (w, N, M, r) = (32, 624, 397, 31).
inline constexpr generator_params mt19937_params{
    32, 624, 397, 31, 0x9908b0dfu, 11, 0xffffffffu, 7, 0x9d2c5680u, 15, 0xefc60000u, 18};

/// Throws std::invalid_argument when the parameters do not describe a valid
/// MT-type generator (A and T must be invertible, 0 < M < N-1, 0 <= r < w).
inline void validate(const generator_params& p) {
    auto fail = [](const std::string& what) { throw std::invalid_argument("generator_params: " + what); };
    if (p.w < 2 || p.w > 32) fail("word size must be in [2, 32]");
    if (p.n < 3) fail("state length must be at least 3 words");
    if (p.m == 0 || p.m >= p.n - 1) fail("middle offset must satisfy 0 < M < N-1");
    if (p.r >= p.w) fail("split position must satisfy r < w");
    if ((p.twist & ~p.word_mask()) != 0) fail("twist vector wider than w");
    // y*A has its MSB equal to the LSB of y exactly when the twist MSB is set;
    // that is the invertibility condition for A.
    if (((p.twist >> (p.w - 1)) & 1u) == 0) fail("twist vector MSB must be set (A singular)");
    if (p.temper_u == 0 || p.temper_s == 0 || p.temper_t == 0 || p.temper_l == 0)
        fail("tempering shifts must be positive");
    if (p.temper_u >= p.w || p.temper_s >= p.w || p.temper_t >= p.w || p.temper_l >= p.w)
        fail("tempering shifts must be below w");
}

/// Output transform T.
[[nodiscard]] constexpr std::uint32_t temper(const generator_params& p, std::uint32_t y) noexcept {
    const std::uint32_t mask = p.word_mask();
    y ^= (y >> p.temper_u) & p.temper_d;
    y ^= (y << p.temper_s) & p.temper_b & mask;
    y ^= (y << p.temper_t) & p.temper_c & mask;
    y ^= y >> p.temper_l;
    return y & mask;
}

namespace detail {

constexpr std::uint32_t undo_right_xorshift(std::uint32_t y, unsigned shift, std::uint32_t mask,
                                            unsigned w) noexcept {
    std::uint32_t x = y;
    for (unsigned done = shift; done < w; done += shift) x = y ^ ((x >> shift) & mask);
    return x;
}

constexpr std::uint32_t undo_left_xorshift(std::uint32_t y, unsigned shift, std::uint32_t mask,
                                           std::uint32_t word_mask, unsigned w) noexcept {
    std::uint32_t x = y;
    for (unsigned done = shift; done < w; done += shift) x = y ^ ((x << shift) & mask & word_mask);
    return x;
}

}  // namespace detail

/// Inverse of temper().
[[nodiscard]] constexpr std::uint32_t untemper(const generator_params& p, std::uint32_t y) noexcept {
    const std::uint32_t mask = p.word_mask();
    y &= mask;
    y = detail::undo_right_xorshift(y, p.temper_l, mask, p.w);
    y = detail::undo_left_xorshift(y, p.temper_t, p.temper_c, mask, p.w);
    y = detail::undo_left_xorshift(y, p.temper_s, p.temper_b, mask, p.w);
    y = detail::undo_right_xorshift(y, p.temper_u, p.temper_d, p.w);
    return y;
}

/// One application of the recurrence: returns w[i+N] from w[i+M], w[i], w[i+1].
[[nodiscard]] constexpr std::uint32_t recurrence(const generator_params& p, std::uint32_t mid,
                                                 std::uint32_t oldest, std::uint32_t next) noexcept {
    const std::uint32_t y = (oldest & p.upper_mask()) | (next & p.lower_mask());
    return mid ^ (y >> 1) ^ ((0u - (y & 1u)) & p.twist);
}

/// MT-type generator with compile-time parameters.
///
/// The state layout follows mt19937ar: `words()` holds N words and `index()`
/// is the cursor in [0, N]. At index N the array is the window
/// w[i], ..., w[i+N-1] from which the next output w[i+N]*T is computed; for
/// index < N it holds an already-twisted block and the next output is
/// temper(words()[index]). Outputs are identical to stepwise generation.
template <generator_params P>
class twister {
    static_assert(P.w >= 2 && P.w <= 32);
    static_assert(P.m > 0 && P.m < P.n - 1);
    static_assert(P.r < P.w);

public:
    using result_type = std::uint32_t;
    static constexpr generator_params params = P;
    static constexpr std::size_t state_size = P.n;
    static constexpr std::uint32_t default_seed = 5489u;

    explicit twister(std::uint32_t seed_value = default_seed) noexcept { seed(seed_value); }

    /// mt19937ar `init_genrand`.
    void seed(std::uint32_t seed_value) noexcept {
        constexpr std::uint32_t mask = P.word_mask();
        words_[0] = seed_value & mask;
        for (std::size_t i = 1; i < P.n; ++i) {
            const std::uint32_t prev = words_[i - 1];
            words_[i] = (P.init_multiplier * (prev ^ (prev >> (P.w - 2))) + static_cast<std::uint32_t>(i)) & mask;
        }
        index_ = P.n;
    }

    /// Builds a generator positioned at a block boundary whose window is
    /// `window` (w[i], ..., w[i+N-1]); only the w-r MSBs of window[0] matter.
    static twister from_window(std::span<const std::uint32_t> window) {
        if (window.size() != P.n) throw std::invalid_argument("twister::from_window: wrong window length");
        twister t;
        for (std::size_t i = 0; i < P.n; ++i) t.words_[i] = window[i] & P.word_mask();
        t.index_ = P.n;
        return t;
    }

    result_type operator()() noexcept {
        if (index_ >= P.n) twist_block();
        return temper(P, words_[index_++]);
    }

    /// Next untempered word w[i+N].
    result_type next_untempered() noexcept {
        if (index_ >= P.n) twist_block();
        return words_[index_++];
    }

    /// Advances by `count` outputs without tempering them.
    void discard(std::uint64_t count) noexcept {
        while (count > 0) {
            if (index_ >= P.n) twist_block();
            const std::uint64_t avail = P.n - index_;
            if (count < avail) {
                index_ += static_cast<std::size_t>(count);
                return;
            }
            count -= avail;
            index_ = P.n;
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return P.word_mask(); }

    [[nodiscard]] const std::array<std::uint32_t, P.n>& words() const noexcept { return words_; }
    [[nodiscard]] std::size_t index() const noexcept { return index_; }
    [[nodiscard]] bool at_block_boundary() const noexcept { return index_ >= P.n; }

    /// The window w[i], ..., w[i+N-1]; only available at a block boundary.
    [[nodiscard]] const std::array<std::uint32_t, P.n>& window() const {
        if (!at_block_boundary()) throw std::logic_error("twister::window: not at a block boundary");
        return words_;
    }

    friend bool operator==(const twister&, const twister&) = default;

private:
    void twist_block() noexcept {
        constexpr std::size_t n = P.n;
        constexpr std::size_t m = P.m;
        std::uint32_t* mt = words_.data();
        std::size_t k = 0;
        for (; k < n - m; ++k) mt[k] = recurrence(P, mt[k + m], mt[k], mt[k + 1]);
        for (; k < n - 1; ++k) mt[k] = recurrence(P, mt[k + m - n], mt[k], mt[k + 1]);
        mt[n - 1] = recurrence(P, mt[m - 1], mt[n - 1], mt[0]);
        index_ = 0;
    }

    std::array<std::uint32_t, P.n> words_{};
    std::size_t index_ = P.n;
};

using mt19937 = twister<mt19937_params>;

}  // namespace mtconv
