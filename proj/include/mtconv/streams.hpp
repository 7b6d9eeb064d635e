#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mtconv/generator.hpp"

namespace mtconv {

/// How raw 32-bit outputs x_0, x_1, ... become stream values.
enum class conversion {
    raw32,                ///< x_i
    concat64_low_first,   ///< (x_{2i+1}, x_{2i}): x_{2i} lands in the 32 LSBs
    concat64_high_first,  ///< (x_{2i}, x_{2i+1})
    res53,                ///< 27 MSBs of x_{2i} then 26 MSBs of x_{2i+1}
    reversed32,           ///< x_i with its bit order reversed
};

inline constexpr std::array<conversion, 5> all_conversions{conversion::raw32, conversion::concat64_low_first,
                                                           conversion::concat64_high_first, conversion::res53,
                                                           conversion::reversed32};

[[nodiscard]] constexpr std::string_view to_string(conversion c) noexcept {
    switch (c) {
        case conversion::raw32: return "raw32";
        case conversion::concat64_low_first: return "concat64-lo";
        case conversion::concat64_high_first: return "concat64-hi";
        case conversion::res53: return "res53";
        case conversion::reversed32: return "rev32";
    }
    return "?";
}

[[nodiscard]] inline std::optional<conversion> parse_conversion(std::string_view name) noexcept {
    for (auto c : all_conversions)
        if (to_string(c) == name) return c;
    return std::nullopt;
}

/// Output bits per value (MT19937 word size).
[[nodiscard]] constexpr unsigned output_width(conversion c) noexcept {
    switch (c) {
        case conversion::raw32:
        case conversion::reversed32: return 32;
        case conversion::concat64_low_first:
        case conversion::concat64_high_first: return 64;
        case conversion::res53: return 53;
    }
    return 0;
}

[[nodiscard]] constexpr unsigned words_per_output(conversion c) noexcept {
    return (c == conversion::raw32 || c == conversion::reversed32) ? 1u : 2u;
}

/// Where an output bit comes from: raw word `word` of the block (0-based,
/// in generation order) and its bit `bit` counted from the MSB.
struct bit_source {
    unsigned word;
    unsigned bit;
    friend constexpr bool operator==(const bit_source&, const bit_source&) = default;
};

/// Bit-level description of a conversion over w-bit raw words. Output bit l
/// (MSB-first) of value j is raw bit bits[l] of word j*words_per_output + bits[l].word.
struct output_layout {
    unsigned raw_width = 32;
    unsigned words_per_output = 1;
    std::vector<bit_source> bits;

    [[nodiscard]] unsigned width() const noexcept { return static_cast<unsigned>(bits.size()); }

    /// Output bit position carrying a raw bit, if any.
    [[nodiscard]] std::optional<unsigned> position_of(bit_source src) const noexcept {
        for (unsigned l = 0; l < bits.size(); ++l)
            if (bits[l] == src) return l;
        return std::nullopt;
    }
};

/// The first `first_bits` MSBs of word 0 followed by the first `second_bits`
/// MSBs of word 1.
[[nodiscard]] inline output_layout split_layout(unsigned raw_width, unsigned first_bits, unsigned second_bits) {
    if (first_bits > raw_width || second_bits > raw_width) throw std::invalid_argument("split_layout: too many bits");
    output_layout out{raw_width, 2, {}};
    for (unsigned b = 0; b < first_bits; ++b) out.bits.push_back({0, b});
    for (unsigned b = 0; b < second_bits; ++b) out.bits.push_back({1, b});
    return out;
}

[[nodiscard]] inline output_layout make_layout(conversion c, unsigned raw_width = 32) {
    output_layout out{raw_width, words_per_output(c), {}};
    switch (c) {
        case conversion::raw32:
            for (unsigned b = 0; b < raw_width; ++b) out.bits.push_back({0, b});
            break;
        case conversion::reversed32:
            for (unsigned b = 0; b < raw_width; ++b) out.bits.push_back({0, raw_width - 1 - b});
            break;
        case conversion::concat64_low_first:
            for (unsigned b = 0; b < raw_width; ++b) out.bits.push_back({1, b});
            for (unsigned b = 0; b < raw_width; ++b) out.bits.push_back({0, b});
            break;
        case conversion::concat64_high_first:
            for (unsigned b = 0; b < raw_width; ++b) out.bits.push_back({0, b});
            for (unsigned b = 0; b < raw_width; ++b) out.bits.push_back({1, b});
            break;
        case conversion::res53:
            if (raw_width < 27) throw std::invalid_argument("res53 needs raw words of at least 27 bits");
            return split_layout(raw_width, 27, 26);
    }
    return out;
}

/// Assembles one output value from its raw words using the generic layout.
[[nodiscard]] inline std::uint64_t compose(const output_layout& layout, std::span<const std::uint32_t> words) {
    if (words.size() != layout.words_per_output) throw std::invalid_argument("compose: wrong number of raw words");
    std::uint64_t value = 0;
    for (const auto& src : layout.bits)
        value = (value << 1) | ((words[src.word] >> (layout.raw_width - 1 - src.bit)) & 1u);
    return value;
}

// ---------------------------------------------------------------------------
// Word-level conversions.

[[nodiscard]] constexpr std::uint64_t concat64_low_first(std::uint32_t x_even, std::uint32_t x_odd) noexcept {
    return (std::uint64_t{x_odd} << 32) | x_even;
}

[[nodiscard]] constexpr std::uint64_t concat64_high_first(std::uint32_t x_even, std::uint32_t x_odd) noexcept {
    return (std::uint64_t{x_even} << 32) | x_odd;
}

/// 53-bit integer a*2^26 + b with a = x_even >> 5, b = x_odd >> 6.
[[nodiscard]] constexpr std::uint64_t res53_bits(std::uint32_t x_even, std::uint32_t x_odd) noexcept {
    return (std::uint64_t{x_even >> 5} << 26) | (x_odd >> 6);
}

/// mt19937ar genrand_res53 arithmetic, for cross-checking res53_bits.
[[nodiscard]] inline double genrand_res53_formula(std::uint32_t x_even, std::uint32_t x_odd) noexcept {
    const std::uint32_t a = x_even >> 5;
    const std::uint32_t b = x_odd >> 6;
    return (a * 67108864.0 + b) * (1.0 / 9007199254740992.0);
}

[[nodiscard]] constexpr std::uint32_t reversed32(std::uint32_t x) noexcept {
    x = ((x >> 1) & 0x55555555u) | ((x & 0x55555555u) << 1);
    x = ((x >> 2) & 0x33333333u) | ((x & 0x33333333u) << 2);
    x = ((x >> 4) & 0x0f0f0f0fu) | ((x & 0x0f0f0f0fu) << 4);
    return __builtin_bswap32(x);
}

// ---------------------------------------------------------------------------
// Real samples.

static_assert(std::numeric_limits<long double>::digits >= 64,
              "exact real samples need a 64-bit long double significand");

/// A value in [0,1) kept as its exact dyadic numerator: value = bits / 2^width.
struct real_sample {
    std::uint64_t bits = 0;
    unsigned width = 32;

    /// Exact: every numerator below 2^64 is representable.
    [[nodiscard]] long double value() const noexcept { return std::ldexp(static_cast<long double>(bits), -static_cast<int>(width)); }
    [[nodiscard]] long double divisor() const noexcept { return std::ldexp(1.0L, static_cast<int>(width)); }

    /// Bits [first, first+count) counted from the MSB, as an integer.
    [[nodiscard]] std::uint64_t field(unsigned first, unsigned count) const {
        if (first + count > width || count == 0 || count > 64)
            throw std::out_of_range("real_sample::field: bit window outside the sample");
        return (bits >> (width - first - count)) & (count == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << count) - 1));
    }

    /// floor(value * d), exact for any d >= 1.
    [[nodiscard]] std::uint64_t cell(std::uint64_t d) const noexcept {
        if (std::has_single_bit(d)) {
            const unsigned k = static_cast<unsigned>(std::countr_zero(d));
            return k >= width ? bits << (k - width) : bits >> (width - k);
        }
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(bits) * d) >> width);
    }

    friend constexpr bool operator==(const real_sample&, const real_sample&) = default;
};

/// 2^tau * u mod 1: drops the tau leading bits. tau = 0 is the identity.
[[nodiscard]] constexpr real_sample skip_tau(real_sample s, unsigned tau) noexcept {
    if (tau == 0) return s;
    if (tau >= s.width) return {0, s.width};
    const std::uint64_t mask = s.width == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << s.width) - 1);
    return {(s.bits << tau) & mask, s.width};
}

// ---------------------------------------------------------------------------
// Lag sets.

/// Ordered index set I = {j_1 < ... < j_t} selecting, from each consecutive
/// block of j_t + 1 samples, those at offsets j_1, ..., j_t.
class lag_set {
public:
    lag_set() = default;
    explicit lag_set(std::vector<std::uint64_t> lags) : lags_(std::move(lags)) {
        if (lags_.empty()) throw std::invalid_argument("lag_set: empty lag set");
        for (std::size_t i = 1; i < lags_.size(); ++i)
            if (lags_[i] <= lags_[i - 1]) throw std::invalid_argument("lag_set: lags must be strictly increasing");
    }

    [[nodiscard]] std::size_t size() const noexcept { return lags_.size(); }
    [[nodiscard]] std::uint64_t period() const noexcept { return lags_.back() + 1; }
    [[nodiscard]] const std::vector<std::uint64_t>& lags() const noexcept { return lags_; }

    /// Absolute index of the k-th selected sample: (j_t+1)*(k/t) + j_{k mod t}.
    [[nodiscard]] std::uint64_t index_of(std::uint64_t k) const noexcept {
        return period() * (k / lags_.size()) + lags_[k % lags_.size()];
    }

    /// Parses "0,396,623".
    static lag_set parse(std::string_view text) {
        std::vector<std::uint64_t> lags;
        while (!text.empty()) {
            const auto comma = text.find(',');
            const auto item = text.substr(0, comma);
            std::uint64_t v = 0;
            const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
            if (ec != std::errc{} || ptr != item.data() + item.size() || item.empty())
                throw std::invalid_argument("lag_set: cannot parse '" + std::string(item) + "'");
            lags.push_back(v);
            if (comma == std::string_view::npos) break;
            text.remove_prefix(comma + 1);
        }
        return lag_set(std::move(lags));
    }

    [[nodiscard]] std::string to_string() const {
        std::string s;
        for (std::size_t i = 0; i < lags_.size(); ++i) {
            if (i) s += ',';
            s += std::to_string(lags_[i]);
        }
        return s;
    }

    friend bool operator==(const lag_set&, const lag_set&) = default;

private:
    std::vector<std::uint64_t> lags_;
};

/// Full stream configuration. Samples are produced in the fixed order
/// conversion -> tau skip -> lag selection.
struct stream_config {
    conversion conv = conversion::raw32;
    std::optional<lag_set> lags;
    unsigned tau = 0;
    /// Keep samples decimation_offset, decimation_offset + decimation, ...
    /// (1 = all), applied before lags.
    std::uint64_t decimation = 1;
    std::uint64_t decimation_offset = 0;
};

/// Pull-based sample stream over an owned generator.
template <class Engine>
class sample_stream {
public:
    sample_stream(Engine engine, stream_config config) : engine_(std::move(engine)), config_(std::move(config)) {
        if (config_.decimation == 0 || config_.decimation_offset >= config_.decimation)
            throw std::invalid_argument("sample_stream: decimation must be >= 1 with offset below it");
        if (config_.tau >= output_width(config_.conv))
            throw std::invalid_argument("sample_stream: tau must be below the output width");
    }

    [[nodiscard]] unsigned width() const noexcept { return output_width(config_.conv); }
    [[nodiscard]] const stream_config& config() const noexcept { return config_; }
    [[nodiscard]] Engine& engine() noexcept { return engine_; }

    /// Absolute (pre-lag, post-decimation) index of the next sample.
    [[nodiscard]] std::uint64_t next_index() const noexcept {
        return config_.lags ? config_.lags->index_of(emitted_) : emitted_;
    }

    real_sample next() {
        const std::uint64_t target = next_index() * config_.decimation + config_.decimation_offset;
        ++emitted_;
        const std::uint64_t words = words_per_output(config_.conv);
        if (target > cursor_) engine_.discard((target - cursor_) * words);
        cursor_ = target + 1;
        return skip_tau(convert(), config_.tau);
    }

private:
    real_sample convert() {
        switch (config_.conv) {
            case conversion::raw32: return {engine_(), 32};
            case conversion::reversed32: return {reversed32(engine_()), 32};
            case conversion::concat64_low_first: {
                const std::uint32_t a = engine_();
                const std::uint32_t b = engine_();
                return {concat64_low_first(a, b), 64};
            }
            case conversion::concat64_high_first: {
                const std::uint32_t a = engine_();
                const std::uint32_t b = engine_();
                return {concat64_high_first(a, b), 64};
            }
            case conversion::res53: {
                const std::uint32_t a = engine_();
                const std::uint32_t b = engine_();
                return {res53_bits(a, b), 53};
            }
        }
        return {};
    }

    Engine engine_;
    stream_config config_;
    std::uint64_t emitted_ = 0;
    std::uint64_t cursor_ = 0;  // next sample index the engine is positioned at
};

template <class Engine>
sample_stream(Engine, stream_config) -> sample_stream<Engine>;

/// Counter-based reference source (SplitMix64 over a counter), used to
/// calibrate statistical tests against an independent high-quality stream.
class splitmix64_source {
public:
    explicit splitmix64_source(std::uint64_t seed) noexcept : counter_(mix(seed)) {}

    real_sample next() noexcept { return {mix(counter_++), 64}; }

    static constexpr std::uint64_t mix(std::uint64_t x) noexcept {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

private:
    std::uint64_t counter_;
};

}  // namespace mtconv
