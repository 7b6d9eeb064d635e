#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mtconv/f2matrix.hpp"
#include "mtconv/pvalues.hpp"
#include "mtconv/streams.hpp"

namespace mtconv {

enum class test_kind { birthday, overlap_collision, matrix_rank, hamming_indep };

[[nodiscard]] constexpr std::string_view to_string(test_kind k) noexcept {
    switch (k) {
        case test_kind::birthday: return "birthday";
        case test_kind::overlap_collision: return "overlap_collision";
        case test_kind::matrix_rank: return "matrix_rank";
        case test_kind::hamming_indep: return "hamming_indep";
    }
    return "?";
}

/// Parameters of one test. Fields a test does not use stay zero.
struct test_config {
    test_kind kind = test_kind::birthday;
    std::uint64_t replications = 1;  ///< N~ (Poisson tests sum their counts over these)
    std::uint64_t n = 0;
    unsigned tau = 0;
    std::uint64_t d = 0;
    unsigned t = 0;
    unsigned L = 0;
    unsigned sigma = 0;
    std::string name;  ///< preset name, if any

    friend bool operator==(const test_config&, const test_config&) = default;
};

namespace presets {

inline test_config smallcrush8() { return {test_kind::matrix_rank, 1, 20000, 20, 0, 0, 60, 10, "smallcrush8"}; }
inline test_config crush86() { return {test_kind::hamming_indep, 1, 100000000, 20, 0, 0, 30, 10, "crush86"}; }
inline test_config bigcrush5() {
    return {test_kind::overlap_collision, 30, 20000000, 0, std::uint64_t{1} << 14, 3, 0, 0, "bigcrush5"};
}
inline test_config bigcrush6() {
    return {test_kind::overlap_collision, 30, 20000000, 16, std::uint64_t{1} << 14, 3, 0, 0, "bigcrush6"};
}
inline test_config bigcrush14() {
    return {test_kind::birthday, 20, 20000000, 0, std::uint64_t{1} << 21, 3, 0, 0, "bigcrush14"};
}

inline constexpr std::array<std::string_view, 5> names{"smallcrush8", "crush86", "bigcrush5", "bigcrush6", "bigcrush14"};

[[nodiscard]] inline std::optional<test_config> by_name(std::string_view name) {
    if (name == "smallcrush8") return smallcrush8();
    if (name == "crush86") return crush86();
    if (name == "bigcrush5") return bigcrush5();
    if (name == "bigcrush6") return bigcrush6();
    if (name == "bigcrush14") return bigcrush14();
    return std::nullopt;
}

/// The five tests, in table order: birthday, collision x2, rank, Hamming.
[[nodiscard]] inline std::vector<test_config> paper_battery() {
    return {bigcrush14(), bigcrush5(), bigcrush6(), smallcrush8(), crush86()};
}

}  // namespace presets

struct test_result {
    test_config config;
    double statistic = 0;  ///< Y, C, or the chi-square value
    double expected = 0;   ///< Poisson mean N~ * lambda, or dof for chi-square
    std::uint64_t dof = 0;  ///< 0 for the Poisson tests
    p_value p;              ///< right tail P(S >= s)
    p_value p_left;         ///< left tail P(S <= s)

    /// Neither tail below `threshold`. For chi-square this is
    /// threshold <= p <= 1 - threshold; for the discrete Poisson counts the
    /// left tail replaces 1 - p, which would include P(S = s) twice.
    [[nodiscard]] bool in_normal_range(double threshold) const noexcept {
        const double lo = std::log10(threshold);
        return p.log10_p >= lo && p_left.log10_p >= lo;
    }
};

using test_progress = std::function<void(std::uint64_t done, std::uint64_t total)>;

/// Caps the point buffers of the sorting tests (two uint64 arrays of n).
inline constexpr std::uint64_t max_points = std::uint64_t{1} << 27;

namespace detail {

/// d^t, or nullopt if it does not fit in 64 bits.
[[nodiscard]] inline std::optional<std::uint64_t> checked_power(std::uint64_t d, unsigned t) {
    unsigned __int128 k = 1;
    for (unsigned i = 0; i < t; ++i) {
        k *= d;
        if (k > ~std::uint64_t{0}) return std::nullopt;
    }
    return static_cast<std::uint64_t>(k);
}

inline std::uint64_t cell_space(const test_config& cfg) {
    if (cfg.d < 2 || cfg.t == 0) throw std::invalid_argument("test: d >= 2 and t >= 1 required");
    const auto k = checked_power(cfg.d, cfg.t);
    if (!k) throw std::overflow_error("test: d^t does not fit in a 64-bit cell index");
    return *k;
}

inline void check_points(const test_config& cfg) {
    if (cfg.n < 2) throw std::invalid_argument("test: n >= 2 required");
    if (cfg.n > max_points) throw std::length_error("test: n exceeds the point buffer bound");
    if (cfg.replications == 0) throw std::invalid_argument("test: replications >= 1 required");
}

/// LSD radix sort on 16-bit digits; passes whose digit is constant are skipped.
inline void radix_sort(std::vector<std::uint64_t>& v, std::vector<std::uint64_t>& scratch) {
    if (v.size() < 2) return;
    scratch.resize(v.size());
    std::uint64_t all_or = 0;
    for (auto x : v) all_or |= x;
    const unsigned bits = 64 - static_cast<unsigned>(std::countl_zero(all_or));
    std::vector<std::uint64_t> count(1u << 16);
    for (unsigned shift = 0; shift < bits; shift += 16) {
        std::fill(count.begin(), count.end(), 0);
        for (auto x : v) ++count[(x >> shift) & 0xffff];
        if (std::find(count.begin(), count.end(), v.size()) != count.end()) continue;
        std::uint64_t sum = 0;
        for (auto& c : count) {
            const std::uint64_t here = c;
            c = sum;
            sum += here;
        }
        for (auto x : v) scratch[count[(x >> shift) & 0xffff]++] = x;
        v.swap(scratch);
    }
}

/// Number of adjacent equal pairs in a sorted range.
[[nodiscard]] inline std::uint64_t adjacent_equal(const std::vector<std::uint64_t>& v) {
    std::uint64_t c = 0;
    for (std::size_t i = 1; i < v.size(); ++i) c += v[i] == v[i - 1];
    return c;
}

inline test_result poisson_result(const test_config& cfg, std::uint64_t observed, double mean) {
    test_result r{cfg, static_cast<double>(observed), mean, 0, p_value_poisson(observed, mean), {}};
    // P(Y <= y) = Q(y + 1, mean).
    r.p_left = {log_gamma_q(static_cast<double>(observed) + 1.0, mean) / ln10};
    return r;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Chi-square helpers.

struct merged_classes {
    std::vector<double> expected;
    std::vector<std::uint64_t> observed;
};

/// Coalesces every class with expectation below `min_expected` into one class
/// appended after the others (scan order preserved). If the merged class is
/// itself still below the bound, it is folded into the smallest remaining
/// class.
[[nodiscard]] inline merged_classes merge_classes(const std::vector<double>& expected,
                                                  const std::vector<std::uint64_t>& observed,
                                                  double min_expected = 10.0) {
    if (expected.size() != observed.size()) throw std::invalid_argument("merge_classes: size mismatch");
    merged_classes out;
    double small_e = 0;
    std::uint64_t small_o = 0;
    bool any_small = false;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (expected[i] < min_expected) {
            small_e += expected[i];
            small_o += observed[i];
            any_small = true;
        } else {
            out.expected.push_back(expected[i]);
            out.observed.push_back(observed[i]);
        }
    }
    if (any_small) {
        if (small_e < min_expected && !out.expected.empty()) {
            const auto it = std::min_element(out.expected.begin(), out.expected.end());
            const auto idx = static_cast<std::size_t>(it - out.expected.begin());
            out.expected[idx] += small_e;
            out.observed[idx] += small_o;
        } else {
            out.expected.push_back(small_e);
            out.observed.push_back(small_o);
        }
    }
    return out;
}

/// Pearson statistic over merged classes; dof = classes - 1.
[[nodiscard]] inline std::pair<double, std::uint64_t> chi_square(const merged_classes& m) {
    if (m.expected.size() < 2) throw std::domain_error("chi_square: fewer than two classes after merging");
    double x = 0;
    for (std::size_t i = 0; i < m.expected.size(); ++i) {
        const double diff = static_cast<double>(m.observed[i]) - m.expected[i];
        x += diff * diff / m.expected[i];
    }
    return {x, m.expected.size() - 1};
}

inline test_result chi_square_result(const test_config& cfg, const std::vector<double>& expected,
                                     const std::vector<std::uint64_t>& observed) {
    const auto [x, dof] = chi_square(merge_classes(expected, observed));
    test_result r{cfg, x, static_cast<double>(dof), dof, p_value_chisq(x, dof), {}};
    r.p_left = {x == 0 ? -std::numeric_limits<double>::infinity()
                       : log_gamma_p(0.5 * static_cast<double>(dof), 0.5 * x) / detail::ln10};
    return r;
}

/// Probability that a uniformly random L x L matrix over F2 has rank r, for
/// r = 0..L.
[[nodiscard]] inline std::vector<double> rank_distribution(unsigned L) {
    std::vector<double> out(L + 1, 0.0);
    for (unsigned r = 0; r <= L; ++r) {
        long double log2p = static_cast<long double>(r) * (2.0L * L - r) - static_cast<long double>(L) * L;
        for (unsigned i = 0; i < r; ++i) {
            const long double a = 1.0L - std::ldexp(1.0L, static_cast<int>(i) - static_cast<int>(L));
            const long double b = 1.0L - std::ldexp(1.0L, static_cast<int>(i) - static_cast<int>(r));
            log2p += 2.0L * std::log2(a) - std::log2(b);
        }
        out[r] = static_cast<double>(std::exp2(log2p));
    }
    return out;
}

/// Binomial(L, 1/2) probabilities.
[[nodiscard]] inline std::vector<double> binomial_half(unsigned L) {
    std::vector<double> out(L + 1);
    for (unsigned k = 0; k <= L; ++k)
        out[k] = std::exp(std::lgamma(L + 1.0) - std::lgamma(k + 1.0) - std::lgamma(L - k + 1.0) - L * std::log(2.0));
    return out;
}

/// Rank of an L x L matrix (L <= 64) given as row words.
[[nodiscard]] inline unsigned rank_small(std::span<std::uint64_t> rows) {
    unsigned rank = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::uint64_t pivot_row = rows[i];
        if (pivot_row == 0) continue;
        ++rank;
        const std::uint64_t low = pivot_row & (~pivot_row + 1);
        for (std::size_t j = i + 1; j < rows.size(); ++j)
            if (rows[j] & low) rows[j] ^= pivot_row;
    }
    return rank;
}

// ---------------------------------------------------------------------------
// The tests. Sources yield untransformed samples; each test applies the
// configured tau skip itself.

/// Non-overlapping t-dimensional points, sorted cell numbers, sorted
/// spacings, Y = number of equal adjacent sorted spacings, summed over
/// replications. Poisson with mean N~ n^3 / (4 d^t).
template <class Source>
[[nodiscard]] test_result birthday_spacings(const test_config& cfg, Source& src, const test_progress& progress = {}) {
    detail::check_points(cfg);
    const std::uint64_t k = detail::cell_space(cfg);
    std::vector<std::uint64_t> cells(cfg.n), scratch(cfg.n);
    std::uint64_t y = 0;
    for (std::uint64_t rep = 0; rep < cfg.replications; ++rep) {
        for (auto& c : cells) {
            std::uint64_t cell = 0;
            for (unsigned l = 0; l < cfg.t; ++l) cell = cell * cfg.d + skip_tau(src.next(), cfg.tau).cell(cfg.d);
            c = cell;
        }
        detail::radix_sort(cells, scratch);
        for (std::size_t j = 0; j + 1 < cells.size(); ++j) cells[j] = cells[j + 1] - cells[j];
        cells.pop_back();
        detail::radix_sort(cells, scratch);
        y += detail::adjacent_equal(cells);
        cells.resize(cfg.n);
        if (progress) progress(rep + 1, cfg.replications);
    }
    const long double n = static_cast<long double>(cfg.n);
    const double mean = static_cast<double>(cfg.replications * n * n * n / (4.0L * static_cast<long double>(k)));
    return detail::poisson_result(cfg, y, mean);
}

/// Overlapping t-tuples of n successive values, wrapping circularly. C = n -
/// number of distinct cells, summed over replications. Poisson with mean
/// N~ n^2 / (2 d^t).
template <class Source>
[[nodiscard]] test_result overlap_collision(const test_config& cfg, Source& src, const test_progress& progress = {}) {
    detail::check_points(cfg);
    const std::uint64_t k = detail::cell_space(cfg);
    if (cfg.n > k) throw std::invalid_argument("overlap_collision: n / d^t must be <= 1");
    if (cfg.t > cfg.n) throw std::invalid_argument("overlap_collision: t must not exceed n");
    constexpr std::uint64_t dense_limit = std::uint64_t{1} << 33;
    const bool dense = k <= dense_limit;
    std::vector<std::uint64_t> coords(cfg.n), cells, scratch;
    std::vector<std::uint64_t> bitmap;
    if (!dense) cells.resize(cfg.n);
    std::uint64_t c = 0;
    for (std::uint64_t rep = 0; rep < cfg.replications; ++rep) {
        for (auto& x : coords) x = skip_tau(src.next(), cfg.tau).cell(cfg.d);
        auto cell_at = [&](std::size_t i) {
            std::uint64_t cell = 0;
            for (unsigned l = 0; l < cfg.t; ++l) cell = cell * cfg.d + coords[(i + l) % cfg.n];
            return cell;
        };
        if (dense) {
            bitmap.assign((k + 63) / 64, 0);
            for (std::size_t i = 0; i < cfg.n; ++i) {
                const std::uint64_t cell = cell_at(i);
                std::uint64_t& word = bitmap[cell / 64];
                const std::uint64_t bit = std::uint64_t{1} << (cell % 64);
                c += (word & bit) != 0;
                word |= bit;
            }
        } else {
            for (std::size_t i = 0; i < cfg.n; ++i) cells[i] = cell_at(i);
            detail::radix_sort(cells, scratch);
            c += detail::adjacent_equal(cells);
        }
        if (progress) progress(rep + 1, cfg.replications);
    }
    const long double n = static_cast<long double>(cfg.n);
    const double mean = static_cast<double>(cfg.replications * n * n / (2.0L * static_cast<long double>(k)));
    return detail::poisson_result(cfg, c, mean);
}

/// n random L x L matrices, filled row by row from sigma-bit fields (bits
/// tau+1..tau+sigma) of L/sigma samples per row; chi-square of the rank
/// counts against rank_distribution(L).
template <class Source>
[[nodiscard]] test_result matrix_rank_test(const test_config& cfg, Source& src, const test_progress& progress = {}) {
    if (cfg.L == 0 || cfg.sigma == 0) throw std::invalid_argument("matrix_rank: L and sigma must be positive");
    if (cfg.L % cfg.sigma != 0) throw std::invalid_argument("matrix_rank: sigma must divide L");
    if (cfg.replications != 1) throw std::invalid_argument("matrix_rank: runs single-level (replications = 1)");
    if (cfg.n == 0) throw std::invalid_argument("matrix_rank: n >= 1 required");
    const unsigned per_row = cfg.L / cfg.sigma;
    auto field = [&] {
        const real_sample s = src.next();
        if (cfg.tau + cfg.sigma > s.width) throw std::invalid_argument("matrix_rank: tau + sigma exceeds the sample width");
        return s.field(cfg.tau, cfg.sigma);
    };
    std::vector<std::uint64_t> counts(cfg.L + 1, 0);
    const std::uint64_t step = std::max<std::uint64_t>(1, cfg.n / 100);
    if (cfg.L <= 64) {
        std::vector<std::uint64_t> rows(cfg.L);
        for (std::uint64_t m = 0; m < cfg.n; ++m) {
            for (auto& row : rows) {
                std::uint64_t r = 0;
                for (unsigned j = 0; j < per_row; ++j) r = (cfg.sigma == 64 ? 0 : r << cfg.sigma) | field();
                row = r;
            }
            ++counts[rank_small(rows)];
            if (progress && (m + 1) % step == 0) progress(m + 1, cfg.n);
        }
    } else {
        for (std::uint64_t m = 0; m < cfg.n; ++m) {
            f2_matrix a(cfg.L, cfg.L);
            for (std::size_t i = 0; i < cfg.L; ++i)
                for (unsigned j = 0; j < per_row; ++j) {
                    const std::uint64_t f = field();
                    for (unsigned b = 0; b < cfg.sigma; ++b)
                        if ((f >> (cfg.sigma - 1 - b)) & 1u) a.set(i, j * cfg.sigma + b);
                }
            ++counts[rank(a)];
            if (progress && (m + 1) % step == 0) progress(m + 1, cfg.n);
        }
    }
    std::vector<double> expected = rank_distribution(cfg.L);
    for (auto& e : expected) e *= static_cast<double>(cfg.n);
    return chi_square_result(cfg, expected, counts);
}

/// 2n blocks of L bits, each from ceil(L/sigma) samples (sigma bits after
/// skipping tau, concatenated, truncated to L); chi-square of the
/// (L+1) x (L+1) table of Hamming weights of non-overlapping block pairs
/// against independent Binomial(L, 1/2) weights.
template <class Source>
[[nodiscard]] test_result hamming_independence(const test_config& cfg, Source& src, const test_progress& progress = {}) {
    if (cfg.L == 0 || cfg.sigma == 0) throw std::invalid_argument("hamming_indep: L and sigma must be positive");
    if (cfg.replications != 1) throw std::invalid_argument("hamming_indep: runs single-level (replications = 1)");
    if (cfg.n == 0) throw std::invalid_argument("hamming_indep: n >= 1 required");
    const unsigned per_block = (cfg.L + cfg.sigma - 1) / cfg.sigma;
    const unsigned last_bits = cfg.L - (per_block - 1) * cfg.sigma;
    auto weight = [&] {
        unsigned w = 0;
        for (unsigned j = 0; j < per_block; ++j) {
            const real_sample s = src.next();
            if (cfg.tau + cfg.sigma > s.width) throw std::invalid_argument("hamming_indep: tau + sigma exceeds the sample width");
            const std::uint64_t f = s.field(cfg.tau, cfg.sigma);
            w += static_cast<unsigned>(std::popcount(j + 1 == per_block ? f >> (cfg.sigma - last_bits) : f));
        }
        return w;
    };
    const std::size_t side = cfg.L + 1;
    std::vector<std::uint64_t> table(side * side, 0);
    const std::uint64_t step = std::max<std::uint64_t>(1, cfg.n / 100);
    for (std::uint64_t j = 0; j < cfg.n; ++j) {
        const unsigned x1 = weight();
        const unsigned x2 = weight();
        ++table[x1 * side + x2];
        if (progress && (j + 1) % step == 0) progress(j + 1, cfg.n);
    }
    const std::vector<double> b = binomial_half(cfg.L);
    std::vector<double> expected(side * side);
    for (std::size_t a = 0; a < side; ++a)
        for (std::size_t c = 0; c < side; ++c) expected[a * side + c] = static_cast<double>(cfg.n) * b[a] * b[c];
    return chi_square_result(cfg, expected, table);
}

template <class Source>
[[nodiscard]] test_result run_test(const test_config& cfg, Source& src, const test_progress& progress = {}) {
    switch (cfg.kind) {
        case test_kind::birthday: return birthday_spacings(cfg, src, progress);
        case test_kind::overlap_collision: return overlap_collision(cfg, src, progress);
        case test_kind::matrix_rank: return matrix_rank_test(cfg, src, progress);
        case test_kind::hamming_indep: return hamming_independence(cfg, src, progress);
    }
    throw std::invalid_argument("run_test: unknown test");
}

}  // namespace mtconv
