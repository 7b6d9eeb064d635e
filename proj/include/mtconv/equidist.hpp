#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mtconv/f2matrix.hpp"
#include "mtconv/generator.hpp"
#include "mtconv/linear_model.hpp"
#include "mtconv/streams.hpp"

namespace mtconv {

/// Consecutive output bits [first, first + width), counted from the MSB.
struct bit_window {
    unsigned first = 0;
    unsigned width = 0;
};

/// Streams, value by value, the functionals (maps from the initial state)
/// of the window bits of successive stream values.
class window_functionals {
public:
    window_functionals(const generator_params& params, output_layout layout, bit_window window)
        : tracker_(params), layout_(std::move(layout)), window_(window), value_rows_(window.width, params.state_bits()) {
        if (layout_.raw_width != params.w) throw std::invalid_argument("window_functionals: layout word size mismatch");
        if (window_.width == 0 || window_.first + window_.width > layout_.width())
            throw std::out_of_range("window_functionals: bit window outside the output width");
    }

    [[nodiscard]] std::size_t state_bits() const noexcept { return tracker_.state_bits(); }
    [[nodiscard]] unsigned width() const noexcept { return window_.width; }

    /// Rows of the next value: row l is bit window.first + l.
    const f2_matrix& next_value() {
        for (unsigned word = 0; word < layout_.words_per_output; ++word) {
            tracker_.step();
            for (unsigned l = 0; l < window_.width; ++l) {
                const bit_source src = layout_.bits[window_.first + l];
                if (src.word == word) tracker_.newest_tempered_bit(src.bit, value_rows_.row(l));
            }
        }
        return value_rows_;
    }

private:
    functional_tracker tracker_;
    output_layout layout_;
    bit_window window_;
    f2_matrix value_rows_;
};

/// The largest k such that the window bits of k consecutive values form a
/// surjective linear image of the state (rank k * width). For a
/// maximal-period generator this is the dimension of equidistribution of the
/// window. Rows are appended value by value to an echelon basis; the first
/// dependent row at index i gives k = i / width.
[[nodiscard]] inline std::size_t equidistribution_dimension(const generator_params& params, const output_layout& layout,
                                                            bit_window window) {
    window_functionals source(params, layout, window);
    const std::size_t p = source.state_bits();
    echelon_basis basis(p);
    constexpr std::size_t batch_target = detail::elimination_batch_rows;
    std::size_t rows_done = 0;
    f2_matrix batch(0, p);
    for (std::size_t value = 0;; ++value) {
        if (value * window.width > p + window.width + batch_target) throw std::logic_error("equidistribution_dimension: no dependency found");
        const f2_matrix& rows = source.next_value();
        for (std::size_t l = 0; l < rows.rows(); ++l) batch.append_row(rows.row(l));
        if (batch.rows() < batch_target) continue;
        const auto independent = basis.insert_batch(batch);
        for (std::size_t i = 0; i < independent.size(); ++i)
            if (!independent[i]) return (rows_done + i) / window.width;
        rows_done += batch.rows();
        batch = f2_matrix(0, p);
    }
}

/// k(v): dimension of equidistribution with v-bit accuracy.
[[nodiscard]] inline std::size_t kv(const generator_params& params, const output_layout& layout, unsigned v) {
    if (v < 1 || v > layout.width()) throw std::out_of_range("kv: v must be in [1, output width]");
    return equidistribution_dimension(params, layout, {0, v});
}

struct equidist_entry {
    unsigned v = 0;
    std::size_t k = 0;
    std::size_t bound = 0;   ///< floor(p / v)
    std::size_t defect = 0;  ///< d(v) = bound - k
};

struct equidist_report {
    std::string label;
    std::size_t p = 0;
    std::vector<equidist_entry> entries;
    std::size_t delta = 0;  ///< sum of d(v) over the entries

    [[nodiscard]] const equidist_entry& at(unsigned v) const {
        for (const auto& e : entries)
            if (e.v == v) return e;
        throw std::out_of_range("equidist_report: no entry for v = " + std::to_string(v));
    }

    /// "v,k,d" header then one line per entry.
    [[nodiscard]] std::string to_csv() const {
        std::string out = "v,k,d\n";
        for (const auto& e : entries)
            out += std::to_string(e.v) + ',' + std::to_string(e.k) + ',' + std::to_string(e.defect) + '\n';
        return out;
    }
};

using equidist_progress = std::function<void(const equidist_entry&)>;

/// k(v), d(v) for v = 1..vmax (default: full output width) and their total
/// defect.
[[nodiscard]] inline equidist_report kv_table(const generator_params& params, const output_layout& layout,
                                              std::string label, unsigned vmax = 0,
                                              const equidist_progress& progress = {}) {
    if (vmax == 0) vmax = layout.width();
    if (vmax > layout.width()) throw std::out_of_range("kv_table: vmax exceeds the output width");
    equidist_report report{std::move(label), params.state_bits(), {}, 0};
    for (unsigned v = 1; v <= vmax; ++v) {
        equidist_entry e{v, kv(params, layout, v), report.p / v, 0};
        if (e.k > e.bound) throw std::logic_error("kv_table: k(v) exceeds floor(p/v)");
        e.defect = e.bound - e.k;
        report.delta += e.defect;
        report.entries.push_back(e);
        if (progress) progress(e);
    }
    return report;
}

/// Table for a named MT19937 conversion.
[[nodiscard]] inline equidist_report kv_table(conversion conv, unsigned vmax = 0, const equidist_progress& progress = {}) {
    return kv_table(mt19937_params, make_layout(conv), std::string(to_string(conv)), vmax, progress);
}

/// res53's table over the 53-bit significand window; by default v = 1..52.
[[nodiscard]] inline equidist_report kv_res53(unsigned vmax = 52, const equidist_progress& progress = {}) {
    return kv_table(conversion::res53, vmax, progress);
}

}  // namespace mtconv
