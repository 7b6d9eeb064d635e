#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mtconv {

namespace detail {

inline constexpr std::size_t words_for(std::size_t bits) noexcept { return (bits + 63) / 64; }

inline void xor_words(std::uint64_t* __restrict dst, const std::uint64_t* __restrict src,
                      std::size_t count) noexcept {
    for (std::size_t i = 0; i < count; ++i) dst[i] ^= src[i];
}

inline std::size_t first_set(const std::uint64_t* words, std::size_t count, std::size_t from_word = 0) noexcept {
    for (std::size_t i = from_word; i < count; ++i)
        if (words[i] != 0) return i * 64 + static_cast<std::size_t>(std::countr_zero(words[i]));
    return static_cast<std::size_t>(-1);
}

}  // namespace detail

/// Dense vector over F2. Bit j lives in word j/64 at position j%64.
class bit_vector {
public:
    bit_vector() = default;
    explicit bit_vector(std::size_t size) : size_(size), words_(detail::words_for(size), 0) {}
    bit_vector(std::size_t size, std::span<const std::uint64_t> words) : bit_vector(size) {
        std::copy_n(words.begin(), std::min(words.size(), words_.size()), words_.begin());
        clear_padding();
    }

    [[nodiscard]] std::size_t size() const noexcept { return size_; }
    [[nodiscard]] bool operator[](std::size_t j) const noexcept { return (words_[j >> 6] >> (j & 63)) & 1u; }
    void set(std::size_t j, bool value = true) noexcept {
        const std::uint64_t bit = std::uint64_t{1} << (j & 63);
        if (value)
            words_[j >> 6] |= bit;
        else
            words_[j >> 6] &= ~bit;
    }
    void flip(std::size_t j) noexcept { words_[j >> 6] ^= std::uint64_t{1} << (j & 63); }

    bit_vector& operator^=(const bit_vector& other) {
        if (other.size_ != size_) throw std::invalid_argument("bit_vector: size mismatch");
        detail::xor_words(words_.data(), other.words_.data(), words_.size());
        return *this;
    }
    friend bit_vector operator^(bit_vector a, const bit_vector& b) { return a ^= b; }

    [[nodiscard]] std::size_t popcount() const noexcept {
        std::size_t total = 0;
        for (auto w : words_) total += static_cast<std::size_t>(std::popcount(w));
        return total;
    }
    [[nodiscard]] bool none() const noexcept {
        return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
    }
    /// Index of the lowest set bit, or size() when there is none.
    [[nodiscard]] std::size_t find_first() const noexcept {
        const std::size_t j = detail::first_set(words_.data(), words_.size());
        return j == static_cast<std::size_t>(-1) ? size_ : j;
    }
    /// Indices of all set bits in increasing order.
    [[nodiscard]] std::vector<std::size_t> ones() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < words_.size(); ++i)
            for (std::uint64_t w = words_[i]; w != 0; w &= w - 1)
                out.push_back(i * 64 + static_cast<std::size_t>(std::countr_zero(w)));
        return out;
    }
    /// Parity of the AND with `other`.
    [[nodiscard]] bool dot(const bit_vector& other) const noexcept {
        std::uint64_t acc = 0;
        const std::size_t n = std::min(words_.size(), other.words_.size());
        for (std::size_t i = 0; i < n; ++i) acc ^= words_[i] & other.words_[i];
        return std::popcount(acc) & 1;
    }

    [[nodiscard]] std::span<std::uint64_t> words() noexcept { return words_; }
    [[nodiscard]] std::span<const std::uint64_t> words() const noexcept { return words_; }

    /// '0'/'1' characters, index 0 first.
    [[nodiscard]] std::string to_string() const {
        std::string s(size_, '0');
        for (std::size_t j = 0; j < size_; ++j)
            if ((*this)[j]) s[j] = '1';
        return s;
    }

    friend bool operator==(const bit_vector&, const bit_vector&) = default;

private:
    void clear_padding() noexcept {
        if (size_ % 64 != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
    }

    std::size_t size_ = 0;
    std::vector<std::uint64_t> words_;
};

/// Dense row-major bit-packed matrix over F2.
class f2_matrix {
public:
    f2_matrix() = default;
    f2_matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), stride_(detail::words_for(cols)), data_(rows * stride_, 0) {}

    static f2_matrix identity(std::size_t n) {
        f2_matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.set(i, i);
        return m;
    }

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    /// Words per row.
    [[nodiscard]] std::size_t stride() const noexcept { return stride_; }

    [[nodiscard]] bool get(std::size_t i, std::size_t j) const noexcept {
        return (data_[i * stride_ + (j >> 6)] >> (j & 63)) & 1u;
    }
    void set(std::size_t i, std::size_t j, bool value = true) noexcept {
        const std::uint64_t bit = std::uint64_t{1} << (j & 63);
        auto& w = data_[i * stride_ + (j >> 6)];
        w = value ? (w | bit) : (w & ~bit);
    }
    void flip(std::size_t i, std::size_t j) noexcept { data_[i * stride_ + (j >> 6)] ^= std::uint64_t{1} << (j & 63); }

    [[nodiscard]] std::span<std::uint64_t> row(std::size_t i) noexcept { return {data_.data() + i * stride_, stride_}; }
    [[nodiscard]] std::span<const std::uint64_t> row(std::size_t i) const noexcept {
        return {data_.data() + i * stride_, stride_};
    }
    [[nodiscard]] bit_vector row_vector(std::size_t i) const { return bit_vector(cols_, row(i)); }
    void set_row(std::size_t i, const bit_vector& v) {
        if (v.size() != cols_) throw std::invalid_argument("f2_matrix::set_row: length mismatch");
        std::copy(v.words().begin(), v.words().end(), row(i).begin());
    }

    /// Appends a row given as packed words (at least stride() words are read).
    void append_row(std::span<const std::uint64_t> words) {
        if (words.size() < stride_) throw std::invalid_argument("f2_matrix::append_row: short row");
        data_.insert(data_.end(), words.begin(), words.begin() + static_cast<std::ptrdiff_t>(stride_));
        ++rows_;
    }

    [[nodiscard]] f2_matrix transpose() const {
        f2_matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i) {
            const std::uint64_t* r = data_.data() + i * stride_;
            for (std::size_t k = 0; k < stride_; ++k)
                for (std::uint64_t w = r[k]; w != 0; w &= w - 1)
                    t.set(k * 64 + static_cast<std::size_t>(std::countr_zero(w)), i);
        }
        return t;
    }

    /// Matrix-vector product m * v.
    [[nodiscard]] bit_vector operator*(const bit_vector& v) const {
        if (v.size() != cols_) throw std::invalid_argument("f2_matrix: vector length mismatch");
        bit_vector out(rows_);
        const auto vw = v.words();
        for (std::size_t i = 0; i < rows_; ++i) {
            const std::uint64_t* r = data_.data() + i * stride_;
            std::uint64_t acc = 0;
            for (std::size_t k = 0; k < stride_; ++k) acc ^= r[k] & vw[k];
            if (std::popcount(acc) & 1) out.set(i);
        }
        return out;
    }

    [[nodiscard]] f2_matrix operator*(const f2_matrix& b) const {
        if (cols_ != b.rows_) throw std::invalid_argument("f2_matrix: dimension mismatch in product");
        f2_matrix out(rows_, b.cols_);
        for (std::size_t i = 0; i < rows_; ++i) {
            auto dst = out.row(i);
            const std::uint64_t* r = data_.data() + i * stride_;
            for (std::size_t k = 0; k < stride_; ++k)
                for (std::uint64_t w = r[k]; w != 0; w &= w - 1) {
                    const std::size_t j = k * 64 + static_cast<std::size_t>(std::countr_zero(w));
                    detail::xor_words(dst.data(), b.row(j).data(), out.stride_);
                }
        }
        return out;
    }

    friend bool operator==(const f2_matrix&, const f2_matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t stride_ = 0;
    std::vector<std::uint64_t> data_;
};

/// Incrementally maintained row-echelon basis.
///
/// Rows are kept in insertion order; each stored row has a distinct pivot (its
/// lowest set column) and is zero at the pivots of all earlier rows, so
/// reducing a vector by the rows in order yields zero exactly when the vector
/// lies in the span. Only columns below `pivot_limit` may become pivots; a row
/// whose residual vanishes there is reported as dependent.
class echelon_basis {
public:
    explicit echelon_basis(std::size_t cols) : echelon_basis(cols, cols) {}
    echelon_basis(std::size_t cols, std::size_t pivot_limit)
        : cols_(cols), pivot_limit_(std::min(pivot_limit, cols)), stride_(detail::words_for(cols)) {}

    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t rank() const noexcept { return pivots_.size(); }
    [[nodiscard]] std::size_t pivot(std::size_t i) const noexcept { return pivots_[i]; }
    [[nodiscard]] std::span<const std::uint64_t> row(std::size_t i) const noexcept {
        return {data_.data() + i * stride_, stride_};
    }

    /// Reduces `row` in place against the basis. Returns true when the
    /// residual is nonzero in the pivot region.
    bool reduce(std::span<std::uint64_t> row) const {
        check_width(row.size());
        reduce_range(row.data(), 0, rank());
        return leading(row.data()) != npos;
    }

    /// Inserts one row; returns whether it was independent of the basis.
    bool insert(std::span<const std::uint64_t> row) {
        check_width(row.size());
        std::vector<std::uint64_t> work(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(stride_));
        return insert_reduced(work.data(), 0);
    }

    /// Inserts the rows of `batch` in order. On return each dependent row of
    /// `batch` holds its residual. Result flags mark independent rows.
    std::vector<bool> insert_batch(f2_matrix& batch) {
        if (batch.cols() != cols_) throw std::invalid_argument("echelon_basis: column-count mismatch");
        const std::size_t existing = rank();
        const std::size_t count = batch.rows();
        // Sweep existing rows over the whole batch so each basis row is read once.
        for (std::size_t i = 0; i < existing; ++i) {
            const std::size_t pc = pivots_[i];
            const std::size_t pw = pc >> 6;
            const std::uint64_t pm = std::uint64_t{1} << (pc & 63);
            const std::uint64_t* src = data_.data() + i * stride_;
            for (std::size_t b = 0; b < count; ++b) {
                std::uint64_t* dst = batch.row(b).data();
                if (dst[pw] & pm) detail::xor_words(dst + pw, src + pw, stride_ - pw);
            }
        }
        std::vector<bool> independent(count);
        for (std::size_t b = 0; b < count; ++b) independent[b] = insert_reduced(batch.row(b).data(), existing);
        return independent;
    }

private:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    void check_width(std::size_t words) const {
        if (words != stride_) throw std::invalid_argument("echelon_basis: column-count mismatch");
    }

    void reduce_range(std::uint64_t* row, std::size_t from, std::size_t to) const noexcept {
        for (std::size_t i = from; i < to; ++i) {
            const std::size_t pc = pivots_[i];
            const std::size_t pw = pc >> 6;
            if ((row[pw] >> (pc & 63)) & 1u) detail::xor_words(row + pw, data_.data() + i * stride_ + pw, stride_ - pw);
        }
    }

    std::size_t leading(const std::uint64_t* row) const noexcept {
        const std::size_t j = detail::first_set(row, detail::words_for(pivot_limit_));
        return (j == npos || j >= pivot_limit_) ? npos : j;
    }

    bool insert_reduced(std::uint64_t* row, std::size_t reduced_upto) {
        reduce_range(row, reduced_upto, rank());
        const std::size_t lead = leading(row);
        if (lead == npos) return false;
        data_.insert(data_.end(), row, row + stride_);
        pivots_.push_back(lead);
        return true;
    }

    std::size_t cols_;
    std::size_t pivot_limit_;
    std::size_t stride_;
    std::vector<std::uint64_t> data_;
    std::vector<std::size_t> pivots_;
};

namespace detail {

inline constexpr std::size_t elimination_batch_rows = 256;

/// Feeds rows [first, first+count) of `m` into `basis` in batches.
inline void feed_rows(echelon_basis& basis, const f2_matrix& m, std::size_t first, std::size_t count) {
    for (std::size_t start = first; start < first + count; start += elimination_batch_rows) {
        const std::size_t n = std::min(elimination_batch_rows, first + count - start);
        f2_matrix batch(0, m.cols());
        for (std::size_t i = 0; i < n; ++i) batch.append_row(m.row(start + i));
        basis.insert_batch(batch);
    }
}

}  // namespace detail

/// Rank over F2.
[[nodiscard]] inline std::size_t rank(const f2_matrix& m) {
    echelon_basis basis(m.cols());
    detail::feed_rows(basis, m, 0, m.rows());
    return basis.rank();
}

/// Basis of the right kernel {v : m*v = 0}; its size is cols - rank(m).
///
/// Works on the columns of m, each augmented with its unit vector: a column
/// that reduces to zero against the earlier ones yields the kernel vector
/// recorded in its augmentation.
[[nodiscard]] inline std::vector<bit_vector> kernel_basis(const f2_matrix& m) {
    const std::size_t r = m.rows();
    const std::size_t c = m.cols();
    const f2_matrix columns = m.transpose();
    const std::size_t width = r + c;
    echelon_basis basis(width, r);
    std::vector<bit_vector> kernel;

    for (std::size_t start = 0; start < c; start += detail::elimination_batch_rows) {
        const std::size_t n = std::min(detail::elimination_batch_rows, c - start);
        f2_matrix batch(n, width);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = start + i;
            const auto src = columns.row(j);
            std::copy(src.begin(), src.end(), batch.row(i).begin());
            batch.set(i, r + j);
        }
        const auto independent = basis.insert_batch(batch);
        for (std::size_t i = 0; i < n; ++i) {
            if (independent[i]) continue;
            bit_vector v(c);
            for (std::size_t k = 0; k < c; ++k)
                if (batch.get(i, r + k)) v.set(k);
            kernel.push_back(std::move(v));
        }
    }
    if (basis.rank() + kernel.size() != c) throw std::logic_error("kernel_basis: rank-nullity violated");
    return kernel;
}

}  // namespace mtconv
