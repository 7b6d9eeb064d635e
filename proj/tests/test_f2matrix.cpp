#include <gtest/gtest.h>

#include <array>
#include <random>
#include <vector>

#include "mtconv/f2matrix.hpp"

using namespace mtconv;

namespace {

f2_matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
    f2_matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            if (rng() & 1u) m.set(i, j);
    return m;
}

// Textbook Gaussian elimination on bool rows, as an independent oracle.
std::size_t naive_rank(const f2_matrix& m) {
    std::vector<std::vector<bool>> a(m.rows(), std::vector<bool>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) a[i][j] = m.get(i, j);
    std::size_t r = 0;
    for (std::size_t c = 0; c < m.cols() && r < a.size(); ++c) {
        std::size_t piv = r;
        while (piv < a.size() && !a[piv][c]) ++piv;
        if (piv == a.size()) continue;
        std::swap(a[piv], a[r]);
        for (std::size_t i = 0; i < a.size(); ++i)
            if (i != r && a[i][c])
                for (std::size_t j = 0; j < m.cols(); ++j) a[i][j] = a[i][j] != a[r][j];
        ++r;
    }
    return r;
}

}  // namespace

TEST(BitVector, BasicOperations) {
    bit_vector v(130);
    EXPECT_TRUE(v.none());
    v.set(0);
    v.set(64);
    v.set(129);
    EXPECT_EQ(v.popcount(), 3u);
    EXPECT_EQ(v.find_first(), 0u);
    EXPECT_EQ(v.ones(), (std::vector<std::size_t>{0, 64, 129}));
    v.flip(0);
    EXPECT_EQ(v.find_first(), 64u);
    bit_vector w(130);
    w.set(64);
    EXPECT_TRUE(v.dot(w));
    EXPECT_EQ((v ^ w).ones(), (std::vector<std::size_t>{129}));
    bit_vector other(131);
    EXPECT_THROW(v ^= other, std::invalid_argument);
}

TEST(F2Matrix, AllTwoByTwoRankCounts) {
    std::array<int, 3> counts{};
    for (unsigned mask = 0; mask < 16; ++mask) {
        f2_matrix m(2, 2);
        for (unsigned b = 0; b < 4; ++b)
            if ((mask >> b) & 1u) m.set(b / 2, b % 2);
        ++counts[rank(m)];
    }
    EXPECT_EQ(counts, (std::array<int, 3>{1, 9, 6}));
}

TEST(F2Matrix, IdentityAndZero) {
    EXPECT_EQ(rank(f2_matrix::identity(200)), 200u);
    EXPECT_EQ(rank(f2_matrix(50, 70)), 0u);
    EXPECT_EQ(kernel_basis(f2_matrix::identity(10)).size(), 0u);
    EXPECT_EQ(kernel_basis(f2_matrix(3, 10)).size(), 10u);
}

TEST(F2Matrix, RankMatchesNaiveElimination) {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t r = 1 + rng() % 90;
        const std::size_t c = 1 + rng() % 90;
        f2_matrix m = random_matrix(rng, r, c);
        // Force some dependencies.
        if (r > 2 && trial % 2) {
            for (std::size_t w = 0; w < m.stride(); ++w) m.row(r - 1)[w] = m.row(0)[w] ^ m.row(1)[w];
        }
        EXPECT_EQ(rank(m), naive_rank(m)) << r << "x" << c;
    }
}

TEST(F2Matrix, RankEqualsRankOfTranspose) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const f2_matrix m = random_matrix(rng, 300 + rng() % 200, 280 + rng() % 200);
        EXPECT_EQ(rank(m), rank(m.transpose()));
    }
}

TEST(F2Matrix, KernelVectorsAreInKernelAndIndependent) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t r = 20 + rng() % 300;
        const std::size_t c = 20 + rng() % 600;
        const f2_matrix m = random_matrix(rng, r, c);
        const auto kernel = kernel_basis(m);
        EXPECT_EQ(kernel.size(), c - rank(m));
        f2_matrix k(0, c);
        for (const auto& v : kernel) {
            EXPECT_TRUE((m * v).none());
            k.append_row(v.words());
        }
        EXPECT_EQ(rank(k), kernel.size());
    }
}

TEST(F2Matrix, ProductsAndTranspose) {
    std::mt19937_64 rng(4);
    const f2_matrix a = random_matrix(rng, 70, 90);
    const f2_matrix b = random_matrix(rng, 90, 65);
    const f2_matrix ab = a * b;
    for (std::size_t i = 0; i < 70; ++i)
        for (std::size_t j = 0; j < 65; ++j) {
            bool s = false;
            for (std::size_t k = 0; k < 90; ++k) s ^= a.get(i, k) && b.get(k, j);
            ASSERT_EQ(ab.get(i, j), s);
        }
    EXPECT_EQ(ab.transpose(), b.transpose() * a.transpose());
    EXPECT_EQ(a.transpose().transpose(), a);
    bit_vector v(90);
    v.set(5);
    v.set(89);
    const bit_vector av = a * v;
    for (std::size_t i = 0; i < 70; ++i) EXPECT_EQ(av[i], a.get(i, 5) != a.get(i, 89));
}

TEST(F2Matrix, DimensionMismatchThrows) {
    const f2_matrix a(3, 4), b(5, 2);
    EXPECT_THROW((void)(a * b), std::invalid_argument);
    EXPECT_THROW((void)(a * bit_vector(5)), std::invalid_argument);
    echelon_basis basis(100);
    std::vector<std::uint64_t> wrong(3, 0);
    EXPECT_THROW(basis.insert(wrong), std::invalid_argument);
    f2_matrix batch(2, 64);
    EXPECT_THROW(basis.insert_batch(batch), std::invalid_argument);
}

TEST(EchelonBasis, IncrementalMatchesBatch) {
    std::mt19937_64 rng(5);
    const std::size_t cols = 700;
    f2_matrix m = random_matrix(rng, 900, cols);
    for (std::size_t i = 700; i < 900; ++i)  // dependent tail rows
        for (std::size_t w = 0; w < m.stride(); ++w) m.row(i)[w] = m.row(i - 700)[w] ^ m.row(i - 699)[w];
    echelon_basis one(cols), batched(cols);
    std::vector<bool> flags_one;
    for (std::size_t i = 0; i < m.rows(); ++i) flags_one.push_back(one.insert(m.row(i)));
    std::vector<bool> flags_batch;
    for (std::size_t start = 0; start < m.rows(); start += 256) {
        f2_matrix batch(0, cols);
        for (std::size_t i = start; i < std::min<std::size_t>(start + 256, m.rows()); ++i) batch.append_row(m.row(i));
        const auto f = batched.insert_batch(batch);
        flags_batch.insert(flags_batch.end(), f.begin(), f.end());
    }
    EXPECT_EQ(flags_one, flags_batch);
    EXPECT_EQ(one.rank(), batched.rank());
    EXPECT_EQ(one.rank(), rank(m));
    // Reduction: a row of m reduces to zero, a fresh row generally does not.
    std::vector<std::uint64_t> row(m.row(3).begin(), m.row(3).end());
    EXPECT_FALSE(one.reduce(row));
}

TEST(EchelonBasis, PivotLimitReportsDependencyOnLeadingColumns) {
    // With pivots restricted to the first 2 columns, any third row is dependent.
    echelon_basis basis(10, 2);
    f2_matrix m(3, 10);
    m.set(0, 0);
    m.set(1, 1);
    m.set(2, 7);
    EXPECT_TRUE(basis.insert(m.row(0)));
    EXPECT_TRUE(basis.insert(m.row(1)));
    EXPECT_FALSE(basis.insert(m.row(2)));
    EXPECT_EQ(basis.rank(), 2u);
}
