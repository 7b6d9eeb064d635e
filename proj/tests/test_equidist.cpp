#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

#include "mtconv/equidist.hpp"
#include "mtconv/relations.hpp"
#include "toy.hpp"

using namespace mtconv;

namespace {

struct toy_case {
    const char* name;
    generator_params params;
};

const std::vector<toy_case>& toys() {
    static const std::vector<toy_case> cases{{"p12", toy::p12}, {"p13", toy::p13}, {"p16", toy::p16}};
    return cases;
}

std::vector<std::pair<const char*, output_layout>> toy_layouts(unsigned w) {
    return {{"raw", make_layout(conversion::raw32, w)},
            {"reversed", make_layout(conversion::reversed32, w)},
            {"concat-lo", make_layout(conversion::concat64_low_first, w)},
            {"concat-hi", make_layout(conversion::concat64_high_first, w)},
            {"split", split_layout(w, w - 1, w - 2)}};
}

}  // namespace

TEST(Equidist, ToyGeneratorsMatchExhaustiveCounting) {
    for (const auto& [name, p] : toys()) {
        const auto seq = toy::full_period(p);
        for (const auto& [lname, layout] : toy_layouts(p.w)) {
            for (unsigned v = 1; v <= layout.width(); ++v) {
                const std::size_t counted = toy::counted_kv(p, layout, seq, v);
                EXPECT_EQ(kv(p, layout, v), counted) << name << " " << lname << " v=" << v;
            }
        }
    }
}

TEST(Equidist, ToyTableIsMonotoneAndBounded) {
    for (const auto& [name, p] : toys()) {
        for (const auto& [lname, layout] : toy_layouts(p.w)) {
            const auto report = kv_table(p, layout, lname);
            ASSERT_EQ(report.entries.size(), layout.width());
            std::size_t delta = 0;
            for (std::size_t i = 0; i < report.entries.size(); ++i) {
                const auto& e = report.entries[i];
                EXPECT_LE(e.k, p.state_bits() / e.v);
                EXPECT_EQ(e.defect, p.state_bits() / e.v - e.k);
                if (i > 0) {
                    EXPECT_LE(e.k, report.entries[i - 1].k) << name << " " << lname;
                }
                delta += e.defect;
            }
            EXPECT_EQ(report.delta, delta);
            EXPECT_EQ(report.at(1).k, p.state_bits()) << name << " " << lname;
        }
    }
}

TEST(Equidist, WindowRankBoundsTheDimension) {
    // k values of the window are surjective for k = k(v) and not for k(v) + 1.
    for (const auto& [name, p] : toys()) {
        const auto layout = make_layout(conversion::raw32, p.w);
        for (unsigned v = 1; v <= p.w; ++v) {
            const std::size_t k = kv(p, layout, v);
            EXPECT_EQ(rank(window_map(p, layout, {0, v}, k)), k * v) << name << " v=" << v;
            EXPECT_LT(rank(window_map(p, layout, {0, v}, k + 1)), (k + 1) * v) << name << " v=" << v;
        }
    }
}

TEST(Equidist, CsvShape) {
    const auto report = kv_table(toy::p12, make_layout(conversion::raw32, toy::p12.w), "raw", 2);
    const std::string csv = report.to_csv();
    EXPECT_EQ(csv.rfind("v,k,d\n", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
    EXPECT_THROW((void)report.at(9), std::out_of_range);
}

TEST(Equidist, RejectsBadArguments) {
    const auto layout = make_layout(conversion::raw32, toy::p12.w);
    EXPECT_THROW((void)kv(toy::p12, layout, 0), std::out_of_range);
    EXPECT_THROW((void)kv(toy::p12, layout, toy::p12.w + 1), std::out_of_range);
    EXPECT_THROW((void)kv_table(toy::p12, layout, "raw", toy::p12.w + 1), std::out_of_range);
    EXPECT_THROW((void)kv(toy::p12, make_layout(conversion::raw32, 32), 1), std::invalid_argument);
    EXPECT_THROW((void)equidistribution_dimension(toy::p12, layout, {3, 3}), std::out_of_range);
}

TEST(Equidist, Mt19937FullWordDimensions) {
    EXPECT_EQ(kv(mt19937_params, make_layout(conversion::raw32), 32), 623u);
    EXPECT_EQ(kv(mt19937_params, make_layout(conversion::concat64_low_first), 32), 510u);
    EXPECT_EQ(kv(mt19937_params, make_layout(conversion::concat64_low_first), 64), 311u);
}
