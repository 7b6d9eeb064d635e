#include <gtest/gtest.h>

#include <array>
#include <set>
#include <vector>

#include "mtconv/relations.hpp"
#include "perturb.hpp"
#include "toy.hpp"

using namespace mtconv;

namespace {

constexpr std::array<std::uint32_t, 2> seeds{1, 5489};

std::set<std::vector<std::size_t>> as_coordinates(const std::vector<linear_relation>& rels, unsigned first,
                                                  unsigned width) {
    std::set<std::vector<std::size_t>> out;
    for (const auto& r : rels) {
        std::vector<std::size_t> c;
        for (const auto& t : r.terms()) c.push_back(t.lag * width + (t.bit - first));
        out.insert(c);
    }
    return out;
}

// Checks a relation on a toy generator's full period directly.
bool holds_on_period(const linear_relation& rel, const output_layout& layout, const std::vector<std::uint32_t>& seq) {
    for (std::uint64_t i = 0; i < seq.size(); ++i) {
        unsigned parity = 0;
        for (const auto& t : rel.terms()) parity ^= static_cast<unsigned>(toy::window_bits(layout, seq, i + t.lag, t.bit, 1));
        if (parity) return false;
    }
    return true;
}

}  // namespace

TEST(LinearRelation, CanonicalForm) {
    const linear_relation r({{792, 4}, {0, 2}, {1246, 11}, {792, 11}, {1246, 4}});
    EXPECT_EQ(r, known_relations::msb12());
    EXPECT_EQ(r.weight(), 5u);
    EXPECT_EQ(r.max_lag(), 1246u);
    EXPECT_EQ(r.max_bit(), 11u);
    EXPECT_EQ(r.lags(), (std::vector<std::uint64_t>{0, 792, 1246}));
    EXPECT_THROW(linear_relation(std::vector<relation_term>{}), std::invalid_argument);
    EXPECT_THROW(linear_relation({{0, 1}, {0, 1}}), std::invalid_argument);
    EXPECT_LT(linear_relation({{0, 1}, {5, 1}}), known_relations::msb12());
}

TEST(LinearRelation, JsonRoundTrip) {
    const auto r = known_relations::six_term();
    EXPECT_EQ(relation_from_json(to_json(r)), r);
    const auto obj = nlohmann::json{{"stream", "concat64_low_first"}, {"terms", to_json(r)}};
    const auto parsed = relation_from_json(obj);
    EXPECT_EQ(parsed, r);
    EXPECT_EQ(parsed.stream(), "concat64_low_first");
    EXPECT_THROW((void)relation_from_json(nlohmann::json::parse(R"({"stream":"raw32"})")), std::invalid_argument);
    EXPECT_THROW((void)relation_from_json(nlohmann::json::parse("[[1,2,3]]")), std::invalid_argument);
    EXPECT_THROW((void)relation_from_json(nlohmann::json::parse("[]")), std::invalid_argument);
}

TEST(Verify, KnownRelationsHoldOnRawWords) {
    for (const auto& rel : {known_relations::msb12(), known_relations::bits20_29(), known_relations::six_term()})
        for (const auto& out : verify(rel, conversion::raw32, 100000, seeds)) {
            EXPECT_TRUE(out.holds()) << rel.to_string() << " seed " << out.seed;
            EXPECT_EQ(out.checked, 100000u);
        }
}

TEST(Verify, SingleBitPerturbationsFailQuickly) {
    for (const auto& rel : {known_relations::msb12(), known_relations::bits20_29(), known_relations::six_term()}) {
        const auto variants = perturb::single_bit(rel, 32);
        EXPECT_GE(variants.size(), rel.weight());
        for (const auto& v : variants) {
            const auto out = verify(v, conversion::raw32, 1000, 5489u);
            EXPECT_FALSE(out.holds()) << v.to_string();
        }
    }
}

TEST(Verify, SixTermFailsOnConcatenatedHighHalf) {
    const auto out = verify(known_relations::six_term(), conversion::concat64_low_first, 1000, 5489u);
    EXPECT_FALSE(out.holds());
}

TEST(Verify, BitOutsideWidthThrows) {
    EXPECT_THROW((void)verify(linear_relation({{0, 40}}), conversion::raw32, 10, 1u), std::out_of_range);
}

TEST(Fold, MsbRelationLandsOnHalvedLags) {
    const auto layout = make_layout(conversion::concat64_low_first);
    for (unsigned phase : {0u, 1u}) {
        const auto folded = fold(known_relations::msb12(), layout, phase, "concat64_low_first");
        EXPECT_EQ(folded.lags(), (std::vector<std::uint64_t>{0, 396, 623}));
        EXPECT_EQ(folded.weight(), 5u);
        // Even raw indices sit in the low half-word, odd ones in the high half.
        for (const auto& t : folded.terms()) EXPECT_EQ(t.bit >= 32, phase == 0);
        for (const auto& out : verify(folded, conversion::concat64_low_first, 100000, seeds))
            EXPECT_TRUE(out.holds()) << "phase " << phase;
    }
    const auto folded6 = fold(known_relations::bits20_29(), layout);
    EXPECT_EQ(folded6.lags(), (std::vector<std::uint64_t>{0, 396, 623}));
    for (const auto& t : folded6.terms()) EXPECT_GE(t.bit, 32u);
    EXPECT_TRUE(verify(folded6, conversion::concat64_low_first, 100000, 1u).holds());
}

TEST(Fold, Errors) {
    const auto layout = make_layout(conversion::res53);
    // Bit 30 of a raw word is dropped by res53.
    EXPECT_THROW((void)fold(linear_relation({{0, 30}}), layout), std::invalid_argument);
    EXPECT_THROW((void)fold(known_relations::msb12(), layout, 2), std::invalid_argument);
}

TEST(Discover, MatchesBruteForceOnToys) {
    struct toy_case {
        generator_params p;
        output_layout layout;
        bit_window window;
        std::size_t k;
    };
    const std::vector<toy_case> cases{
        {toy::p12, make_layout(conversion::raw32, 5), {0, 5}, 3},
        {toy::p12, make_layout(conversion::raw32, 5), {1, 3}, 5},
        {toy::p13, make_layout(conversion::raw32, 4), {0, 4}, 4},
        {toy::p13, make_layout(conversion::concat64_low_first, 4), {2, 4}, 4},
        {toy::p16, make_layout(conversion::raw32, 6), {1, 4}, 5},
    };
    for (const auto& c : cases) {
        const auto seq = toy::full_period(c.p);
        const auto found = discover(c.p, c.layout, c.window, c.k);
        const auto brute = toy::brute_force_relations(c.layout, seq, c.window.first, c.window.width, c.k);
        EXPECT_FALSE(brute.empty());
        EXPECT_EQ(as_coordinates(found, c.window.first, c.window.width), brute) << "p = " << c.p.state_bits();
        for (std::size_t i = 1; i < found.size(); ++i) EXPECT_LE(found[i - 1].weight(), found[i].weight());
        for (const auto& r : found) EXPECT_TRUE(holds_on_period(r, c.layout, seq));
    }
}

TEST(Discover, MaxResultsKeepsLowestWeights) {
    const auto layout = make_layout(conversion::raw32, 6);
    const auto all = discover(toy::p16, layout, {1, 4}, 5);
    ASSERT_GT(all.size(), 3u);
    discover_options opts;
    opts.max_results = 3;
    const auto some = discover(toy::p16, layout, {1, 4}, 5, opts);
    ASSERT_EQ(some.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(some[i], all[i]);
}

TEST(Discover, KernelBoundAndEmptyCases) {
    const auto layout = make_layout(conversion::raw32, 5);
    discover_options tight;
    tight.max_kernel_dim = 1;
    EXPECT_THROW((void)discover(toy::p12, layout, {0, 5}, 4, tight), std::length_error);
    // k(5) values span the state surjectively: no relations.
    const std::size_t k5 = kv(toy::p12, layout, 5);
    EXPECT_TRUE(discover(toy::p12, layout, {0, 5}, k5).empty());
    EXPECT_THROW((void)discover(toy::p12, layout, {0, 5}, 0), std::invalid_argument);
}
