#include <gtest/gtest.h>

#include "oracles/oracles.hpp"
#include "readorder/core.hpp"
#include "readorder/io.hpp"
#include "readorder/random.hpp"
#include "test_util.hpp"

using namespace readorder;
using testutil::make_page;

TEST(Core, AppearanceIndicesCountPriorOccurrences) {
    EXPECT_EQ(appearance_indices({"the", "car", "hits", "the", "bus", "the"}),
              (std::vector<std::uint32_t>{0, 0, 0, 1, 0, 2}));
}

TEST(Core, ValidateRejectsBrokenPages) {
    auto good = make_page({{"a", {0, 0, 10, 10}}, {"a", {10, 0, 20, 10}}});
    EXPECT_NO_THROW(validate(good));

    auto outside = good;
    outside.tokens[1].box = {10, 0, 120, 10};
    EXPECT_THROW(validate(outside), data_error);

    auto inverted = good;
    inverted.tokens[0].box = {10, 0, 5, 10};
    EXPECT_THROW(validate(inverted), data_error);

    auto dup = good;
    dup.tokens[1].appearance_index = 0;
    EXPECT_THROW(validate(dup), data_error);

    auto empty_word = good;
    empty_word.tokens[0].word = "";
    EXPECT_THROW(validate(empty_word), data_error);

    page empty{"e", 10, 10, {}};
    EXPECT_THROW(validate(empty), data_error);
}

TEST(Core, PermutationIdentityAndSwap) {
    auto p = make_page({{"a", {0, 0, 1, 1}}, {"b", {2, 0, 3, 1}}});
    EXPECT_EQ(permutation_from_layout_order(p, p.tokens), (std::vector<int>{0, 1}));
    std::vector<token> swapped{p.tokens[1], p.tokens[0]};
    EXPECT_EQ(permutation_from_layout_order(p, swapped), (std::vector<int>{1, 0}));
}

TEST(Core, PermutationKeyMismatchIsAlignmentError) {
    auto p = make_page({{"a", {0, 0, 1, 1}}, {"b", {2, 0, 3, 1}}});
    auto other = p.tokens;
    other[1].word = "c";
    EXPECT_THROW(permutation_from_layout_order(p, other), alignment_error);
    other.pop_back();
    EXPECT_THROW(permutation_from_layout_order(p, other), alignment_error);
}

TEST(Core, PermutationMatchesBruteForceOnShuffledPages) {
    rng r(11);
    for (int trial = 0; trial < 3; ++trial) {
        std::vector<std::pair<std::string, bbox>> items;
        for (int i = 0; i < 10; ++i) {
            // Few distinct words so appearance indices matter.
            const std::string w = std::string(1, char('a' + r.uniform_int(0, 2)));
            items.push_back({w, {i, 0, i + 1, 1}});
        }
        const auto p = make_page(items);
        auto shuffle = r.permutation(10);
        const auto layout = reorder(p.tokens, shuffle);
        const auto perm = permutation_from_layout_order(p, layout);
        const auto brute = oracle::all_matchings(10, [&](int i, int j) {
            return p.tokens[std::size_t(i)].word == layout[std::size_t(j)].word &&
                   p.tokens[std::size_t(i)].appearance_index == layout[std::size_t(j)].appearance_index;
        });
        ASSERT_EQ(brute.size(), 1u);
        EXPECT_EQ(perm, brute.front());
        // Composition recovers the layout order.
        for (std::size_t k = 0; k < perm.size(); ++k) EXPECT_EQ(layout[std::size_t(perm[k])], p.tokens[k]);
    }
}

TEST(Core, DeduplicateKeepsFirstOccurrence) {
    EXPECT_EQ(deduplicate({2, 0, 2, 1, 0}), (std::vector<int>{2, 0, 1}));
    EXPECT_TRUE(is_permutation_of_range({2, 0, 1}, 3));
    EXPECT_FALSE(is_permutation_of_range({2, 2, 1}, 3));
    EXPECT_FALSE(is_permutation_of_range({0, 1}, 3));
}

TEST(Io, PageRoundTripKeepsFieldOrder) {
    auto p = make_page({{"x", {1, 2, 3, 4}}, {"y", {5, 6, 7, 8}}, {"x", {9, 9, 10, 10}}}, 50, 60, "pg");
    const json j = to_json(p);
    EXPECT_EQ(page_from_json(j), p);
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    EXPECT_EQ(keys, (std::vector<std::string>{"id", "width", "height", "words", "bboxes", "appearance_indices"}));
}

TEST(Io, MalformedInputIsDataError) {
    std::istringstream bad("{\"id\":\"a\"}\nnot json\n");
    EXPECT_THROW(read_jsonl(bad), data_error);
    EXPECT_THROW(page_from_json(json::parse(R"({"id":"a","width":10,"height":10,"words":["a"],"bboxes":[]})")),
                 data_error);
    EXPECT_THROW(read_pages("/nonexistent/file.jsonl"), data_error);
}

TEST(Io, PredictionRoundTrip) {
    order_prediction o{"pg", {2, 0, 1}};
    EXPECT_EQ(prediction_from_json(to_json(o)), o);
}
