#include <gtest/gtest.h>

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "desklm/cooc.hpp"
#include "desklm/rng.hpp"

using namespace desklm;

namespace {

Corpus corpus_of(const std::vector<std::vector<std::string>>& docs, std::uint64_t min_count = 0) {
    auto vocab = std::make_shared<Vocabulary>(build_vocabulary(docs, min_count));
    return bind_corpus(docs, vocab, DocUnit::Sentence);
}

}  // namespace

TEST(CoocTable, LcmDenominatorIsExact) {
    EXPECT_EQ(CoocTable::lcm_upto(1), 1);
    EXPECT_EQ(CoocTable::lcm_upto(4), 12);
    EXPECT_EQ(CoocTable::lcm_upto(10), 2520);
    EXPECT_EQ(CoocTable::lcm_upto(15), 360360);
}

TEST(CountCooccurrences, DistanceWeightsAreExactFractions) {
    // "a b c": pairs (a,b) d=1, (a,c) d=2, (b,c) d=1.
    Corpus c = corpus_of({{"a", "b", "c"}});
    CoocTable t = count_cooccurrences(c, 2, 0);
    const int a = c.vocab->to_id("a"), b = c.vocab->to_id("b"), cc = c.vocab->to_id("c");
    EXPECT_DOUBLE_EQ(t.weight(a, b), 1.0);
    EXPECT_DOUBLE_EQ(t.weight(b, a), 1.0);
    EXPECT_DOUBLE_EQ(t.weight(a, cc), 0.5);
    EXPECT_DOUBLE_EQ(t.weight(cc, a), 0.5);
    EXPECT_DOUBLE_EQ(t.weight(b, cc), 1.0);
    EXPECT_EQ(t.nonzeros(), 6u);
}

TEST(CountCooccurrences, WindowLimitsDistanceAndEosIsExcluded) {
    Corpus c = corpus_of({{"a", "x", "x", "x", "b"}});
    const int a = c.vocab->to_id("a"), b = c.vocab->to_id("b");
    CoocTable t3 = count_cooccurrences(c, 3, 0);
    EXPECT_DOUBLE_EQ(t3.weight(a, b), 0.0);  // distance 4 > window
    CoocTable t4 = count_cooccurrences(c, 4, 0);
    EXPECT_DOUBLE_EQ(t4.weight(a, b), 0.25);

    for (const auto& e : t4.entries()) {
        EXPECT_NE(e.focus, Vocabulary::kEosId);
        EXPECT_NE(e.context, Vocabulary::kEosId);
    }
}

TEST(CountCooccurrences, WindowsStopAtDocumentBoundaries) {
    Corpus two = corpus_of({{"a"}, {"b"}});
    EXPECT_TRUE(count_cooccurrences(two, 5, 0).empty());

    Corpus one = corpus_of({{"a", "b"}});
    EXPECT_EQ(count_cooccurrences(one, 5, 0).nonzeros(), 2u);
}

TEST(CountCooccurrences, RepeatedTokenCountsBothDirections) {
    // (a at 0, a at 1) contributes 1/1 twice to the single (a,a) cell.
    Corpus c = corpus_of({{"a", "a"}});
    CoocTable t = count_cooccurrences(c, 2, 0);
    EXPECT_DOUBLE_EQ(t.weight(c.vocab->to_id("a"), c.vocab->to_id("a")), 2.0);
}

TEST(CountCooccurrences, MinCountDropsRareTokensFromBothSides) {
    Corpus c = corpus_of({{"a", "b", "a", "b", "a", "q"}});
    CoocTable t = count_cooccurrences(c, 2, 2);
    const int q = c.vocab->to_id("q");
    for (const auto& e : t.entries()) {
        EXPECT_NE(e.focus, q);
        EXPECT_NE(e.context, q);
    }
    // min_count 0 keeps observed tokens only; ids with zero frequency stay out.
    auto ids0 = cooc_vocabulary(c, 0);
    for (int id : ids0) EXPECT_GT(id_frequencies(c)[static_cast<std::size_t>(id)], 0u);
    auto ids2 = cooc_vocabulary(c, 2);
    EXPECT_EQ(ids2.size(), 2u);  // a and b
}

TEST(CountCooccurrences, ShardingIsBitIdentical) {
    Rng rng(11);
    std::vector<std::vector<std::string>> docs(17);
    const std::vector<std::string> pool = {"a", "b", "c", "d", "e"};
    for (auto& doc : docs) {
        std::size_t len = 1 + rng.below(9);
        for (std::size_t i = 0; i < len; ++i) doc.push_back(pool[rng.below(pool.size())]);
    }
    Corpus c = corpus_of(docs);
    CoocTable base = count_cooccurrences(c, 4, 0, 1);
    for (int shards : {2, 3, 7, 17, 100}) {
        CoocTable t = count_cooccurrences(c, 4, 0, shards);
        ASSERT_EQ(t.cells().size(), base.cells().size()) << shards;
        for (const auto& [k, v] : base.cells()) {
            auto it = t.cells().find(k);
            ASSERT_NE(it, t.cells().end());
            EXPECT_EQ(it->second, v) << "shards=" << shards;  // integer, hence bit-identical
        }
    }
}

TEST(CountCooccurrences, MergeRejectsWindowMismatch) {
    CoocTable a(3, 10), b(4, 10);
    EXPECT_THROW(a.merge(b), std::invalid_argument);
    EXPECT_THROW(count_cooccurrences(corpus_of({{"a"}}), 0, 0), std::invalid_argument);
}

TEST(CountCooccurrences, SymmetryHoldsOnRandomCorpora) {
    Rng rng(77);
    const std::vector<std::string> pool = {"a", "b", "c", "d"};
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<std::vector<std::string>> docs(1 + rng.below(3));
        for (auto& doc : docs) {
            std::size_t len = 1 + rng.below(10);
            for (std::size_t i = 0; i < len; ++i) doc.push_back(pool[rng.below(pool.size())]);
        }
        Corpus c = corpus_of(docs);
        CoocTable t = count_cooccurrences(c, 3, 0);
        for (const auto& e : t.entries())
            EXPECT_DOUBLE_EQ(t.weight(e.context, e.focus), e.x);
    }
}

TEST(CountCooccurrences, RepeatedTokenExample) {
    // "a b a", window 2: a-b at distance 1 twice gives 2.0; the a..a pair at
    // distance 2 lands 1/2 in each direction of the same self cell, so 1.0.
    Corpus c = corpus_of({{"a", "b", "a"}});
    CoocTable t = count_cooccurrences(c, 2, 0);
    const int a = c.vocab->to_id("a");
    const int b = c.vocab->to_id("b");
    EXPECT_DOUBLE_EQ(t.weight(a, b), 2.0);
    EXPECT_DOUBLE_EQ(t.weight(b, a), 2.0);
    EXPECT_DOUBLE_EQ(t.weight(a, a), 1.0);
    EXPECT_DOUBLE_EQ(t.weight(b, b), 0.0);
}
