#include "semret/error.hpp"
#include "semret/lexical_index.hpp"
#include "semret/rng.hpp"
#include "semret/text.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

using namespace semret;
using namespace semret::testing;
using semret::testing::read_file;
using semret::testing::TempDir;
using semret::testing::write_file;

namespace {

DocumentStore store(const std::vector<std::pair<std::string, std::string>>& docs)
{
    DocumentStore s;
    for (const auto& [id, title] : docs) s.add({id, title});
    return s;
}


} // namespace

TEST(BuildLexical, PostingsAndStatistics)
{
    const auto docs = store({{"b", "apple pie"}, {"a", "apple tart apple"}, {"c", "plum"}});
    const auto idx = build_lexical(docs);
    EXPECT_EQ(idx.doc_ids, (std::vector<std::string>{"a", "b", "c"}));
    const auto* apple = idx.find_postings("apple");
    ASSERT_NE(apple, nullptr);
    EXPECT_EQ(*apple, (std::vector<Posting>{{0, 2}, {1, 1}}));
    EXPECT_EQ(idx.find_postings("banana"), nullptr);
    EXPECT_DOUBLE_EQ(idx.avg_doc_length, (3.0 + 2.0 + 1.0) / 3.0);
}

TEST(BuildLexical, UnknownTermsHaveNoPostingsButCountInLength)
{
    const auto docs = store({{"a", "apple tart"}, {"b", "apple pie"}});
    const std::vector<std::string> texts{"apple pie"};
    const auto idx = build_lexical(docs, build_vocab(texts, 1));
    EXPECT_EQ(idx.find_postings("tart"), nullptr);
    EXPECT_EQ(idx.find_postings(Vocabulary::kUnkToken), nullptr);
    EXPECT_EQ(idx.doc_lengths[0], 2u);
    EXPECT_THROW(build_lexical(DocumentStore{}), Error);
}

TEST(Bm25, SingleDocumentHandValue)
{
    const auto idx = build_lexical(store({{"only", "term"}}));
    const std::vector<std::string> q{"term"};
    // idf = ln(1 + 0.5 / 1.5), tf factor = 1.
    EXPECT_NEAR(bm25(idx, q, "only"), 0.2876820724517809, 1e-12);
    EXPECT_NEAR(bm25(idx, q, "only"), 0.2877, 5e-5);
}

TEST(Bm25, ZeroIffNoOverlap)
{
    Rng rng(2);
    for (int trial = 0; trial < 30; ++trial) {
        const auto docs = random_corpus(rng, 1 + uniform_index(rng, 60), 30);
        const auto idx = build_lexical(docs);
        std::vector<std::string> q;
        for (int i = 0; i < 3; ++i) q.push_back("t" + std::to_string(uniform_index(rng, 40)));
        for (const auto& d : docs.documents()) {
            const auto terms = split_terms(d.title);
            const bool overlap = std::any_of(q.begin(), q.end(), [&](const std::string& t) {
                return std::find(terms.begin(), terms.end(), t) != terms.end();
            });
            EXPECT_EQ(bm25(idx, q, d.doc_id) > 0.0, overlap);
        }
    }
    const auto idx = build_lexical(store({{"a", "x y"}}));
    EXPECT_THROW(bm25(idx, std::vector<std::string>{"x"}, "zz"), Error);
}

TEST(Bm25, MoreOccurrencesAtFixedLengthNeverLowerScore)
{
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        auto docs = random_corpus(rng, 2 + uniform_index(rng, 30), 10);
        const auto& target = docs[uniform_index(rng, docs.size())];
        auto terms = split_terms(target.title);
        const std::string q = terms[uniform_index(rng, terms.size())];
        const auto other = std::find_if(terms.begin(), terms.end(), [&](const std::string& t) { return t != q; });
        if (other == terms.end()) continue;
        const double before = bm25(build_lexical(docs), std::vector<std::string>{q}, target.doc_id);
        *other = q;
        std::string title;
        for (const auto& t : terms) title += t + " ";
        DocumentStore changed;
        for (const auto& d : docs.documents()) changed.add({d.doc_id, d.doc_id == target.doc_id ? title : d.title});
        const double after = bm25(build_lexical(changed), std::vector<std::string>{q}, target.doc_id);
        EXPECT_GE(after, before);
    }
}

TEST(SearchLexical, CandidateSetAndOov)
{
    const auto docs = store({{"a", "red fish"}, {"b", "blue fish"}, {"c", "fish fish"}, {"d", "bird"}});
    const auto idx = build_lexical(docs);
    const auto hits = search_lexical(idx, std::vector<std::string>{"fish"}, 300);
    std::set<std::string> got;
    for (const auto& h : hits) got.insert(h.doc_id);
    EXPECT_EQ(got, (std::set<std::string>{"a", "b", "c"}));
    EXPECT_TRUE(search_lexical(idx, std::vector<std::string>{"cat", "dog"}, 300).empty());
    EXPECT_TRUE(search_lexical(idx, std::vector<std::string>{}, 5).empty());
    EXPECT_THROW(search_lexical(idx, std::vector<std::string>{"fish"}, 0), Error);
}

TEST(SearchLexical, MatchesBruteForceOracle)
{
    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        const auto docs = random_corpus(rng, 1 + uniform_index(rng, 500), 5 + uniform_index(rng, 60));
        const auto idx = build_lexical(docs);
        for (int qn = 0; qn < 3; ++qn) {
            std::vector<std::string> q;
            const std::size_t len = 1 + uniform_index(rng, 4);
            for (std::size_t i = 0; i < len; ++i) q.push_back("t" + std::to_string(uniform_index(rng, 70)));
            const std::size_t k = 1 + uniform_index(rng, 50);
            const auto got = search_lexical(idx, q, k);
            const auto want = brute_force_bm25(docs, q, k);
            ASSERT_EQ(got.size(), want.size()) << "trial " << trial;
            for (std::size_t i = 0; i < got.size(); ++i) {
                ASSERT_EQ(got[i].doc_id, want[i].doc_id) << "trial " << trial << " rank " << i;
                ASSERT_NEAR(got[i].score, want[i].score, 1e-12);
            }
        }
    }
}

TEST(InvertedIndex, DocumentFrequencyPartition)
{
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto docs = random_corpus(rng, 1 + uniform_index(rng, 200), 40);
        const auto idx = build_lexical(docs);
        std::size_t sum_df = 0;
        for (const auto& p : idx.postings) {
            sum_df += p.size();
            for (std::size_t i = 1; i < p.size(); ++i) EXPECT_LT(idx.doc_ids[p[i - 1].doc], idx.doc_ids[p[i].doc]);
        }
        std::size_t sum_distinct = 0;
        for (const auto& d : docs.documents()) {
            const auto t = split_terms(d.title);
            sum_distinct += std::set<std::string>(t.begin(), t.end()).size();
        }
        EXPECT_EQ(sum_df, sum_distinct);
    }
}

TEST(LexicalFile, RoundTripAndCorruption)
{
    TempDir dir;
    Rng rng(6);
    const auto docs = random_corpus(rng, 100, 30);
    const auto idx = build_lexical(docs, Bm25Params{1.5, 0.6});
    save_lexical(idx, dir / "l.bin");
    const auto back = load_lexical(dir / "l.bin");
    EXPECT_EQ(back.doc_ids, idx.doc_ids);
    EXPECT_EQ(back.terms, idx.terms);
    EXPECT_EQ(back.postings, idx.postings);
    EXPECT_EQ(back.params.k1, 1.5);
    const std::vector<std::string> q{"t1", "t2", "t3"};
    EXPECT_EQ(search_lexical(back, q, 20), search_lexical(idx, q, 20));

    const auto bytes = read_file(dir / "l.bin");
    auto magic = bytes;
    magic[0] = 'Z';
    write_file(dir / "m.bin", magic);
    EXPECT_THROW(load_lexical(dir / "m.bin"), FormatError);
    write_file(dir / "t.bin", bytes.substr(0, bytes.size() - 5));
    EXPECT_THROW(load_lexical(dir / "t.bin"), FormatError);
}
