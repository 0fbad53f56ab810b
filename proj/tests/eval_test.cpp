#include "semret/error.hpp"
#include "semret/eval.hpp"
#include "semret/rng.hpp"
#include "semret/trainer.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace semret;
using semret::testing::read_file;
using semret::testing::TempDir;

TEST(Recall, SetArithmetic)
{
    const IdSet rel{"d1", "d2", "d3", "d4"};
    EXPECT_EQ(*recall({"d1", "d3", "d9"}, rel), 0.5);
    EXPECT_EQ(*recall({"d1", "d2", "d3", "d4", "d5"}, rel), 1.0);
    EXPECT_EQ(*recall({"d7"}, rel), 0.0);
    EXPECT_FALSE(recall({"d1"}, {}).has_value());
}

TEST(Recall, MonotoneInRetrievedSet)
{
    Rng rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        IdSet rel, ret;
        for (int i = 0; i < 1 + static_cast<int>(uniform_index(rng, 10)); ++i)
            rel.insert("d" + std::to_string(uniform_index(rng, 20)));
        double prev = 0.0;
        for (int step = 0; step < 15; ++step) {
            ret.insert("d" + std::to_string(uniform_index(rng, 20)));
            const double r = *recall(ret, rel);
            EXPECT_GE(r, prev);
            EXPECT_LE(r, 1.0);
            prev = r;
        }
    }
}

TEST(Dcg, HandEvaluatedValues)
{
    const std::vector<int> one{2};
    EXPECT_DOUBLE_EQ(dcg(one, 1), 4.0);
    const std::vector<int> three{2, 0, 1};
    EXPECT_NEAR(dcg(three, 3), 4.0 + 1.0 / std::log2(3.0) + 2.0 / 2.0, 1e-12);
    EXPECT_NEAR(dcg(three, 3), 5.63093, 1e-5);
    EXPECT_EQ(dcg(std::vector<int>{}, 5), 0.0);
    EXPECT_NEAR(dcg(three, 3, Gain::ExponentialMinusOne), 3.0 + 0.0 + 1.0 / 2.0, 1e-12);
    EXPECT_DOUBLE_EQ(dcg(three, 1), 4.0);
}

TEST(Ndcg, HandEvaluatedValues)
{
    const std::vector<int> ranked{2, 0, 1};
    const std::vector<int> ideal{2, 1, 0};
    EXPECT_NEAR(ndcg(ranked, ideal, 3), 5.63093 / 5.76186, 1e-5);
    EXPECT_NEAR(ndcg(ranked, 3), 0.97727, 1e-5);
    EXPECT_EQ(ndcg(ideal, 3), 1.0);
    const std::vector<int> zeros{0, 0, 0, 0};
    EXPECT_EQ(ndcg(zeros, 4), 1.0);
    const std::vector<int> ones{1, 1};
    EXPECT_EQ(ndcg(ones, 2), 1.0);
    EXPECT_EQ(ndcg(zeros, 4, Gain::ExponentialMinusOne), 1.0);
    const std::vector<int> wrong{2, 2, 0};
    EXPECT_THROW(ndcg(ranked, wrong, 3), Error);
}

TEST(Ndcg, BoundedSortedIsOneAndAdjacentFixesNeverHurt)
{
    Rng rng(2);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<int> labels(1 + uniform_index(rng, 12));
        for (auto& l : labels) l = static_cast<int>(uniform_index(rng, 3));
        const std::size_t n = 1 + uniform_index(rng, 12);
        const double v = ndcg(labels, n);
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0 + 1e-12);
        for (std::size_t i = 0; i + 1 < labels.size(); ++i) {
            if (labels[i] >= labels[i + 1]) continue;
            auto swapped = labels;
            std::swap(swapped[i], swapped[i + 1]);
            EXPECT_GE(ndcg(swapped, n), v - 1e-12);
        }
        auto sorted = labels;
        std::sort(sorted.rbegin(), sorted.rend());
        EXPECT_EQ(ndcg(sorted, n), 1.0);
    }
}

namespace {

JudgmentSet graded_set()
{
    auto docs = std::make_shared<DocumentStore>();
    for (int i = 0; i < 10; ++i) docs->add({"d" + std::to_string(i), "t" + std::to_string(i)});
    JudgmentSet js(docs);
    Rng rng(3);
    for (int q = 0; q < 6; ++q)
        for (int i = 0; i < 6; ++i)
            js.add({"q" + std::to_string(q), "d" + std::to_string((q + i) % 10), static_cast<int>(uniform_index(rng, 3))});
    return js;
}

} // namespace

TEST(EvaluateRanking, OracleScorerIsPerfect)
{
    const auto js = graded_set();
    auto label_of = [&](const std::string& q, const std::string& d) {
        for (const auto& j : js.find(q)->judgments)
            if (j.doc_id == d) return static_cast<double>(j.relevance);
        return -1.0;
    };
    const std::vector<std::size_t> ns{1, 3, 5};
    const auto row = evaluate_ranking(js, label_of, ns, "oracle");
    EXPECT_EQ(row.queries, 6u);
    for (auto n : ns) EXPECT_EQ(row.at.at(n), 1.0);
    const auto inverse = evaluate_ranking(js, [&](const std::string& q, const std::string& d) { return -label_of(q, d); }, ns);
    EXPECT_LT(inverse.at.at(1), 1.0);
}

TEST(EvaluateRanking, TiesBrokenByDocIdAndTinyGroupsRejected)
{
    auto docs = std::make_shared<DocumentStore>();
    docs->add({"a", "x"});
    docs->add({"b", "y"});
    JudgmentSet js(docs);
    js.add({"q", "b", 2});
    js.add({"q", "a", 0});
    const std::vector<std::size_t> ns{1};
    // Constant scores: doc "a" (label 0) ranks first.
    const auto row = evaluate_ranking(js, [](const std::string&, const std::string&) { return 0.0; }, ns);
    EXPECT_NEAR(row.at.at(1), 1.0 / 4.0, 1e-12);
    JudgmentSet tiny(docs);
    tiny.add({"q", "a", 1});
    EXPECT_THROW(evaluate_ranking(tiny, [](const std::string&, const std::string&) { return 0.0; }, ns), Error);
}

TEST(Reports, TsvLayout)
{
    TempDir dir;
    RecallReport r;
    r.lexical = {0.5, 5, 10, {}};
    r.semantic = {0.25, 2, 10, {}};
    r.hybrid = {0.75, 7, 10, {}};
    r.queries = {"a", "b"};
    r.skipped = 1;
    write_recall_report(r, dir / "r.tsv");
    const auto text = read_file(dir / "r.tsv");
    EXPECT_EQ(text.substr(0, text.find('\n')), "arm\tqueries\tskipped\trecall_num\trelevant\trecall_rate");
    EXPECT_NE(text.find("HYBRID\t2\t1\t7\t10\t0.75"), std::string::npos) << text;

    NdcgRow row{"m", {{1, 0.5}, {3, 0.75}}, 4};
    write_ndcg_report({&row, 1}, dir / "n.tsv");
    const auto n = read_file(dir / "n.tsv");
    EXPECT_EQ(n.substr(0, n.find('\n')), "model\tqueries\tndcg@1\tndcg@3");
    EXPECT_NE(n.find("m\t4\t0.5"), std::string::npos) << n;
}

namespace {

struct RetrievalWorld {
    SyntheticCorpus corpus;
    std::shared_ptr<const DocumentStore> docs;
    std::shared_ptr<const EncoderModel> model;
    std::shared_ptr<const InvertedIndex> lexical;

    RetrievalWorld(double paraphrase_rate, std::uint64_t seed)
        : corpus(generate_synthetic_corpus([&] {
              SyntheticCorpusConfig cc;
              cc.paraphrase_rate = paraphrase_rate;
              cc.seed = seed;
              cc.n_queries = 250;
              return cc;
          }()))
    {
        docs = corpus.docs;
        std::vector<std::string> texts;
        for (const auto& d : docs->documents()) texts.push_back(d.title);
        for (const auto& g : corpus.judgments.groups()) texts.push_back(g.query);
        EncoderConfig ec;
        ec.seed = seed;
        model = std::make_shared<const EncoderModel>(init_model(ec, build_vocab(texts, 1)));
        lexical = std::make_shared<const InvertedIndex>(build_lexical(*docs));
    }

    SearchEngine engine(std::shared_ptr<const EncoderModel> m) const
    {
        return SearchEngine(docs, m, std::make_shared<const SemanticIndex>(build_exact(embed_documents(*m, *docs))),
                            lexical);
    }
};

} // namespace

namespace {

/// Mean and standard deviation of the mean per-query recall when k of N
/// documents are drawn uniformly: |Ret ∩ Rel| is hypergeometric.
std::pair<double, double> hypergeometric_recall(const JudgmentSet& js, const std::vector<std::string>& queries,
                                                std::size_t k, std::size_t n_docs)
{
    const double N = static_cast<double>(n_docs);
    const double p = static_cast<double>(k) / N;
    double var = 0.0;
    for (const auto& q : queries) {
        double R = 0;
        for (const auto& j : js.find(q)->judgments) R += j.relevance > 0;
        var += p * (1 - p) * (N - R) / ((N - 1) * R);
    }
    const double Q = static_cast<double>(queries.size());
    return {p, std::sqrt(var) / Q};
}

} // namespace

TEST(EvaluateRetrieval, ContentBlindSemanticArmMatchesHypergeometricBaseline)
{
    RetrievalWorld w(0.5, 7);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        EmbeddingTable table;
        table.dim = w.model->config().dim;
        Rng rng(seed);
        for (const auto& d : w.docs->documents()) {
            table.ids.push_back(d.doc_id);
            for (std::size_t c = 0; c < table.dim; ++c) table.data.push_back(static_cast<float>(standard_normal(rng)));
        }
        const SearchEngine engine(w.docs, w.model, std::make_shared<const SemanticIndex>(build_exact(table)), w.lexical);
        const auto report = evaluate_retrieval(w.corpus.judgments, engine);
        const auto [mean, sd] = hypergeometric_recall(w.corpus.judgments, report.queries, 20, w.docs->size());
        EXPECT_NEAR(report.semantic.mean_recall, mean, 3 * sd) << "seed " << seed;
    }
}

TEST(EvaluateRetrieval, RandomInitEncoderStillSeesTokenOverlap)
{
    // Shared tokens share embedding rows, so an untrained encoder ranks
    // overlapping titles higher than a uniform draw would.
    RetrievalWorld w(0.5, 7);
    const auto report = evaluate_retrieval(w.corpus.judgments, w.engine(w.model));
    const auto [mean, sd] = hypergeometric_recall(w.corpus.judgments, report.queries, 20, w.docs->size());
    EXPECT_GT(report.semantic.mean_recall, mean + 3 * sd);
}

TEST(EvaluateRetrieval, HybridDominatesPerQueryAndCountsAddUp)
{
    RetrievalWorld w(0.5, 3);
    const auto report = evaluate_retrieval(w.corpus.judgments, w.engine(w.model));
    ASSERT_EQ(report.queries.size() + report.skipped, w.corpus.judgments.query_count());
    ASSERT_EQ(report.hybrid.per_query.size(), report.queries.size());
    for (std::size_t i = 0; i < report.queries.size(); ++i) {
        EXPECT_GE(report.hybrid.per_query[i], report.lexical.per_query[i]);
        EXPECT_GE(report.hybrid.per_query[i], report.semantic.per_query[i]);
    }
    EXPECT_EQ(report.lexical.relevant_total, report.hybrid.relevant_total);
    EXPECT_GE(report.hybrid.recalled, report.lexical.recalled);
}

TEST(EvaluateRanking, TrainedBeatsUntrainedInMostSeeds)
{
    int wins = 0;
    const std::vector<std::size_t> ns{3};
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        RetrievalWorld w(0.5, seed);
        const auto [train_set, test_set] = split_by_query(w.corpus.judgments, 0.2, seed);
        auto trained = *w.model;
        TrainConfig tc;
        tc.epochs = 20;
        tc.learning_rate = 5e-3;
        tc.seed = seed;
        train(trained, train_set, tc);
        const double before = evaluate_ranking(test_set, *w.model, ns).at.at(3);
        const double after = evaluate_ranking(test_set, trained, ns).at.at(3);
        wins += after > before;
    }
    EXPECT_GE(wins, 4);
}
