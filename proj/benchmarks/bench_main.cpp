#include "semret/corpus.hpp"
#include "semret/encoder.hpp"
#include "semret/kmeans.hpp"
#include "semret/lexical_index.hpp"
#include "semret/rng.hpp"
#include "semret/semantic_index.hpp"
#include "semret/text.hpp"
#include "semret/trainer.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace semret;

namespace {

EmbeddingTable unit_vectors(std::size_t n, std::size_t dim, std::uint64_t seed)
{
    Rng rng(seed);
    EmbeddingTable t;
    t.dim = dim;
    std::vector<float> row(dim);
    for (std::size_t i = 0; i < n; ++i) {
        double norm = 0.0;
        for (auto& x : row) {
            x = static_cast<float>(standard_normal(rng));
            norm += static_cast<double>(x) * x;
        }
        for (auto& x : row) x = static_cast<float>(x / std::sqrt(norm));
        t.append("v" + std::to_string(i), row);
    }
    return t;
}

const SyntheticCorpus& corpus()
{
    static const SyntheticCorpus c = generate_synthetic_corpus({});
    return c;
}

EncoderModel corpus_model(std::size_t dim, std::size_t depth)
{
    std::vector<std::string> texts;
    for (const auto& d : corpus().docs->documents()) texts.push_back(d.title);
    EncoderConfig cfg;
    cfg.dim = dim;
    cfg.depth = depth;
    return init_model(cfg, build_vocab(texts, 1));
}

void BM_Encode(benchmark::State& state)
{
    const auto model = corpus_model(static_cast<std::size_t>(state.range(0)), 2);
    const auto& docs = corpus().docs->documents();
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(encode_text(model, docs[i++ % docs.size()].title));
    }
}
BENCHMARK(BM_Encode)->Arg(16)->Arg(64)->Arg(128);

void BM_TrainEpoch(benchmark::State& state)
{
    const auto base = corpus_model(64, 2);
    TrainConfig cfg;
    cfg.workers = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        auto model = base;
        benchmark::DoNotOptimize(train(model, corpus().judgments, cfg));
    }
}
BENCHMARK(BM_TrainEpoch)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_SearchExact(benchmark::State& state)
{
    const auto table = unit_vectors(static_cast<std::size_t>(state.range(0)), 64, 1);
    const auto index = build_exact(table);
    const auto queries = unit_vectors(64, 64, 2);
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(search_exact(index, queries.row(i++ % queries.size()), 20));
}
BENCHMARK(BM_SearchExact)->Arg(1000)->Arg(10000);

void BM_SearchIvf(benchmark::State& state)
{
    const auto table = unit_vectors(10000, 64, 1);
    const auto index = build_ivf(table, 100, 1);
    const auto queries = unit_vectors(64, 64, 2);
    const auto nprobe = static_cast<std::size_t>(state.range(0));
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(search_ivf(index, queries.row(i++ % queries.size()), 20, nprobe));
}
BENCHMARK(BM_SearchIvf)->Arg(1)->Arg(10)->Arg(25)->Arg(100);

void BM_SearchLexical(benchmark::State& state)
{
    const auto index = build_lexical(*corpus().docs);
    std::vector<std::vector<std::string>> queries;
    for (const auto& g : corpus().judgments.groups()) queries.push_back(split_terms(g.query));
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(search_lexical(index, queries[i++ % queries.size()], 300));
}
BENCHMARK(BM_SearchLexical);

void BM_Kmeans(benchmark::State& state)
{
    const auto table = unit_vectors(2000, 32, 3);
    const std::vector<double> data(table.data.begin(), table.data.end());
    for (auto _ : state)
        benchmark::DoNotOptimize(kmeans(table.ids, data, table.dim, static_cast<std::size_t>(state.range(0)), 25, 1));
}
BENCHMARK(BM_Kmeans)->Arg(25)->Arg(100)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
