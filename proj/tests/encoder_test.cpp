#include "semret/encoder.hpp"
#include "semret/error.hpp"
#include "semret/rng.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace semret;
using semret::testing::read_file;
using semret::testing::TempDir;
using semret::testing::write_file;

namespace {

Vocabulary small_vocab()
{
    const std::vector<std::string> texts{"alpha beta gamma delta", "beta gamma epsilon", "zeta eta theta iota"};
    return build_vocab(texts, 1);
}

EncoderModel random_model(std::size_t dim, std::size_t depth, std::uint64_t seed, std::size_t pool = 0)
{
    EncoderConfig cfg;
    cfg.dim = dim;
    cfg.depth = depth;
    cfg.pool_layer = pool;
    cfg.seed = seed;
    return init_model(cfg, small_vocab());
}

// Straightforward re-implementation of the mixing stack.
std::vector<double> oracle_encode(const EncoderModel& m, const TokenSeq& tokens)
{
    const auto& L = m.layout();
    const auto p = m.parameters();
    const std::size_t d = m.dim();
    std::vector<std::vector<double>> h;
    for (auto t : tokens) h.emplace_back(p.begin() + L.embedding(t), p.begin() + L.embedding(t) + d);
    for (std::size_t l = 1; l <= m.pool_layer(); ++l) {
        std::vector<double> c(d, 0.0);
        for (const auto& row : h)
            for (std::size_t k = 0; k < d; ++k) c[k] += row[k] / static_cast<double>(h.size());
        std::vector<std::vector<double>> next;
        for (const auto& row : h) {
            std::vector<double> out(d);
            for (std::size_t i = 0; i < d; ++i) {
                double z = p[L.b(l) + i];
                for (std::size_t k = 0; k < d; ++k)
                    z += p[L.w(l) + i * d + k] * row[k] + p[L.u(l) + i * d + k] * c[k];
                out[i] = std::tanh(z);
            }
            next.push_back(out);
        }
        h = std::move(next);
    }
    std::vector<double> mean(d, 0.0);
    for (const auto& row : h)
        for (std::size_t k = 0; k < d; ++k) mean[k] += row[k] / static_cast<double>(h.size());
    return mean;
}

} // namespace

TEST(EncoderConfig, Validation)
{
    EncoderConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    EXPECT_EQ(cfg.resolved_pool_layer(), 2u);
    cfg.pool_layer = 3;
    EXPECT_THROW(cfg.validate(), Error);
    cfg = {};
    cfg.depth = 0;
    EXPECT_THROW(cfg.validate(), Error);
    cfg = {};
    cfg.dim = 1;
    EXPECT_THROW(cfg.validate(), Error);
    cfg = {};
    cfg.max_len = 0;
    EXPECT_THROW(cfg.validate(), Error);
}

TEST(InitModel, DeterministicCountAndRange)
{
    const std::vector<std::string> texts = [] {
        std::vector<std::string> t;
        for (int i = 0; i < 999; ++i) t.push_back("w" + std::to_string(i));
        return t;
    }();
    const auto vocab = build_vocab(texts, 1);
    ASSERT_EQ(vocab.size(), 1000u);
    EncoderConfig cfg;
    cfg.seed = 4;
    const auto a = init_model(cfg, vocab);
    const auto b = init_model(cfg, vocab);
    EXPECT_EQ(a.parameter_count(), 1000u * 64 + 2 * (2 * 64 * 64 + 64));
    EXPECT_TRUE(std::equal(a.parameters().begin(), a.parameters().end(), b.parameters().begin()));
    EXPECT_EQ(a.id(), b.id());
    for (double x : a.parameters()) {
        ASSERT_GE(x, -0.1);
        ASSERT_LE(x, 0.1);
        ASSERT_EQ(static_cast<double>(static_cast<float>(x)), x);
    }
    const auto& L = a.layout();
    for (std::size_t l = 1; l <= 2; ++l)
        for (std::size_t i = 0; i < 64; ++i) EXPECT_EQ(a.parameters()[L.b(l) + i], 0.0);
    cfg.seed = 5;
    EXPECT_NE(init_model(cfg, vocab).id(), a.id());
}

TEST(Encode, MatchesOracleOnRandomModels)
{
    Rng rng(21);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t depth = 1 + uniform_index(rng, 3);
        auto m = random_model(2 + uniform_index(rng, 7), depth, trial, 1 + uniform_index(rng, depth));
        for (auto& x : m.parameters()) x = uniform_real(rng, -1.0, 1.0);
        TokenSeq toks;
        const std::size_t n = 1 + uniform_index(rng, 6);
        for (std::size_t i = 0; i < n; ++i) toks.push_back(static_cast<TokenId>(uniform_index(rng, m.vocab().size())));
        const auto got = encode(m, toks).values;
        const auto want = oracle_encode(m, toks);
        ASSERT_EQ(got.size(), want.size());
        for (std::size_t k = 0; k < got.size(); ++k) EXPECT_NEAR(got[k], want[k], 1e-12);
    }
}

TEST(Encode, SingleTokenDepthOne)
{
    auto m = random_model(3, 1, 9);
    Rng rng(1);
    for (auto& x : m.parameters()) x = uniform_real(rng, -1.0, 1.0);
    const TokenId t = 2;
    const auto& L = m.layout();
    const auto p = m.parameters();
    const auto out = encode(m, {t}).values;
    for (std::size_t i = 0; i < 3; ++i) {
        double z = p[L.b(1) + i];
        for (std::size_t k = 0; k < 3; ++k) z += (p[L.w(1) + i * 3 + k] + p[L.u(1) + i * 3 + k]) * p[L.embedding(t) + k];
        EXPECT_NEAR(out[i], std::tanh(z), 1e-14);
    }
}

TEST(Encode, PermutationInvariantExactly)
{
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const auto m = random_model(8, 2, trial);
        TokenSeq toks;
        for (int i = 0; i < 6; ++i) toks.push_back(static_cast<TokenId>(uniform_index(rng, m.vocab().size())));
        const auto a = encode(m, toks).values;
        std::sort(toks.begin(), toks.end());
        do {
            ASSERT_EQ(encode(m, toks).values, a);
        } while (std::next_permutation(toks.begin(), toks.begin() + 3));
        std::reverse(toks.begin(), toks.end());
        EXPECT_EQ(encode(m, toks).values, a);
    }
}

TEST(Encode, ZeroParametersGiveZeroVectorAndScore)
{
    auto m = random_model(5, 2, 1);
    std::fill(m.parameters().begin(), m.parameters().end(), 0.0);
    const auto e = encode_text(m, "alpha beta");
    for (double x : e.values) EXPECT_EQ(x, 0.0);
    EXPECT_EQ(score(m, m.tokenize("alpha"), m.tokenize("gamma delta")), 0.0);
}

TEST(Encode, TagsModelAndPoolLayerAndRejectsBadTokens)
{
    const auto m = random_model(4, 2, 3, 1);
    const auto e = encode_text(m, "alpha");
    EXPECT_EQ(e.dim(), 4u);
    EXPECT_EQ(e.model_id, m.id());
    EXPECT_EQ(e.pool_layer, 1u);
    EXPECT_THROW(encode(m, {static_cast<TokenId>(m.vocab().size())}), Error);
    EXPECT_THROW(encode(m, {}), Error);
}

TEST(Score, SymmetricAndSelfNonNegative)
{
    Rng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        const auto m = random_model(6, 2, trial);
        auto draw = [&] {
            TokenSeq t;
            const std::size_t n = 1 + uniform_index(rng, 5);
            for (std::size_t i = 0; i < n; ++i) t.push_back(static_cast<TokenId>(uniform_index(rng, m.vocab().size())));
            return t;
        };
        const auto q = draw(), d = draw();
        EXPECT_EQ(score(m, q, d), score(m, d, q));
        EXPECT_GE(score(m, q, q), 0.0);
        const auto eq = encode(m, q).values;
        EXPECT_DOUBLE_EQ(score(m, q, q), dot(eq, eq));
    }
}

TEST(Encode, PoolLayerIgnoresDeeperLayers)
{
    auto m = random_model(6, 3, 5, 1);
    const auto toks = m.tokenize("alpha beta gamma");
    const auto before = encode(m, toks).values;
    const auto& L = m.layout();
    for (std::size_t i = L.layer_base(2); i < m.parameter_count(); ++i) m.parameters()[i] += 0.5;
    EXPECT_EQ(encode(m, toks).values, before);
    m.parameters()[L.w(1)] += 0.5;
    EXPECT_NE(encode(m, toks).values, before);
}

TEST(Backward, MatchesFiniteDifferencesOfLinearFunctional)
{
    Rng rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        auto m = random_model(4, 1 + trial % 2, trial);
        for (auto& x : m.parameters()) x = uniform_real(rng, -0.8, 0.8);
        const auto toks = m.tokenize("alpha beta beta epsilon");
        std::vector<double> g(4);
        for (auto& x : g) x = uniform_real(rng, -1.0, 1.0);
        std::vector<double> grads(m.parameter_count(), 0.0);
        backward(m, forward(m, toks), g, grads);
        const double h = 1e-5;
        for (std::size_t i = 0; i < m.parameter_count(); ++i) {
            const double orig = m.parameters()[i];
            m.parameters()[i] = orig + h;
            const double up = dot(encode(m, toks).values, g);
            m.parameters()[i] = orig - h;
            const double down = dot(encode(m, toks).values, g);
            m.parameters()[i] = orig;
            EXPECT_NEAR(grads[i], (up - down) / (2 * h), 1e-8) << "param " << i;
        }
    }
}

TEST(ModelFile, RoundTripIsBitExact)
{
    TempDir dir;
    const auto m = random_model(8, 2, 7);
    save_model(m, dir / "m.bin");
    const auto loaded = load_model(dir / "m.bin");
    EXPECT_TRUE(std::equal(m.parameters().begin(), m.parameters().end(), loaded.parameters().begin(),
                           loaded.parameters().end()));
    EXPECT_EQ(loaded.vocab(), m.vocab());
    EXPECT_EQ(loaded.config().dim, 8u);
    EXPECT_EQ(loaded.id(), m.id());
    EXPECT_EQ(encode_text(loaded, "alpha gamma").values, encode_text(m, "alpha gamma").values);
    EXPECT_NO_THROW(load_model(dir / "m.bin", m.vocab()));
}

TEST(ModelFile, CorruptionIsRejected)
{
    TempDir dir;
    const auto m = random_model(4, 1, 1);
    save_model(m, dir / "m.bin");
    const auto bytes = read_file(dir / "m.bin");

    write_file(dir / "trunc.bin", bytes.substr(0, bytes.size() - 3));
    EXPECT_THROW(load_model(dir / "trunc.bin"), FormatError);

    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    write_file(dir / "magic.bin", bad_magic);
    EXPECT_THROW(load_model(dir / "magic.bin"), FormatError);

    auto bad_version = bytes;
    bad_version[8] = 9;
    write_file(dir / "version.bin", bad_version);
    EXPECT_THROW(load_model(dir / "version.bin"), FormatError);

    write_file(dir / "extra.bin", bytes + "xx");
    EXPECT_THROW(load_model(dir / "extra.bin"), FormatError);

    const std::vector<std::string> other_texts{"completely different words"};
    EXPECT_THROW(load_model(dir / "m.bin", build_vocab(other_texts, 1)), FormatError);
}

TEST(EmbeddingFile, RoundTrip)
{
    TempDir dir;
    const auto m = random_model(5, 2, 2);
    DocumentStore docs;
    docs.add({"a", "alpha beta"});
    docs.add({"b", "gamma"});
    docs.add({"c", "unknown words here"});
    const auto table = embed_documents(m, docs);
    ASSERT_EQ(table.size(), 3u);
    const auto direct = to_float(encode_text(m, "gamma").values);
    EXPECT_TRUE(std::equal(direct.begin(), direct.end(), table.row(1).begin()));
    save_embeddings(table, dir / "e.bin");
    const auto back = load_embeddings(dir / "e.bin");
    EXPECT_EQ(back.ids, table.ids);
    EXPECT_EQ(back.data, table.data);
    EXPECT_EQ(back.dim, 5u);
    EXPECT_EQ(back.model_id, m.id());
}
