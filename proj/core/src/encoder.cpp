#include "semret/encoder.hpp"

#include "semret/binary_io.hpp"
#include "semret/error.hpp"
#include "semret/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

namespace semret {

namespace {

constexpr std::string_view kModelMagic = "SRMODEL1";
constexpr std::string_view kEmbeddingMagic = "SREMBED1";
constexpr std::uint32_t kModelVersion = 1;
constexpr std::uint32_t kEmbeddingVersion = 1;

double round_to_float(double x) { return static_cast<double>(static_cast<float>(x)); }

} // namespace

void EncoderConfig::validate() const
{
    if (dim < 2) throw Error("encoder dim must be >= 2");
    if (depth < 1) throw Error("encoder depth must be >= 1");
    if (max_len < 1) throw Error("encoder max_len must be >= 1");
    const auto p = resolved_pool_layer();
    if (p < 1 || p > depth)
        throw Error("pool_layer " + std::to_string(p) + " outside 1.." + std::to_string(depth));
}

EncoderModel::EncoderModel(EncoderConfig cfg, Vocabulary vocab)
    : cfg_(cfg), vocab_(std::move(vocab)), layout_{vocab_.size(), cfg.dim, cfg.depth}
{
    cfg_.validate();
    if (cfg_.pool_layer == 0) cfg_.pool_layer = cfg_.depth;
    params_.assign(layout_.total(), 0.0);
    refresh_id();
}

void EncoderModel::refresh_id()
{
    std::uint64_t h = mix_seed(vocab_.hash(), cfg_.dim, cfg_.depth);
    h = mix_seed(h, cfg_.max_len, cfg_.pool_layer);
    std::string_view bytes(reinterpret_cast<const char*>(params_.data()), params_.size() * sizeof(double));
    id_ = fnv1a64(bytes, h);
}

TokenSeq EncoderModel::tokenize(std::string_view text) const
{
    return semret::tokenize(text, vocab_, cfg_.max_len);
}

double dot(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) throw Error("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

ForwardTrace forward(const EncoderModel& model, const TokenSeq& tokens)
{
    if (tokens.empty()) throw Error("encode: empty token sequence");
    const auto& L = model.layout();
    const auto dim = L.dim;
    const auto n = tokens.size();
    const auto pool = model.pool_layer();
    const auto p = model.parameters();
    const double inv_n = 1.0 / static_cast<double>(n);

    ForwardTrace tr;
    tr.tokens = tokens;
    tr.states.resize(pool + 1);
    tr.contexts.resize(pool + 1);

    auto& h0 = tr.states[0];
    h0.resize(n * dim);
    for (std::size_t i = 0; i < n; ++i) {
        if (tokens[i] >= L.vocab)
            throw Error("token index " + std::to_string(tokens[i]) + " outside vocabulary of size "
                        + std::to_string(L.vocab));
        std::memcpy(&h0[i * dim], &p[L.embedding(tokens[i])], dim * sizeof(double));
    }

    // Rows are summed in token-id order: equal tokens carry bit-identical
    // rows, so the mean is exactly independent of the input order.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return tokens[a] < tokens[b]; });

    auto mean_rows = [&](const std::vector<double>& h) {
        std::vector<double> c(dim, 0.0);
        for (const auto i : order)
            for (std::size_t k = 0; k < dim; ++k) c[k] += h[i * dim + k];
        for (auto& x : c) x *= inv_n;
        return c;
    };

    for (std::size_t l = 1; l <= pool; ++l) {
        const auto& prev = tr.states[l - 1];
        tr.contexts[l - 1] = mean_rows(prev);
        const auto& c = tr.contexts[l - 1];
        const double* W = &p[L.w(l)];
        const double* U = &p[L.u(l)];
        const double* b = &p[L.b(l)];

        std::vector<double> shared(dim);
        for (std::size_t o = 0; o < dim; ++o) {
            double s = b[o];
            for (std::size_t k = 0; k < dim; ++k) s += U[o * dim + k] * c[k];
            shared[o] = s;
        }
        auto& h = tr.states[l];
        h.resize(n * dim);
        for (std::size_t i = 0; i < n; ++i) {
            const double* x = &prev[i * dim];
            for (std::size_t o = 0; o < dim; ++o) {
                double s = shared[o];
                const double* w = W + o * dim;
                for (std::size_t k = 0; k < dim; ++k) s += w[k] * x[k];
                h[i * dim + o] = std::tanh(s);
            }
        }
    }
    tr.contexts[pool] = mean_rows(tr.states[pool]);
    tr.output = tr.contexts[pool];
    return tr;
}

void backward(const EncoderModel& model, const ForwardTrace& tr, std::span<const double> grad_output,
              std::span<double> grads)
{
    const auto& L = model.layout();
    const auto dim = L.dim;
    const auto n = tr.tokens.size();
    const auto pool = tr.states.size() - 1;
    const auto p = model.parameters();
    if (grad_output.size() != dim || grads.size() != L.total())
        throw Error("backward: shape mismatch");
    const double inv_n = 1.0 / static_cast<double>(n);

    std::vector<double> dh(n * dim);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < dim; ++k) dh[i * dim + k] = grad_output[k] * inv_n;

    std::vector<double> dz(n * dim), dsum(dim), dprev(n * dim), u_back(dim);
    for (std::size_t l = pool; l >= 1; --l) {
        const auto& h = tr.states[l];
        const auto& prev = tr.states[l - 1];
        const auto& c = tr.contexts[l - 1];
        const double* W = &p[L.w(l)];
        const double* U = &p[L.u(l)];
        double* dW = &grads[L.w(l)];
        double* dU = &grads[L.u(l)];
        double* db = &grads[L.b(l)];

        std::fill(dsum.begin(), dsum.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t o = 0; o < dim; ++o) {
                const double y = h[i * dim + o];
                const double g = dh[i * dim + o] * (1.0 - y * y);
                dz[i * dim + o] = g;
                dsum[o] += g;
            }

        for (std::size_t o = 0; o < dim; ++o) {
            double* dw = dW + o * dim;
            for (std::size_t i = 0; i < n; ++i) {
                const double g = dz[i * dim + o];
                if (g == 0.0) continue;
                const double* x = &prev[i * dim];
                for (std::size_t k = 0; k < dim; ++k) dw[k] += g * x[k];
            }
            double* du = dU + o * dim;
            for (std::size_t k = 0; k < dim; ++k) du[k] += dsum[o] * c[k];
            db[o] += dsum[o];
        }

        // d(prev_i) = W^T dz_i + (1/n) U^T sum_j dz_j
        std::fill(u_back.begin(), u_back.end(), 0.0);
        for (std::size_t o = 0; o < dim; ++o)
            for (std::size_t k = 0; k < dim; ++k) u_back[k] += U[o * dim + k] * dsum[o];
        for (std::size_t i = 0; i < n; ++i) {
            double* d = &dprev[i * dim];
            for (std::size_t k = 0; k < dim; ++k) d[k] = u_back[k] * inv_n;
            for (std::size_t o = 0; o < dim; ++o) {
                const double g = dz[i * dim + o];
                if (g == 0.0) continue;
                const double* w = W + o * dim;
                for (std::size_t k = 0; k < dim; ++k) d[k] += w[k] * g;
            }
        }
        dh.swap(dprev);
    }

    for (std::size_t i = 0; i < n; ++i) {
        double* de = &grads[L.embedding(tr.tokens[i])];
        for (std::size_t k = 0; k < dim; ++k) de[k] += dh[i * dim + k];
    }
}

Embedding encode(const EncoderModel& model, const TokenSeq& tokens)
{
    auto tr = forward(model, tokens);
    return Embedding{std::move(tr.output), model.id(), model.pool_layer()};
}

Embedding encode_text(const EncoderModel& model, std::string_view text)
{
    return encode(model, model.tokenize(text));
}

double score(const EncoderModel& model, const TokenSeq& q_tokens, const TokenSeq& d_tokens)
{
    return dot(encode(model, q_tokens).values, encode(model, d_tokens).values);
}

EncoderModel init_model(const EncoderConfig& cfg, const Vocabulary& vocab)
{
    EncoderModel model(cfg, vocab);
    const auto& L = model.layout();
    auto p = model.parameters();
    Rng rng(mix_seed(cfg.seed, 0xe11c0de));
    for (std::size_t i = 0; i < L.vocab * L.dim; ++i) p[i] = round_to_float(uniform_real(rng, -0.1, 0.1));
    for (std::size_t l = 1; l <= L.depth; ++l) {
        for (std::size_t i = 0; i < 2 * L.dim * L.dim; ++i)
            p[L.w(l) + i] = round_to_float(uniform_real(rng, -0.1, 0.1));
        // biases stay zero
    }
    model.refresh_id();
    return model;
}

void save_model(const EncoderModel& model, const std::filesystem::path& path)
{
    const auto& cfg = model.config();
    BinaryWriter w(path);
    w.magic(kModelMagic);
    w.u32(kModelVersion);
    w.u32(static_cast<std::uint32_t>(cfg.dim));
    w.u32(static_cast<std::uint32_t>(cfg.depth));
    w.u32(static_cast<std::uint32_t>(cfg.max_len));
    w.u32(static_cast<std::uint32_t>(model.pool_layer()));
    w.u64(cfg.seed);
    w.u64(model.vocab().hash());
    w.u32(static_cast<std::uint32_t>(model.vocab().size()));
    for (const auto& t : model.vocab().tokens()) w.str(t);
    w.u64(model.parameter_count());
    w.f32s(to_float(model.parameters()));
    w.finish();
}

EncoderModel load_model(const std::filesystem::path& path)
{
    BinaryReader r(path);
    r.expect_magic(kModelMagic);
    const auto version = r.u32();
    if (version != kModelVersion)
        throw FormatError(path.string() + ": model format version " + std::to_string(version)
                          + " unsupported (expected " + std::to_string(kModelVersion) + ")");
    EncoderConfig cfg;
    cfg.dim = r.u32();
    cfg.depth = r.u32();
    cfg.max_len = r.u32();
    cfg.pool_layer = r.u32();
    cfg.seed = r.u64();
    const auto vocab_hash = r.u64();
    const auto vocab_size = r.u32();
    std::vector<std::string> tokens;
    tokens.reserve(vocab_size);
    for (std::uint32_t i = 0; i < vocab_size; ++i) tokens.push_back(r.str());
    Vocabulary vocab;
    try {
        cfg.validate();
        vocab = Vocabulary::from_tokens(std::move(tokens));
    } catch (const FormatError&) {
        throw;
    } catch (const Error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    if (vocab.hash() != vocab_hash) throw FormatError(path.string() + ": vocabulary hash mismatch");

    EncoderModel model(cfg, std::move(vocab));
    const auto count = r.u64();
    if (count != model.parameter_count())
        throw FormatError(path.string() + ": parameter count " + std::to_string(count)
                          + " does not match header shape");
    std::vector<float> values(count);
    r.f32s(values);
    r.expect_end();
    auto p = model.parameters();
    for (std::size_t i = 0; i < count; ++i) {
        if (!std::isfinite(values[i])) throw FormatError(path.string() + ": non-finite parameter");
        p[i] = values[i];
    }
    model.refresh_id();
    return model;
}

EncoderModel load_model(const std::filesystem::path& path, const Vocabulary& expected)
{
    auto model = load_model(path);
    if (model.vocab().hash() != expected.hash())
        throw FormatError(path.string() + ": model vocabulary hash does not match the expected vocabulary");
    return model;
}

std::vector<float> to_float(std::span<const double> v)
{
    return std::vector<float>(v.begin(), v.end());
}

void EmbeddingTable::append(std::string id, std::span<const float> values)
{
    if (dim == 0 && ids.empty()) dim = values.size();
    if (values.size() != dim) throw Error("embedding dimension mismatch for " + id);
    ids.push_back(std::move(id));
    data.insert(data.end(), values.begin(), values.end());
}

EmbeddingTable embed_documents(const EncoderModel& model, const DocumentStore& docs)
{
    EmbeddingTable table;
    table.dim = model.dim();
    table.model_id = model.id();
    table.pool_layer = model.pool_layer();
    table.ids.reserve(docs.size());
    table.data.reserve(docs.size() * model.dim());
    for (const auto& d : docs.documents()) table.append(d.doc_id, to_float(encode_text(model, d.title).values));
    return table;
}

void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path)
{
    BinaryWriter w(path);
    w.magic(kEmbeddingMagic);
    w.u32(kEmbeddingVersion);
    w.u32(static_cast<std::uint32_t>(table.dim));
    w.u64(table.size());
    w.u64(table.model_id);
    w.u32(static_cast<std::uint32_t>(table.pool_layer));
    for (std::size_t i = 0; i < table.size(); ++i) {
        w.str(table.ids[i]);
        w.f32s(table.row(i));
    }
    w.finish();
}

EmbeddingTable load_embeddings(const std::filesystem::path& path)
{
    BinaryReader r(path);
    r.expect_magic(kEmbeddingMagic);
    const auto version = r.u32();
    if (version != kEmbeddingVersion)
        throw FormatError(path.string() + ": embedding format version " + std::to_string(version) + " unsupported");
    EmbeddingTable t;
    t.dim = r.u32();
    const auto count = r.u64();
    t.model_id = r.u64();
    t.pool_layer = r.u32();
    if (t.dim == 0) throw FormatError(path.string() + ": zero embedding dimension");
    std::vector<float> row(t.dim);
    for (std::uint64_t i = 0; i < count; ++i) {
        auto id = r.str();
        r.f32s(row);
        t.ids.push_back(std::move(id));
        t.data.insert(t.data.end(), row.begin(), row.end());
    }
    r.expect_end();
    return t;
}

} // namespace semret
