#pragma once

#include "semret/corpus.hpp"
#include "semret/text.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace semret {

struct EncoderConfig {
    std::size_t dim = 64;
    std::size_t depth = 2;
    std::size_t max_len = 32;
    /// Layer whose token states are mean-pooled, 1..depth. 0 selects the last layer.
    std::size_t pool_layer = 0;
    std::uint64_t seed = 0;

    std::size_t resolved_pool_layer() const { return pool_layer == 0 ? depth : pool_layer; }
    void validate() const;
};

/// Offsets of each parameter block inside the flat parameter vector. The
/// order is also the on-disk order: embedding table (V x dim, row major),
/// then for every layer W (dim x dim, row = output unit), U (same) and b.
struct ParameterLayout {
    std::size_t vocab = 0;
    std::size_t dim = 0;
    std::size_t depth = 0;

    std::size_t embedding(TokenId t) const { return static_cast<std::size_t>(t) * dim; }
    std::size_t layer_base(std::size_t l) const { return vocab * dim + (l - 1) * layer_size(); }
    std::size_t w(std::size_t l) const { return layer_base(l); }
    std::size_t u(std::size_t l) const { return layer_base(l) + dim * dim; }
    std::size_t b(std::size_t l) const { return layer_base(l) + 2 * dim * dim; }
    std::size_t layer_size() const { return 2 * dim * dim + dim; }
    std::size_t total() const { return vocab * dim + depth * layer_size(); }
};

/// Mean-context mixing encoder:
///   h0_i = E[t_i]
///   h^l_i = tanh(W^l h^{l-1}_i + U^l mean_j h^{l-1}_j + b^l)
///   output = mean_i h^{pool}_i
/// Parameters are held in double precision; values produced by init, load
/// and the optimizer are always exactly representable as float32.
class EncoderModel {
public:
    EncoderModel(EncoderConfig cfg, Vocabulary vocab);

    const EncoderConfig& config() const { return cfg_; }
    const Vocabulary& vocab() const { return vocab_; }
    const ParameterLayout& layout() const { return layout_; }
    std::size_t dim() const { return cfg_.dim; }
    std::size_t pool_layer() const { return cfg_.resolved_pool_layer(); }

    std::span<double> parameters() { return params_; }
    std::span<const double> parameters() const { return params_; }
    std::size_t parameter_count() const { return params_.size(); }

    /// Fingerprint of config, vocabulary and parameters; refreshed by
    /// init, load and train.
    std::uint64_t id() const { return id_; }
    void refresh_id();

    TokenSeq tokenize(std::string_view text) const;

private:
    EncoderConfig cfg_;
    Vocabulary vocab_;
    ParameterLayout layout_;
    std::vector<double> params_;
    std::uint64_t id_ = 0;
};

struct Embedding {
    std::vector<double> values;
    std::uint64_t model_id = 0;
    std::size_t pool_layer = 0;

    std::size_t dim() const { return values.size(); }
};

/// Per-token activations kept for the backward pass.
struct ForwardTrace {
    TokenSeq tokens;
    /// states[l] holds n x dim activations of layer l (l = 0 is the embedding lookup).
    std::vector<std::vector<double>> states;
    /// contexts[l] = mean over tokens of states[l].
    std::vector<std::vector<double>> contexts;
    std::vector<double> output;
};

ForwardTrace forward(const EncoderModel& model, const TokenSeq& tokens);

/// Accumulates d(loss)/d(params) into `grads` given d(loss)/d(output).
void backward(const EncoderModel& model, const ForwardTrace& trace, std::span<const double> grad_output,
              std::span<double> grads);

Embedding encode(const EncoderModel& model, const TokenSeq& tokens);
Embedding encode_text(const EncoderModel& model, std::string_view text);

double dot(std::span<const double> a, std::span<const double> b);

/// Dot product of the two pooled embeddings.
double score(const EncoderModel& model, const TokenSeq& q_tokens, const TokenSeq& d_tokens);

/// Uniform [-0.1, 0.1] embeddings and weights, zero biases.
EncoderModel init_model(const EncoderConfig& cfg, const Vocabulary& vocab);

/// Binary model file. Layout (little endian):
///   "SRMODEL1" | u32 version | u32 dim | u32 depth | u32 max_len | u32 pool_layer
///   | u64 seed | u64 vocab_hash | u32 vocab_size | vocab tokens (u32 len + bytes)
///   | u64 param_count | param_count x f32 in ParameterLayout order
void save_model(const EncoderModel& model, const std::filesystem::path& path);
EncoderModel load_model(const std::filesystem::path& path);
/// As above, additionally rejecting a model built over a different vocabulary.
EncoderModel load_model(const std::filesystem::path& path, const Vocabulary& expected);

/// Row-major float32 document embeddings with their ids.
struct EmbeddingTable {
    std::size_t dim = 0;
    std::vector<std::string> ids;
    std::vector<float> data;
    std::uint64_t model_id = 0;
    std::size_t pool_layer = 0;

    std::size_t size() const { return ids.size(); }
    std::span<const float> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
    void append(std::string id, std::span<const float> values);
};

std::vector<float> to_float(std::span<const double> v);

EmbeddingTable embed_documents(const EncoderModel& model, const DocumentStore& docs);

/// "SREMBED1" | u32 version | u32 dim | u64 count | u64 model_id | u32 pool_layer
/// | count x (u32 id_len + id bytes + dim x f32)
void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path);
EmbeddingTable load_embeddings(const std::filesystem::path& path);

} // namespace semret
