#pragma once

#include "semret/corpus.hpp"
#include "semret/encoder.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace semret {

struct TrainConfig {
    double margin = 1.0;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t epochs = 1;
    std::size_t queries_per_batch = 8;
    std::uint64_t seed = 0;
    std::size_t workers = 1;

    void validate() const;
};

/// Index pairs (i, j) with labels[i] > labels[j], enumerated over i < j of
/// the input order and oriented so the higher label comes first.
std::vector<std::pair<std::size_t, std::size_t>> make_pairs(std::span<const int> labels);

/// Mean over informative pairs of max(0, margin - (y_i - y_j)(p_i - p_j)).
/// Zero when every label is equal.
double hinge_loss(std::span<const int> labels, std::span<const double> scores, double margin);

struct PairScore {
    std::string doc_id;
    int label = 0;
    double score = 0.0;
};

double hinge_loss(std::span<const PairScore> group, double margin);

/// A judgment group with its texts already tokenized.
struct TrainingGroup {
    std::string query;
    TokenSeq query_tokens;
    std::vector<TokenSeq> doc_tokens;
    std::vector<int> labels;
};

std::vector<TrainingGroup> prepare_groups(const JudgmentSet& js, const EncoderModel& model);

struct LossAndGradient {
    double loss = 0.0;
    std::vector<double> grads;
};

/// Mean per-query hinge loss of the batch; forward pass only.
double batch_loss(const EncoderModel& model, std::span<const TrainingGroup> batch, double margin);

/// Mean per-query hinge loss and its exact gradient with respect to every
/// model parameter. Per-query gradients are reduced in batch order, so the
/// result does not depend on cfg.workers.
LossAndGradient loss_gradients(const EncoderModel& model, std::span<const TrainingGroup> batch,
                               const TrainConfig& cfg);

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t t = 0;

    AdamState() = default;
    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

/// Bias-corrected Adam update on a raw parameter vector.
void adam_update(std::span<double> params, AdamState& state, std::span<const double> grads,
                 const TrainConfig& cfg);

/// Adam step on the model; parameters are rounded to float32 afterwards.
void adam_step(EncoderModel& model, AdamState& state, std::span<const double> grads, const TrainConfig& cfg);

struct TrainLog {
    std::vector<double> batch_losses;
    std::vector<double> epoch_losses;
    std::size_t steps = 0;
};

/// Epochs over seeded shuffles of the query groups, one Adam step per batch.
TrainLog train(EncoderModel& model, const JudgmentSet& train_set, const TrainConfig& cfg);

/// `step \t loss` lines, steps numbered from 1.
void save_train_log(const TrainLog& log, const std::filesystem::path& path);

} // namespace semret
