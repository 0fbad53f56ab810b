#pragma once

#include "semret/corpus.hpp"
#include "semret/encoder.hpp"
#include "semret/eval.hpp"
#include "semret/key_value.hpp"
#include "semret/sampler.hpp"
#include "semret/trainer.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace semret {

// Typed views over key=value files. Absent keys keep the given defaults.
EncoderConfig encoder_config_from(const KeyValueConfig& kv, EncoderConfig base = {});
TrainConfig train_config_from(const KeyValueConfig& kv, TrainConfig base = {});
SamplerConfig sampler_config_from(const KeyValueConfig& kv, SamplerConfig base = {});
SyntheticCorpusConfig corpus_config_from(const KeyValueConfig& kv, SyntheticCorpusConfig base = {});

/// Arm names understood by run_two_stage.
inline constexpr std::string_view kArmHuman = "HM";
inline constexpr std::string_view kArmGlobal = "HM+NEG_global";
inline constexpr std::string_view kArmCluster = "HM+NEG_cluster";
inline constexpr std::string_view kArmFull = "HM+NEG_global+NEG_cluster";

struct ExperimentSpec {
    SyntheticCorpusConfig corpus;
    double test_fraction = 0.2;
    std::size_t vocab_min_freq = 1;
    EncoderConfig encoder;
    TrainConfig train;
    SamplerConfig sampler;
    std::vector<std::string> arms{std::string(kArmHuman), std::string(kArmGlobal), std::string(kArmFull)};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    /// Stage-2 arms start from the stage-1 model instead of the base initialization.
    bool continue_from_m1 = false;
    bool evaluate_recall = true;
    RetrievalEvalConfig retrieval;
    std::vector<std::size_t> ndcg_at{1, 3, 5};
    bool pool_sweep = false;

    void validate() const;
};

ExperimentSpec experiment_spec_from(const KeyValueConfig& kv);
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

struct ArmResult {
    std::string arm;
    NdcgRow ndcg;
    RecallReport recall;
    std::size_t train_judgments = 0;
    TrainLog log;
};

struct SeedRun {
    std::uint64_t seed = 0;
    std::vector<ArmResult> arms;
    std::vector<QueryAugmentation> augmentation;
    std::size_t human_judgments = 0;
    std::size_t augmented_judgments = 0;

    const ArmResult& arm(std::string_view name) const;
};

struct TwoStageReport {
    std::vector<SeedRun> runs;

    /// Mean over seeds of an arm's NDCG@n.
    double mean_ndcg(std::string_view arm, std::size_t n) const;
};

/// Everything one seed needs, built once and shared by the arms.
struct PreparedRun {
    SyntheticCorpus corpus;
    JudgmentSet train;
    JudgmentSet test;
    Vocabulary vocab;
    EncoderModel base;
};

PreparedRun prepare_run(const ExperimentSpec& spec, std::uint64_t seed);

/// M1 = train(base, D); D1 = augment(D, M1); stage-2 arms retrain on
/// subsets of D1 from the base model. Evaluates every requested arm.
TwoStageReport run_two_stage(const ExperimentSpec& spec);

struct PoolLayerRow {
    std::uint64_t seed = 0;
    std::size_t pool_layer = 0;
    double ndcg_at_3 = 0.0;
};

/// One model per pool layer 1..depth, same seed and data, NDCG@3 on the
/// held-out split. No ordering between layers is implied.
std::vector<PoolLayerRow> run_pool_layer_sweep(const ExperimentSpec& spec);

/// summary.tsv plus ndcg_<arm>.tsv and recall_<arm>.tsv under `dir`.
void write_two_stage_reports(const TwoStageReport& report, const std::filesystem::path& dir);
void write_pool_sweep(const std::vector<PoolLayerRow>& rows, const std::filesystem::path& path);

} // namespace semret
