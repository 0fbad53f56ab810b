#pragma once

#include "semret/corpus.hpp"
#include "semret/encoder.hpp"
#include "semret/retrieval.hpp"

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

namespace semret {

using IdSet = std::unordered_set<std::string>;

/// |retrieved ∩ relevant| / |relevant|; nullopt when relevant is empty.
std::optional<double> recall(const IdSet& retrieved, const IdSet& relevant);

enum class Gain {
    /// 2^label: label-0 items still contribute a gain of 1.
    Exponential,
    /// 2^label - 1.
    ExponentialMinusOne,
};

/// Sum over the first min(n, size) positions of gain(label_i) / log2(i + 1), i from 1.
double dcg(std::span<const int> labels_in_rank_order, std::size_t n, Gain gain = Gain::Exponential);

/// dcg(ranked) / dcg(ideal). Both lists must hold the same multiset of
/// labels. Returns 1 when the ideal DCG is zero.
double ndcg(std::span<const int> ranked, std::span<const int> ideal_sorted_desc, std::size_t n,
            Gain gain = Gain::Exponential);
/// Convenience overload deriving the ideal ordering.
double ndcg(std::span<const int> ranked, std::size_t n, Gain gain = Gain::Exponential);

struct ArmRecall {
    double mean_recall = 0.0;
    std::size_t recalled = 0;       ///< sum over queries of |Ret ∩ Rel|
    std::size_t relevant_total = 0; ///< sum over queries of |Rel|
    std::vector<double> per_query;  ///< aligned with RecallReport::queries
};

struct RecallReport {
    ArmRecall lexical;
    ArmRecall semantic;
    ArmRecall hybrid;
    std::vector<std::string> queries;
    std::size_t skipped = 0; ///< queries without any relevance > 0 judgment
};

struct RetrievalEvalConfig {
    std::size_t k_lexical = 300;
    std::size_t k_semantic = 20;
    std::size_t nprobe = 0;
};

/// Per test query, relevant = judged docs with relevance > 0; recall of the
/// lexical top-k, the semantic top-k and their union.
RecallReport evaluate_retrieval(const JudgmentSet& test, const SearchEngine& engine,
                                const RetrievalEvalConfig& cfg = {});

struct NdcgRow {
    std::string name;
    std::map<std::size_t, double> at; ///< n -> mean NDCG@n
    std::size_t queries = 0;
};

using PairScorer = std::function<double(const std::string& query, const std::string& doc_id)>;

/// Ranks each query's judged docs by score (desc, doc_id asc) and averages NDCG@n.
NdcgRow evaluate_ranking(const JudgmentSet& test, const PairScorer& scorer, std::span<const std::size_t> ns,
                         std::string name = "", Gain gain = Gain::Exponential);
NdcgRow evaluate_ranking(const JudgmentSet& test, const EncoderModel& model, std::span<const std::size_t> ns,
                         std::string name = "", Gain gain = Gain::Exponential);

/// `arm \t queries \t skipped \t recalled \t relevant \t recall` rows.
void write_recall_report(const RecallReport& report, const std::filesystem::path& path);
/// `model \t queries \t ndcg@n ...` rows.
void write_ndcg_report(std::span<const NdcgRow> rows, const std::filesystem::path& path);

} // namespace semret
