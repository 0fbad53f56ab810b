#pragma once

#include "semret/corpus.hpp"
#include "semret/encoder.hpp"
#include "semret/kmeans.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

namespace semret {

struct SamplerConfig {
    std::size_t k_clusters = 25;
    std::size_t n_global = 10;
    std::size_t n_cluster = 10;
    std::size_t kmeans_iters = 50;
    std::uint64_t seed = 0;

    void validate() const;
};

using IdSet = std::unordered_set<std::string>;

struct NegativeSample {
    std::vector<std::string> ids;
    std::size_t requested = 0;

    /// Fewer ids than requested because the candidate pool ran out.
    bool is_short() const { return ids.size() < requested; }
};

/// Uniform sample without replacement from universe minus exclude.
NegativeSample sample_neg_global(std::span<const std::string> universe, std::size_t n, const IdSet& exclude,
                                 std::uint64_t seed);

/// Uniform sample without replacement among items of `model` assigned to
/// `query_cluster`, minus exclude.
NegativeSample sample_neg_cluster(std::uint32_t query_cluster, const ClusterModel& model, std::size_t n,
                                  const IdSet& exclude, std::uint64_t seed);

struct QueryAugmentation {
    std::string query;
    std::uint32_t cluster = 0;
    std::size_t human = 0;
    std::size_t global = 0;
    std::size_t cluster_added = 0;
};

struct AugmentResult {
    JudgmentSet augmented;
    ClusterModel clusters;
    std::vector<QueryAugmentation> per_query;
};

/// Appends NEG_GLOBAL and NEG_CLUSTER relevance-0 judgments to every query
/// group. Documents are clustered with `model`; queries are assigned to
/// their nearest document centroid afterwards. Each query draws from its own
/// seed streams (global and cluster separately), so the global draw does not
/// depend on n_cluster.
AugmentResult augment_dataset(const JudgmentSet& D, const EncoderModel& model, const SamplerConfig& cfg);

/// Per-query seed for a sampling stream.
std::uint64_t query_stream_seed(std::uint64_t seed, std::string_view query, std::uint64_t stream);

} // namespace semret
