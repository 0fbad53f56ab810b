#pragma once

#include "semret/corpus.hpp"
#include "semret/encoder.hpp"
#include "semret/key_value.hpp"
#include "semret/lexical_index.hpp"
#include "semret/semantic_index.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace semret {

enum class ScoreMode {
    /// Encoder dot product for every candidate.
    EncoderDot,
    /// BM25 for lexical candidates; semantic-only ones follow, ordered by dot product.
    Bm25Only,
    /// Alternates the two arms by native rank, semantic first.
    Interleave,
};

enum class Source { Semantic, Lexical, Both };

std::string_view to_string(ScoreMode mode);
ScoreMode parse_score_mode(std::string_view text);
std::string_view to_string(Source source);

struct HybridConfig {
    std::size_t k_semantic = 20;
    std::size_t k_lexical = 300;
    /// IVF probes; 0 selects max(1, k_c / 4).
    std::size_t nprobe = 0;
    std::size_t final_k = 10;
    ScoreMode score_mode = ScoreMode::EncoderDot;

    void validate() const;
};

/// Reads k_semantic, k_lexical, nprobe, final_k and score_mode, keeping
/// `base` values for absent keys.
HybridConfig hybrid_config_from(const KeyValueConfig& kv, HybridConfig base = {});

struct Candidate {
    std::string doc_id;
    std::string title;
    Source source = Source::Semantic;
    std::optional<double> semantic_score;
    std::optional<double> lexical_score;
    double final_score = 0.0;
};

/// Immutable bundle of serving artifacts. Safe to share across threads.
class SearchEngine {
public:
    /// `docs` supplies titles and is required for lexical-only candidates
    /// under ENCODER_DOT; `lexical` may be null for semantic-only search.
    SearchEngine(std::shared_ptr<const DocumentStore> docs, std::shared_ptr<const EncoderModel> model,
                 std::shared_ptr<const SemanticIndex> semantic, std::shared_ptr<const InvertedIndex> lexical);

    std::vector<float> embed_query(std::string_view query) const;
    std::vector<SearchHit> semantic_hits(std::span<const float> q, std::size_t k, std::size_t nprobe = 0) const;
    std::vector<SearchHit> lexical_hits(std::string_view query, std::size_t k) const;

    /// Untruncated, deduplicated union of both arms, sorted by final score.
    std::vector<Candidate> candidates(std::string_view query, const HybridConfig& cfg) const;

    std::size_t default_nprobe() const;
    const EncoderModel& model() const { return *model_; }
    const SemanticIndex& semantic_index() const { return *semantic_; }
    const InvertedIndex* lexical_index() const { return lexical_.get(); }
    const DocumentStore* docs() const { return docs_.get(); }

private:
    double recompute_dot(std::span<const float> q, const std::string& doc_id) const;

    std::shared_ptr<const DocumentStore> docs_;
    std::shared_ptr<const EncoderModel> model_;
    std::shared_ptr<const SemanticIndex> semantic_;
    std::shared_ptr<const InvertedIndex> lexical_;
};

/// Union of the semantic top-k_semantic and lexical top-k_lexical hits,
/// scored per cfg.score_mode and truncated to cfg.final_k.
std::vector<Candidate> hybrid_search(std::string_view query, const SearchEngine& engine, const HybridConfig& cfg);

/// Artifact paths plus serving parameters, as read from a key=value file.
struct ServeConfig {
    std::string docs;
    std::string model;
    std::string semantic_index;
    std::string lexical_index;
    std::string host = "127.0.0.1";
    int port = 8080;
    std::size_t threads = 8;
    HybridConfig hybrid;

    static ServeConfig from(const KeyValueConfig& kv);
};

/// Loads every artifact named by the config; throws on the first failure.
std::shared_ptr<const SearchEngine> load_engine(const ServeConfig& cfg);

} // namespace semret
