#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace semret {

struct Document {
    std::string doc_id;
    std::string title;

    bool operator==(const Document&) const = default;
};

/// Documents in insertion order with O(1) lookup by id. Ids are unique and
/// titles non-empty after trimming.
class DocumentStore {
public:
    void add(Document doc);

    std::size_t size() const { return docs_.size(); }
    bool empty() const { return docs_.empty(); }
    bool contains(std::string_view doc_id) const;
    std::optional<std::size_t> index_of(std::string_view doc_id) const;
    const Document& at(std::string_view doc_id) const;
    const Document& operator[](std::size_t i) const { return docs_[i]; }
    const std::vector<Document>& documents() const { return docs_; }

    bool operator==(const DocumentStore& other) const { return docs_ == other.docs_; }

private:
    std::vector<Document> docs_;
    std::unordered_map<std::string, std::size_t> index_;
};

enum class Origin : std::uint8_t { Human, NegGlobal, NegCluster };

std::string_view to_string(Origin origin);
Origin parse_origin(std::string_view text);

struct Judgment {
    std::string query;
    std::string doc_id;
    int relevance = 0;
    Origin origin = Origin::Human;

    bool operator==(const Judgment&) const = default;
};

struct QueryGroup {
    std::string query;
    std::vector<Judgment> judgments;

    bool operator==(const QueryGroup&) const = default;
};

/// Graded judgments grouped by query, bound to the document store they
/// reference. Groups keep first-appearance order so that every derived
/// artifact is reproducible.
class JudgmentSet {
public:
    explicit JudgmentSet(std::shared_ptr<const DocumentStore> docs);

    /// Validates grade, origin, doc existence and (query, doc_id) uniqueness.
    void add(Judgment j);

    const std::vector<QueryGroup>& groups() const { return groups_; }
    const QueryGroup* find(std::string_view query) const;
    std::size_t query_count() const { return groups_.size(); }
    std::size_t judgment_count() const { return judgments_; }
    bool empty() const { return groups_.empty(); }

    const DocumentStore& docs() const { return *docs_; }
    const std::shared_ptr<const DocumentStore>& doc_store() const { return docs_; }

    bool operator==(const JudgmentSet& other) const;

private:
    std::shared_ptr<const DocumentStore> docs_;
    std::vector<QueryGroup> groups_;
    std::unordered_map<std::string, std::size_t> group_index_;
    std::size_t judgments_ = 0;
};

/// Trims ASCII whitespace from both ends.
std::string_view trim(std::string_view s);

DocumentStore load_documents(const std::filesystem::path& path);
void save_documents(const DocumentStore& docs, const std::filesystem::path& path);

/// Reads `query \t doc_id \t relevance [\t origin]` lines.
JudgmentSet load_judgments(const std::filesystem::path& path,
                           std::shared_ptr<const DocumentStore> docs);

/// Writes the three-column form, or four columns when `with_origin` is set.
void save_judgments(const JudgmentSet& js, const std::filesystem::path& path,
                    bool with_origin = false);

/// Query-disjoint split. round(test_fraction * #queries) groups go to test.
std::pair<JudgmentSet, JudgmentSet> split_by_query(const JudgmentSet& js, double test_fraction,
                                                   std::uint64_t seed);

/// Returns a copy keeping only judgments whose origin passes the filter.
template <typename Pred>
JudgmentSet filter_judgments(const JudgmentSet& js, Pred&& keep)
{
    JudgmentSet out(js.doc_store());
    for (const auto& g : js.groups())
        for (const auto& j : g.judgments)
            if (keep(j)) out.add(j);
    return out;
}

// Synthetic paraphrase corpus ---------------------------------------------

struct SyntheticCorpusConfig {
    std::size_t n_concepts = 50;
    std::size_t surface_forms_per_concept = 3;
    std::size_t n_documents = 500;
    std::size_t n_queries = 50;
    std::size_t title_len = 4;
    std::uint64_t seed = 1;
    /// Probability that a query re-expresses a concept with a different
    /// surface form than its target document uses.
    double paraphrase_rate = 0.5;
    /// Grade-0 documents judged per query.
    std::size_t negatives_per_query = 5;

    void validate() const;
};

struct SyntheticCorpus {
    std::shared_ptr<const DocumentStore> docs;
    JudgmentSet judgments;
    /// concept id -> surface forms
    std::vector<std::vector<std::string>> concepts;
    /// Concept sequences (ascending concept id) per document, store order.
    std::vector<std::vector<std::uint32_t>> doc_concepts;
    /// Concept sequence per query, keyed by query text.
    std::unordered_map<std::string, std::vector<std::uint32_t>> query_concepts;
    /// Index of each query's target document.
    std::unordered_map<std::string, std::size_t> query_target;
};

/// Relevance grade between two ascending concept sequences of equal length:
/// 2 when identical, 1 when the overlap covers at least half the length.
int concept_grade(const std::vector<std::uint32_t>& query, const std::vector<std::uint32_t>& doc);

SyntheticCorpus generate_synthetic_corpus(const SyntheticCorpusConfig& cfg);

/// Writes docs.tsv, judgments.tsv and concepts.tsv into `dir`.
void save_synthetic_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir);

} // namespace semret
