#pragma once

#include "semret/corpus.hpp"
#include "semret/semantic_index.hpp"
#include "semret/text.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace semret {

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

struct Posting {
    std::uint32_t doc = 0; ///< index into InvertedIndex::doc_ids
    std::uint32_t tf = 0;

    bool operator==(const Posting&) const = default;
};

/// Term -> postings over document titles. Documents are numbered in
/// ascending doc_id order, so posting lists sorted by document number are
/// also sorted by doc_id.
class InvertedIndex {
public:
    Bm25Params params;
    std::vector<std::string> doc_ids;
    /// Title length in terms under split_terms, including terms without postings.
    std::vector<std::uint32_t> doc_lengths;
    double avg_doc_length = 0.0;
    std::vector<std::string> terms;
    std::vector<std::vector<Posting>> postings;

    std::size_t doc_count() const { return doc_ids.size(); }
    std::optional<std::size_t> term_id(std::string_view term) const;
    std::optional<std::size_t> doc_index(std::string_view doc_id) const;
    /// Postings of a term, or nullptr when the term has none.
    const std::vector<Posting>* find_postings(std::string_view term) const;
    double idf(std::size_t df) const;

    /// Rebuilds the lookup tables after the public fields were filled in.
    void finalize();

private:
    std::unordered_map<std::string, std::size_t> term_lookup_;
    std::unordered_map<std::string, std::size_t> doc_lookup_;
};

/// Indexes every title term known to `vocab`; UNK terms get no postings.
InvertedIndex build_lexical(const DocumentStore& docs, const Vocabulary& vocab, Bm25Params params = {});
/// Same, with a vocabulary of every term occurring in the titles.
InvertedIndex build_lexical(const DocumentStore& docs, Bm25Params params = {});

/// Sum over distinct query terms of idf * tf (k1 + 1) / (tf + k1 (1 - b + b dl / avgdl)),
/// idf = ln(1 + (N - df + 0.5) / (df + 0.5)).
double bm25(const InvertedIndex& index, std::span<const std::string> q_terms, std::string_view doc_id);

/// Top k documents sharing at least one term with the query.
std::vector<SearchHit> search_lexical(const InvertedIndex& index, std::span<const std::string> q_terms,
                                      std::size_t k);

/// "SRLEXID1" | u32 version | f64 k1 | f64 b | u64 N | N x (str doc_id, u32 length)
/// | u64 T | T x (str term, u64 df, df x (u32 doc, u32 tf))
void save_lexical(const InvertedIndex& index, const std::filesystem::path& path);
InvertedIndex load_lexical(const std::filesystem::path& path);

} // namespace semret
