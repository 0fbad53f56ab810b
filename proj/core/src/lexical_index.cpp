#include "semret/lexical_index.hpp"

#include "semret/binary_io.hpp"
#include "semret/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace semret {

namespace {

constexpr std::string_view kLexMagic = "SRLEXID1";
constexpr std::uint32_t kLexVersion = 1;

std::vector<std::string> distinct_terms(std::span<const std::string> q_terms)
{
    std::set<std::string> seen(q_terms.begin(), q_terms.end());
    return {seen.begin(), seen.end()};
}

double term_weight(const InvertedIndex& index, std::size_t df, std::uint32_t tf, std::uint32_t dl)
{
    const auto& p = index.params;
    const double norm = 1.0 - p.b + p.b * static_cast<double>(dl) / index.avg_doc_length;
    return index.idf(df) * tf * (p.k1 + 1.0) / (tf + p.k1 * norm);
}

} // namespace

std::optional<std::size_t> InvertedIndex::term_id(std::string_view term) const
{
    const auto it = term_lookup_.find(std::string(term));
    if (it == term_lookup_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> InvertedIndex::doc_index(std::string_view doc_id) const
{
    const auto it = doc_lookup_.find(std::string(doc_id));
    if (it == doc_lookup_.end()) return std::nullopt;
    return it->second;
}

const std::vector<Posting>* InvertedIndex::find_postings(std::string_view term) const
{
    const auto t = term_id(term);
    return t ? &postings[*t] : nullptr;
}

double InvertedIndex::idf(std::size_t df) const
{
    const double n = static_cast<double>(doc_count());
    const double d = static_cast<double>(df);
    return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

void InvertedIndex::finalize()
{
    term_lookup_.clear();
    doc_lookup_.clear();
    for (std::size_t t = 0; t < terms.size(); ++t) term_lookup_.emplace(terms[t], t);
    for (std::size_t d = 0; d < doc_ids.size(); ++d) doc_lookup_.emplace(doc_ids[d], d);
}

InvertedIndex build_lexical(const DocumentStore& docs, const Vocabulary& vocab, Bm25Params params)
{
    if (docs.empty()) throw Error("build_lexical: empty document store");
    std::vector<std::size_t> order(docs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return docs[a].doc_id < docs[b].doc_id; });

    InvertedIndex idx;
    idx.params = params;
    std::map<std::string, std::vector<Posting>> by_term;
    double total_len = 0.0;
    for (std::size_t d = 0; d < order.size(); ++d) {
        const auto& doc = docs[order[d]];
        const auto terms = split_terms(doc.title);
        idx.doc_ids.push_back(doc.doc_id);
        idx.doc_lengths.push_back(static_cast<std::uint32_t>(terms.size()));
        total_len += static_cast<double>(terms.size());
        std::map<std::string, std::uint32_t> tf;
        for (const auto& t : terms)
            if (vocab.lookup(t) != Vocabulary::kUnk) ++tf[t];
        for (auto& [t, n] : tf) by_term[t].push_back({static_cast<std::uint32_t>(d), n});
    }
    idx.avg_doc_length = total_len / static_cast<double>(order.size());
    for (auto& [t, list] : by_term) {
        idx.terms.push_back(t);
        idx.postings.push_back(std::move(list));
    }
    idx.finalize();
    return idx;
}

InvertedIndex build_lexical(const DocumentStore& docs, Bm25Params params)
{
    std::vector<std::string> titles;
    for (const auto& d : docs.documents()) titles.push_back(d.title);
    return build_lexical(docs, build_vocab(titles, 1), params);
}

double bm25(const InvertedIndex& index, std::span<const std::string> q_terms, std::string_view doc_id)
{
    const auto d = index.doc_index(doc_id);
    if (!d) throw Error("bm25: unknown doc_id " + std::string(doc_id));
    double score = 0.0;
    for (const auto& term : distinct_terms(q_terms)) {
        const auto* list = index.find_postings(term);
        if (!list) continue;
        const auto it = std::lower_bound(list->begin(), list->end(), *d,
                                         [](const Posting& p, std::size_t doc) { return p.doc < doc; });
        if (it == list->end() || it->doc != *d) continue;
        score += term_weight(index, list->size(), it->tf, index.doc_lengths[*d]);
    }
    return score;
}

std::vector<SearchHit> search_lexical(const InvertedIndex& index, std::span<const std::string> q_terms,
                                      std::size_t k)
{
    if (k < 1) throw Error("search_lexical: k must be >= 1");
    std::vector<double> acc(index.doc_count(), 0.0);
    std::vector<bool> touched(index.doc_count(), false);
    for (const auto& term : distinct_terms(q_terms)) {
        const auto* list = index.find_postings(term);
        if (!list) continue;
        for (const auto& p : *list) {
            acc[p.doc] += term_weight(index, list->size(), p.tf, index.doc_lengths[p.doc]);
            touched[p.doc] = true;
        }
    }
    std::vector<SearchHit> hits;
    for (std::size_t d = 0; d < acc.size(); ++d)
        if (touched[d]) hits.push_back({index.doc_ids[d], acc[d]});
    select_top_k(hits, k);
    return hits;
}

void save_lexical(const InvertedIndex& index, const std::filesystem::path& path)
{
    BinaryWriter w(path);
    w.magic(kLexMagic);
    w.u32(kLexVersion);
    w.f64(index.params.k1);
    w.f64(index.params.b);
    w.u64(index.doc_count());
    for (std::size_t d = 0; d < index.doc_count(); ++d) {
        w.str(index.doc_ids[d]);
        w.u32(index.doc_lengths[d]);
    }
    w.u64(index.terms.size());
    for (std::size_t t = 0; t < index.terms.size(); ++t) {
        w.str(index.terms[t]);
        w.u64(index.postings[t].size());
        for (const auto& p : index.postings[t]) {
            w.u32(p.doc);
            w.u32(p.tf);
        }
    }
    w.finish();
}

InvertedIndex load_lexical(const std::filesystem::path& path)
{
    BinaryReader r(path);
    r.expect_magic(kLexMagic);
    const auto version = r.u32();
    if (version != kLexVersion)
        throw FormatError(path.string() + ": lexical index version " + std::to_string(version) + " unsupported");
    InvertedIndex idx;
    idx.params.k1 = r.f64();
    idx.params.b = r.f64();
    const auto n = r.u64();
    if (n == 0) throw FormatError(path.string() + ": empty lexical index");
    double total = 0.0;
    for (std::uint64_t d = 0; d < n; ++d) {
        idx.doc_ids.push_back(r.str());
        idx.doc_lengths.push_back(r.u32());
        total += idx.doc_lengths.back();
    }
    idx.avg_doc_length = total / static_cast<double>(n);
    const auto t_count = r.u64();
    for (std::uint64_t t = 0; t < t_count; ++t) {
        idx.terms.push_back(r.str());
        const auto df = r.u64();
        if (df > n) throw FormatError(path.string() + ": document frequency exceeds document count");
        std::vector<Posting> list(df);
        for (auto& p : list) {
            p.doc = r.u32();
            p.tf = r.u32();
            if (p.doc >= n) throw FormatError(path.string() + ": posting references unknown document");
        }
        idx.postings.push_back(std::move(list));
    }
    r.expect_end();
    idx.finalize();
    return idx;
}

} // namespace semret
