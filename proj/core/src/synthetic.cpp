#include "semret/corpus.hpp"

#include "semret/error.hpp"
#include "semret/rng.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

namespace semret {

namespace {

constexpr std::string_view kOnsets = "bdfghklmnprstvz";
constexpr std::string_view kVowels = "aeiou";

std::string make_word(Rng& rng)
{
    const auto syllables = 2 + uniform_index(rng, 2);
    std::string w;
    for (std::uint64_t s = 0; s < syllables; ++s) {
        w += kOnsets[uniform_index(rng, kOnsets.size())];
        w += kVowels[uniform_index(rng, kVowels.size())];
    }
    return w;
}

std::vector<std::uint32_t> random_concepts(Rng& rng, std::size_t n_concepts, std::size_t len)
{
    std::vector<std::uint32_t> out;
    for (auto i : sample_indices(rng, n_concepts, len)) out.push_back(static_cast<std::uint32_t>(i));
    std::sort(out.begin(), out.end());
    return out;
}

std::string join_forms(const std::vector<std::vector<std::string>>& concepts,
                       const std::vector<std::uint32_t>& seq, const std::vector<std::size_t>& forms)
{
    std::string text;
    for (std::size_t s = 0; s < seq.size(); ++s) {
        if (s) text += ' ';
        text += concepts[seq[s]][forms[s]];
    }
    return text;
}

std::string pad_id(char prefix, std::size_t i, std::size_t n)
{
    const auto width = std::to_string(n > 0 ? n - 1 : 0).size();
    auto digits = std::to_string(i);
    return std::string(1, prefix) + std::string(width - std::min(width, digits.size()), '0') + digits;
}

[[noreturn]] void infeasible(const std::string& why)
{
    throw Error("synthetic corpus config infeasible: " + why);
}

} // namespace

void SyntheticCorpusConfig::validate() const
{
    if (n_concepts < 1 || n_documents < 1 || n_queries < 1 || title_len < 1)
        throw Error("synthetic corpus counts must be >= 1");
    if (surface_forms_per_concept < 2) throw Error("surface_forms_per_concept must be >= 2");
    if (title_len < 2) infeasible("title_len must be >= 2 for grade-1 documents to exist");
    if (n_concepts < 2 * title_len) infeasible("n_concepts must be >= 2 * title_len");
    if (!(paraphrase_rate >= 0.0 && paraphrase_rate <= 1.0))
        throw Error("paraphrase_rate must lie in [0, 1]");
    if (n_documents < n_queries + 1 + negatives_per_query)
        infeasible("n_documents too small for the judgments required per query");
}

int concept_grade(const std::vector<std::uint32_t>& query, const std::vector<std::uint32_t>& doc)
{
    if (query == doc) return 2;
    std::size_t overlap = 0;
    for (auto c : query)
        if (std::binary_search(doc.begin(), doc.end(), c)) ++overlap;
    return 2 * overlap >= query.size() ? 1 : 0;
}

SyntheticCorpus generate_synthetic_corpus(const SyntheticCorpusConfig& cfg)
{
    cfg.validate();
    const auto F = cfg.surface_forms_per_concept;
    const auto L = cfg.title_len;

    // Concept vocabulary: globally unique pseudo-words.
    Rng word_rng(mix_seed(cfg.seed, 1));
    std::vector<std::vector<std::string>> concepts(cfg.n_concepts);
    std::unordered_set<std::string> used;
    for (auto& forms : concepts) {
        while (forms.size() < F) {
            auto w = make_word(word_rng);
            if (used.insert(w).second) forms.push_back(std::move(w));
        }
    }

    // Random documents.
    Rng doc_rng(mix_seed(cfg.seed, 2));
    std::vector<std::vector<std::uint32_t>> doc_concepts(cfg.n_documents);
    std::vector<std::vector<std::size_t>> doc_forms(cfg.n_documents);
    auto draw_forms = [&](Rng& rng) {
        std::vector<std::size_t> f(L);
        for (auto& x : f) x = static_cast<std::size_t>(uniform_index(rng, F));
        return f;
    };
    for (std::size_t d = 0; d < cfg.n_documents; ++d) {
        doc_concepts[d] = random_concepts(doc_rng, cfg.n_concepts, L);
        doc_forms[d] = draw_forms(doc_rng);
    }

    // Query targets, then make sure each target has a protected grade-1 doc.
    Rng plan_rng(mix_seed(cfg.seed, 3));
    const auto targets = sample_indices(plan_rng, cfg.n_documents, cfg.n_queries);
    std::vector<bool> locked(cfg.n_documents, false);
    for (auto t : targets) locked[t] = true;

    for (auto t : targets) {
        const auto& tc = doc_concepts[t];
        bool satisfied = false;
        std::optional<std::size_t> loose;
        for (std::size_t d = 0; d < cfg.n_documents && !satisfied; ++d) {
            if (d == t || concept_grade(tc, doc_concepts[d]) != 1) continue;
            if (locked[d])
                satisfied = true;
            else if (!loose)
                loose = d;
        }
        if (satisfied) continue;
        if (loose) {
            locked[*loose] = true;
            continue;
        }
        std::vector<std::size_t> free_docs;
        for (std::size_t d = 0; d < cfg.n_documents; ++d)
            if (!locked[d]) free_docs.push_back(d);
        if (free_docs.empty()) infeasible("no free document left to plant a grade-1 match");
        const auto victim = free_docs[uniform_index(plan_rng, free_docs.size())];

        const auto keep = (L + 1) / 2;
        std::vector<std::uint32_t> planted;
        for (auto i : sample_indices(plan_rng, L, keep)) planted.push_back(tc[i]);
        std::vector<std::uint32_t> others;
        for (std::uint32_t c = 0; c < cfg.n_concepts; ++c)
            if (!std::binary_search(tc.begin(), tc.end(), c)) others.push_back(c);
        for (auto i : sample_indices(plan_rng, others.size(), L - keep)) planted.push_back(others[i]);
        std::sort(planted.begin(), planted.end());
        doc_concepts[victim] = std::move(planted);
        doc_forms[victim] = draw_forms(plan_rng);
        locked[victim] = true;
    }

    auto docs = std::make_shared<DocumentStore>();
    for (std::size_t d = 0; d < cfg.n_documents; ++d)
        docs->add(Document{pad_id('d', d, cfg.n_documents),
                           join_forms(concepts, doc_concepts[d], doc_forms[d])});

    // Queries restate the target's concepts, paraphrasing a random subset.
    Rng query_rng(mix_seed(cfg.seed, 4));
    SyntheticCorpus out{docs, JudgmentSet(docs), concepts, doc_concepts, {}, {}};
    std::vector<std::string> query_texts;
    for (auto t : targets) {
        std::string text;
        for (int attempt = 0;; ++attempt) {
            if (attempt == 32) infeasible("cannot produce a unique query text");
            std::vector<std::size_t> forms(L);
            for (std::size_t s = 0; s < L; ++s) {
                forms[s] = doc_forms[t][s];
                if (uniform01(query_rng) < cfg.paraphrase_rate) {
                    const auto alt = static_cast<std::size_t>(uniform_index(query_rng, F - 1));
                    forms[s] = alt >= doc_forms[t][s] ? alt + 1 : alt;
                }
            }
            text = join_forms(concepts, doc_concepts[t], forms);
            if (!out.query_concepts.contains(text)) break;
        }
        out.query_concepts.emplace(text, doc_concepts[t]);
        out.query_target.emplace(text, t);
        query_texts.push_back(std::move(text));
    }

    // Complete relevance judgments plus a few random grade-0 documents.
    Rng neg_rng(mix_seed(cfg.seed, 5));
    for (const auto& q : query_texts) {
        const auto& qc = out.query_concepts.at(q);
        std::vector<int> grade(cfg.n_documents);
        std::vector<std::size_t> zeros;
        for (std::size_t d = 0; d < cfg.n_documents; ++d) {
            grade[d] = concept_grade(qc, doc_concepts[d]);
            if (grade[d] == 0) zeros.push_back(d);
        }
        if (zeros.size() < cfg.negatives_per_query) infeasible("too few grade-0 documents");
        std::vector<bool> judged(cfg.n_documents, false);
        for (std::size_t d = 0; d < cfg.n_documents; ++d) judged[d] = grade[d] > 0;
        for (auto i : sample_indices(neg_rng, zeros.size(), cfg.negatives_per_query)) judged[zeros[i]] = true;
        for (std::size_t d = 0; d < cfg.n_documents; ++d)
            if (judged[d]) out.judgments.add(Judgment{q, (*docs)[d].doc_id, grade[d], Origin::Human});
    }
    return out;
}

void save_synthetic_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    save_documents(*corpus.docs, dir / "docs.tsv");
    save_judgments(corpus.judgments, dir / "judgments.tsv");
    std::ofstream out(dir / "concepts.tsv", std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + (dir / "concepts.tsv").string());
    for (std::size_t c = 0; c < corpus.concepts.size(); ++c) {
        out << c << '\t';
        for (std::size_t f = 0; f < corpus.concepts[c].size(); ++f)
            out << (f ? "," : "") << corpus.concepts[c][f];
        out << '\n';
    }
}

} // namespace semret
