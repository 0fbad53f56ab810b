#include "semret/retrieval.hpp"

#include "semret/error.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace semret {

std::string_view to_string(ScoreMode mode)
{
    switch (mode) {
    case ScoreMode::EncoderDot: return "ENCODER_DOT";
    case ScoreMode::Bm25Only: return "BM25_ONLY";
    case ScoreMode::Interleave: return "INTERLEAVE";
    }
    return "ENCODER_DOT";
}

ScoreMode parse_score_mode(std::string_view text)
{
    if (text == "ENCODER_DOT") return ScoreMode::EncoderDot;
    if (text == "BM25_ONLY") return ScoreMode::Bm25Only;
    if (text == "INTERLEAVE") return ScoreMode::Interleave;
    throw Error("unknown score_mode '" + std::string(text) + "'");
}

std::string_view to_string(Source source)
{
    switch (source) {
    case Source::Semantic: return "SEMANTIC";
    case Source::Lexical: return "LEXICAL";
    case Source::Both: return "BOTH";
    }
    return "SEMANTIC";
}

void HybridConfig::validate() const
{
    if (k_semantic < 1 || k_lexical < 1 || final_k < 1) throw Error("hybrid counts must be >= 1");
}

HybridConfig hybrid_config_from(const KeyValueConfig& kv, HybridConfig base)
{
    base.k_semantic = kv.get_uint("k_semantic", base.k_semantic);
    base.k_lexical = kv.get_uint("k_lexical", base.k_lexical);
    base.nprobe = kv.get_uint("nprobe", base.nprobe);
    base.final_k = kv.get_uint("final_k", base.final_k);
    if (const auto mode = kv.get("score_mode")) base.score_mode = parse_score_mode(*mode);
    base.validate();
    return base;
}

SearchEngine::SearchEngine(std::shared_ptr<const DocumentStore> docs, std::shared_ptr<const EncoderModel> model,
                           std::shared_ptr<const SemanticIndex> semantic,
                           std::shared_ptr<const InvertedIndex> lexical)
    : docs_(std::move(docs)), model_(std::move(model)), semantic_(std::move(semantic)), lexical_(std::move(lexical))
{
    if (!model_ || !semantic_) throw Error("search engine needs a model and a semantic index");
    if (index_dim(*semantic_) != model_->dim())
        throw Error("semantic index dim " + std::to_string(index_dim(*semantic_)) + " != model dim "
                    + std::to_string(model_->dim()));
    if (lexical_ && !docs_) throw Error("lexical retrieval needs the document store");
    if (docs_) {
        auto check = [&](const std::string& id, const char* what) {
            if (!docs_->contains(id)) throw Error(std::string(what) + " references unknown doc_id " + id);
        };
        std::visit(
            [&](const auto& idx) {
                if constexpr (std::is_same_v<std::decay_t<decltype(idx)>, ExactIndex>) {
                    for (const auto& id : idx.doc_ids) check(id, "semantic index");
                } else {
                    for (const auto& l : idx.lists)
                        for (const auto& id : l.doc_ids) check(id, "semantic index");
                }
            },
            *semantic_);
        if (lexical_)
            for (const auto& id : lexical_->doc_ids) check(id, "lexical index");
    }
}

std::size_t SearchEngine::default_nprobe() const
{
    if (const auto* ivf = std::get_if<IvfIndex>(semantic_.get())) return std::max<std::size_t>(1, ivf->k_c() / 4);
    return 1;
}

std::vector<float> SearchEngine::embed_query(std::string_view query) const
{
    return to_float(encode_text(*model_, query).values);
}

std::vector<SearchHit> SearchEngine::semantic_hits(std::span<const float> q, std::size_t k, std::size_t nprobe) const
{
    return search(*semantic_, q, k, nprobe == 0 ? default_nprobe() : nprobe);
}

std::vector<SearchHit> SearchEngine::lexical_hits(std::string_view query, std::size_t k) const
{
    if (!lexical_) return {};
    const auto terms = split_terms(query);
    return search_lexical(*lexical_, terms, k);
}

double SearchEngine::recompute_dot(std::span<const float> q, const std::string& doc_id) const
{
    auto d = to_float(encode_text(*model_, docs_->at(doc_id).title).values);
    std::vector<float> qv(q.begin(), q.end());
    const auto sim = std::visit([](const auto& i) { return i.similarity; }, *semantic_);
    if (sim == Similarity::Cosine) {
        // Same normalization the index applies to rows and queries.
        auto norm = [](std::vector<float>& v) {
            double n2 = 0.0;
            for (float x : v) n2 += static_cast<double>(x) * x;
            if (n2 <= 0.0) return;
            const double inv = 1.0 / std::sqrt(n2);
            for (auto& x : v) x = static_cast<float>(x * inv);
        };
        norm(d);
        norm(qv);
    }
    return inner_product(d, qv);
}

std::vector<Candidate> SearchEngine::candidates(std::string_view query, const HybridConfig& cfg) const
{
    cfg.validate();
    const auto q = embed_query(query);
    const auto sem = semantic_hits(q, cfg.k_semantic, cfg.nprobe);
    const auto lex = lexical_hits(query, cfg.k_lexical);

    std::vector<Candidate> out;
    std::unordered_map<std::string, std::size_t> pos;
    auto title_of = [&](const std::string& id) { return docs_ ? docs_->at(id).title : std::string(); };
    for (const auto& h : sem) {
        pos.emplace(h.doc_id, out.size());
        out.push_back(Candidate{h.doc_id, title_of(h.doc_id), Source::Semantic, h.score, std::nullopt, 0.0});
    }
    for (const auto& h : lex) {
        const auto it = pos.find(h.doc_id);
        if (it != pos.end()) {
            out[it->second].source = Source::Both;
            out[it->second].lexical_score = h.score;
            continue;
        }
        pos.emplace(h.doc_id, out.size());
        out.push_back(Candidate{h.doc_id, title_of(h.doc_id), Source::Lexical, std::nullopt, h.score, 0.0});
    }

    switch (cfg.score_mode) {
    case ScoreMode::EncoderDot:
        for (auto& c : out) c.final_score = c.semantic_score ? *c.semantic_score : recompute_dot(q, c.doc_id);
        break;
    case ScoreMode::Bm25Only: {
        std::vector<Candidate*> semantic_only;
        for (auto& c : out) {
            if (c.lexical_score)
                c.final_score = *c.lexical_score;
            else
                semantic_only.push_back(&c);
        }
        // `sem` is already in dot-product order.
        for (std::size_t r = 0; r < semantic_only.size(); ++r)
            semantic_only[r]->final_score = -static_cast<double>(r + 1);
        break;
    }
    case ScoreMode::Interleave: {
        std::size_t placed = 0, si = 0, li = 0;
        std::unordered_map<std::string, bool> done;
        auto place = [&](const std::string& id) {
            if (done[id]) return;
            done[id] = true;
            out[pos.at(id)].final_score = 1.0 / static_cast<double>(1 + placed++);
        };
        while (si < sem.size() || li < lex.size()) {
            if (si < sem.size()) place(sem[si++].doc_id);
            if (li < lex.size()) place(lex[li++].doc_id);
        }
        break;
    }
    }

    std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
        if (a.final_score != b.final_score) return a.final_score > b.final_score;
        return a.doc_id < b.doc_id;
    });
    return out;
}

std::vector<Candidate> hybrid_search(std::string_view query, const SearchEngine& engine, const HybridConfig& cfg)
{
    auto out = engine.candidates(query, cfg);
    if (out.size() > cfg.final_k) out.resize(cfg.final_k);
    return out;
}

ServeConfig ServeConfig::from(const KeyValueConfig& kv)
{
    kv.require_known({"docs", "model", "semantic_index", "lexical_index", "host", "port", "threads", "k_semantic",
                      "k_lexical", "nprobe", "final_k", "score_mode"});
    ServeConfig cfg;
    cfg.docs = kv.get_string("docs", "");
    cfg.model = kv.get_string("model", "");
    cfg.semantic_index = kv.get_string("semantic_index", "");
    cfg.lexical_index = kv.get_string("lexical_index", "");
    cfg.host = kv.get_string("host", cfg.host);
    cfg.port = static_cast<int>(kv.get_uint("port", static_cast<std::uint64_t>(cfg.port)));
    cfg.threads = kv.get_uint("threads", cfg.threads);
    cfg.hybrid = hybrid_config_from(kv);
    if (cfg.threads < 1) throw Error("threads must be >= 1");
    return cfg;
}

std::shared_ptr<const SearchEngine> load_engine(const ServeConfig& cfg)
{
    if (cfg.docs.empty() || cfg.model.empty() || cfg.semantic_index.empty())
        throw Error("serving needs docs, model and semantic_index paths");
    auto docs = std::make_shared<const DocumentStore>(load_documents(cfg.docs));
    auto model = std::make_shared<const EncoderModel>(load_model(cfg.model));
    auto semantic = std::make_shared<const SemanticIndex>(load_index(cfg.semantic_index));
    std::shared_ptr<const InvertedIndex> lexical;
    if (!cfg.lexical_index.empty()) lexical = std::make_shared<const InvertedIndex>(load_lexical(cfg.lexical_index));
    return std::make_shared<const SearchEngine>(std::move(docs), std::move(model), std::move(semantic),
                                                std::move(lexical));
}

} // namespace semret
