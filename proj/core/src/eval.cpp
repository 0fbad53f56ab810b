#include "semret/eval.hpp"

#include "semret/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace semret {

std::optional<double> recall(const IdSet& retrieved, const IdSet& relevant)
{
    if (relevant.empty()) return std::nullopt;
    std::size_t hit = 0;
    for (const auto& id : relevant)
        if (retrieved.contains(id)) ++hit;
    return static_cast<double>(hit) / static_cast<double>(relevant.size());
}

double dcg(std::span<const int> labels, std::size_t n, Gain gain)
{
    const auto len = std::min(n, labels.size());
    double total = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        double g = std::exp2(static_cast<double>(labels[i]));
        if (gain == Gain::ExponentialMinusOne) g -= 1.0;
        total += g / std::log2(static_cast<double>(i + 2));
    }
    return total;
}

double ndcg(std::span<const int> ranked, std::span<const int> ideal, std::size_t n, Gain gain)
{
    std::vector<int> a(ranked.begin(), ranked.end()), b(ideal.begin(), ideal.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) throw Error("ndcg: ranked and ideal lists hold different label multisets");
    const double idcg = dcg(ideal, n, gain);
    if (idcg <= 0.0) return 1.0;
    return dcg(ranked, n, gain) / idcg;
}

double ndcg(std::span<const int> ranked, std::size_t n, Gain gain)
{
    std::vector<int> ideal(ranked.begin(), ranked.end());
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    return ndcg(ranked, ideal, n, gain);
}

RecallReport evaluate_retrieval(const JudgmentSet& test, const SearchEngine& engine, const RetrievalEvalConfig& cfg)
{
    RecallReport report;
    double sums[3] = {0.0, 0.0, 0.0};
    ArmRecall* arms[3] = {&report.lexical, &report.semantic, &report.hybrid};
    for (const auto& g : test.groups()) {
        IdSet relevant;
        for (const auto& j : g.judgments)
            if (j.relevance > 0) relevant.insert(j.doc_id);
        if (relevant.empty()) {
            ++report.skipped;
            continue;
        }
        IdSet lex, sem;
        for (auto& h : engine.lexical_hits(g.query, cfg.k_lexical)) lex.insert(std::move(h.doc_id));
        for (auto& h : engine.semantic_hits(engine.embed_query(g.query), cfg.k_semantic, cfg.nprobe))
            sem.insert(std::move(h.doc_id));
        IdSet both = lex;
        both.insert(sem.begin(), sem.end());

        report.queries.push_back(g.query);
        const IdSet* sets[3] = {&lex, &sem, &both};
        for (int a = 0; a < 3; ++a) {
            std::size_t hit = 0;
            for (const auto& id : relevant) hit += sets[a]->contains(id) ? 1 : 0;
            const double r = *recall(*sets[a], relevant);
            arms[a]->per_query.push_back(r);
            arms[a]->recalled += hit;
            arms[a]->relevant_total += relevant.size();
            sums[a] += r;
        }
    }
    const auto n = report.queries.size();
    for (int a = 0; a < 3; ++a) arms[a]->mean_recall = n ? sums[a] / static_cast<double>(n) : 0.0;
    return report;
}

NdcgRow evaluate_ranking(const JudgmentSet& test, const PairScorer& scorer, std::span<const std::size_t> ns,
                         std::string name, Gain gain)
{
    NdcgRow row;
    row.name = std::move(name);
    for (auto n : ns) row.at[n] = 0.0;
    for (const auto& g : test.groups()) {
        if (g.judgments.size() < 2)
            throw Error("evaluate_ranking: query '" + g.query + "' has fewer than 2 judged documents");
        struct Item {
            double score;
            const std::string* doc_id;
            int label;
        };
        std::vector<Item> items;
        for (const auto& j : g.judgments) items.push_back({scorer(g.query, j.doc_id), &j.doc_id, j.relevance});
        std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
            if (a.score != b.score) return a.score > b.score;
            return *a.doc_id < *b.doc_id;
        });
        std::vector<int> labels;
        for (const auto& it : items) labels.push_back(it.label);
        for (auto n : ns) row.at[n] += ndcg(labels, n, gain);
        ++row.queries;
    }
    if (row.queries)
        for (auto& [n, v] : row.at) v /= static_cast<double>(row.queries);
    return row;
}

NdcgRow evaluate_ranking(const JudgmentSet& test, const EncoderModel& model, std::span<const std::size_t> ns,
                         std::string name, Gain gain)
{
    // Embeddings cached per text: every judged doc and query is encoded once.
    std::unordered_map<std::string, std::vector<double>> cache;
    auto embed = [&](const std::string& text) -> const std::vector<double>& {
        auto it = cache.find(text);
        if (it == cache.end()) it = cache.emplace(text, encode_text(model, text).values).first;
        return it->second;
    };
    const auto& docs = test.docs();
    return evaluate_ranking(
        test,
        [&](const std::string& q, const std::string& d) { return dot(embed(q), embed(docs.at(d).title)); },
        ns, std::move(name), gain);
}

void write_recall_report(const RecallReport& report, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out.precision(6);
    out << std::fixed;
    out << "arm\tqueries\tskipped\trecall_num\trelevant\trecall_rate\n";
    const std::pair<const char*, const ArmRecall*> rows[] = {
        {"LEXICAL", &report.lexical}, {"SEMANTIC", &report.semantic}, {"HYBRID", &report.hybrid}};
    for (const auto& [name, arm] : rows)
        out << name << '\t' << report.queries.size() << '\t' << report.skipped << '\t' << arm->recalled << '\t'
            << arm->relevant_total << '\t' << arm->mean_recall << '\n';
}

void write_ndcg_report(std::span<const NdcgRow> rows, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    std::set<std::size_t> ns;
    for (const auto& r : rows)
        for (const auto& [n, v] : r.at) ns.insert(n);
    out << "model\tqueries";
    for (auto n : ns) out << "\tndcg@" << n;
    out << '\n';
    out.precision(6);
    out << std::fixed;
    for (const auto& r : rows) {
        out << r.name << '\t' << r.queries;
        for (auto n : ns) {
            const auto it = r.at.find(n);
            out << '\t';
            if (it != r.at.end()) out << it->second;
        }
        out << '\n';
    }
}

} // namespace semret
