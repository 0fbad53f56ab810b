#include "semret/corpus.hpp"

#include "semret/error.hpp"
#include "semret/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace semret {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line)
{
    std::vector<std::string_view> cols;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find('\t', start);
        if (pos == std::string_view::npos) {
            cols.push_back(line.substr(start));
            return cols;
        }
        cols.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string where(const std::filesystem::path& path, std::size_t line_no)
{
    return path.string() + ":" + std::to_string(line_no) + ": ";
}

// Calls fn(line, line_no) for every line; a trailing '\r' is dropped.
template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        fn(std::string_view(line), line_no);
    }
}

bool has_control_break(std::string_view s)
{
    return s.find_first_of("\t\n\r") != std::string_view::npos;
}

} // namespace

std::string_view trim(std::string_view s)
{
    constexpr std::string_view ws = " \t\n\r\f\v";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

// DocumentStore -------------------------------------------------------------

void DocumentStore::add(Document doc)
{
    if (doc.doc_id.empty()) throw Error("empty doc_id");
    if (trim(doc.title).empty()) throw Error("empty title for doc_id " + doc.doc_id);
    if (has_control_break(doc.doc_id) || has_control_break(doc.title))
        throw Error("tab or newline inside document " + doc.doc_id);
    if (index_.contains(doc.doc_id)) throw Error("duplicate doc_id " + doc.doc_id);
    index_.emplace(doc.doc_id, docs_.size());
    docs_.push_back(std::move(doc));
}

bool DocumentStore::contains(std::string_view doc_id) const
{
    return index_.contains(std::string(doc_id));
}

std::optional<std::size_t> DocumentStore::index_of(std::string_view doc_id) const
{
    const auto it = index_.find(std::string(doc_id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

const Document& DocumentStore::at(std::string_view doc_id) const
{
    const auto idx = index_of(doc_id);
    if (!idx) throw Error("unknown doc_id " + std::string(doc_id));
    return docs_[*idx];
}

// Origin ----------------------------------------------------------------------

std::string_view to_string(Origin origin)
{
    switch (origin) {
    case Origin::Human: return "HUMAN";
    case Origin::NegGlobal: return "NEG_GLOBAL";
    case Origin::NegCluster: return "NEG_CLUSTER";
    }
    return "HUMAN";
}

Origin parse_origin(std::string_view text)
{
    if (text == "HUMAN") return Origin::Human;
    if (text == "NEG_GLOBAL") return Origin::NegGlobal;
    if (text == "NEG_CLUSTER") return Origin::NegCluster;
    throw Error("unknown origin '" + std::string(text) + "'");
}

// JudgmentSet -----------------------------------------------------------------

JudgmentSet::JudgmentSet(std::shared_ptr<const DocumentStore> docs) : docs_(std::move(docs))
{
    if (!docs_) throw Error("JudgmentSet requires a document store");
}

void JudgmentSet::add(Judgment j)
{
    j.query = std::string(trim(j.query));
    if (j.query.empty()) throw Error("empty query");
    if (has_control_break(j.query)) throw Error("tab or newline inside query");
    if (j.relevance < 0 || j.relevance > 2)
        throw Error("relevance " + std::to_string(j.relevance) + " outside {0,1,2}");
    if (j.origin != Origin::Human && j.relevance != 0)
        throw Error("sampled negative with non-zero relevance for (" + j.query + ", " + j.doc_id + ")");
    if (!docs_->contains(j.doc_id)) throw Error("unknown doc_id " + j.doc_id);

    auto it = group_index_.find(j.query);
    if (it == group_index_.end()) {
        it = group_index_.emplace(j.query, groups_.size()).first;
        groups_.push_back(QueryGroup{j.query, {}});
    }
    auto& group = groups_[it->second];
    for (const auto& existing : group.judgments)
        if (existing.doc_id == j.doc_id)
            throw Error("duplicate judgment (" + j.query + ", " + j.doc_id + ")");
    group.judgments.push_back(std::move(j));
    ++judgments_;
}

const QueryGroup* JudgmentSet::find(std::string_view query) const
{
    const auto it = group_index_.find(std::string(query));
    return it == group_index_.end() ? nullptr : &groups_[it->second];
}

bool JudgmentSet::operator==(const JudgmentSet& other) const
{
    return groups_ == other.groups_ && (docs_ == other.docs_ || *docs_ == *other.docs_);
}

// TSV I/O -----------------------------------------------------------------------

DocumentStore load_documents(const std::filesystem::path& path)
{
    DocumentStore store;
    for_each_line(path, [&](std::string_view line, std::size_t line_no) {
        const auto cols = split_tabs(line);
        if (cols.size() != 2)
            throw FormatError(where(path, line_no) + "expected 2 tab-separated columns, got "
                              + std::to_string(cols.size()));
        const std::string id(cols[0]);
        if (store.contains(id))
            throw FormatError(where(path, line_no) + "duplicate doc_id " + id);
        try {
            store.add(Document{id, std::string(trim(cols[1]))});
        } catch (const Error& e) {
            throw FormatError(where(path, line_no) + e.what());
        }
    });
    return store;
}

void save_documents(const DocumentStore& docs, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    for (const auto& d : docs.documents()) out << d.doc_id << '\t' << d.title << '\n';
    if (!out) throw Error("write failed: " + path.string());
}

JudgmentSet load_judgments(const std::filesystem::path& path,
                           std::shared_ptr<const DocumentStore> docs)
{
    JudgmentSet js(std::move(docs));
    for_each_line(path, [&](std::string_view line, std::size_t line_no) {
        const auto cols = split_tabs(line);
        if (cols.size() != 3 && cols.size() != 4)
            throw FormatError(where(path, line_no) + "expected 3 or 4 tab-separated columns, got "
                              + std::to_string(cols.size()));
        const auto rel = cols[2];
        if (rel.size() != 1 || rel[0] < '0' || rel[0] > '2')
            throw FormatError(where(path, line_no) + "relevance '" + std::string(rel)
                              + "' outside {0,1,2}");
        Judgment j{std::string(cols[0]), std::string(cols[1]), rel[0] - '0', Origin::Human};
        try {
            if (cols.size() == 4) j.origin = parse_origin(cols[3]);
            js.add(std::move(j));
        } catch (const FormatError&) {
            throw;
        } catch (const Error& e) {
            throw FormatError(where(path, line_no) + e.what());
        }
    });
    return js;
}

void save_judgments(const JudgmentSet& js, const std::filesystem::path& path, bool with_origin)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    for (const auto& g : js.groups()) {
        for (const auto& j : g.judgments) {
            out << j.query << '\t' << j.doc_id << '\t' << j.relevance;
            if (with_origin) out << '\t' << to_string(j.origin);
            out << '\n';
        }
    }
    if (!out) throw Error("write failed: " + path.string());
}

std::pair<JudgmentSet, JudgmentSet> split_by_query(const JudgmentSet& js, double test_fraction,
                                                   std::uint64_t seed)
{
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw Error("test_fraction must lie in (0, 1)");
    const auto n = js.query_count();
    if (n < 2) throw Error("split_by_query needs at least 2 query groups");
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
    if (n_test == 0 || n_test == n)
        throw Error("test_fraction " + std::to_string(test_fraction) + " leaves one side empty for "
                    + std::to_string(n) + " queries");

    Rng rng(mix_seed(seed, 0x5b11u));
    std::vector<bool> is_test(n, false);
    for (auto i : sample_indices(rng, n, n_test)) is_test[i] = true;

    JudgmentSet train(js.doc_store());
    JudgmentSet test(js.doc_store());
    for (std::size_t g = 0; g < n; ++g)
        for (const auto& j : js.groups()[g].judgments) (is_test[g] ? test : train).add(j);
    return {std::move(train), std::move(test)};
}

} // namespace semret
