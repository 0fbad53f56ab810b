#include "semret/semantic_index.hpp"

#include "semret/binary_io.hpp"
#include "semret/error.hpp"
#include "semret/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

namespace semret {

namespace {

constexpr std::string_view kIndexMagic = "SRINDEX1";
constexpr std::uint32_t kIndexVersion = 1;

void normalize(std::span<float> v)
{
    double n2 = 0.0;
    for (float x : v) n2 += static_cast<double>(x) * x;
    if (n2 <= 0.0) return;
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& x : v) x = static_cast<float>(x * inv);
}

std::vector<float> prepared_rows(const EmbeddingTable& t, Similarity sim)
{
    if (t.size() == 0) throw Error("semantic index: no embeddings");
    if (t.dim == 0 || t.data.size() != t.size() * t.dim) throw Error("semantic index: ragged embedding rows");
    std::unordered_set<std::string_view> seen;
    for (const auto& id : t.ids)
        if (!seen.insert(id).second) throw Error("semantic index: duplicate doc_id " + id);
    std::vector<float> rows = t.data;
    for (float x : rows)
        if (!std::isfinite(x)) throw Error("semantic index: non-finite embedding value");
    if (sim == Similarity::Cosine)
        for (std::size_t i = 0; i < t.size(); ++i) normalize({rows.data() + i * t.dim, t.dim});
    return rows;
}

std::vector<float> prepared_query(std::span<const float> q, std::size_t dim, Similarity sim)
{
    if (q.size() != dim)
        throw Error("query dim " + std::to_string(q.size()) + " != index dim " + std::to_string(dim));
    std::vector<float> out(q.begin(), q.end());
    if (sim == Similarity::Cosine) normalize(out);
    return out;
}

void scan(const std::vector<std::string>& ids, const std::vector<float>& rows, std::size_t dim,
          std::span<const float> q, std::vector<SearchHit>& hits)
{
    for (std::size_t i = 0; i < ids.size(); ++i)
        hits.push_back({ids[i], inner_product({rows.data() + i * dim, dim}, q)});
}

} // namespace

void select_top_k(std::vector<SearchHit>& hits, std::size_t k)
{
    if (hits.size() > k) {
        std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(), hit_before);
        hits.resize(k);
    } else {
        std::sort(hits.begin(), hits.end(), hit_before);
    }
}

double inner_product(std::span<const float> a, std::span<const float> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
    return s;
}

std::size_t IvfIndex::size() const
{
    std::size_t n = 0;
    for (const auto& l : lists) n += l.doc_ids.size();
    return n;
}

ExactIndex build_exact(const EmbeddingTable& embeddings, Similarity similarity)
{
    ExactIndex idx;
    idx.rows = prepared_rows(embeddings, similarity);
    idx.dim = embeddings.dim;
    idx.similarity = similarity;
    idx.doc_ids = embeddings.ids;
    return idx;
}

std::vector<SearchHit> search_exact(const ExactIndex& index, std::span<const float> q, std::size_t k)
{
    if (k < 1) throw Error("search: k must be >= 1");
    const auto query = prepared_query(q, index.dim, index.similarity);
    std::vector<SearchHit> hits;
    hits.reserve(index.size());
    scan(index.doc_ids, index.rows, index.dim, query, hits);
    select_top_k(hits, k);
    return hits;
}

IvfIndex build_ivf(const EmbeddingTable& embeddings, std::size_t k_c, std::uint64_t seed, Similarity similarity,
                   std::size_t kmeans_iters)
{
    const auto rows = prepared_rows(embeddings, similarity);
    const auto dim = embeddings.dim;
    const std::vector<double> data(rows.begin(), rows.end());
    const auto clusters = kmeans(embeddings.ids, data, dim, k_c, kmeans_iters, seed);

    IvfIndex idx;
    idx.dim = dim;
    idx.similarity = similarity;
    idx.centroids.assign(clusters.centroids.begin(), clusters.centroids.end());
    idx.lists.resize(k_c);

    // Re-assign against the float32 centroids actually stored.
    ClusterModel stored;
    stored.k = k_c;
    stored.dim = dim;
    stored.centroids.assign(idx.centroids.begin(), idx.centroids.end());
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
        const auto c = assign_nearest({data.data() + i * dim, dim}, stored);
        auto& list = idx.lists[c];
        list.doc_ids.push_back(embeddings.ids[i]);
        list.rows.insert(list.rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(i * dim),
                         rows.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim));
    }
    return idx;
}

std::vector<SearchHit> search_ivf(const IvfIndex& index, std::span<const float> q, std::size_t k,
                                  std::size_t nprobe)
{
    if (k < 1) throw Error("search: k must be >= 1");
    if (nprobe < 1 || nprobe > index.k_c())
        throw Error("nprobe " + std::to_string(nprobe) + " outside 1.." + std::to_string(index.k_c()));
    const auto query = prepared_query(q, index.dim, index.similarity);

    std::vector<std::pair<double, std::size_t>> ranked(index.k_c());
    for (std::size_t c = 0; c < index.k_c(); ++c) ranked[c] = {inner_product(index.centroid(c), query), c};
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(nprobe), ranked.end(),
                      [](const auto& a, const auto& b) {
                          if (a.first != b.first) return a.first > b.first;
                          return a.second < b.second;
                      });

    std::vector<SearchHit> hits;
    for (std::size_t p = 0; p < nprobe; ++p) {
        const auto& list = index.lists[ranked[p].second];
        scan(list.doc_ids, list.rows, index.dim, query, hits);
    }
    select_top_k(hits, k);
    return hits;
}

std::size_t index_dim(const SemanticIndex& index)
{
    return std::visit([](const auto& i) { return i.dim; }, index);
}

std::size_t index_size(const SemanticIndex& index)
{
    return std::visit([](const auto& i) { return i.size(); }, index);
}

std::vector<SearchHit> search(const SemanticIndex& index, std::span<const float> q, std::size_t k,
                              std::size_t nprobe)
{
    if (const auto* exact = std::get_if<ExactIndex>(&index)) return search_exact(*exact, q, k);
    const auto& ivf = std::get<IvfIndex>(index);
    return search_ivf(ivf, q, k, std::clamp<std::size_t>(nprobe, 1, ivf.k_c()));
}

void save_index(const SemanticIndex& index, const std::filesystem::path& path)
{
    BinaryWriter w(path);
    w.magic(kIndexMagic);
    w.u32(kIndexVersion);
    auto write_block = [&](const std::vector<std::string>& ids, const std::vector<float>& rows, std::size_t dim) {
        w.u64(ids.size());
        for (std::size_t i = 0; i < ids.size(); ++i) {
            w.str(ids[i]);
            w.f32s({rows.data() + i * dim, dim});
        }
    };
    if (const auto* exact = std::get_if<ExactIndex>(&index)) {
        w.u32(0);
        w.u32(static_cast<std::uint32_t>(exact->similarity));
        w.u32(static_cast<std::uint32_t>(exact->dim));
        w.u64(exact->size());
        w.u32(0);
        write_block(exact->doc_ids, exact->rows, exact->dim);
    } else {
        const auto& ivf = std::get<IvfIndex>(index);
        w.u32(1);
        w.u32(static_cast<std::uint32_t>(ivf.similarity));
        w.u32(static_cast<std::uint32_t>(ivf.dim));
        w.u64(ivf.size());
        w.u32(static_cast<std::uint32_t>(ivf.k_c()));
        w.f32s(ivf.centroids);
        for (const auto& list : ivf.lists) write_block(list.doc_ids, list.rows, ivf.dim);
    }
    w.finish();
}

SemanticIndex load_index(const std::filesystem::path& path)
{
    BinaryReader r(path);
    r.expect_magic(kIndexMagic);
    const auto version = r.u32();
    if (version != kIndexVersion)
        throw FormatError(path.string() + ": index format version " + std::to_string(version) + " unsupported");
    const auto kind = r.u32();
    const auto sim = r.u32();
    const auto dim = r.u32();
    const auto n = r.u64();
    const auto k_c = r.u32();
    if (kind > 1 || sim > 1 || dim == 0) throw FormatError(path.string() + ": corrupt index header");
    if ((kind == 0) != (k_c == 0)) throw FormatError(path.string() + ": centroid count inconsistent with index kind");

    std::uint64_t seen = 0;
    auto read_block = [&](std::vector<std::string>& ids, std::vector<float>& rows) {
        const auto count = r.u64();
        if (count > n - seen) throw FormatError(path.string() + ": posting count exceeds header count");
        seen += count;
        std::vector<float> row(dim);
        for (std::uint64_t i = 0; i < count; ++i) {
            ids.push_back(r.str());
            r.f32s(row);
            rows.insert(rows.end(), row.begin(), row.end());
        }
    };

    SemanticIndex result;
    if (kind == 0) {
        ExactIndex idx;
        idx.dim = dim;
        idx.similarity = static_cast<Similarity>(sim);
        read_block(idx.doc_ids, idx.rows);
        result = std::move(idx);
    } else {
        IvfIndex idx;
        idx.dim = dim;
        idx.similarity = static_cast<Similarity>(sim);
        idx.centroids.resize(static_cast<std::size_t>(k_c) * dim);
        r.f32s(idx.centroids);
        idx.lists.resize(k_c);
        for (auto& list : idx.lists) read_block(list.doc_ids, list.rows);
        result = std::move(idx);
    }
    if (seen != n) throw FormatError(path.string() + ": header count " + std::to_string(n)
                                     + " does not match payload count " + std::to_string(seen));
    r.expect_end();
    return result;
}

} // namespace semret
