#pragma once

#include "semret/encoder.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace semret {

enum class Similarity : std::uint32_t {
    InnerProduct = 0,
    /// Rows and queries are L2-normalized, then compared by inner product.
    Cosine = 1,
};

struct SearchHit {
    std::string doc_id;
    double score = 0.0;

    bool operator==(const SearchHit&) const = default;
};

/// Result order: score descending, then doc_id ascending.
inline bool hit_before(const SearchHit& a, const SearchHit& b)
{
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
}

/// Keeps the k best hits in result order.
void select_top_k(std::vector<SearchHit>& hits, std::size_t k);

/// Inner product of float32 vectors accumulated in double.
double inner_product(std::span<const float> a, std::span<const float> b);

struct ExactIndex {
    std::size_t dim = 0;
    Similarity similarity = Similarity::InnerProduct;
    std::vector<std::string> doc_ids;
    /// N x dim row major; row i belongs to doc_ids[i].
    std::vector<float> rows;

    std::size_t size() const { return doc_ids.size(); }
    std::span<const float> row(std::size_t i) const { return {rows.data() + i * dim, dim}; }
};

struct PostingList {
    std::vector<std::string> doc_ids;
    std::vector<float> rows;
};

struct IvfIndex {
    std::size_t dim = 0;
    Similarity similarity = Similarity::InnerProduct;
    /// k_c x dim coarse centroids.
    std::vector<float> centroids;
    std::vector<PostingList> lists;

    std::size_t k_c() const { return lists.size(); }
    std::size_t size() const;
    std::span<const float> centroid(std::size_t c) const { return {centroids.data() + c * dim, dim}; }
};

using SemanticIndex = std::variant<ExactIndex, IvfIndex>;

ExactIndex build_exact(const EmbeddingTable& embeddings, Similarity similarity = Similarity::InnerProduct);
std::vector<SearchHit> search_exact(const ExactIndex& index, std::span<const float> q, std::size_t k);

/// Coarse centroids from seeded k-means; each document is posted under its
/// nearest (Euclidean) float32 centroid.
IvfIndex build_ivf(const EmbeddingTable& embeddings, std::size_t k_c, std::uint64_t seed,
                   Similarity similarity = Similarity::InnerProduct, std::size_t kmeans_iters = 25);

/// Probes the nprobe centroids with the largest inner product with q (ties
/// to the lower index) and returns the best k hits among their postings.
std::vector<SearchHit> search_ivf(const IvfIndex& index, std::span<const float> q, std::size_t k,
                                  std::size_t nprobe);

std::size_t index_dim(const SemanticIndex& index);
std::size_t index_size(const SemanticIndex& index);

/// Dispatches to search_exact or search_ivf; nprobe is ignored for exact.
std::vector<SearchHit> search(const SemanticIndex& index, std::span<const float> q, std::size_t k,
                              std::size_t nprobe);

/// "SRINDEX1" | u32 version | u32 kind (0 exact, 1 ivf) | u32 similarity | u32 dim
/// | u64 N | u32 k_c | k_c x dim f32 centroids
/// | per block: u64 count, count x (u32 id_len + id + dim x f32)
/// Exact indexes carry one block, IVF indexes one block per centroid.
void save_index(const SemanticIndex& index, const std::filesystem::path& path);
SemanticIndex load_index(const std::filesystem::path& path);

} // namespace semret
