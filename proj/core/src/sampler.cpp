#include "semret/sampler.hpp"

#include "semret/error.hpp"
#include "semret/parallel.hpp"
#include "semret/rng.hpp"

namespace semret {

void SamplerConfig::validate() const
{
    if (k_clusters < 1 || n_global < 1 || n_cluster < 1 || kmeans_iters < 1)
        throw Error("sampler counts must be >= 1");
}

std::uint64_t query_stream_seed(std::uint64_t seed, std::string_view query, std::uint64_t stream)
{
    return mix_seed(seed, fnv1a64(query), stream);
}

namespace {

NegativeSample sample_from(std::vector<std::string> pool, std::size_t n, std::uint64_t seed)
{
    Rng rng(seed);
    NegativeSample out;
    out.requested = n;
    for (auto i : sample_indices(rng, pool.size(), n)) out.ids.push_back(std::move(pool[i]));
    return out;
}

} // namespace

NegativeSample sample_neg_global(std::span<const std::string> universe, std::size_t n, const IdSet& exclude,
                                 std::uint64_t seed)
{
    if (universe.empty()) throw Error("sample_neg_global: empty universe");
    std::vector<std::string> pool;
    for (const auto& id : universe)
        if (!exclude.contains(id)) pool.push_back(id);
    return sample_from(std::move(pool), n, seed);
}

NegativeSample sample_neg_cluster(std::uint32_t query_cluster, const ClusterModel& model, std::size_t n,
                                  const IdSet& exclude, std::uint64_t seed)
{
    if (query_cluster >= model.k) throw Error("sample_neg_cluster: cluster index out of range");
    std::vector<std::string> pool;
    for (auto i : model.members(query_cluster))
        if (!exclude.contains(model.item_ids[i])) pool.push_back(model.item_ids[i]);
    return sample_from(std::move(pool), n, seed);
}

AugmentResult augment_dataset(const JudgmentSet& D, const EncoderModel& model, const SamplerConfig& cfg)
{
    cfg.validate();
    if (D.empty()) throw Error("augment_dataset: empty judgment set");
    const auto& docs = D.docs();
    const auto dim = model.dim();

    std::vector<std::string> doc_ids;
    doc_ids.reserve(docs.size());
    for (const auto& d : docs.documents()) doc_ids.push_back(d.doc_id);
    std::vector<double> doc_vectors(docs.size() * dim);
    parallel_for(docs.size(), [&](std::size_t i) {
        const auto e = encode_text(model, docs[i].title);
        std::copy(e.values.begin(), e.values.end(), doc_vectors.begin() + static_cast<std::ptrdiff_t>(i * dim));
    });

    AugmentResult out{JudgmentSet(D.doc_store()),
                      kmeans(doc_ids, doc_vectors, dim, cfg.k_clusters, cfg.kmeans_iters, cfg.seed),
                      {}};

    for (const auto& g : D.groups()) {
        QueryAugmentation qa;
        qa.query = g.query;
        qa.human = g.judgments.size();
        qa.cluster = assign_nearest(encode_text(model, g.query).values, out.clusters);

        IdSet exclude;
        for (const auto& j : g.judgments) {
            exclude.insert(j.doc_id);
            out.augmented.add(j);
        }
        const auto global = sample_neg_global(doc_ids, cfg.n_global, exclude,
                                              query_stream_seed(cfg.seed, g.query, 1));
        for (const auto& id : global.ids) {
            exclude.insert(id);
            out.augmented.add(Judgment{g.query, id, 0, Origin::NegGlobal});
        }
        const auto cluster = sample_neg_cluster(qa.cluster, out.clusters, cfg.n_cluster, exclude,
                                                query_stream_seed(cfg.seed, g.query, 2));
        for (const auto& id : cluster.ids) out.augmented.add(Judgment{g.query, id, 0, Origin::NegCluster});
        qa.global = global.ids.size();
        qa.cluster_added = cluster.ids.size();
        out.per_query.push_back(std::move(qa));
    }
    return out;
}

} // namespace semret
