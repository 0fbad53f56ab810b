#include "semret/kmeans.hpp"

#include "semret/error.hpp"
#include "semret/rng.hpp"

#include <limits>

namespace semret {

double squared_distance(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

std::optional<std::uint32_t> ClusterModel::assignment_of(std::string_view id) const
{
    const auto it = lookup_.find(std::string(id));
    if (it == lookup_.end()) return std::nullopt;
    return assignments[it->second];
}

std::vector<std::size_t> ClusterModel::members(std::uint32_t c) const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
        if (assignments[i] == c) out.push_back(i);
    return out;
}

void ClusterModel::rebuild_lookup()
{
    lookup_.clear();
    for (std::size_t i = 0; i < item_ids.size(); ++i) lookup_.emplace(item_ids[i], i);
}

namespace {

struct Nearest {
    std::uint32_t cluster;
    double dist;
};

Nearest nearest(std::span<const double> v, std::span<const double> centroids, std::size_t k, std::size_t dim)
{
    Nearest best{0, std::numeric_limits<double>::infinity()};
    for (std::size_t c = 0; c < k; ++c) {
        const double d = squared_distance(v, centroids.subspan(c * dim, dim));
        if (d < best.dist) best = {static_cast<std::uint32_t>(c), d};
    }
    return best;
}

} // namespace

std::uint32_t assign_nearest(std::span<const double> v, const ClusterModel& model)
{
    if (v.size() != model.dim)
        throw Error("assign_nearest: vector dim " + std::to_string(v.size()) + " != centroid dim "
                    + std::to_string(model.dim));
    return nearest(v, model.centroids, model.k, model.dim).cluster;
}

ClusterModel kmeans(std::span<const std::string> ids, std::span<const double> data, std::size_t dim,
                    std::size_t k, std::size_t iters, std::uint64_t seed)
{
    const auto n = ids.size();
    if (dim == 0 || data.size() != n * dim) throw Error("kmeans: data shape does not match ids");
    if (k == 0) throw Error("kmeans: k must be >= 1");
    if (k > n) throw Error("kmeans: k = " + std::to_string(k) + " exceeds item count " + std::to_string(n));
    auto row = [&](std::size_t i) { return data.subspan(i * dim, dim); };

    ClusterModel m;
    m.k = k;
    m.dim = dim;
    m.item_ids.assign(ids.begin(), ids.end());
    m.centroids.resize(k * dim);
    auto set_centroid = [&](std::size_t c, std::size_t i) {
        const auto r = row(i);
        std::copy(r.begin(), r.end(), m.centroids.begin() + static_cast<std::ptrdiff_t>(c * dim));
    };

    // k-means++ seeding.
    Rng rng(mix_seed(seed, 0x6b6d));
    set_centroid(0, static_cast<std::size_t>(uniform_index(rng, n)));
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(row(i), m.centroid(0));
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (double x : d2) total += x;
        if (!(total > 0.0))
            throw Error("kmeans: k = " + std::to_string(k) + " exceeds the number of distinct vectors");
        const double target = uniform01(rng) * total;
        std::size_t pick = n;
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (d2[i] <= 0.0) continue;
            acc += d2[i];
            pick = i;
            if (acc > target) break;
        }
        set_centroid(c, pick);
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(row(i), m.centroid(c)));
    }

    m.assignments.assign(n, 0);
    std::vector<double> dist(n);
    // Assigns every point, re-seeding empty clusters; returns whether any
    // assignment changed and records the resulting inertia.
    auto assign_all = [&]() {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            const auto nb = nearest(row(i), m.centroids, k, dim);
            changed = changed || nb.cluster != m.assignments[i];
            m.assignments[i] = nb.cluster;
            dist[i] = nb.dist;
        }
        for (std::size_t round = 0; round < k; ++round) {
            std::vector<std::size_t> sizes(k, 0);
            for (auto a : m.assignments) ++sizes[a];
            std::size_t empty = k;
            for (std::size_t c = 0; c < k; ++c)
                if (sizes[c] == 0) {
                    empty = c;
                    break;
                }
            if (empty == k) break;
            std::size_t far = n;
            for (std::size_t i = 0; i < n; ++i)
                if (sizes[m.assignments[i]] > 1 && (far == n || dist[i] > dist[far])) far = i;
            if (far == n || !(dist[far] > 0.0))
                throw Error("kmeans: cannot re-seed empty cluster (too few distinct vectors)");
            set_centroid(empty, far);
            for (std::size_t i = 0; i < n; ++i) {
                const auto nb = nearest(row(i), m.centroids, k, dim);
                m.assignments[i] = nb.cluster;
                dist[i] = nb.dist;
            }
            changed = true;
        }
        double inertia = 0.0;
        for (double x : dist) inertia += x;
        m.inertia_history.push_back(inertia);
        return changed;
    };

    assign_all();
    std::vector<double> sums(k * dim);
    std::vector<std::size_t> counts(k);
    for (std::size_t it = 0; it < iters; ++it) {
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = m.assignments[i];
            ++counts[c];
            const auto r = row(i);
            for (std::size_t j = 0; j < dim; ++j) sums[c * dim + j] += r[j];
        }
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t j = 0; j < dim; ++j)
                m.centroids[c * dim + j] = sums[c * dim + j] / static_cast<double>(counts[c]);
        ++m.iterations;
        if (!assign_all()) break;
    }
    m.inertia = m.inertia_history.back();
    m.rebuild_lookup();
    return m;
}

} // namespace semret
