#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace semret {

/// k-means result over a set of identified vectors.
struct ClusterModel {
    std::size_t k = 0;
    std::size_t dim = 0;
    /// k x dim, row major.
    std::vector<double> centroids;
    std::vector<std::string> item_ids;
    /// Cluster of item_ids[i].
    std::vector<std::uint32_t> assignments;
    /// Sum of squared distances of items to their assigned centroid.
    double inertia = 0.0;
    /// Inertia after every assignment step, first entry after seeding.
    std::vector<double> inertia_history;
    std::size_t iterations = 0;

    std::span<const double> centroid(std::size_t c) const { return {centroids.data() + c * dim, dim}; }
    std::optional<std::uint32_t> assignment_of(std::string_view id) const;
    /// Item indices assigned to cluster c, ascending.
    std::vector<std::size_t> members(std::uint32_t c) const;

    void rebuild_lookup();

private:
    std::unordered_map<std::string, std::size_t> lookup_;
};

double squared_distance(std::span<const double> a, std::span<const double> b);

/// k-means++ seeding followed by Lloyd iterations until the assignment is a
/// fixpoint or `iters` updates ran. Clusters that go empty are re-seeded
/// from the point farthest from its own centroid.
/// `data` holds ids.size() rows of `dim` values.
ClusterModel kmeans(std::span<const std::string> ids, std::span<const double> data, std::size_t dim,
                    std::size_t k, std::size_t iters, std::uint64_t seed);

/// Nearest centroid by squared Euclidean distance; ties go to the lower index.
std::uint32_t assign_nearest(std::span<const double> v, const ClusterModel& model);

} // namespace semret
