#include "semret/error.hpp"
#include "semret/kmeans.hpp"
#include "semret/rng.hpp"

#include <gtest/gtest.h>

#include <map>
#include <set>

using namespace semret;

namespace {

struct Points {
    std::vector<std::string> ids;
    std::vector<double> data;
    std::size_t dim = 0;
};

Points random_points(Rng& rng, std::size_t n, std::size_t dim)
{
    Points p;
    p.dim = dim;
    for (std::size_t i = 0; i < n; ++i) {
        p.ids.push_back("p" + std::to_string(i));
        for (std::size_t k = 0; k < dim; ++k) p.data.push_back(standard_normal(rng));
    }
    return p;
}

double recomputed_inertia(const Points& p, const ClusterModel& m)
{
    double total = 0.0;
    for (std::size_t i = 0; i < p.ids.size(); ++i)
        total += squared_distance({p.data.data() + i * p.dim, p.dim}, m.centroid(m.assignments[i]));
    return total;
}

} // namespace

TEST(Kmeans, InertiaNonIncreasingOnRandomInstances)
{
    Rng rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        const auto p = random_points(rng, 20 + uniform_index(rng, 200), 1 + uniform_index(rng, 8));
        const std::size_t k = 1 + uniform_index(rng, 12);
        const auto m = kmeans(p.ids, p.data, p.dim, k, 100, trial);
        ASSERT_FALSE(m.inertia_history.empty());
        for (std::size_t t = 1; t < m.inertia_history.size(); ++t)
            EXPECT_LE(m.inertia_history[t], m.inertia_history[t - 1] * (1 + 1e-12)) << "trial " << trial;
        EXPECT_NEAR(m.inertia, recomputed_inertia(p, m), 1e-9 * (1 + m.inertia));
        EXPECT_EQ(m.inertia, m.inertia_history.back());
    }
}

TEST(Kmeans, ConvergedAssignmentsAreAFixpoint)
{
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const auto p = random_points(rng, 150, 3);
        const auto m = kmeans(p.ids, p.data, p.dim, 6, 500, trial);
        ASSERT_LT(m.iterations, 500u);
        for (std::size_t i = 0; i < p.ids.size(); ++i) {
            EXPECT_EQ(m.assignments[i], assign_nearest({p.data.data() + i * p.dim, p.dim}, m));
            EXPECT_LT(m.assignments[i], m.k);
        }
    }
}

TEST(Kmeans, KEqualsDistinctPointsGivesZeroInertia)
{
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto p = random_points(rng, 1 + uniform_index(rng, 30), 2);
        const auto m = kmeans(p.ids, p.data, p.dim, p.ids.size(), 50, trial);
        EXPECT_EQ(m.inertia, 0.0);
        std::set<std::uint32_t> used(m.assignments.begin(), m.assignments.end());
        EXPECT_EQ(used.size(), p.ids.size());
    }
}

TEST(Kmeans, SeparatedBlobsRecovered)
{
    Rng rng(4);
    const double sigma = 1.0;
    for (int trial = 0; trial < 10; ++trial) {
        Points p;
        p.dim = 3;
        std::vector<int> blob;
        for (int i = 0; i < 200; ++i) {
            const int b = i % 2;
            blob.push_back(b);
            p.ids.push_back("x" + std::to_string(i));
            for (std::size_t k = 0; k < 3; ++k)
                p.data.push_back((b == 1 && k == 0 ? 10.0 * sigma : 0.0) + sigma * standard_normal(rng) * 0.3);
        }
        const auto m = kmeans(p.ids, p.data, p.dim, 2, 50, trial);
        std::map<std::uint32_t, std::set<int>> blob_of;
        for (std::size_t i = 0; i < 200; ++i) {
            blob_of[m.assignments[i]].insert(blob[i]);
            // Brute-force nearest centroid labeling.
            const std::span<const double> v{p.data.data() + i * 3, 3};
            const auto d0 = squared_distance(v, m.centroid(0));
            const auto d1 = squared_distance(v, m.centroid(1));
            EXPECT_EQ(m.assignments[i], d1 < d0 ? 1u : 0u);
        }
        ASSERT_EQ(blob_of.size(), 2u);
        for (const auto& [c, blobs] : blob_of) EXPECT_EQ(blobs.size(), 1u);
    }
}

TEST(Kmeans, DeterministicAndLookup)
{
    Rng rng(5);
    const auto p = random_points(rng, 80, 4);
    const auto a = kmeans(p.ids, p.data, p.dim, 5, 30, 11);
    const auto b = kmeans(p.ids, p.data, p.dim, 5, 30, 11);
    EXPECT_EQ(a.centroids, b.centroids);
    EXPECT_EQ(a.assignments, b.assignments);
    EXPECT_EQ(*a.assignment_of("p7"), a.assignments[7]);
    EXPECT_FALSE(a.assignment_of("nope").has_value());
    std::size_t total = 0;
    for (std::uint32_t c = 0; c < a.k; ++c) total += a.members(c).size();
    EXPECT_EQ(total, 80u);
}

TEST(Kmeans, Errors)
{
    const std::vector<std::string> ids{"a", "b", "c"};
    const std::vector<double> dup{1, 1, 1, 1, 2, 2};
    EXPECT_THROW(kmeans(ids, dup, 2, 4, 10, 0), Error);
    EXPECT_THROW(kmeans(ids, dup, 2, 3, 10, 0), Error);
    EXPECT_THROW(kmeans(ids, dup, 2, 0, 10, 0), Error);
    EXPECT_NO_THROW(kmeans(ids, dup, 2, 2, 10, 0));
}

TEST(AssignNearest, ExactMatchTieRuleAndDimCheck)
{
    ClusterModel m;
    m.k = 5;
    m.dim = 1;
    m.centroids = {10.0, 0.0, 20.0, 30.0, 4.0};
    const std::vector<double> at3{30.0};
    EXPECT_EQ(assign_nearest(at3, m), 3u);
    const std::vector<double> between{2.0};
    EXPECT_EQ(assign_nearest(between, m), 1u);
    const std::vector<double> wrong{1.0, 2.0};
    EXPECT_THROW(assign_nearest(wrong, m), Error);
}
