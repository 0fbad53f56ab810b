#include "semret/rng.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

using namespace semret;

TEST(Rng, MixSeedSeparatesStreams)
{
    EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
    EXPECT_NE(mix_seed(1, 0), mix_seed(2, 0));
    EXPECT_NE(mix_seed(1, 2, 3), mix_seed(1, 3, 2));
    EXPECT_EQ(mix_seed(7, 5, 9), mix_seed(7, 5, 9));
}

TEST(Rng, Fnv1aKnownValues)
{
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Rng, UniformIndexStaysInRangeAndCoversIt)
{
    Rng rng(3);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 7000; ++i) {
        const auto x = uniform_index(rng, 7);
        ASSERT_LT(x, 7u);
        ++counts[x];
    }
    for (int c : counts) EXPECT_GT(c, 800);
}

TEST(Rng, Uniform01InHalfOpenInterval)
{
    Rng rng(11);
    for (int i = 0; i < 10000; ++i) {
        const double u = uniform01(rng);
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(Rng, SampleIndicesDistinctAndBounded)
{
    Rng rng(5);
    for (std::size_t n : {0u, 1u, 5u, 40u}) {
        for (std::size_t count : {0u, 3u, 50u}) {
            const auto s = sample_indices(rng, n, count);
            EXPECT_EQ(s.size(), std::min(n, count));
            std::set<std::size_t> uniq(s.begin(), s.end());
            EXPECT_EQ(uniq.size(), s.size());
            for (auto i : s) EXPECT_LT(i, n);
        }
    }
}

TEST(Rng, ShuffleIsAPermutationAndDeterministic)
{
    std::vector<int> a(50), b;
    for (int i = 0; i < 50; ++i) a[i] = i;
    b = a;
    Rng r1(9), r2(9);
    shuffle(a, r1);
    shuffle(b, r2);
    EXPECT_EQ(a, b);
    std::sort(a.begin(), a.end());
    for (int i = 0; i < 50; ++i) EXPECT_EQ(a[i], i);
}
