#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "itpack/generators.hpp"
#include "itpack/oracle.hpp"
#include "itpack/reduce.hpp"

using namespace itpack;

namespace {

MultipartiteGraph edge_free(PartIndex k, Vertex n) { return gen_random(k, n, 0, 0, 1); }

MultipartiteGraph complete_bipartite(Vertex n_per_part) {
    std::vector<std::pair<Vertex, Vertex>> edges;
    for (Vertex a = 0; a < n_per_part; ++a)
        for (Vertex b = 0; b < n_per_part; ++b) edges.emplace_back(a, n_per_part + b);
    return MultipartiteGraph::from_edges(2, {n_per_part, n_per_part}, edges);
}

void assert_partition(const MultipartiteGraph& g, const PartSplit& split) {
    ASSERT_EQ(split.labels.size(), static_cast<std::size_t>(g.num_vertices()));
    std::size_t total = 0;
    for (std::int32_t lab = 0; lab < split.m; ++lab) {
        const auto blocks = split.block_vertices(g, lab);
        for (PartIndex i = 0; i < g.num_parts(); ++i) {
            for (Vertex v : blocks[static_cast<std::size_t>(i)]) {
                EXPECT_EQ(g.part_of(v), i);
                EXPECT_EQ(split.labels[static_cast<std::size_t>(v)], lab);
            }
            total += blocks[static_cast<std::size_t>(i)].size();
        }
    }
    EXPECT_EQ(total, static_cast<std::size_t>(g.num_vertices()));
}

} // namespace

TEST(SplitParts, StructuralPartition) {
    const auto g = gen_random(3, 27, 6, 2, 5);
    const auto res = split_parts(g, 0.25, 11, 100, SplitChecks::StructuralOnly);
    ASSERT_TRUE(res.ok) << res.diagnostics;
    EXPECT_EQ(res.split.m, 9); // floor(27^(2/3))
    assert_partition(g, res.split);
    // Every block nonempty.
    for (std::int32_t lab = 0; lab < res.split.m; ++lab)
        for (const auto& vs : res.split.block_vertices(g, lab)) EXPECT_FALSE(vs.empty());
}

TEST(SplitParts, Deterministic) {
    const auto g = gen_random(4, 16, 5, 2, 2);
    const auto a = split_parts(g, 0.25, 9, 50, SplitChecks::StructuralOnly);
    const auto b = split_parts(g, 0.25, 9, 50, SplitChecks::StructuralOnly);
    ASSERT_TRUE(a.ok);
    EXPECT_EQ(a.split.labels, b.split.labels);
}

TEST(SplitParts, LowLocalDegreeKeepsBlockDegreeFarUnderTwelve) {
    // Large parts, local degree at most 2: the per-part block degree bound of
    // 12 holds with a wide margin on the returned split.
    const auto g = gen_random(3, 4096, 6, 2, 31);
    const auto res = split_parts(g, 0.25, 13, 100, SplitChecks::StructuralOnly);
    ASSERT_TRUE(res.ok) << res.diagnostics;
    EXPECT_EQ(res.split.m, 255); // floor(4096^(2/3)) with cbrt rounding
    const auto audit = reduce_detail::audit_split(g, res.split.labels, res.split.m);
    EXPECT_LT(audit.max_label_part_degree, 12);
}

TEST(SplitParts, ImpossibleThresholdsExhaustBudget) {
    // With parts of size 3 the split has 2 blocks and the size floor demands
    // more vertices than exist, so the full checks can never pass.
    const auto g = edge_free(2, 3);
    const auto res = split_parts(g, 0.25, 3, 20, SplitChecks::Full);
    EXPECT_FALSE(res.ok);
    EXPECT_NE(res.diagnostics.find("budget exhausted"), std::string::npos);
    EXPECT_EQ(res.draws, 21);
}

TEST(HalveParts, SizeTwoPartsForceSingletonHalves) {
    const auto g = edge_free(3, 2);
    const auto res = halve_parts(g, 4);
    ASSERT_TRUE(res.ok);
    for (std::int32_t lab = 0; lab < 2; ++lab)
        for (const auto& vs : res.split.block_vertices(g, lab)) EXPECT_EQ(vs.size(), 1u);
}

TEST(HalveParts, HalvesAreExactlyEqualAlways) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto g = gen_random(3, 8, 4, 2, seed);
        const auto res = halve_parts(g, seed, 100, SplitChecks::StructuralOnly);
        ASSERT_TRUE(res.ok);
        for (PartIndex i = 0; i < g.num_parts(); ++i) {
            std::int64_t c0 = 0, c1 = 0;
            for (Vertex v = g.part_offset(i); v < g.part_offset(i) + g.part_size(i); ++v)
                (res.split.labels[static_cast<std::size_t>(v)] == 0 ? c0 : c1)++;
            EXPECT_EQ(c0, c1);
        }
    }
}

TEST(HalveParts, OddPartRejected) {
    const auto g = edge_free(2, 3);
    const auto res = halve_parts(g, 1);
    EXPECT_FALSE(res.ok);
    EXPECT_NE(res.diagnostics.find("odd"), std::string::npos);
}

TEST(HalveParts, CompleteBipartiteDegreeBoundHolds) {
    // Every vertex sees the whole other part, which splits exactly in half,
    // so the same-half degree is n' against a cap of n' + (2n')^(2/3).
    const Vertex two_n = 12;
    const auto g = complete_bipartite(two_n);
    const auto res = halve_parts(g, 17, 100, SplitChecks::Full);
    ASSERT_TRUE(res.ok) << res.diagnostics;
    const double cap = two_n / 2.0 + std::pow(two_n, 2.0 / 3.0);
    for (Vertex v = 0; v < g.num_vertices(); ++v) {
        std::int64_t same = 0;
        for (Vertex w : g.neighbors(v))
            if (res.split.labels[static_cast<std::size_t>(w)] ==
                res.split.labels[static_cast<std::size_t>(v)])
                ++same;
        EXPECT_LE(static_cast<double>(same), cap);
        EXPECT_EQ(same, two_n / 2); // exact: the matched half splits evenly
    }
}

TEST(PlanReduction, HalvingDepthFromGamma) {
    const auto plan = plan_reduction(0.2, 0.1, 1000);
    EXPECT_EQ(plan.kind, ReductionCase::HalveThenSplit);
    EXPECT_EQ(plan.j, 6); // 2^5 = 32 < 46.4 <= 64 = 2^6
    EXPECT_NEAR(plan.values.at("gamma43_n"), 46.41588833612779, 1e-9);
}

TEST(PlanReduction, DegreeRecursion) {
    ReductionPlan plan;
    plan.delta_seq = {100.0};
    // One explicit step of the recursion, against independent arithmetic.
    const double d1 = plan.delta_seq[0] / 2 + std::pow(plan.delta_seq[0], 2.0 / 3.0);
    EXPECT_NEAR(d1, 71.54434690031883, 1e-9);
    const auto full = plan_reduction(0.2, 0.3, 400);
    ASSERT_GE(full.delta_seq.size(), 2u);
    EXPECT_NEAR(full.delta_seq[1],
                full.delta_seq[0] / 2 + std::pow(full.delta_seq[0], 2.0 / 3.0), 1e-12);
}

TEST(PlanReduction, TrivialAndDirectCases) {
    EXPECT_EQ(plan_reduction(0.3, 0.1, 9).kind, ReductionCase::EdgeFreeTrivial);  // n < 10
    EXPECT_EQ(plan_reduction(0.3, 0.1, 20).kind, ReductionCase::DirectSplit);     // 10 <= 20 <= 21.5
    EXPECT_EQ(plan_reduction(0.3, 0.1, 22).kind, ReductionCase::HalveThenSplit);
    EXPECT_THROW(plan_reduction(0.0, 0.1, 5), InstanceError);
    EXPECT_THROW(plan_reduction(0.1, 1.0, 5), InstanceError);
}

TEST(PlanReduction, TelescopedCubeRootBound) {
    for (double gamma : {0.05, 0.1, 0.2}) {
        for (std::int64_t n : {200, 1000, 20000, 500000}) {
            const auto plan = plan_reduction(0.25, gamma, n);
            if (plan.kind != ReductionCase::HalveThenSplit) continue;
            const double lhs = std::cbrt(plan.delta_seq.back());
            const double rhs = std::cbrt(plan.delta_seq.front()) /
                                   std::pow(2.0, static_cast<double>(plan.j) / 3.0) +
                               4.0;
            EXPECT_LE(lhs, rhs) << "gamma " << gamma << " n " << n;
        }
    }
}

TEST(PlanReduction, DivisibilityDeletions) {
    const auto plan = plan_reduction(0.2, 0.1, 1000);
    const std::int64_t leaves = 1ll << plan.j;
    EXPECT_EQ(plan.deletions_per_part, 1000 % leaves);
    EXPECT_EQ(plan.n_prime, (1000 - plan.deletions_per_part) / leaves);
    EXPECT_LE(plan.deletions_per_part, leaves);
}

TEST(ReduceAndPack, TinyEdgeFreeYieldsFullPartition) {
    const auto g = edge_free(4, 5);
    ReducePackOptions opts;
    const auto res = reduce_and_pack(g, 0.3, 0.1, opts, 3); // 5 < 1/gamma
    EXPECT_EQ(res.plan.kind, ReductionCase::EdgeFreeTrivial);
    EXPECT_EQ(res.packing.transversals.size(), 5u);
    EXPECT_TRUE(verify_packing(g, res.packing).empty());
    EXPECT_TRUE(res.packing.complete);
}

TEST(ReduceAndPack, SparseInstanceVerifies) {
    const auto g = gen_random(6, 16, 4, 1, 21);
    ReducePackOptions opts;
    opts.solve.p = 0.3;
    opts.solve.policy.round_retries = 3;
    const auto res = reduce_and_pack(g, 0.25, 0.25, opts, 9);
    EXPECT_TRUE(verify_packing(g, res.packing).empty());
    EXPECT_GT(res.packing.transversals.size(), 0u);
}

TEST(ReduceAndPack, DoubleHalvingReachesSingletonLeaves) {
    // gamma = 0.8, n = 4: the plan halves twice, and two successive halvings
    // of size-4 parts leave exactly one vertex per part in each leaf.
    const auto plan = plan_reduction(0.25, 0.8, 4);
    ASSERT_EQ(plan.kind, ReductionCase::HalveThenSplit);
    EXPECT_EQ(plan.j, 2);

    const auto g = edge_free(3, 4);
    const auto first = halve_parts(g, 5);
    ASSERT_TRUE(first.ok);
    const auto block0 = first.split.block_vertices(g, 0);
    const auto sub = induce_subgraph(g, block0);
    const auto second = halve_parts(sub.graph, 6);
    ASSERT_TRUE(second.ok);
    for (std::int32_t lab = 0; lab < 2; ++lab)
        for (const auto& vs : second.split.block_vertices(sub.graph, lab))
            EXPECT_EQ(vs.size(), 1u);

    ReducePackOptions opts;
    opts.solve.policy.round_retries = 3;
    const auto res = reduce_and_pack(g, 0.25, 0.8, opts, 2);
    EXPECT_TRUE(verify_packing(g, res.packing).empty());
}

TEST(InduceSubgraph, KeepsEdgesAndMapsBack) {
    const auto g = gen_random(3, 6, 4, 2, 12);
    std::vector<std::vector<Vertex>> pick(3);
    for (PartIndex i = 0; i < 3; ++i)
        for (Vertex local = 0; local < 6; local += 2)
            pick[static_cast<std::size_t>(i)].push_back(g.vertex_id(i, local));
    const auto sub = induce_subgraph(g, pick);
    EXPECT_EQ(sub.graph.num_vertices(), 9);
    for (Vertex a = 0; a < sub.graph.num_vertices(); ++a)
        for (Vertex b = a + 1; b < sub.graph.num_vertices(); ++b)
            EXPECT_EQ(sub.graph.is_edge(a, b),
                      g.is_edge(sub.to_parent[static_cast<std::size_t>(a)],
                                sub.to_parent[static_cast<std::size_t>(b)]));
}
