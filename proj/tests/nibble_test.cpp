#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "itpack/generators.hpp"
#include "itpack/nibble.hpp"
#include "itpack/oracle.hpp"

using namespace itpack;

namespace {

MultipartiteGraph edge_free(PartIndex k, Vertex n) { return gen_random(k, n, 0, 0, 1); }

DynBitset no_used(const MultipartiteGraph& g) {
    return DynBitset(static_cast<std::size_t>(g.num_vertices()));
}

// Checks the structural invariants of a round state: each partial transversal
// independent and covering exactly the non-active parts, partials pairwise
// disjoint, candidates not used, not claimed elsewhere, and not adjacent to
// their own partial.
void assert_state_invariants(const MultipartiteGraph& g, const RoundState& st) {
    std::set<Vertex> seen;
    for (std::size_t l = 0; l < st.slots.size(); ++l) {
        const auto& slot = st.slots[l];
        ASSERT_TRUE(check_transversal(g, slot.partial).empty()) << "slot " << l;
        for (PartIndex i = 0; i < g.num_parts(); ++i) {
            const bool active =
                std::find(slot.active.begin(), slot.active.end(), i) != slot.active.end();
            ASSERT_EQ(slot.partial.covers(i), !active) << "slot " << l << " part " << i;
        }
        for (PartIndex i = 0; i < g.num_parts(); ++i) {
            if (!slot.partial.covers(i)) continue;
            const Vertex v = slot.partial.vertex_in(i);
            ASSERT_TRUE(seen.insert(v).second) << "partials share vertex " << v;
            ASSERT_TRUE(st.claimed.test(static_cast<std::size_t>(v)));
        }
        for (PartIndex i : slot.active) {
            ASSERT_EQ(slot.size[static_cast<std::size_t>(i)],
                      static_cast<std::int64_t>(slot.cand[static_cast<std::size_t>(i)].count()));
            slot.cand[static_cast<std::size_t>(i)].for_each_set([&](std::size_t local) {
                const Vertex v = g.vertex_id(i, static_cast<Vertex>(local));
                ASSERT_FALSE(st.used.test(static_cast<std::size_t>(v)));
                for (Vertex w : g.neighbors(v)) {
                    const PartIndex j = g.part_of(w);
                    if (slot.partial.covers(j))
                        ASSERT_NE(slot.partial.vertex_in(j), w)
                            << "candidate adjacent to own partial";
                }
            });
        }
    }
}

} // namespace

TEST(InitRound, FullCandidatesAtStart) {
    const auto g = gen_random(3, 5, 3, 1, 2);
    const auto sched = make_practical_schedule(0.2, 5, 0.4, 3, 4);
    const auto st = init_round(g, no_used(g), 1, sched, sched.m_r(1));
    EXPECT_EQ(st.m, 2);
    for (const auto& slot : st.slots)
        for (PartIndex i = 0; i < 3; ++i)
            EXPECT_EQ(slot.size[static_cast<std::size_t>(i)], 5);
    assert_state_invariants(g, st);
}

TEST(InitRound, DepletedPartRejected) {
    const auto g = edge_free(2, 1);
    DynBitset used = no_used(g);
    used.set(0); // all of part 0
    const auto sched = make_practical_schedule(0.2, 4, 0.3, 2, 2);
    EXPECT_THROW(init_round(g, used, 1, sched, 1), NibbleError);
}

TEST(InitRound, SecondRoundSeesConsumedVertices) {
    const auto g = edge_free(3, 8);
    const auto sched = make_practical_schedule(0.2, 8, 0.25, 4, 3);
    const MonitorConfig mcfg = monitors_for(SolveOptions{}, sched);
    const auto rr =
        run_round(g, no_used(g), 1, sched, mcfg, RetryPolicy::observe_all(), 17, 1, sched.m_r(1));
    ASSERT_TRUE(rr.ok);
    ASSERT_EQ(rr.transversals.size(), 2u);
    DynBitset used = no_used(g);
    for (const auto& t : rr.transversals)
        for (PartIndex i = 0; i < 3; ++i) used.set(static_cast<std::size_t>(t.vertex_in(i)));
    const auto st2 = init_round(g, used, 2, sched, sched.m_r(2));
    for (PartIndex i = 0; i < 3; ++i) EXPECT_EQ(st2.initial_size[static_cast<std::size_t>(i)], 6);
}

TEST(RunIteration, FullActivationCompletesEdgeFreeInOneStep) {
    const auto g = edge_free(4, 6);
    NibbleSchedule sched;
    sched.eps = 0.2;
    sched.n = 6;
    sched.p = 1.0; // every part activates
    sched.delta = std::pow(0.2, 5);
    sched.r_star = 1;
    sched.t_star = 1;
    const auto st = init_round(g, no_used(g), 1, sched, 1);
    const auto res = run_iteration(st, sched, MonitorConfig{.slack_factor = 6}, 33);
    EXPECT_FALSE(res.hard_failure);
    EXPECT_TRUE(res.next.slots[0].active.empty());
    EXPECT_TRUE(res.next.slots[0].partial.full());
    EXPECT_TRUE(check_transversal(g, res.next.slots[0].partial).empty());
}

TEST(RunIteration, FrozenWhenActivationIsZero) {
    const auto g = gen_random(3, 6, 3, 1, 4);
    NibbleSchedule sched;
    sched.eps = 0.3;
    sched.n = 6;
    sched.p = 0.0; // p_r = 0 as well: nothing activates, nothing is deleted
    sched.delta = std::pow(0.3, 5);
    sched.r_star = 1;
    sched.t_star = 1;
    const auto st = init_round(g, no_used(g), 1, sched, 2);
    const auto res = run_iteration(st, sched, MonitorConfig{.slack_factor = 6}, 5);
    EXPECT_FALSE(res.hard_failure);
    for (std::size_t l = 0; l < 2; ++l) {
        EXPECT_EQ(res.next.slots[l].active.size(), 3u);
        for (PartIndex i = 0; i < 3; ++i)
            EXPECT_EQ(res.next.slots[l].size[static_cast<std::size_t>(i)], 6);
    }
}

TEST(RunIteration, SharedSelectionAcceptedNowhere) {
    // Two transversals over singleton parts select the same vertices; with
    // p = 1 both parts activate for both transversals, every vertex shows up
    // twice in the activated multiset, and nobody accepts anything.
    const auto g = edge_free(2, 1);
    NibbleSchedule sched;
    sched.eps = 0.5;
    sched.n = 1;
    sched.p = 1.0;
    sched.delta = std::pow(0.5, 5);
    sched.r_star = 1;
    sched.t_star = 1;
    RoundState st;
    st.graph = &g;
    st.r = 1;
    st.m = 2;
    st.used = no_used(g);
    st.claimed = no_used(g);
    st.initial_size = {1, 1};
    st.d0_effective = 0;
    st.slots.resize(2);
    for (auto& slot : st.slots) {
        slot.partial = Transversal(2);
        slot.active = {0, 1};
        slot.cand = {DynBitset(1, true), DynBitset(1, true)};
        slot.size = {1, 1};
    }
    const auto res = run_iteration(st, sched, MonitorConfig{.slack_factor = 2}, 8);
    for (const auto& ps : res.sample.per_transversal) {
        EXPECT_EQ(ps.sel_vertex.size(), 2u);
        EXPECT_TRUE(ps.accepted.empty());
    }
}

TEST(RunIteration, DeletionFrequencyMatchesTargetRate) {
    // One small part adjacent to a tracked vertex, the rest neutral. The
    // combined neighbor-hit-or-coin deletion must fire with probability
    // exactly p_r, independent of what the selections turn out to be.
    const PartIndex k = 3;
    std::vector<Vertex> sizes(static_cast<std::size_t>(k), 4);
    std::vector<std::pair<Vertex, Vertex>> edges;
    // Vertex 0 (part 0) has two neighbors in part 1 (size 4), none in part 2.
    edges.emplace_back(0, 4);
    edges.emplace_back(0, 5);
    const auto g = MultipartiteGraph::from_edges(k, sizes, edges);
    const auto sched = make_practical_schedule(0.1, 4, 0.5, 2, 2);
    const double p_r = sched.p_r(1);
    ASSERT_GT(p_r, 0.5 * 2.0 / 4.0); // the product-formula rate stays below p_r

    const auto st = init_round(g, no_used(g), 1, sched, 1);
    const int trials = 20000;
    int usable = 0, deleted = 0, isolated_usable = 0, isolated_deleted = 0;
    for (int trial = 0; trial < trials; ++trial) {
        const auto res =
            run_iteration(st, sched, MonitorConfig{.slack_factor = 2}, 1000 + trial);
        // Condition on part 0 staying un-activated: that keeps it alive and
        // is independent of both deletion channels of its vertices.
        const auto& ps = res.sample.per_transversal[0];
        bool part0_activated = false;
        for (std::size_t s = 0; s < ps.sel_part.size(); ++s)
            if (ps.sel_part[s] == 0 && ps.activated[s]) part0_activated = true;
        if (!part0_activated) {
            const auto& slot = res.next.slots[0];
            ++usable;
            if (!slot.cand[0].test(0)) ++deleted;
            ++isolated_usable;
            if (!slot.cand[0].test(3)) ++isolated_deleted; // vertex 3 is isolated
        }
    }
    ASSERT_GT(usable, trials / 2);
    const double sd = std::sqrt(p_r * (1 - p_r) / usable);
    EXPECT_NEAR(static_cast<double>(deleted) / usable, p_r, 4 * sd);
    EXPECT_NEAR(static_cast<double>(isolated_deleted) / isolated_usable, p_r, 4 * sd);
}

TEST(RunIteration, InvariantsHoldThroughRound) {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        const auto g = gen_random(4, 10, 4, 2, seed);
        const auto sched = make_practical_schedule(0.3, 10, 0.3, 2, 5);
        auto st = init_round(g, no_used(g), 1, sched, sched.m_r(1));
        const MonitorConfig mcfg = monitors_for(SolveOptions{}, sched);
        for (std::int64_t t = 0; t < sched.t_star; ++t) {
            const auto res = run_iteration(st, sched, mcfg, derive_seed(seed, {7, (std::uint64_t)t}));
            ASSERT_FALSE(res.hard_failure) << res.failure;
            // Sizes never grow, and accepted sets are pairwise disjoint.
            std::set<Vertex> accepted;
            for (std::size_t l = 0; l < res.sample.per_transversal.size(); ++l) {
                const auto& ps = res.sample.per_transversal[l];
                for (Vertex v : ps.accepted) ASSERT_TRUE(accepted.insert(v).second);
                for (PartIndex i : res.next.slots[l].active)
                    ASSERT_LE(res.next.slots[l].size[static_cast<std::size_t>(i)],
                              st.slots[l].size[static_cast<std::size_t>(i)]);
            }
            st = res.next;
            assert_state_invariants(g, st);
        }
    }
}

TEST(RunRound, EdgeFreePracticalRoundYieldsDisjointTransversals) {
    const auto g = edge_free(3, 8);
    const auto sched = make_practical_schedule(0.25, 8, 0.5, 1, 8);
    const MonitorConfig mcfg = monitors_for(SolveOptions{}, sched);
    const auto rr =
        run_round(g, no_used(g), 1, sched, mcfg, RetryPolicy::observe_all(), 21, 1, 2);
    ASSERT_TRUE(rr.ok) << rr.error;
    ASSERT_EQ(rr.transversals.size(), 2u);
    Packing p;
    p.transversals = rr.transversals;
    EXPECT_TRUE(verify_packing(g, p).empty());
    EXPECT_EQ(rr.trace.size(), 8u);
    for (const auto& row : rr.trace) EXPECT_TRUE(row.monitors_pass);
}

TEST(RunRound, MatchingInstanceVerifies) {
    const auto g = gen_yuster(4, 20, 5);
    const auto sched = make_practical_schedule(0.25, 20, 0.25, 1, 6);
    const MonitorConfig mcfg = monitors_for(SolveOptions{}, sched);
    const auto rr =
        run_round(g, no_used(g), 1, sched, mcfg, RetryPolicy::observe_all(), 9, 1, sched.m_r(1));
    ASSERT_TRUE(rr.ok) << rr.error;
    EXPECT_EQ(rr.transversals.size(), static_cast<std::size_t>(sched.m_r(1)));
    Packing p;
    p.transversals = rr.transversals;
    EXPECT_TRUE(verify_packing(g, p).empty());
}

TEST(RunRound, InjectedDegreeBoundFailureExhaustsBudget) {
    const auto g = gen_random(4, 8, 4, 2, 3);
    const auto sched = make_practical_schedule(0.25, 8, 0.3, 1, 4);
    MonitorConfig mcfg = monitors_for(SolveOptions{}, sched);
    mcfg.degree_anchor_override = 0.01; // far below the true degrees
    mcfg.retry_budget = 3;
    RetryPolicy policy;
    policy.c2 = MonitorAction::Enforce;
    const auto rr = run_round(g, no_used(g), 1, sched, mcfg, policy, 4, 1, 1);
    EXPECT_FALSE(rr.ok);
    EXPECT_TRUE(rr.budget_exhausted);
    EXPECT_NE(rr.error.find("worst"), std::string::npos) << rr.error;
}

TEST(Pack, EdgeFreePartitionsCompletely) {
    const auto g = edge_free(3, 4);
    const auto sched = make_practical_schedule(0.25, 4, 0.5, 4, 6);
    const MonitorConfig mcfg = monitors_for(SolveOptions{}, sched);
    RetryPolicy policy = RetryPolicy::observe_all();
    policy.round_retries = 5;
    const auto pr = pack(g, sched, mcfg, policy, 12);
    EXPECT_TRUE(pr.packing.complete) << pr.packing.note;
    EXPECT_EQ(pr.packing.transversals.size(), 4u);
    std::set<Vertex> all;
    for (const auto& t : pr.packing.transversals)
        for (PartIndex i = 0; i < 3; ++i) all.insert(t.vertex_in(i));
    EXPECT_EQ(all.size(), 12u); // a partition of the vertex set
}

TEST(Pack, ExtremalInstanceFlaggedInfeasible) {
    const auto g = gen_cliques_extremal(3);
    const auto sched = make_practical_schedule(0.25, 3, 0.4, 3, 3);
    const MonitorConfig mcfg = monitors_for(SolveOptions{}, sched);
    RetryPolicy policy = RetryPolicy::observe_all();
    policy.round_retries = 1;
    const auto pr = pack(g, sched, mcfg, policy, 3);
    EXPECT_TRUE(pr.packing.transversals.empty());
    EXPECT_FALSE(pr.packing.complete);
    EXPECT_TRUE(pr.packing.infeasible);
}

TEST(Pack, NeverBeatsExactOracle) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto g = gen_random(5, 5, 2, 1, seed);
        SolveOptions opts;
        opts.p = 0.4;
        opts.eps = 0.2;
        opts.policy.round_retries = 3;
        const auto pr = solve(g, opts, seed + 100);
        const auto mx = max_disjoint_transversals(g);
        EXPECT_TRUE(verify_packing(g, pr.packing).empty());
        EXPECT_LE(pr.packing.transversals.size(), mx.count) << "seed " << seed;
    }
}

TEST(Pack, DeterministicAcrossWorkerCounts) {
    const auto g = gen_random(6, 12, 4, 2, 8);
    SolveOptions opts;
    opts.p = 0.3;
    opts.eps = 0.2;
    std::vector<std::vector<std::vector<Vertex>>> outs;
    for (int workers : {1, 2, 8}) {
        opts.workers = workers;
        const auto pr = solve(g, opts, 99);
        std::vector<std::vector<Vertex>> raw;
        for (const auto& t : pr.packing.transversals) raw.push_back(t.raw());
        outs.push_back(std::move(raw));
    }
    EXPECT_EQ(outs[0], outs[1]);
    EXPECT_EQ(outs[0], outs[2]);
    EXPECT_FALSE(outs[0].empty());
}

TEST(Pack, SameSeedSameResult) {
    const auto g = gen_yuster(5, 10, 2);
    SolveOptions opts;
    opts.p = 0.25;
    const auto a = solve(g, opts, 55);
    const auto b = solve(g, opts, 55);
    ASSERT_EQ(a.packing.transversals.size(), b.packing.transversals.size());
    for (std::size_t i = 0; i < a.packing.transversals.size(); ++i)
        EXPECT_EQ(a.packing.transversals[i], b.packing.transversals[i]);
}
