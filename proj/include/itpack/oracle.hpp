#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "itpack/bitset.hpp"
#include "itpack/graph.hpp"
#include "itpack/transversal.hpp"

namespace itpack {

// Exact brute-force ground truth for small instances. Deliberately written
// without touching the solver code paths, so the two can check each other.

struct Violation {
    std::string kind; // "coverage" | "membership" | "independence" | "disjointness"
    std::string detail;
};

/// Checks every defining property of a packing: per transversal, one vertex
/// per part, membership and independence; across transversals, disjointness.
/// Violations are data, not errors.
inline std::vector<Violation> verify_packing(const MultipartiteGraph& g, const Packing& p) {
    std::vector<Violation> out;
    DynBitset used(static_cast<std::size_t>(g.num_vertices()));
    for (std::size_t idx = 0; idx < p.transversals.size(); ++idx) {
        const auto& t = p.transversals[idx];
        const std::string who = "transversal " + std::to_string(idx);
        if (t.num_parts() != g.num_parts()) {
            out.push_back({"coverage", who + ": wrong number of parts"});
            continue;
        }
        for (PartIndex i = 0; i < g.num_parts(); ++i) {
            if (!t.covers(i)) {
                out.push_back({"coverage", who + ": part " + std::to_string(i) + " uncovered"});
                continue;
            }
            const Vertex v = t.vertex_in(i);
            if (v < 0 || v >= g.num_vertices() || g.part_of(v) != i) {
                out.push_back({"membership", who + ": vertex " + std::to_string(v) +
                                                  " not in part " + std::to_string(i)});
                continue;
            }
            if (used.test(static_cast<std::size_t>(v)))
                out.push_back({"disjointness", who + ": vertex " + std::to_string(v) +
                                                   " already used by an earlier transversal"});
            used.set(static_cast<std::size_t>(v));
        }
        for (PartIndex i = 0; i < g.num_parts(); ++i) {
            if (!t.covers(i)) continue;
            const Vertex v = t.vertex_in(i);
            if (v < 0 || v >= g.num_vertices() || g.part_of(v) != i) continue;
            for (Vertex w : g.neighbors(v)) {
                const PartIndex j = g.part_of(w);
                if (j > i && t.covers(j) && t.vertex_in(j) == w)
                    out.push_back({"independence", who + ": edge inside, " + std::to_string(v) +
                                                       "-" + std::to_string(w)});
            }
        }
    }
    return out;
}

struct OracleResult {
    std::optional<Transversal> witness;
    bool guard_exceeded = false;
    std::uint64_t nodes_explored = 0;
};

namespace oracle_detail {

struct ExistsSearch {
    const MultipartiteGraph& g;
    std::uint64_t guard;
    std::uint64_t nodes = 0;
    bool overflow = false;
    // forbidden[v] counts how many chosen vertices are adjacent to v.
    std::vector<int> forbidden;
    Transversal choice;

    explicit ExistsSearch(const MultipartiteGraph& graph, std::uint64_t node_guard)
        : g(graph), guard(node_guard),
          forbidden(static_cast<std::size_t>(graph.num_vertices()), 0),
          choice(graph.num_parts()) {}

    std::size_t free_count(PartIndex i) const {
        std::size_t c = 0;
        for (Vertex v = g.part_offset(i); v < g.part_offset(i) + g.part_size(i); ++v)
            if (forbidden[static_cast<std::size_t>(v)] == 0) ++c;
        return c;
    }

    bool run(std::vector<PartIndex>& open) {
        if (open.empty()) return true;
        if (++nodes > guard) {
            overflow = true;
            return false;
        }
        // Fail-first: branch on the part with the fewest free vertices.
        std::size_t best_pos = 0, best = SIZE_MAX;
        for (std::size_t pos = 0; pos < open.size(); ++pos) {
            const std::size_t c = free_count(open[pos]);
            if (c < best) {
                best = c;
                best_pos = pos;
            }
        }
        if (best == 0) return false;
        const PartIndex i = open[best_pos];
        std::swap(open[best_pos], open.back());
        open.pop_back();
        // Candidates in ascending degree order.
        std::vector<Vertex> cands;
        for (Vertex v = g.part_offset(i); v < g.part_offset(i) + g.part_size(i); ++v)
            if (forbidden[static_cast<std::size_t>(v)] == 0) cands.push_back(v);
        std::stable_sort(cands.begin(), cands.end(),
                         [&](Vertex a, Vertex b) { return g.degree(a) < g.degree(b); });
        for (Vertex v : cands) {
            choice.assign(i, v);
            for (Vertex w : g.neighbors(v)) ++forbidden[static_cast<std::size_t>(w)];
            if (run(open)) return true;
            for (Vertex w : g.neighbors(v)) --forbidden[static_cast<std::size_t>(w)];
            choice.unassign(i);
            if (overflow) return false;
        }
        open.push_back(i);
        std::swap(open[best_pos], open.back());
        return false;
    }
};

} // namespace oracle_detail

/// Exact existence of an independent transversal, by backtracking with
/// forward pruning. Sound and complete as long as the node guard is not hit.
inline OracleResult exists_transversal(const MultipartiteGraph& g,
                                       std::uint64_t node_guard = 1'000'000) {
    OracleResult res;
    for (PartIndex i = 0; i < g.num_parts(); ++i)
        if (g.part_size(i) == 0) return res; // empty part: trivially none
    oracle_detail::ExistsSearch search(g, node_guard);
    std::vector<PartIndex> open(static_cast<std::size_t>(g.num_parts()));
    for (PartIndex i = 0; i < g.num_parts(); ++i) open[static_cast<std::size_t>(i)] = i;
    if (search.run(open)) res.witness = search.choice;
    res.guard_exceeded = search.overflow;
    res.nodes_explored = search.nodes;
    return res;
}

struct MaxPackingResult {
    std::size_t count = 0;
    Packing packing;
    bool guard_exceeded = false;
    std::uint64_t nodes_explored = 0;
};

namespace oracle_detail {

struct MaxPackSearch {
    const MultipartiteGraph& g;
    std::uint64_t guard;
    std::uint64_t nodes = 0;
    bool overflow = false;
    DynBitset used;
    std::vector<int> forb; // count of already-chosen neighbors, within one transversal
    std::vector<Transversal> current, best;

    explicit MaxPackSearch(const MultipartiteGraph& graph, std::uint64_t node_guard)
        : g(graph), guard(node_guard), used(static_cast<std::size_t>(graph.num_vertices())),
          forb(static_cast<std::size_t>(graph.num_vertices()), 0) {}

    std::size_t min_available() const {
        std::size_t m = SIZE_MAX;
        for (PartIndex i = 0; i < g.num_parts(); ++i) {
            std::size_t c = 0;
            for (Vertex v = g.part_offset(i); v < g.part_offset(i) + g.part_size(i); ++v)
                if (!used.test(static_cast<std::size_t>(v))) ++c;
            m = std::min(m, c);
        }
        return m == SIZE_MAX ? 0 : m;
    }

    // Disjoint transversals all use distinct part-0 vertices, so packings are
    // enumerated in ascending part-0 order; that removes the permutation
    // symmetry between the transversals of a packing.
    void explore(Vertex min_first) {
        if (current.size() > best.size()) best = current;
        if (overflow) return;
        if (current.size() + min_available() <= best.size()) return; // cannot beat best
        Transversal t(g.num_parts());
        for (Vertex v0 = std::max(min_first, g.part_offset(0));
             v0 < g.part_offset(0) + g.part_size(0); ++v0) {
            if (used.test(static_cast<std::size_t>(v0))) continue;
            if (++nodes > guard) {
                overflow = true;
                return;
            }
            t.assign(0, v0);
            for (Vertex w : g.neighbors(v0)) ++forb[static_cast<std::size_t>(w)];
            enumerate(1, t, v0);
            for (Vertex w : g.neighbors(v0)) --forb[static_cast<std::size_t>(w)];
            t.unassign(0);
            if (overflow) return;
        }
    }

    // Extends t over parts next_part..k-1, and on every completion commits it
    // and recurses into explore for the next transversal. The adjacency marks
    // of the committed transversal are lifted around the recursion: they
    // constrain this transversal only, not later ones.
    void enumerate(PartIndex next_part, Transversal& t, Vertex v0) {
        if (overflow) return;
        if (next_part == g.num_parts()) {
            for (PartIndex i = 0; i < g.num_parts(); ++i) {
                used.set(static_cast<std::size_t>(t.vertex_in(i)));
                for (Vertex w : g.neighbors(t.vertex_in(i))) --forb[static_cast<std::size_t>(w)];
            }
            current.push_back(t);
            explore(v0 + 1);
            current.pop_back();
            for (PartIndex i = 0; i < g.num_parts(); ++i) {
                used.reset(static_cast<std::size_t>(t.vertex_in(i)));
                for (Vertex w : g.neighbors(t.vertex_in(i))) ++forb[static_cast<std::size_t>(w)];
            }
            return;
        }
        for (Vertex v = g.part_offset(next_part);
             v < g.part_offset(next_part) + g.part_size(next_part); ++v) {
            if (used.test(static_cast<std::size_t>(v)) || forb[static_cast<std::size_t>(v)] > 0)
                continue;
            if (++nodes > guard) {
                overflow = true;
                return;
            }
            t.assign(next_part, v);
            for (Vertex w : g.neighbors(v)) ++forb[static_cast<std::size_t>(w)];
            enumerate(next_part + 1, t, v0);
            for (Vertex w : g.neighbors(v)) --forb[static_cast<std::size_t>(w)];
            t.unassign(next_part);
            if (overflow) return;
        }
    }
};

} // namespace oracle_detail

/// Exact maximum number of pairwise disjoint independent transversals, with
/// one optimal packing. Exponential; intended for k and n of about 5.
inline MaxPackingResult max_disjoint_transversals(const MultipartiteGraph& g,
                                                  std::uint64_t node_guard = 50'000'000) {
    MaxPackingResult res;
    if (g.num_parts() == 0 || g.num_vertices() == 0) return res;
    for (PartIndex i = 0; i < g.num_parts(); ++i)
        if (g.part_size(i) == 0) return res;
    oracle_detail::MaxPackSearch search(g, node_guard);
    search.explore(0);
    res.count = search.best.size();
    res.guard_exceeded = search.overflow;
    res.nodes_explored = search.nodes;
    res.packing.transversals = search.best;
    return res;
}

} // namespace itpack
