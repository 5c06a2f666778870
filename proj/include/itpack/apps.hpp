#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "itpack/graph.hpp"
#include "itpack/nibble.hpp"
#include "itpack/reduce.hpp"

namespace itpack {

// The two end-to-end applications. Both are thin reductions onto the packing
// pipeline, with verification of every returned object against the original
// input; unverifiable members are never returned silently.

/// Pairwise vertex-disjoint k-cliques, one vertex per part each.
struct CliquePacking {
    std::vector<std::vector<Vertex>> cliques;
    bool complete = true;
    std::vector<std::string> warnings;
};

/// A dense k-partite graph packs into cliques exactly when the cross-part
/// complement packs into independent transversals, so build the complement,
/// pack it, and translate back.
inline CliquePacking clique_pack(const MultipartiteGraph& g, double eps, double delta_param,
                                 const ReducePackOptions& opts, std::uint64_t seed) {
    CliquePacking out;
    const GraphStats st = stats(g);
    const auto n = static_cast<double>(g.min_part_size());
    const auto k = static_cast<double>(g.num_parts());
    if (st.min_part_size != st.max_part_size)
        out.warnings.push_back("parts differ in size; proceeding best-effort");
    const double need = (1.0 - (1.0 - delta_param) / k) * n;
    if (static_cast<double>(st.partite_min_degree) < need)
        out.warnings.push_back("partite minimum degree " + std::to_string(st.partite_min_degree) +
                               " below " + std::to_string(need) + "; proceeding best-effort");

    const MultipartiteGraph h = partite_complement(g);
    const GraphStats hs = stats(h);
    // The complement's local degree plays the role of gamma * n.
    double gamma = n > 0 ? (static_cast<double>(hs.local_degree) + 0.5) / n : 0.5;
    gamma = std::min(0.999, std::max(1e-9, gamma));
    ReducePackResult rp = reduce_and_pack(h, eps, gamma, opts, seed);
    out.complete = rp.packing.complete;
    for (auto& w : rp.warnings) out.warnings.push_back(std::move(w));

    for (const auto& t : rp.packing.transversals) {
        std::vector<Vertex> clique;
        for (PartIndex i = 0; i < g.num_parts(); ++i) clique.push_back(t.vertex_in(i));
        bool ok = true;
        for (std::size_t a = 0; a < clique.size() && ok; ++a)
            for (std::size_t b = a + 1; b < clique.size() && ok; ++b)
                if (!g.is_edge(clique[a], clique[b])) ok = false;
        if (!ok)
            throw NibbleError("internal: complement transversal is not a clique in the input");
        out.cliques.push_back(std::move(clique));
    }
    return out;
}

/// Pairwise disjoint list colorings: every coloring proper and within lists,
/// and no vertex repeats a color across colorings.
struct ColoringPacking {
    std::vector<std::map<Vertex, int>> colorings;
    bool complete = true;
    std::vector<std::string> warnings;
    std::size_t min_list_size = 0;
    std::size_t color_degree = 0; // max over (v,c) of neighbors u with c in L_u
};

inline ColoringPacking pack_list_colorings(const ListAssignment& la, const SolveOptions& opts,
                                           std::uint64_t seed) {
    ColoringPacking out;
    const ListColoringGraph lcg = build_list_coloring_graph(la);
    const GraphStats st = stats(lcg.graph);
    out.min_list_size = static_cast<std::size_t>(st.min_part_size);
    out.color_degree = st.max_degree;

    PackResult pr = solve(lcg.graph, opts, seed);
    out.complete = pr.packing.complete;
    for (auto& w : pr.warnings) out.warnings.push_back(std::move(w));
    if (pr.packing.infeasible || !pr.packing.complete)
        out.warnings.push_back("packing stopped early: " + pr.packing.note);

    for (const auto& t : pr.packing.transversals) {
        std::map<Vertex, int> coloring;
        for (PartIndex i = 0; i < lcg.graph.num_parts(); ++i) {
            const Vertex gv = t.vertex_in(i);
            const auto local = static_cast<std::size_t>(lcg.graph.local_index(gv));
            coloring[static_cast<Vertex>(i)] = lcg.colors[static_cast<std::size_t>(i)][local];
        }
        out.colorings.push_back(std::move(coloring));
    }

    // Verify properness, list membership, and disjointness across colorings.
    std::map<Vertex, std::vector<int>> used_colors;
    for (const auto& coloring : out.colorings) {
        for (const auto& [v, c] : coloring) {
            const auto& list = lcg.colors[static_cast<std::size_t>(v)];
            if (!std::binary_search(list.begin(), list.end(), c))
                throw NibbleError("internal: coloring leaves the list of vertex " +
                                  std::to_string(v));
            auto& seen = used_colors[v];
            if (std::find(seen.begin(), seen.end(), c) != seen.end())
                throw NibbleError("internal: vertex " + std::to_string(v) +
                                  " repeats a color across colorings");
            seen.push_back(c);
        }
        for (auto [u, v] : la.edges)
            if (coloring.at(u) == coloring.at(v))
                throw NibbleError("internal: improper coloring on edge " + std::to_string(u) +
                                  "-" + std::to_string(v));
    }
    return out;
}

} // namespace itpack
