#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace itpack {

using Vertex = std::int32_t;
using PartIndex = std::int32_t;

class InstanceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Vertex-partitioned graph. Global vertex ids are assigned part by part
/// (part 0 owns ids 0..sizes[0]-1, and so on), every edge joins two distinct
/// parts, and the structure is immutable after construction, so it can be
/// shared freely across threads.
///
/// Adjacency lists are sorted by global id. Because ids are grouped by part,
/// a sorted list is also grouped by part, and the neighbors of v inside one
/// part form a contiguous subrange found by binary search.
class MultipartiteGraph {
public:
    MultipartiteGraph() = default;

    static MultipartiteGraph from_edges(PartIndex k, std::vector<Vertex> part_sizes,
                                        const std::vector<std::pair<Vertex, Vertex>>& edges) {
        if (k <= 0) throw InstanceError("number of parts must be positive");
        if (static_cast<std::size_t>(k) != part_sizes.size())
            throw InstanceError("k does not match the number of part sizes");
        MultipartiteGraph g;
        g.part_sizes_ = std::move(part_sizes);
        g.part_offset_.resize(static_cast<std::size_t>(k) + 1, 0);
        for (PartIndex i = 0; i < k; ++i) {
            if (g.part_sizes_[static_cast<std::size_t>(i)] < 0)
                throw InstanceError("part " + std::to_string(i) + " has negative size");
            g.part_offset_[static_cast<std::size_t>(i) + 1] =
                g.part_offset_[static_cast<std::size_t>(i)] + g.part_sizes_[static_cast<std::size_t>(i)];
        }
        const Vertex n = g.part_offset_.back();
        g.part_of_.resize(static_cast<std::size_t>(n));
        for (PartIndex i = 0; i < k; ++i)
            for (Vertex v = g.part_offset_[static_cast<std::size_t>(i)];
                 v < g.part_offset_[static_cast<std::size_t>(i) + 1]; ++v)
                g.part_of_[static_cast<std::size_t>(v)] = i;

        std::vector<std::size_t> deg(static_cast<std::size_t>(n), 0);
        std::size_t idx = 0;
        for (const auto& [u, v] : edges) {
            ++idx;
            const std::string where = "edge " + std::to_string(idx - 1);
            if (u < 0 || u >= n || v < 0 || v >= n)
                throw InstanceError(where + ": vertex index out of range");
            if (u == v) throw InstanceError(where + ": self-loop");
            if (g.part_of_[static_cast<std::size_t>(u)] == g.part_of_[static_cast<std::size_t>(v)])
                throw InstanceError(where + ": intra-part edge between " + std::to_string(u) +
                                    " and " + std::to_string(v));
            ++deg[static_cast<std::size_t>(u)];
            ++deg[static_cast<std::size_t>(v)];
        }
        g.adj_offset_.resize(static_cast<std::size_t>(n) + 1, 0);
        for (Vertex v = 0; v < n; ++v)
            g.adj_offset_[static_cast<std::size_t>(v) + 1] =
                g.adj_offset_[static_cast<std::size_t>(v)] + deg[static_cast<std::size_t>(v)];
        g.adj_.resize(g.adj_offset_.back());
        std::vector<std::size_t> fill(static_cast<std::size_t>(n), 0);
        for (const auto& [u, v] : edges) {
            g.adj_[g.adj_offset_[static_cast<std::size_t>(u)] + fill[static_cast<std::size_t>(u)]++] = v;
            g.adj_[g.adj_offset_[static_cast<std::size_t>(v)] + fill[static_cast<std::size_t>(v)]++] = u;
        }
        for (Vertex v = 0; v < n; ++v) {
            auto b = g.adj_.begin() + static_cast<std::ptrdiff_t>(g.adj_offset_[static_cast<std::size_t>(v)]);
            auto e = g.adj_.begin() + static_cast<std::ptrdiff_t>(g.adj_offset_[static_cast<std::size_t>(v) + 1]);
            std::sort(b, e);
            if (std::adjacent_find(b, e) != e)
                throw InstanceError("duplicate edge incident to vertex " + std::to_string(v));
        }
        return g;
    }

    PartIndex num_parts() const { return static_cast<PartIndex>(part_sizes_.size()); }
    Vertex num_vertices() const { return part_offset_.back(); }
    std::size_t num_edges() const { return adj_.size() / 2; }
    const std::vector<Vertex>& part_sizes() const { return part_sizes_; }
    Vertex part_size(PartIndex i) const { return part_sizes_[static_cast<std::size_t>(i)]; }
    Vertex part_offset(PartIndex i) const { return part_offset_[static_cast<std::size_t>(i)]; }
    PartIndex part_of(Vertex v) const { return part_of_[static_cast<std::size_t>(v)]; }
    Vertex local_index(Vertex v) const { return v - part_offset_[static_cast<std::size_t>(part_of(v))]; }
    Vertex vertex_id(PartIndex i, Vertex local) const { return part_offset_[static_cast<std::size_t>(i)] + local; }

    std::span<const Vertex> neighbors(Vertex v) const {
        return {adj_.data() + adj_offset_[static_cast<std::size_t>(v)],
                adj_.data() + adj_offset_[static_cast<std::size_t>(v) + 1]};
    }

    /// Neighbors of v inside part i (contiguous because adjacency is sorted).
    std::span<const Vertex> neighbors_in_part(Vertex v, PartIndex i) const {
        const auto all = neighbors(v);
        const Vertex lo = part_offset_[static_cast<std::size_t>(i)];
        const Vertex hi = part_offset_[static_cast<std::size_t>(i) + 1];
        const Vertex* b = std::lower_bound(all.data(), all.data() + all.size(), lo);
        const Vertex* e = std::lower_bound(b, all.data() + all.size(), hi);
        return {b, e};
    }

    std::size_t degree(Vertex v) const {
        return adj_offset_[static_cast<std::size_t>(v) + 1] - adj_offset_[static_cast<std::size_t>(v)];
    }

    bool is_edge(Vertex u, Vertex v) const {
        const auto nb = neighbors(u);
        return std::binary_search(nb.begin(), nb.end(), v);
    }

    std::vector<std::pair<Vertex, Vertex>> edge_list() const {
        std::vector<std::pair<Vertex, Vertex>> out;
        out.reserve(num_edges());
        for (Vertex u = 0; u < num_vertices(); ++u)
            for (Vertex v : neighbors(u))
                if (u < v) out.emplace_back(u, v);
        return out;
    }

    Vertex min_part_size() const {
        return part_sizes_.empty() ? 0 : *std::min_element(part_sizes_.begin(), part_sizes_.end());
    }

private:
    std::vector<Vertex> part_sizes_;
    std::vector<Vertex> part_offset_{0};
    std::vector<PartIndex> part_of_;
    std::vector<std::size_t> adj_offset_{0};
    std::vector<Vertex> adj_;
};

struct GraphStats {
    std::size_t max_degree = 0;         // max over vertices of deg(v)
    std::size_t local_degree = 0;       // max over (v, part) of |N(v) ∩ part|
    std::size_t partite_min_degree = 0; // min over v and foreign parts of |N(v) ∩ part|
    Vertex min_part_size = 0;
    Vertex max_part_size = 0;
};

inline GraphStats stats(const MultipartiteGraph& g) {
    GraphStats s;
    if (g.num_parts() == 0) return s;
    s.min_part_size = *std::min_element(g.part_sizes().begin(), g.part_sizes().end());
    s.max_part_size = *std::max_element(g.part_sizes().begin(), g.part_sizes().end());
    const PartIndex k = g.num_parts();
    std::size_t pmd = (k >= 2 && g.num_vertices() > 0) ? SIZE_MAX : 0;
    for (Vertex v = 0; v < g.num_vertices(); ++v) {
        s.max_degree = std::max(s.max_degree, g.degree(v));
        const auto nb = g.neighbors(v);
        // Walk the sorted list once, counting the run inside each part.
        std::size_t gi = 0;
        PartIndex covered = 0;
        std::size_t vmin = SIZE_MAX;
        while (gi < nb.size()) {
            const PartIndex part = g.part_of(nb[gi]);
            std::size_t run = 0;
            while (gi < nb.size() && g.part_of(nb[gi]) == part) {
                ++run;
                ++gi;
            }
            s.local_degree = std::max(s.local_degree, run);
            vmin = std::min(vmin, run);
            ++covered;
        }
        if (k >= 2) {
            if (covered < k - 1) vmin = 0; // some foreign part has no neighbor of v
            pmd = std::min(pmd, vmin);
        }
    }
    s.partite_min_degree = (pmd == SIZE_MAX) ? 0 : pmd;
    return s;
}

/// Same parts; edges are exactly the cross-part non-edges of g. Applying it
/// twice returns the original edge set.
inline MultipartiteGraph partite_complement(const MultipartiteGraph& g) {
    std::vector<std::pair<Vertex, Vertex>> edges;
    const Vertex n = g.num_vertices();
    for (Vertex u = 0; u < n; ++u) {
        const auto nb = g.neighbors(u);
        std::size_t gi = 0;
        for (Vertex v = u + 1; v < n; ++v) {
            while (gi < nb.size() && nb[gi] < v) ++gi;
            const bool adjacent = gi < nb.size() && nb[gi] == v;
            if (!adjacent && g.part_of(u) != g.part_of(v)) edges.emplace_back(u, v);
        }
    }
    return MultipartiteGraph::from_edges(g.num_parts(), g.part_sizes(), edges);
}

/// Simple graph plus one color list per vertex.
struct ListAssignment {
    Vertex n = 0;
    std::vector<std::pair<Vertex, Vertex>> edges;
    std::vector<std::vector<int>> lists;
};

/// Conflict graph of a list assignment: one part per base vertex, one vertex
/// per (base vertex, color) pair, with (u,c)~(v,c) whenever uv is a base edge
/// and both lists contain c. `colors[v][local]` recovers the color behind a
/// conflict-graph vertex. Every conflict-graph vertex has at most one
/// neighbor in any part.
struct ListColoringGraph {
    MultipartiteGraph graph;
    std::vector<std::vector<int>> colors; // per part, sorted distinct colors
};

inline ListColoringGraph build_list_coloring_graph(const ListAssignment& la) {
    if (la.n < 0) throw InstanceError("negative vertex count");
    if (static_cast<std::size_t>(la.n) != la.lists.size())
        throw InstanceError("list count does not match vertex count");
    ListColoringGraph out;
    out.colors.resize(static_cast<std::size_t>(la.n));
    std::vector<Vertex> sizes(static_cast<std::size_t>(la.n));
    for (Vertex v = 0; v < la.n; ++v) {
        auto colors = la.lists[static_cast<std::size_t>(v)];
        std::sort(colors.begin(), colors.end());
        colors.erase(std::unique(colors.begin(), colors.end()), colors.end());
        if (colors.empty())
            throw InstanceError("vertex " + std::to_string(v) + " has an empty color list");
        out.colors[static_cast<std::size_t>(v)] = std::move(colors);
        sizes[static_cast<std::size_t>(v)] = static_cast<Vertex>(out.colors[static_cast<std::size_t>(v)].size());
    }
    std::vector<Vertex> offset(static_cast<std::size_t>(la.n) + 1, 0);
    for (Vertex v = 0; v < la.n; ++v) offset[static_cast<std::size_t>(v) + 1] = offset[static_cast<std::size_t>(v)] + sizes[static_cast<std::size_t>(v)];
    std::vector<std::pair<Vertex, Vertex>> gamma_edges;
    std::set<std::pair<Vertex, Vertex>> seen;
    for (auto [u, v] : la.edges) {
        if (u < 0 || u >= la.n || v < 0 || v >= la.n)
            throw InstanceError("base edge endpoint out of range");
        if (u == v) throw InstanceError("base graph has a self-loop");
        auto key = std::minmax(u, v);
        if (!seen.insert({key.first, key.second}).second) continue; // tolerate repeats in base input
        const auto& lu = out.colors[static_cast<std::size_t>(u)];
        const auto& lv = out.colors[static_cast<std::size_t>(v)];
        std::size_t a = 0, b = 0;
        while (a < lu.size() && b < lv.size()) {
            if (lu[a] < lv[b]) ++a;
            else if (lu[a] > lv[b]) ++b;
            else {
                gamma_edges.emplace_back(offset[static_cast<std::size_t>(u)] + static_cast<Vertex>(a),
                                         offset[static_cast<std::size_t>(v)] + static_cast<Vertex>(b));
                ++a;
                ++b;
            }
        }
    }
    out.graph = MultipartiteGraph::from_edges(static_cast<PartIndex>(la.n), std::move(sizes), gamma_edges);
    return out;
}

} // namespace itpack
