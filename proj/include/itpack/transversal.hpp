#pragma once

#include <string>
#include <vector>

#include "itpack/graph.hpp"

namespace itpack {

/// One chosen vertex per covered part. choice[i] == kUncovered marks part i
/// as not (yet) covered; a full transversal covers every part.
class Transversal {
public:
    static constexpr Vertex kUncovered = -1;

    Transversal() = default;
    explicit Transversal(PartIndex k) : choice_(static_cast<std::size_t>(k), kUncovered) {}

    PartIndex num_parts() const { return static_cast<PartIndex>(choice_.size()); }
    bool covers(PartIndex i) const { return choice_[static_cast<std::size_t>(i)] != kUncovered; }
    Vertex vertex_in(PartIndex i) const { return choice_[static_cast<std::size_t>(i)]; }

    void assign(PartIndex i, Vertex v) { choice_[static_cast<std::size_t>(i)] = v; }
    void unassign(PartIndex i) { choice_[static_cast<std::size_t>(i)] = kUncovered; }

    bool full() const {
        for (Vertex v : choice_)
            if (v == kUncovered) return false;
        return true;
    }

    std::size_t covered_count() const {
        std::size_t c = 0;
        for (Vertex v : choice_)
            if (v != kUncovered) ++c;
        return c;
    }

    const std::vector<Vertex>& raw() const { return choice_; }

    friend bool operator==(const Transversal&, const Transversal&) = default;

private:
    std::vector<Vertex> choice_;
};

/// Checks membership (each chosen vertex lies in the part it claims) and
/// independence over the covered parts. Empty result means valid.
inline std::vector<std::string> check_transversal(const MultipartiteGraph& g, const Transversal& t) {
    std::vector<std::string> issues;
    if (t.num_parts() != g.num_parts()) {
        issues.push_back("covers " + std::to_string(t.num_parts()) + " parts, graph has " +
                         std::to_string(g.num_parts()));
        return issues;
    }
    for (PartIndex i = 0; i < g.num_parts(); ++i) {
        if (!t.covers(i)) continue;
        const Vertex v = t.vertex_in(i);
        if (v < 0 || v >= g.num_vertices() || g.part_of(v) != i) {
            issues.push_back("part " + std::to_string(i) + ": vertex " + std::to_string(v) +
                             " does not belong to it");
            continue;
        }
        for (Vertex w : g.neighbors(v)) {
            const PartIndex j = g.part_of(w);
            if (j > i && t.covers(j) && t.vertex_in(j) == w)
                issues.push_back("independence: edge between chosen vertices " + std::to_string(v) +
                                 " and " + std::to_string(w));
        }
    }
    return issues;
}

/// A list of pairwise-disjoint full independent transversals plus outcome
/// flags describing how the solve ended.
struct Packing {
    std::vector<Transversal> transversals;
    bool complete = true;     // no round ended early
    bool infeasible = false;  // a completion step proved/declared no progress possible
    bool budget_exhausted = false;
    std::string note;
};

} // namespace itpack
