#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "itpack/bitset.hpp"
#include "itpack/graph.hpp"
#include "itpack/rng.hpp"
#include "itpack/transversal.hpp"

namespace itpack {

/// Per-part candidate sets for a transversal search, restricted to the parts
/// listed in `scope`. Bitsets are indexed by part-local vertex index.
struct CandidateFamily {
    std::vector<PartIndex> scope;     // covered parts, ascending
    std::vector<DynBitset> per_part;  // indexed by part id; meaningful for scope parts

    static CandidateFamily full_parts(const MultipartiteGraph& g) {
        CandidateFamily f;
        f.per_part.resize(static_cast<std::size_t>(g.num_parts()));
        for (PartIndex i = 0; i < g.num_parts(); ++i) {
            f.scope.push_back(i);
            f.per_part[static_cast<std::size_t>(i)] =
                DynBitset(static_cast<std::size_t>(g.part_size(i)), true);
        }
        return f;
    }
};

enum class FinderStatus {
    Found,
    Exhausted,   // resample budget hit without a certificate either way
    Infeasible,  // exact fallback proved no transversal exists over the candidates
    EmptyCandidates,
};

struct FinderResult {
    FinderStatus status = FinderStatus::Exhausted;
    Transversal transversal;
    std::uint64_t resamples = 0;
};

enum class LllFallback { None, Backtracking };

struct LllConfig {
    std::uint64_t max_resamples = 0; // 0 means "use 50 * |scope|"
    std::uint64_t seed = 0;
    LllFallback fallback = LllFallback::None;
    double fallback_product_guard = 1e5; // max product of candidate-set sizes
};

/// Exact search over the candidate family: returns a transversal iff one
/// exists. The caller bounds the instance via the product guard.
inline std::optional<Transversal> find_transversal_backtracking(const MultipartiteGraph& g,
                                                                const CandidateFamily& cands) {
    struct Frame {
        const MultipartiteGraph& g;
        const CandidateFamily& c;
        std::vector<int> blocked;
        Transversal choice;

        Frame(const MultipartiteGraph& graph, const CandidateFamily& cf)
            : g(graph), c(cf), blocked(static_cast<std::size_t>(graph.num_vertices()), 0),
              choice(graph.num_parts()) {}

        std::size_t free_in(PartIndex i) const {
            std::size_t cnt = 0;
            const auto& bs = c.per_part[static_cast<std::size_t>(i)];
            bs.for_each_set([&](std::size_t local) {
                if (blocked[static_cast<std::size_t>(g.vertex_id(i, static_cast<Vertex>(local)))] == 0)
                    ++cnt;
            });
            return cnt;
        }

        bool solve(std::vector<PartIndex>& open) {
            if (open.empty()) return true;
            std::size_t best_pos = 0, best = SIZE_MAX;
            for (std::size_t pos = 0; pos < open.size(); ++pos) {
                const std::size_t f = free_in(open[pos]);
                if (f < best) {
                    best = f;
                    best_pos = pos;
                }
            }
            if (best == 0) return false;
            const PartIndex i = open[best_pos];
            std::swap(open[best_pos], open.back());
            open.pop_back();
            bool ok = false;
            const auto& bs = c.per_part[static_cast<std::size_t>(i)];
            for (std::size_t local = 0; local < bs.size() && !ok; ++local) {
                if (!bs.test(local)) continue;
                const Vertex v = g.vertex_id(i, static_cast<Vertex>(local));
                if (blocked[static_cast<std::size_t>(v)] > 0) continue;
                choice.assign(i, v);
                for (Vertex w : g.neighbors(v)) ++blocked[static_cast<std::size_t>(w)];
                ok = solve(open);
                if (!ok) {
                    for (Vertex w : g.neighbors(v)) --blocked[static_cast<std::size_t>(w)];
                    choice.unassign(i);
                }
            }
            if (!ok) {
                open.push_back(i);
                std::swap(open[best_pos], open.back());
            }
            return ok;
        }
    };

    Frame f(g, cands);
    std::vector<PartIndex> open = cands.scope;
    if (f.solve(open)) return f.choice;
    return std::nullopt;
}

/// Randomized transversal finder. Samples one uniform vertex per scope part,
/// then repeatedly picks an edge inside the current choice and redraws both
/// endpoint parts, up to the resample budget. Any returned transversal has
/// passed an explicit independence check. With candidate sets of size at
/// least 2e times the maximum degree the expected number of resamples is
/// O(#parts), and the default budget of 50 per part is a generous net.
inline FinderResult find_transversal(const MultipartiteGraph& g, const CandidateFamily& cands,
                                     const LllConfig& cfg) {
    FinderResult res;
    if (cands.scope.empty()) {
        res.status = FinderStatus::Found;
        res.transversal = Transversal(g.num_parts());
        return res;
    }
    for (PartIndex i : cands.scope) {
        if (!cands.per_part[static_cast<std::size_t>(i)].any()) {
            res.status = FinderStatus::EmptyCandidates;
            return res;
        }
    }
    const std::uint64_t budget =
        cfg.max_resamples ? cfg.max_resamples : 50 * static_cast<std::uint64_t>(cands.scope.size());
    Rng rng(cfg.seed);

    std::vector<std::size_t> sizes(cands.per_part.size(), 0);
    for (PartIndex i : cands.scope)
        sizes[static_cast<std::size_t>(i)] = cands.per_part[static_cast<std::size_t>(i)].count();

    Transversal choice(g.num_parts());
    std::vector<char> in_scope(static_cast<std::size_t>(g.num_parts()), 0);
    for (PartIndex i : cands.scope) in_scope[static_cast<std::size_t>(i)] = 1;

    auto redraw = [&](PartIndex i) {
        const auto& bs = cands.per_part[static_cast<std::size_t>(i)];
        const auto j = static_cast<std::size_t>(rng.below(sizes[static_cast<std::size_t>(i)]));
        choice.assign(i, g.vertex_id(i, static_cast<Vertex>(bs.select(j))));
    };

    // Violating part pairs, kept sorted so the next resample target is
    // deterministic for a fixed seed.
    std::set<std::pair<PartIndex, PartIndex>> conflicts;
    auto scan_part = [&](PartIndex i) {
        const Vertex v = choice.vertex_in(i);
        for (Vertex w : g.neighbors(v)) {
            const PartIndex j = g.part_of(w);
            if (!in_scope[static_cast<std::size_t>(j)] || j == i) continue;
            if (choice.vertex_in(j) == w)
                conflicts.insert({std::min(i, j), std::max(i, j)});
        }
    };

    for (PartIndex i : cands.scope) redraw(i);
    for (PartIndex i : cands.scope) scan_part(i);

    while (!conflicts.empty()) {
        if (res.resamples >= budget) {
            if (cfg.fallback == LllFallback::Backtracking) {
                double product = 1;
                for (PartIndex i : cands.scope) {
                    product *= static_cast<double>(sizes[static_cast<std::size_t>(i)]);
                    if (product > cfg.fallback_product_guard) break;
                }
                if (product <= cfg.fallback_product_guard) {
                    if (auto t = find_transversal_backtracking(g, cands)) {
                        res.status = FinderStatus::Found;
                        res.transversal = *t;
                        return res;
                    }
                    res.status = FinderStatus::Infeasible;
                    return res;
                }
            }
            res.status = FinderStatus::Exhausted;
            return res;
        }
        const auto [a, b] = *conflicts.begin();
        ++res.resamples;
        // Drop stale conflicts touching the redrawn parts, then rescan them.
        for (auto it = conflicts.begin(); it != conflicts.end();) {
            if (it->first == a || it->second == a || it->first == b || it->second == b)
                it = conflicts.erase(it);
            else
                ++it;
        }
        redraw(a);
        redraw(b);
        scan_part(a);
        scan_part(b);
    }

    for (PartIndex i = 0; i < g.num_parts(); ++i)
        if (!in_scope[static_cast<std::size_t>(i)]) choice.unassign(i);
    if (!check_transversal(g, choice).empty()) {
        // A violating return would be a bug; treat as exhausted rather than
        // hand back a bad transversal.
        res.status = FinderStatus::Exhausted;
        return res;
    }
    res.status = FinderStatus::Found;
    res.transversal = choice;
    return res;
}

} // namespace itpack
