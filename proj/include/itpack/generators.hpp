#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "itpack/graph.hpp"
#include "itpack/rng.hpp"

namespace itpack {

/// Disjoint union of n cliques on n+1 vertices each, one clique vertex per
/// part. Local degree 1, maximum degree n, n+1 parts of size n, and no
/// independent transversal: any transversal hits some clique twice.
inline MultipartiteGraph gen_cliques_extremal(Vertex n) {
    if (n < 1) throw InstanceError("clique construction needs n >= 1");
    const PartIndex k = n + 1;
    std::vector<Vertex> sizes(static_cast<std::size_t>(k), n);
    std::vector<std::pair<Vertex, Vertex>> edges;
    // Clique c occupies local index c of every part.
    for (Vertex c = 0; c < n; ++c)
        for (PartIndex i = 0; i < k; ++i)
            for (PartIndex j = i + 1; j < k; ++j)
                edges.emplace_back(i * n + c, j * n + c);
    return MultipartiteGraph::from_edges(k, std::move(sizes), edges);
}

/// k parts of size n where every pair of parts induces a random perfect
/// matching. Maximum degree k-1, local degree 1.
inline MultipartiteGraph gen_yuster(PartIndex k, Vertex n, std::uint64_t seed) {
    if (k < 2) throw InstanceError("matching construction needs k >= 2");
    if (n < 1) throw InstanceError("matching construction needs n >= 1");
    std::vector<Vertex> sizes(static_cast<std::size_t>(k), n);
    std::vector<std::pair<Vertex, Vertex>> edges;
    std::vector<Vertex> perm(static_cast<std::size_t>(n));
    for (PartIndex i = 0; i < k; ++i) {
        for (PartIndex j = i + 1; j < k; ++j) {
            Rng rng = make_stream(seed, {kStreamGenerator, static_cast<std::uint64_t>(i),
                                         static_cast<std::uint64_t>(j)});
            std::iota(perm.begin(), perm.end(), 0);
            rng.shuffle(perm.data(), perm.size());
            for (Vertex a = 0; a < n; ++a)
                edges.emplace_back(i * n + a, j * n + perm[static_cast<std::size_t>(a)]);
        }
    }
    return MultipartiteGraph::from_edges(k, std::move(sizes), edges);
}

/// k = (1-eps)n parts of size n, filled with n/4 copies of the complete
/// k-partite graph with two vertices per part plus kn/2 isolated vertices.
/// Local degree 2, yet the instance packs strictly fewer than n disjoint
/// transversals once eps is small.
inline MultipartiteGraph gen_avg_degree_counterexample(Vertex n, double eps) {
    if (n < 4 || n % 4 != 0) throw InstanceError("part size must be a positive multiple of 4");
    const double kd = (1.0 - eps) * static_cast<double>(n);
    const auto k = static_cast<PartIndex>(kd + 0.5);
    if (std::abs(kd - static_cast<double>(k)) > 1e-9 || k < 2)
        throw InstanceError("(1-eps)*n must be an integer of at least 2");
    if ((static_cast<long long>(k) * n) % 2 != 0)
        throw InstanceError("k*n/2 must be an integer");
    std::vector<Vertex> sizes(static_cast<std::size_t>(k), n);
    std::vector<std::pair<Vertex, Vertex>> edges;
    // Copy h of the dense block owns local indices 2h and 2h+1 in every part;
    // the upper half of each part stays isolated.
    const Vertex copies = n / 4;
    for (Vertex h = 0; h < copies; ++h)
        for (PartIndex i = 0; i < k; ++i)
            for (PartIndex j = i + 1; j < k; ++j)
                for (Vertex a = 0; a < 2; ++a)
                    for (Vertex b = 0; b < 2; ++b)
                        edges.emplace_back(i * n + 2 * h + a, j * n + 2 * h + b);
    return MultipartiteGraph::from_edges(k, std::move(sizes), edges);
}

/// Random instance generator. Draws random cross-part pairs and keeps those
/// that respect both degree caps, until the edge budget or the attempt limit
/// is reached. Same seed, same graph.
///
/// edge_budget < 0 picks a default that comfortably respects the caps.
inline MultipartiteGraph gen_random(PartIndex k, Vertex n, std::size_t max_degree_cap,
                                    std::size_t local_degree_cap, std::uint64_t seed,
                                    long long edge_budget = -1) {
    if (k < 1 || n < 1) throw InstanceError("need k >= 1 and n >= 1");
    const long long nvert = static_cast<long long>(k) * n;
    const std::size_t cap = std::min(max_degree_cap,
                                     local_degree_cap * static_cast<std::size_t>(k > 0 ? k - 1 : 0));
    long long budget = edge_budget;
    if (budget < 0) budget = nvert * static_cast<long long>(cap) / 4;
    if (budget > 0 && (max_degree_cap == 0 || local_degree_cap == 0 || k < 2))
        throw InstanceError("requested edges but the degree caps admit none");

    std::vector<Vertex> sizes(static_cast<std::size_t>(k), n);
    std::vector<std::pair<Vertex, Vertex>> edges;
    if (budget > 0) {
        Rng rng = make_stream(seed, {kStreamGenerator, static_cast<std::uint64_t>(k),
                                     static_cast<std::uint64_t>(n)});
        std::vector<std::vector<Vertex>> adj(static_cast<std::size_t>(nvert));
        auto count_in_part = [&](Vertex u, PartIndex p) {
            std::size_t c = 0;
            for (Vertex w : adj[static_cast<std::size_t>(u)])
                if (w / n == p) ++c;
            return c;
        };
        long long attempts = 20 * budget + 64;
        while (budget > 0 && attempts-- > 0) {
            const auto u = static_cast<Vertex>(rng.below(static_cast<std::uint64_t>(nvert)));
            const auto v = static_cast<Vertex>(rng.below(static_cast<std::uint64_t>(nvert)));
            const PartIndex pu = u / n, pv = v / n;
            if (pu == pv) continue;
            auto& au = adj[static_cast<std::size_t>(u)];
            if (std::find(au.begin(), au.end(), v) != au.end()) continue;
            if (au.size() + 1 > max_degree_cap) continue;
            if (adj[static_cast<std::size_t>(v)].size() + 1 > max_degree_cap) continue;
            if (count_in_part(u, pv) + 1 > local_degree_cap) continue;
            if (count_in_part(v, pu) + 1 > local_degree_cap) continue;
            au.push_back(v);
            adj[static_cast<std::size_t>(v)].push_back(u);
            edges.emplace_back(std::min(u, v), std::max(u, v));
            --budget;
        }
    }
    return MultipartiteGraph::from_edges(k, std::move(sizes), edges);
}

} // namespace itpack
