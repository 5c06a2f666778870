#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "itpack/graph.hpp"
#include "itpack/nibble.hpp"
#include "itpack/rng.hpp"

namespace itpack {

// Local-degree reduction: random part splitting drives the local degree of
// each block down to a constant, the blocks are packed independently, and
// the per-block packings union into one because the blocks are disjoint.

/// Assignment of every vertex to one of m blocks, one partition per part.
struct PartSplit {
    std::int64_t m = 0;
    std::vector<std::int32_t> labels; // per vertex

    /// Vertices of one block, grouped by part (global ids, ascending).
    std::vector<std::vector<Vertex>> block_vertices(const MultipartiteGraph& g,
                                                    std::int32_t label) const {
        std::vector<std::vector<Vertex>> out(static_cast<std::size_t>(g.num_parts()));
        for (Vertex v = 0; v < g.num_vertices(); ++v)
            if (labels[static_cast<std::size_t>(v)] == label)
                out[static_cast<std::size_t>(g.part_of(v))].push_back(v);
        return out;
    }
};

struct SplitResult {
    PartSplit split;
    bool ok = false;
    std::int64_t draws = 0;
    std::string diagnostics;
};

enum class SplitChecks { Full, StructuralOnly };

namespace reduce_detail {

// Largest count of same-label neighbors in one part, and in total, per draw.
struct SplitAudit {
    std::int64_t min_block_size = 0;
    std::int64_t max_label_degree = 0;       // neighbors sharing one label
    std::int64_t max_label_part_degree = 0;  // neighbors sharing label and part
    bool has_empty_block = false;
};

inline SplitAudit audit_split(const MultipartiteGraph& g, const std::vector<std::int32_t>& labels,
                              std::int64_t m) {
    SplitAudit a;
    std::vector<std::int64_t> block_size(static_cast<std::size_t>(g.num_parts() * m), 0);
    for (Vertex v = 0; v < g.num_vertices(); ++v)
        ++block_size[static_cast<std::size_t>(g.part_of(v)) * static_cast<std::size_t>(m) +
                     static_cast<std::size_t>(labels[static_cast<std::size_t>(v)])];
    a.min_block_size = INT64_MAX;
    for (std::int64_t s : block_size) {
        a.min_block_size = std::min(a.min_block_size, s);
        if (s == 0) a.has_empty_block = true;
    }
    if (a.min_block_size == INT64_MAX) a.min_block_size = 0;

    std::vector<std::int64_t> per_label(static_cast<std::size_t>(m), 0);
    for (Vertex v = 0; v < g.num_vertices(); ++v) {
        const auto nb = g.neighbors(v);
        std::size_t gi = 0;
        for (std::int64_t& c : per_label) c = 0;
        while (gi < nb.size()) {
            const PartIndex part = g.part_of(nb[gi]);
            std::vector<std::int64_t> per_label_part(static_cast<std::size_t>(m), 0);
            while (gi < nb.size() && g.part_of(nb[gi]) == part) {
                const auto lab = static_cast<std::size_t>(labels[static_cast<std::size_t>(nb[gi])]);
                ++per_label[lab];
                ++per_label_part[lab];
                ++gi;
            }
            for (std::int64_t c : per_label_part)
                a.max_label_part_degree = std::max(a.max_label_part_degree, c);
        }
        for (std::int64_t c : per_label) a.max_label_degree = std::max(a.max_label_degree, c);
    }
    return a;
}

} // namespace reduce_detail

/// Uniform m-way split with m = floor(n^(2/3)), redrawn whole until the
/// block-size and block-degree thresholds hold (or only the structural
/// partition properties, for desk-scale runs where the thresholds are
/// unattainable).
inline SplitResult split_parts(const MultipartiteGraph& g, double eps, std::uint64_t seed,
                               std::int64_t retry_budget = 100,
                               SplitChecks checks = SplitChecks::Full) {
    SplitResult res;
    const auto n = static_cast<double>(g.min_part_size());
    if (n < 1) {
        res.diagnostics = "empty part";
        return res;
    }
    const double n13 = std::cbrt(n);
    const auto m = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(n13 * n13)));
    const double size_floor = (1.0 - eps / 4.0) * n13;
    const double degree_cap = (1.0 - 3.0 * eps / 4.0) * n13;

    for (std::int64_t attempt = 0; attempt <= retry_budget; ++attempt) {
        ++res.draws;
        Rng rng = make_stream(seed, {kStreamSplit, static_cast<std::uint64_t>(attempt)});
        std::vector<std::int32_t> labels(static_cast<std::size_t>(g.num_vertices()));
        for (auto& l : labels) l = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(m)));
        const auto audit = reduce_detail::audit_split(g, labels, m);
        bool good = !audit.has_empty_block;
        std::string why;
        if (checks == SplitChecks::Full) {
            if (static_cast<double>(audit.min_block_size) < size_floor) {
                good = false;
                why += "block size " + std::to_string(audit.min_block_size) + " below floor; ";
            }
            if (static_cast<double>(audit.max_label_degree) > degree_cap) {
                good = false;
                why += "block degree " + std::to_string(audit.max_label_degree) + " above cap; ";
            }
            if (audit.max_label_part_degree >= 12) {
                good = false;
                why += "per-part block degree " + std::to_string(audit.max_label_part_degree) +
                       " reaches 12; ";
            }
        } else if (audit.has_empty_block) {
            why = "empty block; ";
        }
        if (good) {
            res.split.m = m;
            res.split.labels = std::move(labels);
            res.ok = true;
            return res;
        }
        res.diagnostics = why;
    }
    res.diagnostics = "split retry budget exhausted: " + res.diagnostics;
    return res;
}

/// Two-way split: vertices of each part are paired by consecutive local
/// index and each pair contributes one vertex to each half, so the halves
/// are exactly equal by construction. Redrawn until both degree bounds hold.
inline SplitResult halve_parts(const MultipartiteGraph& g, std::uint64_t seed,
                               std::int64_t retry_budget = 100,
                               SplitChecks checks = SplitChecks::Full,
                               double delta_cap = -1, double d_cap = -1) {
    SplitResult res;
    for (PartIndex i = 0; i < g.num_parts(); ++i)
        if (g.part_size(i) % 2 != 0) {
            res.diagnostics = "part " + std::to_string(i) + " has odd size";
            return res;
        }
    const GraphStats s = stats(g);
    const auto dd = static_cast<double>(s.max_degree);
    const auto ld = static_cast<double>(s.local_degree);
    if (delta_cap < 0) delta_cap = dd / 2 + std::pow(dd, 2.0 / 3.0);
    if (d_cap < 0) d_cap = ld / 2 + std::pow(ld, 2.0 / 3.0);

    for (std::int64_t attempt = 0; attempt <= retry_budget; ++attempt) {
        ++res.draws;
        Rng rng = make_stream(seed, {kStreamSplit, 2, static_cast<std::uint64_t>(attempt)});
        std::vector<std::int32_t> labels(static_cast<std::size_t>(g.num_vertices()));
        for (PartIndex i = 0; i < g.num_parts(); ++i) {
            const Vertex off = g.part_offset(i);
            for (Vertex local = 0; local + 1 < g.part_size(i); local += 2) {
                const bool flip = rng.bernoulli(0.5);
                labels[static_cast<std::size_t>(off + local)] = flip ? 1 : 0;
                labels[static_cast<std::size_t>(off + local + 1)] = flip ? 0 : 1;
            }
        }
        bool good = true;
        std::string why;
        if (checks == SplitChecks::Full) {
            // Only neighbors sharing the vertex's own label count here.
            std::int64_t worst_same = 0, worst_same_part = 0;
            for (Vertex v = 0; v < g.num_vertices(); ++v) {
                const auto lv = labels[static_cast<std::size_t>(v)];
                const auto nb = g.neighbors(v);
                std::size_t gi = 0;
                std::int64_t same = 0;
                while (gi < nb.size()) {
                    const PartIndex part = g.part_of(nb[gi]);
                    std::int64_t run = 0;
                    while (gi < nb.size() && g.part_of(nb[gi]) == part) {
                        if (labels[static_cast<std::size_t>(nb[gi])] == lv) ++run;
                        ++gi;
                    }
                    same += run;
                    worst_same_part = std::max(worst_same_part, run);
                }
                worst_same = std::max(worst_same, same);
            }
            if (static_cast<double>(worst_same) > delta_cap) {
                good = false;
                why += "half degree " + std::to_string(worst_same) + " above cap; ";
            }
            if (static_cast<double>(worst_same_part) > d_cap) {
                good = false;
                why += "half local degree " + std::to_string(worst_same_part) + " above cap; ";
            }
        }
        if (good) {
            res.split.m = 2;
            res.split.labels = std::move(labels);
            res.ok = true;
            return res;
        }
        res.diagnostics = why;
    }
    res.diagnostics = "halving retry budget exhausted: " + res.diagnostics;
    return res;
}

enum class ReductionCase { EdgeFreeTrivial, DirectSplit, HalveThenSplit };

/// Arithmetic of the reduction: which case applies, the halving depth j with
/// 2^(j-1) < gamma^(4/3) n <= 2^j, the degree recursions
/// x_{t+1} = x_t/2 + x_t^(2/3), and the numeric status of the feasibility
/// claims (which routinely fail at desk scale and are carried as flags).
struct ReductionPlan {
    double eps = 0;
    double gamma = 0;
    std::int64_t n = 0;
    ReductionCase kind = ReductionCase::EdgeFreeTrivial;
    std::int64_t j = 0;
    std::vector<double> delta_seq; // max-degree recursion, delta_seq[0] = (1-eps)n
    std::vector<double> d_seq;     // local-degree recursion, d_seq[0] = gamma n
    std::int64_t deletions_per_part = 0;
    std::int64_t n_prime = 0;
    bool f1 = true, f2 = true, f3 = true;
    std::map<std::string, double> values;
};

inline ReductionPlan plan_reduction(double eps, double gamma, std::int64_t n) {
    if (!(eps > 0 && eps < 1) || !(gamma > 0 && gamma < 1) || n < 1)
        throw InstanceError("need eps, gamma in (0,1) and n >= 1");
    ReductionPlan plan;
    plan.eps = eps;
    plan.gamma = gamma;
    plan.n = n;
    const double nd = static_cast<double>(n);
    if (nd < 1.0 / gamma) {
        plan.kind = ReductionCase::EdgeFreeTrivial;
        return plan;
    }
    if (nd <= std::pow(gamma, -4.0 / 3.0)) {
        plan.kind = ReductionCase::DirectSplit;
        return plan;
    }
    plan.kind = ReductionCase::HalveThenSplit;
    const double target = std::pow(gamma, 4.0 / 3.0) * nd;
    std::int64_t j = 1;
    double pow2 = 2;
    while (pow2 < target) {
        ++j;
        pow2 *= 2;
    }
    plan.j = j;
    plan.delta_seq.push_back((1.0 - eps) * nd);
    plan.d_seq.push_back(gamma * nd);
    for (std::int64_t t = 0; t < j; ++t) {
        const double dt = plan.delta_seq.back();
        const double lt = plan.d_seq.back();
        plan.delta_seq.push_back(dt / 2 + std::pow(dt, 2.0 / 3.0));
        plan.d_seq.push_back(lt / 2 + std::pow(lt, 2.0 / 3.0));
    }
    plan.deletions_per_part = n % static_cast<std::int64_t>(pow2);
    plan.n_prime = (n - plan.deletions_per_part) / static_cast<std::int64_t>(pow2);

    const double half_target = nd / pow2 - 1.0;
    const double dj = plan.delta_seq.back();
    const double lj = plan.d_seq.back();
    plan.f1 = dj > 1.0 / (4 * std::pow(gamma, 4.0 / 3.0)) && dj <= (1.0 - eps / 2) * half_target;
    plan.f2 = lj <= std::cbrt(half_target);
    plan.f3 = true;
    for (std::int64_t t = 0; t < j; ++t) {
        const double lg = std::log(std::max(2.0, plan.delta_seq[static_cast<std::size_t>(t)]));
        if (!(plan.d_seq[static_cast<std::size_t>(t)] > lg * lg * lg * lg)) plan.f3 = false;
    }
    plan.values["gamma43_n"] = target;
    plan.values["delta_j"] = dj;
    plan.values["d_j"] = lj;
    plan.values["half_target"] = half_target;
    return plan;
}

struct InducedSubgraph {
    MultipartiteGraph graph;
    std::vector<Vertex> to_parent; // new global id -> old global id
};

/// Subgraph induced by the given per-part vertex lists (parent-global ids).
inline InducedSubgraph induce_subgraph(const MultipartiteGraph& g,
                                       const std::vector<std::vector<Vertex>>& per_part) {
    InducedSubgraph out;
    std::vector<Vertex> sizes;
    for (const auto& vs : per_part) sizes.push_back(static_cast<Vertex>(vs.size()));
    // Child ids run part by part, matching the id convention of the parent.
    std::vector<Vertex> to_child(static_cast<std::size_t>(g.num_vertices()), -1);
    Vertex next = 0;
    for (const auto& vs : per_part)
        for (Vertex v : vs) {
            to_child[static_cast<std::size_t>(v)] = next++;
            out.to_parent.push_back(v);
        }
    std::vector<std::pair<Vertex, Vertex>> edges;
    for (std::size_t i = 0; i < per_part.size(); ++i)
        for (Vertex v : per_part[i])
            for (Vertex w : g.neighbors(v)) {
                if (to_child[static_cast<std::size_t>(w)] < 0) continue;
                if (v < w)
                    edges.emplace_back(to_child[static_cast<std::size_t>(v)],
                                       to_child[static_cast<std::size_t>(w)]);
            }
    out.graph = MultipartiteGraph::from_edges(static_cast<PartIndex>(per_part.size()),
                                              std::move(sizes), edges);
    return out;
}

struct ReducePackOptions {
    SolveOptions solve;
    SplitChecks checks = SplitChecks::StructuralOnly;
    std::int64_t split_retry_budget = 100;
};

struct ReducePackResult {
    Packing packing;
    ReductionPlan plan;
    std::vector<std::string> warnings;
};

namespace reduce_detail {

inline void pack_block_into(const MultipartiteGraph& g,
                            const std::vector<std::vector<Vertex>>& block, double eps,
                            const ReducePackOptions& opts, std::uint64_t seed,
                            std::vector<Transversal>& sink, bool& complete,
                            std::vector<std::string>& warnings) {
    for (const auto& vs : block)
        if (vs.empty()) {
            complete = false;
            warnings.push_back("block with an empty part skipped");
            return;
        }
    InducedSubgraph sub = induce_subgraph(g, block);
    SolveOptions so = opts.solve;
    so.eps = eps;
    PackResult pr = solve(sub.graph, so, seed);
    if (!pr.packing.complete) complete = false;
    for (const auto& t : pr.packing.transversals) {
        Transversal parent(g.num_parts());
        for (PartIndex i = 0; i < sub.graph.num_parts(); ++i)
            parent.assign(i, sub.to_parent[static_cast<std::size_t>(t.vertex_in(i))]);
        sink.push_back(std::move(parent));
    }
}

} // namespace reduce_detail

/// The full reduction pipeline: classify, split (after halving, if needed),
/// pack every block, and union the per-block packings. Blocks are disjoint,
/// so the union needs no coordination; it is verified at the end anyway.
inline ReducePackResult reduce_and_pack(const MultipartiteGraph& g, double eps, double gamma,
                                        const ReducePackOptions& opts, std::uint64_t seed) {
    ReducePackResult out;
    const std::int64_t n = g.min_part_size();
    if (n < 1) throw InstanceError("empty part");
    out.plan = plan_reduction(eps, gamma, n);

    const GraphStats st = stats(g);
    if (static_cast<double>(st.max_degree) > (1.0 - eps) * static_cast<double>(n))
        out.warnings.push_back("max degree exceeds (1-eps)n; proceeding best-effort");
    if (static_cast<double>(st.local_degree) > gamma * static_cast<double>(n))
        out.warnings.push_back("local degree exceeds gamma*n; proceeding best-effort");

    if (out.plan.kind == ReductionCase::EdgeFreeTrivial && g.num_edges() == 0) {
        for (Vertex j = 0; j < n; ++j) {
            Transversal t(g.num_parts());
            for (PartIndex i = 0; i < g.num_parts(); ++i) t.assign(i, g.vertex_id(i, j));
            out.packing.transversals.push_back(std::move(t));
        }
        return out;
    }
    if (out.plan.kind == ReductionCase::EdgeFreeTrivial) {
        out.warnings.push_back("local degree below one yet edges present; splitting directly");
        out.plan.kind = ReductionCase::DirectSplit;
    }

    bool complete = true;
    if (out.plan.kind == ReductionCase::DirectSplit) {
        const SplitResult sr = split_parts(g, eps, derive_seed(seed, {kStreamSplit, 1}),
                                           opts.split_retry_budget, opts.checks);
        if (!sr.ok) {
            out.packing.complete = false;
            out.packing.budget_exhausted = true;
            out.packing.note = sr.diagnostics;
            return out;
        }
        const auto m = static_cast<std::size_t>(sr.split.m);
        std::vector<std::vector<Transversal>> per_block(m);
        std::vector<char> block_ok(m, 1);
        std::vector<std::vector<std::string>> block_warn(m);
        parallel_for(m, opts.solve.workers, [&](std::size_t b) {
            bool ok = true;
            reduce_detail::pack_block_into(
                g, sr.split.block_vertices(g, static_cast<std::int32_t>(b)), eps / 2, opts,
                derive_seed(seed, {kStreamBlock, b}), per_block[b], ok, block_warn[b]);
            block_ok[b] = ok ? 1 : 0;
        });
        for (std::size_t b = 0; b < m; ++b) {
            if (!block_ok[b]) complete = false;
            for (auto& t : per_block[b]) out.packing.transversals.push_back(std::move(t));
            for (auto& w : block_warn[b]) out.warnings.push_back(std::move(w));
        }
    } else {
        // Divisibility deletions, drawn uniformly per part.
        const std::int64_t leaves = std::int64_t{1} << out.plan.j;
        std::vector<std::vector<Vertex>> base(static_cast<std::size_t>(g.num_parts()));
        for (PartIndex i = 0; i < g.num_parts(); ++i) {
            std::vector<Vertex> vs;
            for (Vertex local = 0; local < g.part_size(i); ++local)
                vs.push_back(g.vertex_id(i, local));
            const auto drop = static_cast<std::size_t>(g.part_size(i) % leaves);
            if (drop > 0) {
                Rng rng = make_stream(seed, {kStreamDeletion, static_cast<std::uint64_t>(i)});
                rng.shuffle(vs.data(), vs.size());
                vs.resize(vs.size() - drop);
                std::sort(vs.begin(), vs.end());
            }
            base[static_cast<std::size_t>(i)] = std::move(vs);
        }

        std::vector<std::vector<std::vector<Vertex>>> blocks{base};
        for (std::int64_t level = 0; level < out.plan.j; ++level) {
            const double delta_cap = out.plan.delta_seq[static_cast<std::size_t>(level) + 1];
            const double d_cap = out.plan.d_seq[static_cast<std::size_t>(level) + 1];
            std::vector<std::vector<std::vector<Vertex>>> next;
            for (std::size_t b = 0; b < blocks.size(); ++b) {
                InducedSubgraph sub = induce_subgraph(g, blocks[b]);
                const SplitResult hr =
                    halve_parts(sub.graph,
                                derive_seed(seed, {kStreamSplit, static_cast<std::uint64_t>(level),
                                                   static_cast<std::uint64_t>(b)}),
                                opts.split_retry_budget, opts.checks, delta_cap, d_cap);
                if (!hr.ok) {
                    out.packing.complete = false;
                    out.packing.budget_exhausted = true;
                    out.packing.note = hr.diagnostics;
                    return out;
                }
                std::vector<std::vector<Vertex>> half0(blocks[b].size()), half1(blocks[b].size());
                for (Vertex child = 0; child < sub.graph.num_vertices(); ++child) {
                    const auto part = static_cast<std::size_t>(sub.graph.part_of(child));
                    const Vertex parent = sub.to_parent[static_cast<std::size_t>(child)];
                    if (hr.split.labels[static_cast<std::size_t>(child)] == 0)
                        half0[part].push_back(parent);
                    else
                        half1[part].push_back(parent);
                }
                next.push_back(std::move(half0));
                next.push_back(std::move(half1));
            }
            blocks = std::move(next);
        }

        // Leaf blocks: split each, then pack every sub-block.
        struct Job {
            std::vector<std::vector<Vertex>> vertices;
        };
        std::vector<Job> jobs;
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            InducedSubgraph sub = induce_subgraph(g, blocks[b]);
            const SplitResult sr = split_parts(
                sub.graph, eps / 2,
                derive_seed(seed, {kStreamSplit, 9, static_cast<std::uint64_t>(b)}),
                opts.split_retry_budget, opts.checks);
            if (!sr.ok) {
                out.packing.complete = false;
                out.packing.budget_exhausted = true;
                out.packing.note = sr.diagnostics;
                return out;
            }
            for (std::int32_t lab = 0; lab < sr.split.m; ++lab) {
                Job job;
                job.vertices.resize(static_cast<std::size_t>(g.num_parts()));
                const auto child_blocks = sr.split.block_vertices(sub.graph, lab);
                for (std::size_t i = 0; i < child_blocks.size(); ++i)
                    for (Vertex child : child_blocks[i])
                        job.vertices[i].push_back(sub.to_parent[static_cast<std::size_t>(child)]);
                jobs.push_back(std::move(job));
            }
        }
        std::vector<std::vector<Transversal>> per_job(jobs.size());
        std::vector<char> job_ok(jobs.size(), 1);
        std::vector<std::vector<std::string>> job_warn(jobs.size());
        parallel_for(jobs.size(), opts.solve.workers, [&](std::size_t jidx) {
            bool ok = true;
            reduce_detail::pack_block_into(g, jobs[jidx].vertices, eps / 2, opts,
                                           derive_seed(seed, {kStreamBlock, 7, jidx}),
                                           per_job[jidx], ok, job_warn[jidx]);
            job_ok[jidx] = ok ? 1 : 0;
        });
        for (std::size_t jidx = 0; jidx < jobs.size(); ++jidx) {
            if (!job_ok[jidx]) complete = false;
            for (auto& t : per_job[jidx]) out.packing.transversals.push_back(std::move(t));
            for (auto& w : job_warn[jidx]) out.warnings.push_back(std::move(w));
        }
    }
    out.packing.complete = complete;

    const auto violations = verify_packing(g, out.packing);
    if (!violations.empty())
        throw NibbleError("internal: reduction packing fails verification: " +
                          violations.front().detail);
    return out;
}

} // namespace itpack
