#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "itpack/bitset.hpp"
#include "itpack/graph.hpp"
#include "itpack/lll.hpp"
#include "itpack/oracle.hpp"
#include "itpack/parallel.hpp"
#include "itpack/rng.hpp"
#include "itpack/schedule.hpp"
#include "itpack/transversal.hpp"

namespace itpack {

class NibbleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Live data of one partial transversal within a round.
struct TransversalSlot {
    std::vector<PartIndex> active;  // parts still to be visited, ascending
    Transversal partial;            // chosen vertices of the covered parts
    std::vector<DynBitset> cand;    // per part, candidate vertices by local index
    std::vector<std::int64_t> size; // per part, candidate count
};

/// State of one round: the graph minus everything used by earlier rounds,
/// plus m partial transversals grown simultaneously.
struct RoundState {
    const MultipartiteGraph* graph = nullptr;
    std::int64_t r = 1;
    std::int64_t t = 0;
    std::int64_t m = 0;
    DynBitset used;    // vertices consumed by transversals of earlier rounds
    DynBitset claimed; // vertices sitting in this round's partials or completions
    std::vector<std::int64_t> initial_size; // per part: candidates at t = 0
    double d0_effective = 0;                // degree-bound anchor for this round
    std::vector<TransversalSlot> slots;
};

struct IterationSample {
    struct PerTransversal {
        // Parallel arrays over the selections of the active parts.
        std::vector<PartIndex> sel_part;
        std::vector<Vertex> sel_vertex;
        std::vector<char> activated;
        std::vector<PartIndex> accepted_parts;
        std::vector<Vertex> accepted;
        std::int64_t artificial_deletions = 0;
        std::int64_t neighbor_deletions = 0;
        std::int64_t eq1_violations = 0;
    };
    std::vector<PerTransversal> per_transversal;
};

struct MonitorCheck {
    std::int64_t checked = 0;
    std::int64_t violations = 0;
    bool pass = true;
    std::string worst;

    double fraction_ok() const {
        return checked == 0 ? 1.0
                            : 1.0 - static_cast<double>(violations) / static_cast<double>(checked);
    }
};

struct MonitorReport {
    MonitorCheck c1_band;   // candidate sizes inside the decay envelope
    MonitorCheck c1_step;   // one-iteration size move within the slack band
    MonitorCheck c2_degree; // degree into each surviving candidate family
    MonitorCheck c3_built;  // neighbor mass accumulated in built partials
    MonitorCheck c4_mass;   // summed neighbor mass across candidate families
    MonitorCheck sel_mass;  // neighbor mass among fresh selections
    MonitorCheck crowd_nb;  // neighbors inside one selection set
    MonitorCheck crowd_ap;  // appearances of one vertex across selection sets
    MonitorCheck eq1;       // deletion-probability overshoots (q > p_r)
};

enum class MonitorAction { Off, Observe, Enforce };

struct RetryPolicy {
    MonitorAction c1 = MonitorAction::Observe;
    MonitorAction c2 = MonitorAction::Observe;
    MonitorAction c3 = MonitorAction::Observe;
    MonitorAction c4 = MonitorAction::Observe;
    MonitorAction crowding = MonitorAction::Observe;
    MonitorAction eq1 = MonitorAction::Observe;
    std::int64_t round_retries = 2;

    static RetryPolicy observe_all() { return RetryPolicy{}; }

    static RetryPolicy enforcing() {
        RetryPolicy p;
        p.c1 = MonitorAction::Enforce;
        return p;
    }

    bool iteration_failed(const MonitorReport& rep) const {
        auto bad = [](MonitorAction a, const MonitorCheck& c) {
            return a == MonitorAction::Enforce && !c.pass;
        };
        return bad(c1, rep.c1_band) || bad(c1, rep.c1_step) || bad(c2, rep.c2_degree) ||
               bad(c3, rep.c3_built) || bad(c4, rep.c4_mass) || bad(crowding, rep.crowd_nb) ||
               bad(crowding, rep.crowd_ap) || bad(eq1, rep.eq1);
    }
};

inline bool all_monitors_pass(const MonitorReport& rep) {
    return rep.c1_band.pass && rep.c1_step.pass && rep.c2_degree.pass && rep.c3_built.pass &&
           rep.c4_mass.pass && rep.sel_mass.pass && rep.crowd_nb.pass && rep.crowd_ap.pass &&
           rep.eq1.pass;
}

struct IterationOutcome {
    RoundState next;
    IterationSample sample;
    MonitorReport report;
    bool hard_failure = false; // an active part lost its last candidate
    std::string failure;
};

namespace nibble_detail {

inline std::int64_t degree_awake(const MultipartiteGraph& g, const DynBitset& used, Vertex v) {
    std::int64_t d = 0;
    for (Vertex w : g.neighbors(v))
        if (!used.test(static_cast<std::size_t>(w))) ++d;
    return d;
}

inline double envelope(double anchor, double per_iter_log, std::int64_t t) {
    return anchor * std::exp(static_cast<double>(t) * per_iter_log);
}

} // namespace nibble_detail

/// Fresh round state: every slot starts with the full parts minus the
/// vertices already used by earlier rounds.
inline RoundState init_round(const MultipartiteGraph& g, const DynBitset& used, std::int64_t r,
                             const NibbleSchedule& sched, std::int64_t m) {
    RoundState st;
    st.graph = &g;
    st.r = r;
    st.t = 0;
    st.m = m;
    st.used = used;
    st.claimed = DynBitset(static_cast<std::size_t>(g.num_vertices()));
    const PartIndex k = g.num_parts();
    st.initial_size.assign(static_cast<std::size_t>(k), 0);

    std::vector<DynBitset> avail(static_cast<std::size_t>(k));
    for (PartIndex i = 0; i < k; ++i) {
        DynBitset bs(static_cast<std::size_t>(g.part_size(i)));
        std::int64_t cnt = 0;
        for (Vertex local = 0; local < g.part_size(i); ++local) {
            if (!used.test(static_cast<std::size_t>(g.vertex_id(i, local)))) {
                bs.set(static_cast<std::size_t>(local));
                ++cnt;
            }
        }
        if (cnt < m)
            throw NibbleError("part " + std::to_string(i) + " depleted: " + std::to_string(cnt) +
                              " candidates for " + std::to_string(m) + " transversals");
        st.initial_size[static_cast<std::size_t>(i)] = cnt;
        avail[static_cast<std::size_t>(i)] = std::move(bs);
    }

    double max_deg = 0;
    for (Vertex v = 0; v < g.num_vertices(); ++v) {
        if (used.test(static_cast<std::size_t>(v))) continue;
        max_deg = std::max(max_deg,
                           static_cast<double>(nibble_detail::degree_awake(g, used, v)));
    }
    const double formula_d0 = sched.D0(r);
    st.d0_effective = std::max(std::isfinite(formula_d0) ? formula_d0 : 0.0, max_deg);

    st.slots.resize(static_cast<std::size_t>(m));
    for (auto& slot : st.slots) {
        slot.partial = Transversal(k);
        slot.cand = avail;
        slot.size.assign(static_cast<std::size_t>(k), 0);
        for (PartIndex i = 0; i < k; ++i) {
            slot.active.push_back(i);
            slot.size[static_cast<std::size_t>(i)] = st.initial_size[static_cast<std::size_t>(i)];
        }
    }
    return st;
}

/// One iteration of the six-step procedure:
///   1. select one uniform candidate per active part,
///   2. activate each part independently with probability p,
///   3. accept activated selections that occur exactly once across all
///      transversals, touch no other activated selection of their own
///      transversal, and are not already claimed by a partial transversal,
///   4. retire the accepted parts,
///   5. for every surviving candidate, combine the realized neighbor hit
///      with an independent artificial coin so the total deletion
///      probability is exactly p_r,
///   6. shrink the candidate sets accordingly.
///
/// All randomness comes from substreams of stream_seed keyed by transversal
/// index, so the result is independent of the worker count.
inline IterationOutcome run_iteration(const RoundState& st, const NibbleSchedule& sched,
                                      const MonitorConfig& mcfg, std::uint64_t stream_seed,
                                      int workers = 1) {
    const MultipartiteGraph& g = *st.graph;
    const auto m = static_cast<std::size_t>(st.m);
    const double p = sched.p;
    const double p_r = sched.p_r(st.r);
    const std::int64_t t_new = st.t + 1;

    for (const auto& slot : st.slots)
        for (PartIndex i : slot.active)
            if (slot.size[static_cast<std::size_t>(i)] <= 0)
                throw NibbleError("iteration precondition: empty candidate set for part " +
                                  std::to_string(i));

    IterationOutcome out;
    out.next = st;
    out.next.t = t_new;
    out.sample.per_transversal.resize(m);

    // Steps 1-2.
    parallel_for(m, workers, [&](std::size_t l) {
        Rng rng = make_stream(stream_seed, {static_cast<std::uint64_t>(l), 0});
        auto& ps = out.sample.per_transversal[l];
        const auto& slot = st.slots[l];
        for (PartIndex i : slot.active) {
            const auto s_i = static_cast<std::uint64_t>(slot.size[static_cast<std::size_t>(i)]);
            assert(s_i > 0);
            const auto j = static_cast<std::size_t>(rng.below(s_i));
            const auto local = static_cast<Vertex>(slot.cand[static_cast<std::size_t>(i)].select(j));
            ps.sel_part.push_back(i);
            ps.sel_vertex.push_back(g.vertex_id(i, local));
        }
        for (std::size_t s = 0; s < ps.sel_part.size(); ++s)
            ps.activated.push_back(rng.bernoulli(p) ? 1 : 0);
    });

    // Multiset of activated selections, and selection counts for crowding.
    std::vector<std::int32_t> hat_count(static_cast<std::size_t>(g.num_vertices()), 0);
    std::vector<std::int32_t> sel_count(static_cast<std::size_t>(g.num_vertices()), 0);
    for (const auto& ps : out.sample.per_transversal) {
        for (std::size_t s = 0; s < ps.sel_vertex.size(); ++s) {
            ++sel_count[static_cast<std::size_t>(ps.sel_vertex[s])];
            if (ps.activated[s]) ++hat_count[static_cast<std::size_t>(ps.sel_vertex[s])];
        }
    }

    // Step 3: acceptance. A selection already claimed by some partial
    // transversal is never accepted, which keeps the transversals of a round
    // pairwise disjoint across iterations as well as within one.
    parallel_for(m, workers, [&](std::size_t l) {
        auto& ps = out.sample.per_transversal[l];
        for (std::size_t s = 0; s < ps.sel_vertex.size(); ++s) {
            if (!ps.activated[s]) continue;
            const Vertex v = ps.sel_vertex[s];
            if (hat_count[static_cast<std::size_t>(v)] != 1) continue;
            if (st.claimed.test(static_cast<std::size_t>(v))) continue;
            bool touches = false;
            for (std::size_t q = 0; q < ps.sel_vertex.size() && !touches; ++q)
                if (q != s && ps.activated[q] && g.is_edge(v, ps.sel_vertex[q])) touches = true;
            if (touches) continue;
            ps.accepted_parts.push_back(ps.sel_part[s]);
            ps.accepted.push_back(v);
        }
    });

    // Step 4: commit acceptances (sequential; asserts cross-slot disjointness).
    for (std::size_t l = 0; l < m; ++l) {
        auto& ps = out.sample.per_transversal[l];
        auto& slot = out.next.slots[l];
        for (std::size_t a = 0; a < ps.accepted.size(); ++a) {
            const PartIndex i = ps.accepted_parts[a];
            const Vertex v = ps.accepted[a];
            assert(!out.next.claimed.test(static_cast<std::size_t>(v)));
            out.next.claimed.set(static_cast<std::size_t>(v));
            slot.partial.assign(i, v);
            slot.active.erase(std::find(slot.active.begin(), slot.active.end(), i));
            slot.cand[static_cast<std::size_t>(i)] = DynBitset();
            slot.size[static_cast<std::size_t>(i)] = 0;
        }
    }

    // Steps 5-6: deletions, per transversal.
    std::vector<std::string> empty_failures(m);
    parallel_for(m, workers, [&](std::size_t l) {
        Rng rng = make_stream(stream_seed, {static_cast<std::uint64_t>(l), 1});
        auto& ps = out.sample.per_transversal[l];
        const auto& old_slot = st.slots[l];
        auto& slot = out.next.slots[l];

        std::vector<char> active_t(static_cast<std::size_t>(g.num_parts()), 0);
        for (PartIndex i : old_slot.active) active_t[static_cast<std::size_t>(i)] = 1;

        // Exact probability that a fresh draw of steps 1-2 puts a neighbor of
        // v into the activated selections of this transversal; the parts act
        // independently.
        auto hit_probability = [&](Vertex v) {
            double no_hit = 1.0;
            const auto nb = g.neighbors(v);
            std::size_t gi = 0;
            while (gi < nb.size()) {
                const PartIndex j = g.part_of(nb[gi]);
                std::int64_t d_j = 0;
                const Vertex off = g.part_offset(j);
                while (gi < nb.size() && g.part_of(nb[gi]) == j) {
                    if (active_t[static_cast<std::size_t>(j)] &&
                        old_slot.cand[static_cast<std::size_t>(j)].test(
                            static_cast<std::size_t>(nb[gi] - off)))
                        ++d_j;
                    ++gi;
                }
                if (d_j > 0)
                    no_hit *= 1.0 - p * static_cast<double>(d_j) /
                                        static_cast<double>(old_slot.size[static_cast<std::size_t>(j)]);
            }
            return 1.0 - no_hit;
        };

        for (PartIndex i : slot.active) {
            const auto& old_bs = old_slot.cand[static_cast<std::size_t>(i)];
            auto& new_bs = slot.cand[static_cast<std::size_t>(i)];
            const Vertex off = g.part_offset(i);
            old_bs.for_each_set([&](std::size_t local) {
                const Vertex v = off + static_cast<Vertex>(local);
                const double q = hit_probability(v);
                double b = 0;
                if (q > p_r + 1e-12) {
                    ++ps.eq1_violations;
                } else {
                    b = 1.0 - (1.0 - p_r) / (1.0 - q);
                }
                if (rng.bernoulli(b)) {
                    new_bs.reset(local);
                    ++ps.artificial_deletions;
                }
            });
        }
        // Remove the realized neighbor hits of the activated selections.
        // Parts retired earlier hold an empty bitset, so they skip naturally.
        for (std::size_t s = 0; s < ps.sel_vertex.size(); ++s) {
            if (!ps.activated[s]) continue;
            for (Vertex w : g.neighbors(ps.sel_vertex[s])) {
                const PartIndex j = g.part_of(w);
                auto& bs = slot.cand[static_cast<std::size_t>(j)];
                if (bs.size() == 0) continue;
                const auto local = static_cast<std::size_t>(w - g.part_offset(j));
                if (bs.test(local)) {
                    bs.reset(local);
                    ++ps.neighbor_deletions;
                }
            }
        }
        for (PartIndex i : slot.active) {
            slot.size[static_cast<std::size_t>(i)] =
                static_cast<std::int64_t>(slot.cand[static_cast<std::size_t>(i)].count());
            if (slot.size[static_cast<std::size_t>(i)] == 0 && empty_failures[l].empty())
                empty_failures[l] = "transversal " + std::to_string(l) + ", part " +
                                    std::to_string(i) + " lost all candidates";
        }
    });
    for (const auto& f : empty_failures) {
        if (!f.empty()) {
            out.hard_failure = true;
            out.failure = f;
            break;
        }
    }

    // Monitors, computed on the new state.
    MonitorReport& rep = out.report;
    const double delta = sched.delta;

    // Candidate-size envelopes, anchored at the actual initial part sizes.
    const double lo_log = std::log1p(-p_r - p * p);
    const double hi_log = std::log1p(-p_r + p * p);
    double worst_rel = 0;
    for (std::size_t l = 0; l < m; ++l) {
        const auto& slot = out.next.slots[l];
        for (PartIndex i : slot.active) {
            const double anchor = static_cast<double>(st.initial_size[static_cast<std::size_t>(i)]);
            const double lo = nibble_detail::envelope(anchor, lo_log, t_new);
            const double hi = nibble_detail::envelope(anchor, hi_log, t_new);
            const auto sz = static_cast<double>(slot.size[static_cast<std::size_t>(i)]);
            ++rep.c1_band.checked;
            if (sz < lo - 1e-9 || sz > hi + 1e-9) {
                ++rep.c1_band.violations;
                const double rel = sz < lo ? (lo - sz) / std::max(1.0, lo) : (sz - hi) / std::max(1.0, hi);
                if (rel > worst_rel) {
                    worst_rel = rel;
                    rep.c1_band.worst = "slot " + std::to_string(l) + " part " + std::to_string(i) +
                                        ": size " + std::to_string(static_cast<long long>(sz)) +
                                        " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
                }
            }
            // One-step band around the previous size.
            const auto prev = static_cast<double>(st.slots[l].size[static_cast<std::size_t>(i)]);
            const double mid = (1.0 - p_r) * prev;
            const double slack = mcfg.size_slack(p_r, prev);
            ++rep.c1_step.checked;
            if (sz < mid - slack - 1e-9 || sz > mid + slack + 1e-9) {
                ++rep.c1_step.violations;
                if (rep.c1_step.worst.empty())
                    rep.c1_step.worst = "slot " + std::to_string(l) + " part " + std::to_string(i);
            }
        }
        for (PartIndex i : slot.active)
            rep.eq1.checked += st.slots[l].size[static_cast<std::size_t>(i)];
        rep.eq1.violations += out.sample.per_transversal[l].eq1_violations;
    }
    rep.c1_band.pass = rep.c1_band.fraction_ok() >= mcfg.statistical_quantile - 1e-12;
    rep.c1_step.pass = rep.c1_step.fraction_ok() >= mcfg.statistical_quantile - 1e-12;
    rep.eq1.pass = rep.eq1.violations == 0;

    // Sampled per-vertex checks.
    {
        std::vector<Vertex> awake;
        awake.reserve(static_cast<std::size_t>(g.num_vertices()));
        for (Vertex v = 0; v < g.num_vertices(); ++v)
            if (!st.used.test(static_cast<std::size_t>(v))) awake.push_back(v);
        std::vector<Vertex> sampled;
        constexpr std::size_t kSampleCap = 4096;
        if (awake.size() <= kSampleCap) {
            sampled = awake;
        } else {
            Rng mrng = make_stream(stream_seed, {kStreamMonitor});
            DynBitset taken(awake.size());
            while (sampled.size() < kSampleCap) {
                const auto idx = static_cast<std::size_t>(mrng.below(awake.size()));
                if (taken.test(idx)) continue;
                taken.set(idx);
                sampled.push_back(awake[idx]);
            }
        }

        const double anchor =
            mcfg.degree_anchor_override > 0 ? mcfg.degree_anchor_override : st.d0_effective;
        const double d_bound =
            nibble_detail::envelope(anchor, std::log1p(-p + sched.eps * p / 2), t_new);
        const double x = 1.0 - (1.0 + 2 * delta) * p;
        const double c3_geo = x >= 1.0 ? static_cast<double>(t_new)
                                       : (1.0 - std::pow(x, static_cast<double>(t_new))) / (1.0 - x);
        const double c3_coeff = (1.0 - 3 * delta) * p * p * c3_geo;
        const double c4_coeff =
            static_cast<double>(st.m) *
            std::pow(1.0 - p - p_r - delta * p, static_cast<double>(t_new));
        const double sel_coeff =
            (1.0 - delta) * p * std::pow(x, static_cast<double>(st.t));

        for (Vertex v : sampled) {
            const auto dgr = static_cast<double>(nibble_detail::degree_awake(g, st.used, v));

            std::int64_t mass_total = 0;
            for (std::size_t l = 0; l < m; ++l) {
                const auto& slot = out.next.slots[l];
                std::int64_t d_l = 0;
                for (Vertex w : g.neighbors(v)) {
                    const PartIndex j = g.part_of(w);
                    const auto& bs = slot.cand[static_cast<std::size_t>(j)];
                    if (bs.size() == 0) continue;
                    if (bs.test(static_cast<std::size_t>(w - g.part_offset(j)))) ++d_l;
                }
                mass_total += d_l;
                ++rep.c2_degree.checked;
                if (static_cast<double>(d_l) > d_bound + 1e-9) {
                    ++rep.c2_degree.violations;
                    if (rep.c2_degree.worst.empty())
                        rep.c2_degree.worst = "vertex " + std::to_string(v) + " slot " + std::to_string(l);
                }
            }
            ++rep.c4_mass.checked;
            if (static_cast<double>(mass_total) < c4_coeff * dgr - 1e-9) {
                ++rep.c4_mass.violations;
                if (rep.c4_mass.worst.empty()) rep.c4_mass.worst = "vertex " + std::to_string(v);
            }
            if (dgr >= mcfg.deg_threshold_c3) {
                std::int64_t built = 0;
                for (Vertex w : g.neighbors(v))
                    if (out.next.claimed.test(static_cast<std::size_t>(w))) ++built;
                ++rep.c3_built.checked;
                if (static_cast<double>(built) < c3_coeff * dgr - 1e-9) {
                    ++rep.c3_built.violations;
                    if (rep.c3_built.worst.empty()) rep.c3_built.worst = "vertex " + std::to_string(v);
                }
            }
            if (dgr >= mcfg.deg_threshold_small) {
                std::int64_t sel_mass = 0;
                for (Vertex w : g.neighbors(v)) sel_mass += sel_count[static_cast<std::size_t>(w)];
                ++rep.sel_mass.checked;
                if (static_cast<double>(sel_mass) < sel_coeff * dgr - 1e-9) {
                    ++rep.sel_mass.violations;
                    if (rep.sel_mass.worst.empty()) rep.sel_mass.worst = "vertex " + std::to_string(v);
                }
            }
        }
        rep.c2_degree.pass = rep.c2_degree.violations == 0;
        rep.c3_built.pass = rep.c3_built.violations == 0;
        rep.c4_mass.pass = rep.c4_mass.violations == 0;
        rep.sel_mass.pass = rep.sel_mass.violations == 0;
    }

    // Crowding: per-vertex neighbor counts within one selection set, and the
    // number of selection sets containing a vertex.
    if (mcfg.crowd_bound > 0) {
        std::vector<std::int32_t> touch(static_cast<std::size_t>(g.num_vertices()), 0);
        std::vector<Vertex> touched;
        std::int64_t worst_nb = 0;
        for (std::size_t l = 0; l < m; ++l) {
            const auto& ps = out.sample.per_transversal[l];
            for (Vertex w : ps.sel_vertex)
                for (Vertex x : g.neighbors(w)) {
                    if (touch[static_cast<std::size_t>(x)]++ == 0) touched.push_back(x);
                }
            for (Vertex x : touched) {
                worst_nb = std::max<std::int64_t>(worst_nb, touch[static_cast<std::size_t>(x)]);
                ++rep.crowd_nb.checked;
                if (static_cast<double>(touch[static_cast<std::size_t>(x)]) > mcfg.crowd_bound)
                    ++rep.crowd_nb.violations;
                touch[static_cast<std::size_t>(x)] = 0;
            }
            touched.clear();
        }
        for (Vertex v = 0; v < g.num_vertices(); ++v) {
            if (sel_count[static_cast<std::size_t>(v)] == 0) continue;
            ++rep.crowd_ap.checked;
            if (static_cast<double>(sel_count[static_cast<std::size_t>(v)]) > mcfg.crowd_bound)
                ++rep.crowd_ap.violations;
        }
        rep.crowd_nb.pass = rep.crowd_nb.violations == 0;
        rep.crowd_ap.pass = rep.crowd_ap.violations == 0;
        if (worst_nb > 0) rep.crowd_nb.worst = "max " + std::to_string(worst_nb);
    }

    return out;
}

struct TraceRow {
    std::int64_t r = 0;
    std::int64_t t = 0;
    std::int64_t active_transversals = 0;
    std::int64_t min_candidate = 0;
    std::int64_t max_candidate = 0;
    double s_minus = 0;
    double s_plus = 0;
    double d_bound = 0;
    bool monitors_pass = true;
    std::int64_t retries = 0;
};

struct RoundResult {
    std::vector<Transversal> transversals;
    bool ok = false;
    bool budget_exhausted = false;
    bool infeasible = false;
    std::string error;
    std::vector<TraceRow> trace;
    std::vector<MonitorReport> reports;
};

/// Runs t_star iterations with bounded per-iteration retry, then completes
/// the partial transversals one by one with the randomized finder, excluding
/// everything already claimed this round.
inline RoundResult run_round(const MultipartiteGraph& g, const DynBitset& used, std::int64_t r,
                             const NibbleSchedule& sched, const MonitorConfig& mcfg,
                             const RetryPolicy& policy, std::uint64_t seed, int workers = 1,
                             std::int64_t m_override = -1) {
    RoundResult out;
    const std::int64_t m = m_override >= 0 ? m_override : sched.m_r(r);
    RoundState st = init_round(g, used, r, sched, m);

    for (std::int64_t t = 0; t < sched.t_star; ++t) {
        std::int64_t attempt = 0;
        for (;;) {
            const std::uint64_t it_seed =
                derive_seed(seed, {kStreamIteration, static_cast<std::uint64_t>(r),
                                   static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(attempt)});
            IterationOutcome res = run_iteration(st, sched, mcfg, it_seed, workers);
            const bool failed = res.hard_failure || policy.iteration_failed(res.report);
            if (!failed) {
                st = std::move(res.next);
                TraceRow row;
                row.r = r;
                row.t = t + 1;
                row.s_minus = sched.S_minus(r, t + 1);
                row.s_plus = sched.S_plus(r, t + 1);
                row.d_bound = sched.D(r, t + 1);
                row.retries = attempt;
                row.monitors_pass = all_monitors_pass(res.report);
                std::int64_t mn = INT64_MAX, mx = 0, act = 0;
                for (const auto& slot : st.slots) {
                    if (!slot.active.empty()) ++act;
                    for (PartIndex i : slot.active) {
                        mn = std::min(mn, slot.size[static_cast<std::size_t>(i)]);
                        mx = std::max(mx, slot.size[static_cast<std::size_t>(i)]);
                    }
                }
                row.active_transversals = act;
                row.min_candidate = mn == INT64_MAX ? 0 : mn;
                row.max_candidate = mx;
                out.trace.push_back(row);
                out.reports.push_back(std::move(res.report));
                break;
            }
            ++attempt;
            if (attempt > mcfg.retry_budget) {
                out.budget_exhausted = true;
                out.error = "iteration retry budget exhausted at t=" + std::to_string(t) + ": " +
                            (res.hard_failure ? res.failure : "monitor failure");
                if (!res.hard_failure) {
                    const MonitorReport& rep = res.report;
                    for (const auto* chk : {&rep.c1_band, &rep.c1_step, &rep.c2_degree, &rep.c3_built,
                                            &rep.c4_mass, &rep.crowd_nb, &rep.crowd_ap, &rep.eq1})
                        if (!chk->pass && !chk->worst.empty()) out.error += "; worst: " + chk->worst;
                }
                return out;
            }
        }
    }

    // Completion, in slot order.
    for (std::int64_t l = 0; l < m; ++l) {
        auto& slot = st.slots[static_cast<std::size_t>(l)];
        Transversal full = slot.partial;
        if (!slot.active.empty()) {
            CandidateFamily fam;
            fam.scope = slot.active;
            fam.per_part.resize(static_cast<std::size_t>(g.num_parts()));
            bool empty = false;
            for (PartIndex i : slot.active) {
                DynBitset bs(static_cast<std::size_t>(g.part_size(i)));
                slot.cand[static_cast<std::size_t>(i)].for_each_set([&](std::size_t local) {
                    const Vertex v = g.vertex_id(i, static_cast<Vertex>(local));
                    if (!st.claimed.test(static_cast<std::size_t>(v))) bs.set(local);
                });
                if (!bs.any()) empty = true;
                fam.per_part[static_cast<std::size_t>(i)] = std::move(bs);
            }
            LllConfig cfg;
            cfg.seed = derive_seed(seed, {kStreamCompletion, static_cast<std::uint64_t>(r),
                                          static_cast<std::uint64_t>(l)});
            cfg.fallback = LllFallback::Backtracking;
            FinderResult fr;
            fr.status = FinderStatus::EmptyCandidates;
            if (!empty) fr = find_transversal(g, fam, cfg);
            if (fr.status != FinderStatus::Found) {
                out.infeasible = true;
                out.error = "completion failed for transversal " + std::to_string(l) +
                            (fr.status == FinderStatus::Exhausted ? " (resample budget)"
                                                                  : " (no candidates left)");
                return out; // transversals completed so far are already in out
            }
            for (PartIndex i : slot.active) full.assign(i, fr.transversal.vertex_in(i));
        }
        const auto issues = check_transversal(g, full);
        if (!full.full() || !issues.empty())
            throw NibbleError("internal: completed transversal invalid: " +
                              (issues.empty() ? "incomplete" : issues.front()));
        for (PartIndex i = 0; i < g.num_parts(); ++i)
            st.claimed.set(static_cast<std::size_t>(full.vertex_in(i)));
        out.transversals.push_back(std::move(full));
    }
    out.ok = true;
    return out;
}

struct PackResult {
    Packing packing;
    std::vector<TraceRow> trace;
    std::vector<std::string> warnings;
};

/// User-facing solve knobs, turned into a concrete schedule per instance (or
/// per block, in the reduction pipeline).
struct SolveOptions {
    ScheduleMode mode = ScheduleMode::Practical;
    double eps = 0.2;
    double p = 0.25;         // practical mode
    std::int64_t r_star = 0; // 0 = derive from eps and p
    std::int64_t t_star = 0; // 0 = derive from p
    MonitorConfig monitors;  // slack_factor <= 0 = fill in defaults per schedule
    RetryPolicy policy;
    int workers = 1;
};

/// Builds the schedule for an instance whose smallest part has n vertices.
/// With the round budget left automatic, enough rounds are planned that the
/// expected yield reaches (1-eps)n, and the driver's per-round clamp keeps
/// degenerate instances (tiny n) running.
inline NibbleSchedule schedule_for(const SolveOptions& opts, std::int64_t n) {
    if (opts.mode == ScheduleMode::Theory) return make_schedule(opts.eps, n);
    std::int64_t r_star = opts.r_star;
    if (r_star <= 0) {
        const double need = std::log(std::max(1e-9, opts.eps)) / std::log1p(-opts.p);
        r_star = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(need)));
        r_star = std::min<std::int64_t>(r_star, std::max<std::int64_t>(4 * n, 8));
    }
    std::int64_t t_star = opts.t_star;
    if (t_star <= 0)
        t_star = std::max<std::int64_t>(1, std::min<std::int64_t>(
                                               40, static_cast<std::int64_t>(std::ceil(1.0 / opts.p))));
    if (static_cast<double>(n) * opts.p >= 1.0)
        return make_practical_schedule(opts.eps, n, opts.p, r_star, t_star);
    // Degenerate instances (p*n < 1) admit no schedule whose first round
    // grows a whole transversal; the round driver clamps the count to one,
    // so assemble the same formula family directly.
    NibbleSchedule s;
    s.eps = opts.eps;
    s.n = n;
    s.p = opts.p;
    s.delta = std::pow(opts.eps, 5);
    s.r_star = r_star;
    s.t_star = t_star;
    s.mode = ScheduleMode::Practical;
    return s;
}

inline MonitorConfig monitors_for(const SolveOptions& opts, const NibbleSchedule& sched) {
    MonitorConfig m = opts.monitors;
    if (m.slack_factor <= 0) {
        const double anchor_override = m.degree_anchor_override;
        MonitorConfig defaults = MonitorConfig::theory_defaults(sched);
        defaults.retry_budget = m.retry_budget;
        defaults.statistical_quantile = m.statistical_quantile;
        defaults.degree_anchor_override = anchor_override;
        m = defaults;
    }
    return m;
}

/// Runs rounds until the schedule is exhausted, a round fails for good, or
/// some part runs out of vertices. Transversals of failed rounds that were
/// completed before the failure are kept. The returned packing is always
/// re-verified; a verification failure would be a bug and throws.
inline PackResult pack(const MultipartiteGraph& g, const NibbleSchedule& sched,
                       const MonitorConfig& mcfg, const RetryPolicy& policy, std::uint64_t seed,
                       int workers = 1) {
    PackResult out;
    if (g.num_parts() == 0 || g.num_vertices() == 0)
        throw NibbleError("empty instance");
    if (sched.mode == ScheduleMode::Theory) {
        const GraphStats s = stats(g);
        const double cap = (1.0 - sched.eps) * static_cast<double>(sched.n);
        if (static_cast<double>(s.max_degree) > cap)
            out.warnings.push_back("max degree " + std::to_string(s.max_degree) +
                                   " exceeds (1-eps)n = " + std::to_string(cap));
    }

    DynBitset used(static_cast<std::size_t>(g.num_vertices()));
    for (std::int64_t r = 1; r <= sched.r_star; ++r) {
        std::int64_t min_avail = INT64_MAX;
        for (PartIndex i = 0; i < g.num_parts(); ++i) {
            std::int64_t c = 0;
            for (Vertex v = g.part_offset(i); v < g.part_offset(i) + g.part_size(i); ++v)
                if (!used.test(static_cast<std::size_t>(v))) ++c;
            min_avail = std::min(min_avail, c);
        }
        if (min_avail <= 0) break; // nothing left to pack
        const std::int64_t m = std::min(std::max<std::int64_t>(1, sched.m_r(r)), min_avail);

        RoundResult rr;
        for (std::int64_t attempt = 0;; ++attempt) {
            const std::uint64_t round_seed =
                derive_seed(seed, {kStreamBlock, static_cast<std::uint64_t>(r),
                                   static_cast<std::uint64_t>(attempt)});
            rr = run_round(g, used, r, sched, mcfg, policy, round_seed, workers, m);
            if (rr.ok || attempt >= policy.round_retries) break;
        }
        for (auto& row : rr.trace) out.trace.push_back(row);
        for (auto& t : rr.transversals) {
            for (PartIndex i = 0; i < g.num_parts(); ++i)
                used.set(static_cast<std::size_t>(t.vertex_in(i)));
            out.packing.transversals.push_back(std::move(t));
        }
        if (!rr.ok) {
            out.packing.complete = false;
            out.packing.infeasible = rr.infeasible;
            out.packing.budget_exhausted = rr.budget_exhausted;
            out.packing.note = rr.error;
            break;
        }
    }

    const auto violations = verify_packing(g, out.packing);
    if (!violations.empty())
        throw NibbleError("internal: produced packing fails verification: " +
                          violations.front().detail);
    return out;
}

/// Convenience front end: schedule + monitors + pack in one call.
inline PackResult solve(const MultipartiteGraph& g, const SolveOptions& opts, std::uint64_t seed) {
    const std::int64_t n = std::max<Vertex>(1, g.min_part_size());
    const NibbleSchedule sched = schedule_for(opts, n);
    const MonitorConfig mcfg = monitors_for(opts, sched);
    return pack(g, sched, mcfg, opts.policy, seed, opts.workers);
}

} // namespace itpack
