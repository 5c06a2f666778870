// Batch command-line front end: instance generation, packing, reduction,
// the two applications, exact oracle queries, schedule validation, and
// packing validation. Non-interactive; everything is driven by flags and
// every output embeds the configuration and seed that produced it.
//
// Exit codes: 0 success, 2 invalid input, 3 infeasible or partial result
// (partial output still written), 4 budget exhausted.

#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "itpack/apps.hpp"
#include "itpack/generators.hpp"
#include "itpack/graph.hpp"
#include "itpack/io.hpp"
#include "itpack/nibble.hpp"
#include "itpack/oracle.hpp"
#include "itpack/reduce.hpp"
#include "itpack/rng.hpp"
#include "itpack/schedule.hpp"
#include "itpack/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalidInput = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitBudget = 4;

struct SolveFlags {
    std::string mode = "practical";
    double eps = 0.2;
    double p = 0.25;
    std::int64_t rounds = 0;
    std::int64_t iters = 0;
    std::uint64_t seed = 1;
    int workers = 1;
    std::int64_t retry_budget = 10;
    std::int64_t round_retries = 2;
    double quantile = 0.99;
    std::vector<std::string> enforce;
};

void add_solve_flags(CLI::App* cmd, SolveFlags& f) {
    cmd->add_option("--mode", f.mode, "Schedule mode: practical or theory")
        ->check(CLI::IsMember({"practical", "theory"}));
    cmd->add_option("--eps", f.eps, "Target slack: aim for (1-eps)n transversals");
    cmd->add_option("--p", f.p, "Activation probability (practical mode)");
    cmd->add_option("--rounds", f.rounds, "Round budget (0 = automatic)");
    cmd->add_option("--iters", f.iters, "Iterations per round (0 = automatic)");
    cmd->add_option("--seed", f.seed, "Master seed");
    cmd->add_option("--workers", f.workers, "Worker threads (results do not depend on this)");
    cmd->add_option("--retry-budget", f.retry_budget, "Per-iteration retry budget");
    cmd->add_option("--round-retries", f.round_retries, "Whole-round retry budget");
    cmd->add_option("--quantile", f.quantile, "Fraction of size bands that must hold");
    cmd->add_option("--enforce", f.enforce,
                    "Monitor families that trigger retries (c1,c2,c3,c4,crowding,eq1)")
        ->delimiter(',');
}

itpack::SolveOptions to_options(const SolveFlags& f) {
    itpack::SolveOptions o;
    o.mode = f.mode == "theory" ? itpack::ScheduleMode::Theory : itpack::ScheduleMode::Practical;
    o.eps = f.eps;
    o.p = f.p;
    o.r_star = f.rounds;
    o.t_star = f.iters;
    o.workers = f.workers;
    o.monitors.retry_budget = f.retry_budget;
    o.monitors.statistical_quantile = f.quantile;
    o.policy.round_retries = f.round_retries;
    for (const auto& fam : f.enforce) {
        if (fam == "c1") o.policy.c1 = itpack::MonitorAction::Enforce;
        else if (fam == "c2") o.policy.c2 = itpack::MonitorAction::Enforce;
        else if (fam == "c3") o.policy.c3 = itpack::MonitorAction::Enforce;
        else if (fam == "c4") o.policy.c4 = itpack::MonitorAction::Enforce;
        else if (fam == "crowding") o.policy.crowding = itpack::MonitorAction::Enforce;
        else if (fam == "eq1") o.policy.eq1 = itpack::MonitorAction::Enforce;
        else throw itpack::InstanceError("unknown monitor family: " + fam);
    }
    return o;
}

itpack::Json solve_config_json(const SolveFlags& f, const std::string& subcommand) {
    itpack::Json j;
    j["subcommand"] = subcommand;
    j["mode"] = f.mode;
    j["eps"] = f.eps;
    j["p"] = f.p;
    j["rounds"] = f.rounds;
    j["iters"] = f.iters;
    j["seed"] = f.seed;
    // The worker count is deliberately not embedded: results do not depend
    // on it, so any re-run of this config reproduces the file byte-for-byte.
    j["retry_budget"] = f.retry_budget;
    j["round_retries"] = f.round_retries;
    j["quantile"] = f.quantile;
    j["enforce"] = f.enforce;
    j["rng"] = itpack::kRngAlgorithm;
    return j;
}

std::string trace_csv(const std::vector<itpack::TraceRow>& rows) {
    std::ostringstream out;
    out << "r,t,active_transversals,min_candidate,max_candidate,s_minus,s_plus,d_bound,"
           "monitors_pass,retries\n";
    for (const auto& r : rows)
        out << r.r << ',' << r.t << ',' << r.active_transversals << ',' << r.min_candidate << ','
            << r.max_candidate << ',' << r.s_minus << ',' << r.s_plus << ',' << r.d_bound << ','
            << (r.monitors_pass ? 1 : 0) << ',' << r.retries << '\n';
    return out.str();
}

int packing_exit_code(const itpack::Packing& p) {
    if (p.complete) return kExitOk;
    return p.budget_exhausted ? kExitBudget : kExitInfeasible;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(itpack::kToolName) + " " + itpack::kToolVersion +
                 " - disjoint independent transversal packing"};
    app.require_subcommand(1);

    // --- gen -------------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "Generate an instance");
    std::string gen_family, gen_out;
    std::int64_t gen_n = 4, gen_k = 3, gen_edges = -1;
    std::int64_t gen_maxdeg = 0, gen_local = 0;
    double gen_eps = 0.5;
    std::uint64_t gen_seed = 1;
    gen->add_option("family", gen_family, "cliques-extremal | yuster | avg-deg | random")
        ->required()
        ->check(CLI::IsMember({"cliques-extremal", "yuster", "avg-deg", "random"}));
    gen->add_option("-o,--out", gen_out, "Output instance path")->required();
    gen->add_option("--n", gen_n, "Part size");
    gen->add_option("--k", gen_k, "Number of parts");
    gen->add_option("--eps", gen_eps, "Slack parameter (avg-deg family)");
    gen->add_option("--max-deg", gen_maxdeg, "Max degree cap (random family)");
    gen->add_option("--local", gen_local, "Local degree cap (random family)");
    gen->add_option("--edges", gen_edges, "Edge budget (random family, -1 = auto)");
    gen->add_option("--seed", gen_seed, "Seed");

    // --- pack ------------------------------------------------------------
    auto* packc = app.add_subcommand("pack", "Pack disjoint independent transversals");
    std::string pack_in, pack_out, pack_trace;
    SolveFlags pack_flags;
    packc->add_option("-i,--in", pack_in, "Instance path")->required();
    packc->add_option("-o,--out", pack_out, "Packing output path")->required();
    packc->add_option("--trace", pack_trace, "Trace CSV path");
    add_solve_flags(packc, pack_flags);

    // --- reduce-pack -------------------------------------------------------
    auto* redc = app.add_subcommand("reduce-pack", "Local-degree reduction, then pack per block");
    std::string red_in, red_out;
    double red_gamma = 0.25;
    bool red_full_checks = false;
    SolveFlags red_flags;
    redc->add_option("-i,--in", red_in, "Instance path")->required();
    redc->add_option("-o,--out", red_out, "Packing output path")->required();
    redc->add_option("--gamma", red_gamma, "Local degree fraction");
    redc->add_flag("--full-split-checks", red_full_checks,
                   "Demand the full split thresholds instead of structural ones");
    add_solve_flags(redc, red_flags);

    // --- clique-pack -------------------------------------------------------
    auto* cliquec = app.add_subcommand("clique-pack", "Pack disjoint cliques, one vertex per part");
    std::string clique_in, clique_out;
    double clique_delta = 0.5;
    SolveFlags clique_flags;
    cliquec->add_option("-i,--in", clique_in, "Instance path")->required();
    cliquec->add_option("-o,--out", clique_out, "Clique packing output path")->required();
    cliquec->add_option("--delta", clique_delta, "Partite degree slack");
    add_solve_flags(cliquec, clique_flags);

    // --- list-color ---------------------------------------------------------
    auto* listc = app.add_subcommand("list-color", "Pack disjoint list colorings");
    std::string list_in, list_out;
    SolveFlags list_flags;
    listc->add_option("-i,--in", list_in, "List-assignment path")->required();
    listc->add_option("-o,--out", list_out, "Coloring packing output path")->required();
    add_solve_flags(listc, list_flags);

    // --- oracle ---------------------------------------------------------------
    auto* oraclec = app.add_subcommand("oracle", "Exact brute-force answers for small instances");
    std::string oracle_query, oracle_in, oracle_out;
    std::uint64_t oracle_guard = 1'000'000;
    oraclec->add_option("query", oracle_query, "exists | max")
        ->required()
        ->check(CLI::IsMember({"exists", "max"}));
    oraclec->add_option("-i,--in", oracle_in, "Instance path")->required();
    oraclec->add_option("-o,--out", oracle_out, "Optional JSON output path");
    oraclec->add_option("--guard", oracle_guard, "Search-node guard");

    // --- validate ----------------------------------------------------------
    auto* valc = app.add_subcommand("validate", "Verify a packing file against an instance");
    std::string val_graph, val_packing;
    valc->add_option("-g,--graph", val_graph, "Instance path")->required();
    valc->add_option("-p,--packing", val_packing, "Packing path")->required();

    // --- schedule check -------------------------------------------------------
    auto* schedc = app.add_subcommand("schedule", "Schedule tools");
    auto* schedcheck = schedc->add_subcommand("check", "Evaluate the schedule consistency relations");
    double sched_eps = 0.005;
    std::int64_t sched_n = 1'000'000'000;
    std::string sched_out;
    schedcheck->add_option("--eps", sched_eps, "eps")->required();
    schedcheck->add_option("--n", sched_n, "n")->required();
    schedcheck->add_option("-o,--out", sched_out, "Optional JSON output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            itpack::MultipartiteGraph g;
            itpack::Json meta;
            meta["generator"] = gen_family;
            meta["seed"] = gen_seed;
            meta["rng"] = itpack::kRngAlgorithm;
            meta["tool"] = itpack::Json{{"name", itpack::kToolName}, {"version", itpack::kToolVersion}};
            if (gen_family == "cliques-extremal") {
                g = itpack::gen_cliques_extremal(static_cast<itpack::Vertex>(gen_n));
                meta["n"] = gen_n;
            } else if (gen_family == "yuster") {
                g = itpack::gen_yuster(static_cast<itpack::PartIndex>(gen_k),
                                       static_cast<itpack::Vertex>(gen_n), gen_seed);
                meta["k"] = gen_k;
                meta["n"] = gen_n;
            } else if (gen_family == "avg-deg") {
                g = itpack::gen_avg_degree_counterexample(static_cast<itpack::Vertex>(gen_n), gen_eps);
                meta["n"] = gen_n;
                meta["eps"] = gen_eps;
            } else {
                g = itpack::gen_random(static_cast<itpack::PartIndex>(gen_k),
                                       static_cast<itpack::Vertex>(gen_n),
                                       static_cast<std::size_t>(gen_maxdeg),
                                       static_cast<std::size_t>(gen_local), gen_seed, gen_edges);
                meta["k"] = gen_k;
                meta["n"] = gen_n;
                meta["max_deg"] = gen_maxdeg;
                meta["local"] = gen_local;
                meta["edges"] = gen_edges;
            }
            itpack::write_file(gen_out, itpack::graph_to_json(g, std::move(meta)).dump(2) + "\n");
            return kExitOk;
        }

        if (*packc) {
            const auto g = itpack::load_graph(itpack::read_file(pack_in));
            const auto opts = to_options(pack_flags);
            itpack::PackResult pr = itpack::solve(g, opts, pack_flags.seed);
            for (const auto& w : pr.warnings) std::cerr << "warning: " << w << "\n";
            itpack::Json cfg = solve_config_json(pack_flags, "pack");
            itpack::write_file(pack_out, itpack::packing_to_json(pr.packing, std::move(cfg)).dump(2) + "\n");
            if (!pack_trace.empty()) itpack::write_file(pack_trace, trace_csv(pr.trace));
            if (!pr.packing.complete)
                std::cerr << "partial result: " << pr.packing.note << "\n";
            return packing_exit_code(pr.packing);
        }

        if (*redc) {
            const auto g = itpack::load_graph(itpack::read_file(red_in));
            itpack::ReducePackOptions opts;
            opts.solve = to_options(red_flags);
            opts.checks = red_full_checks ? itpack::SplitChecks::Full
                                          : itpack::SplitChecks::StructuralOnly;
            itpack::ReducePackResult rp =
                itpack::reduce_and_pack(g, red_flags.eps, red_gamma, opts, red_flags.seed);
            for (const auto& w : rp.warnings) std::cerr << "warning: " << w << "\n";
            itpack::Json cfg = solve_config_json(red_flags, "reduce-pack");
            cfg["gamma"] = red_gamma;
            itpack::write_file(red_out, itpack::packing_to_json(rp.packing, std::move(cfg)).dump(2) + "\n");
            if (!rp.packing.complete) std::cerr << "partial result: " << rp.packing.note << "\n";
            return packing_exit_code(rp.packing);
        }

        if (*cliquec) {
            const auto g = itpack::load_graph(itpack::read_file(clique_in));
            itpack::ReducePackOptions opts;
            opts.solve = to_options(clique_flags);
            const auto cp =
                itpack::clique_pack(g, clique_flags.eps, clique_delta, opts, clique_flags.seed);
            for (const auto& w : cp.warnings) std::cerr << "warning: " << w << "\n";
            itpack::Json j;
            j["format"] = "clique-packing/1";
            j["tool"] = itpack::Json{{"name", itpack::kToolName}, {"version", itpack::kToolVersion}};
            itpack::Json cfg = solve_config_json(clique_flags, "clique-pack");
            cfg["delta"] = clique_delta;
            j["config"] = std::move(cfg);
            j["complete"] = cp.complete;
            j["cliques"] = cp.cliques;
            itpack::write_file(clique_out, j.dump(2) + "\n");
            return cp.complete ? kExitOk : kExitInfeasible;
        }

        if (*listc) {
            const auto la = itpack::load_list_assignment(itpack::read_file(list_in));
            const auto lp = itpack::pack_list_colorings(la, to_options(list_flags), list_flags.seed);
            for (const auto& w : lp.warnings) std::cerr << "warning: " << w << "\n";
            itpack::Json j;
            j["format"] = "coloring-packing/1";
            j["tool"] = itpack::Json{{"name", itpack::kToolName}, {"version", itpack::kToolVersion}};
            j["config"] = solve_config_json(list_flags, "list-color");
            j["complete"] = lp.complete;
            j["min_list_size"] = lp.min_list_size;
            j["color_degree"] = lp.color_degree;
            itpack::Json colorings = itpack::Json::array();
            for (const auto& c : lp.colorings) {
                itpack::Json row = itpack::Json::array();
                for (const auto& [v, col] : c) row.push_back(itpack::Json::array({v, col}));
                colorings.push_back(std::move(row));
            }
            j["colorings"] = std::move(colorings);
            itpack::write_file(list_out, j.dump(2) + "\n");
            return lp.complete ? kExitOk : kExitInfeasible;
        }

        if (*oraclec) {
            const auto g = itpack::load_graph(itpack::read_file(oracle_in));
            itpack::Json j;
            j["format"] = "oracle/1";
            j["query"] = oracle_query;
            int code = kExitOk;
            if (oracle_query == "exists") {
                const auto res = itpack::exists_transversal(g, oracle_guard);
                j["nodes_explored"] = res.nodes_explored;
                if (res.guard_exceeded) {
                    j["status"] = "guard-exceeded";
                    code = kExitBudget;
                } else if (res.witness) {
                    j["status"] = "exists";
                    j["witness"] = res.witness->raw();
                } else {
                    j["status"] = "none";
                    code = kExitInfeasible;
                    std::cerr << "no transversal\n";
                }
            } else {
                const auto res = itpack::max_disjoint_transversals(g, oracle_guard);
                j["nodes_explored"] = res.nodes_explored;
                if (res.guard_exceeded) {
                    j["status"] = "guard-exceeded";
                    code = kExitBudget;
                } else {
                    j["status"] = "ok";
                    j["max_disjoint_transversals"] = res.count;
                    itpack::Json ts = itpack::Json::array();
                    for (const auto& t : res.packing.transversals) ts.push_back(t.raw());
                    j["packing"] = std::move(ts);
                }
            }
            const std::string text = j.dump(2) + "\n";
            if (oracle_out.empty()) std::cout << text;
            else itpack::write_file(oracle_out, text);
            return code;
        }

        if (*valc) {
            const auto g = itpack::load_graph(itpack::read_file(val_graph));
            const auto p = itpack::packing_from_json(itpack::read_file(val_packing));
            const auto violations = itpack::verify_packing(g, p);
            if (violations.empty()) {
                std::cout << "ok: " << p.transversals.size() << " transversals verified\n";
                return kExitOk;
            }
            for (const auto& v : violations) std::cerr << v.kind << ": " << v.detail << "\n";
            return kExitInfeasible;
        }

        if (*schedcheck) {
            const auto sched = itpack::make_schedule(sched_eps, sched_n);
            const auto rep = itpack::validate_observation(sched);
            const itpack::Json j = itpack::observation_report_to_json(rep);
            for (const auto& c : rep.clauses) {
                std::cout << "clause (" << c.id << "): ";
                if (c.pass.has_value()) std::cout << (*c.pass ? "pass" : "FAIL");
                else std::cout << "informational";
                if (!c.note.empty()) std::cout << " - " << c.note;
                std::cout << "\n";
                for (const auto& [k, v] : c.values)
                    std::cout << "    " << k << " = " << v << "\n";
            }
            if (!sched_out.empty()) itpack::write_file(sched_out, j.dump(2) + "\n");
            return kExitOk;
        }
    } catch (const itpack::InstanceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    } catch (const itpack::ScheduleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    }
    return kExitOk;
}
