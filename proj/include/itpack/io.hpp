#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "itpack/graph.hpp"
#include "itpack/schedule.hpp"
#include "itpack/transversal.hpp"
#include "itpack/version.hpp"

namespace itpack {

// Output files are written with ordered_json so that identical runs produce
// byte-identical bytes.
using Json = nlohmann::ordered_json;

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InstanceError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InstanceError("cannot write " + path);
    out << bytes;
}

/// Instance format: {"k": int, "sizes": [int], "edges": [[u, v], ...]} with
/// global ids assigned part by part. Unknown keys are ignored, so generated
/// files may carry "format" and "meta" blocks.
inline MultipartiteGraph load_graph(const std::string& bytes) {
    Json j;
    try {
        j = Json::parse(bytes);
    } catch (const nlohmann::json::exception& e) {
        throw InstanceError(std::string("instance parse failure: ") + e.what());
    }
    try {
        const auto k = j.at("k").get<PartIndex>();
        auto sizes = j.at("sizes").get<std::vector<Vertex>>();
        std::vector<std::pair<Vertex, Vertex>> edges;
        for (const auto& e : j.at("edges")) {
            if (!e.is_array() || e.size() != 2)
                throw InstanceError("edge " + std::to_string(edges.size()) +
                                    ": expected a pair of vertex ids");
            edges.emplace_back(e[0].get<Vertex>(), e[1].get<Vertex>());
        }
        return MultipartiteGraph::from_edges(k, std::move(sizes), edges);
    } catch (const nlohmann::json::exception& e) {
        throw InstanceError(std::string("instance field error: ") + e.what());
    }
}

inline Json graph_to_json(const MultipartiteGraph& g, Json meta = Json::object()) {
    Json j;
    j["format"] = "mpgraph/1";
    j["k"] = g.num_parts();
    j["sizes"] = g.part_sizes();
    Json edges = Json::array();
    for (auto [u, v] : g.edge_list()) edges.push_back(Json::array({u, v}));
    j["edges"] = std::move(edges);
    if (!meta.empty()) j["meta"] = std::move(meta);
    return j;
}

/// List-assignment format: {"n": int, "edges": [[u, v]], "lists": [[colorId]]}.
inline ListAssignment load_list_assignment(const std::string& bytes) {
    Json j;
    try {
        j = Json::parse(bytes);
    } catch (const nlohmann::json::exception& e) {
        throw InstanceError(std::string("list-assignment parse failure: ") + e.what());
    }
    try {
        ListAssignment la;
        la.n = j.at("n").get<Vertex>();
        for (const auto& e : j.at("edges"))
            la.edges.emplace_back(e[0].get<Vertex>(), e[1].get<Vertex>());
        la.lists = j.at("lists").get<std::vector<std::vector<int>>>();
        return la;
    } catch (const nlohmann::json::exception& e) {
        throw InstanceError(std::string("list-assignment field error: ") + e.what());
    }
}

inline Json list_assignment_to_json(const ListAssignment& la) {
    Json j;
    j["format"] = "lists/1";
    j["n"] = la.n;
    Json edges = Json::array();
    for (auto [u, v] : la.edges) edges.push_back(Json::array({u, v}));
    j["edges"] = std::move(edges);
    j["lists"] = la.lists;
    return j;
}

inline Json schedule_to_json(const NibbleSchedule& s) {
    Json j;
    j["eps"] = s.eps;
    j["n"] = s.n;
    j["p"] = s.p;
    j["delta"] = s.delta;
    j["r_star"] = s.r_star;
    j["t_star"] = s.t_star;
    j["mode"] = s.mode == ScheduleMode::Theory ? "theory" : "practical";
    return j;
}

inline NibbleSchedule schedule_from_json(const Json& j) {
    const auto mode = j.at("mode").get<std::string>();
    if (mode == "theory") return make_schedule(j.at("eps").get<double>(), j.at("n").get<std::int64_t>());
    return make_practical_schedule(j.at("eps").get<double>(), j.at("n").get<std::int64_t>(),
                                   j.at("p").get<double>(), j.at("r_star").get<std::int64_t>(),
                                   j.at("t_star").get<std::int64_t>());
}

inline Json observation_report_to_json(const ObservationReport& rep) {
    Json j;
    j["eps"] = rep.eps;
    j["n"] = rep.n;
    Json clauses = Json::array();
    for (const auto& c : rep.clauses) {
        Json cj;
        cj["clause"] = c.id;
        if (c.pass.has_value()) cj["pass"] = *c.pass;
        else cj["pass"] = nullptr;
        cj["values"] = c.values;
        if (!c.note.empty()) cj["note"] = c.note;
        clauses.push_back(std::move(cj));
    }
    j["clauses"] = std::move(clauses);
    return j;
}

/// Packing format: {"format", "tool", "config", "flags", "transversals"}
/// where each transversal is an array of k vertex ids ordered by part.
inline Json packing_to_json(const Packing& p, Json config = Json::object()) {
    Json j;
    j["format"] = "packing/1";
    j["tool"] = Json{{"name", kToolName}, {"version", kToolVersion}};
    j["config"] = std::move(config);
    j["flags"] = Json{{"complete", p.complete},
                      {"infeasible", p.infeasible},
                      {"budget_exhausted", p.budget_exhausted},
                      {"note", p.note}};
    Json ts = Json::array();
    for (const auto& t : p.transversals) ts.push_back(t.raw());
    j["transversals"] = std::move(ts);
    return j;
}

inline Packing packing_from_json(const std::string& bytes) {
    Json j;
    try {
        j = Json::parse(bytes);
    } catch (const nlohmann::json::exception& e) {
        throw InstanceError(std::string("packing parse failure: ") + e.what());
    }
    Packing p;
    try {
        if (j.contains("flags")) {
            const auto& f = j.at("flags");
            p.complete = f.value("complete", true);
            p.infeasible = f.value("infeasible", false);
            p.budget_exhausted = f.value("budget_exhausted", false);
            p.note = f.value("note", std::string{});
        }
        for (const auto& row : j.at("transversals")) {
            Transversal t(static_cast<PartIndex>(row.size()));
            for (PartIndex i = 0; i < t.num_parts(); ++i)
                t.assign(i, row[static_cast<std::size_t>(i)].get<Vertex>());
            p.transversals.push_back(std::move(t));
        }
    } catch (const nlohmann::json::exception& e) {
        throw InstanceError(std::string("packing field error: ") + e.what());
    }
    return p;
}

} // namespace itpack
