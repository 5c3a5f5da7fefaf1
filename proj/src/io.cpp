#include "causal/io.hpp"

#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

namespace causal {

using nlohmann::json;

json graph_to_json(const GraphSpec& g) {
    json nodes = json::array();
    for (const auto& nd : g.nodes())
        nodes.push_back({{"id", nd.id}, {"role", role_name(nd.role)}, {"block", nd.block}});
    json edges = json::array();
    for (const auto& [p, c] : g.edges())
        edges.push_back(json::array({g.node(p).id, g.node(c).id}));
    return json{{"nodes", nodes}, {"edges", edges}, {"treatment_active", g.treatment_active()}};
}

GraphSpec graph_from_json(const json& j) {
    std::vector<NodeSpec> nodes;
    for (const auto& nj : j.at("nodes")) {
        NodeSpec nd;
        nd.id = nj.at("id").get<std::string>();
        nd.role = role_from_name(nj.at("role").get<std::string>());
        nd.block = nj.value("block", nd.id);
        nodes.push_back(std::move(nd));
    }
    std::vector<std::pair<std::string, std::string>> edges;
    for (const auto& ej : j.at("edges"))
        edges.emplace_back(ej.at(0).get<std::string>(), ej.at(1).get<std::string>());
    return GraphSpec(std::move(nodes), std::move(edges), j.value("treatment_active", true));
}

json sem_to_json(const LinearSem& sem) {
    json j = graph_to_json(sem.graph);
    json coeffs = json::array();
    const auto& edges = sem.graph.edges();
    for (size_t e = 0; e < edges.size(); ++e)
        coeffs.push_back(json::array({sem.graph.node(edges[e].first).id,
                                      sem.graph.node(edges[e].second).id, sem.coeffs[e]}));
    json noise = json::object();
    for (int i = 0; i < sem.graph.num_nodes(); ++i)
        noise[sem.graph.node(i).id] = sem.noise_vars[i];
    j["coeffs"] = std::move(coeffs);
    j["noise_vars"] = std::move(noise);
    return j;
}

LinearSem sem_from_json(const json& j) {
    GraphSpec g = graph_from_json(j);
    LinearSem sem{g, {}, {}};
    sem.coeffs.assign(g.num_edges(), 0.0);
    for (const auto& cj : j.at("coeffs")) {
        const std::string p = cj.at(0).get<std::string>();
        const std::string c = cj.at(1).get<std::string>();
        const double v = cj.at(2).get<double>();
        const int pi = g.index_of(p), ci = g.index_of(c);
        bool found = false;
        const auto& edges = g.edges();
        for (size_t e = 0; e < edges.size(); ++e)
            if (edges[e].first == pi && edges[e].second == ci) {
                sem.coeffs[e] = v;
                found = true;
                break;
            }
        if (!found) throw std::invalid_argument("coefficient for non-edge " + p + " -> " + c);
    }
    sem.noise_vars.assign(g.num_nodes(), 0.0);
    for (const auto& [id, v] : j.at("noise_vars").items())
        sem.noise_vars[g.index_of(id)] = v.get<double>();
    sem.validate();
    return sem;
}

json discovery_result_to_json(const DiscoveryResult& res, const DiscoveryConfig& cfg) {
    json beta = json::array();
    for (int i = 0; i < res.beta.size(); ++i) beta.push_back(res.beta(i));
    json trace = json::array();
    for (double v : res.trace) trace.push_back(v);
    return json{
        {"beta", beta},
        {"selected", res.selected_ids},
        {"objective_terms",
         {{"dep", res.objective_terms.dep},
          {"aux_dep", res.objective_terms.aux_dep},
          {"l1", res.objective_terms.l1},
          {"value", res.objective_terms.value}}},
        {"trace", trace},
        {"tests_run", res.tests_run},
        {"converged", res.converged},
        {"lambda2_final", res.lambda2_final},
        {"rounds", res.rounds},
        {"seed", res.seed},
        {"config",
         {{"lambda1", cfg.lambda1},
          {"lambda2", cfg.lambda2},
          {"lambda2_growth", cfg.lambda2_growth},
          {"lambda2_rule", cfg.lambda2_rule == Lambda2Rule::Quoted ? "quoted" : "dependence"},
          {"eta", cfg.eta},
          {"max_iters", cfg.max_iters},
          {"alpha_test", cfg.alpha_test},
          {"support_threshold", cfg.support_threshold},
          {"ridge", cfg.ridge}}}};
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // prefer the shortest form that still round-trips
    for (int prec = 1; prec <= 16; ++prec) {
        char shorter[40];
        std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(shorter, "%lf", &back);
        if (back == v) return shorter;
    }
    return buf;
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
    std::ostringstream out;
    for (int j = 0; j < data.cols(); ++j) {
        if (j) out << ',';
        out << data.columns[j].id;
    }
    out << '\n';
    for (long r = 0; r < data.rows(); ++r) {
        for (int j = 0; j < data.cols(); ++j) {
            if (j) out << ',';
            out << format_double(data.matrix(r, j));
        }
        out << '\n';
    }
    write_text_file(path, out.str());
}

void write_roles_json(const Dataset& data, const std::string& path) {
    json cols = json::object();
    for (int j = 0; j < data.cols(); ++j) {
        const auto& c = data.columns[j];
        cols[c.id] = {{"role", role_name(c.role)},
                      {"block", c.block},
                      {"scale", data.scale_factors[j]}};
    }
    json j{{"columns", cols}, {"standardized", data.standardized}};
    write_text_file(path, j.dump(2) + "\n");
}

Dataset read_dataset_csv(const std::string& csv_path, const std::string& roles_path) {
    const std::string text = read_text_file(csv_path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty dataset csv: " + csv_path);

    std::vector<std::string> header;
    {
        std::istringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) header.push_back(cell);
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        row.reserve(header.size());
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() != header.size())
            throw std::invalid_argument("ragged row in dataset csv: " + csv_path);
        rows.push_back(std::move(row));
    }

    const json roles = json::parse(read_text_file(roles_path));
    const json& cols = roles.at("columns");

    Dataset data;
    data.standardized = roles.value("standardized", false);
    data.matrix.resize(static_cast<long>(rows.size()), static_cast<long>(header.size()));
    for (size_t r = 0; r < rows.size(); ++r)
        for (size_t c = 0; c < header.size(); ++c)
            data.matrix(static_cast<long>(r), static_cast<long>(c)) = rows[r][c];
    for (const auto& id : header) {
        if (!cols.contains(id))
            throw std::invalid_argument("roles file missing column: " + id);
        const json& cj = cols.at(id);
        ColumnInfo info;
        info.id = id;
        if (cj.is_string()) {
            info.role = role_from_name(cj.get<std::string>());
            info.block = id;
            data.scale_factors.push_back(1.0);
        } else {
            info.role = role_from_name(cj.at("role").get<std::string>());
            info.block = cj.value("block", id);
            data.scale_factors.push_back(cj.value("scale", 1.0));
        }
        data.columns.push_back(std::move(info));
    }
    return data;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace causal
