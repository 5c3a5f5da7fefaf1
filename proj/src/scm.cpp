#include "causal/scm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "causal/rng.hpp"
#include "causal/stats.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace causal {

double LinearSem::coeff(const std::string& parent, const std::string& child) const {
    const int p = graph.index_of(parent), c = graph.index_of(child);
    const auto& edges = graph.edges();
    for (size_t e = 0; e < edges.size(); ++e)
        if (edges[e].first == p && edges[e].second == c) return coeffs[e];
    throw std::invalid_argument("no edge " + parent + " -> " + child);
}

Eigen::MatrixXd LinearSem::coefficient_matrix() const {
    const int n = graph.num_nodes();
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
    const auto& edges = graph.edges();
    for (size_t e = 0; e < edges.size(); ++e) B(edges[e].first, edges[e].second) = coeffs[e];
    return B;
}

void LinearSem::validate() const {
    if (coeffs.size() != static_cast<size_t>(graph.num_edges()))
        throw std::invalid_argument("coefficient count does not match edge count");
    if (noise_vars.size() != static_cast<size_t>(graph.num_nodes()))
        throw std::invalid_argument("noise variance count does not match node count");
    for (double v : noise_vars)
        if (!(v > 0.0)) throw std::invalid_argument("noise variances must be strictly positive");
}

bool LinearSem::operator==(const LinearSem& other) const {
    return graph == other.graph && coeffs == other.coeffs && noise_vars == other.noise_vars;
}

int Dataset::col_index(const std::string& id) const {
    for (int j = 0; j < cols(); ++j)
        if (columns[j].id == id) return j;
    throw std::invalid_argument("unknown column: " + id);
}

std::vector<int> Dataset::role_cols(NodeRole role) const {
    std::vector<int> out;
    for (int j = 0; j < cols(); ++j)
        if (columns[j].role == role) out.push_back(j);
    return out;
}

std::vector<std::string> Dataset::role_ids(NodeRole role) const {
    std::vector<std::string> out;
    for (int j : role_cols(role)) out.push_back(columns[j].id);
    return out;
}

Dataset Dataset::head(long n) const {
    Dataset out = *this;
    out.matrix = matrix.topRows(n);
    return out;
}

Dataset Dataset::tail(long n) const {
    Dataset out = *this;
    out.matrix = matrix.bottomRows(n);
    return out;
}

double SemNoise::lookup(const NodeSpec& node) const {
    if (auto it = by_label.find(node.id); it != by_label.end()) return it->second;
    if (auto it = by_label.find(node.block); it != by_label.end()) return it->second;
    return fallback;
}

LinearSem sample_parameters(const GraphSpec& g, uint64_t seed, double sign_flip_prob,
                            const SemNoise& noise, const FixedCoeffs& fixed) {
    if (sign_flip_prob < 0.0 || sign_flip_prob > 1.0)
        throw std::invalid_argument("sign_flip_prob must lie in [0,1]");
    auto rng = make_rng(derive_seed(seed, "sem-params"));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    LinearSem sem{g, {}, {}};
    sem.coeffs.reserve(g.num_edges());
    for (const auto& [p, c] : g.edges()) {
        const auto key = std::make_pair(g.node(p).id, g.node(c).id);
        if (auto it = fixed.find(key); it != fixed.end()) {
            sem.coeffs.push_back(it->second);
            continue;
        }
        double v = std::abs(normal(rng));
        if (unif(rng) < sign_flip_prob) v = -v;
        sem.coeffs.push_back(v);
    }
    sem.noise_vars.reserve(g.num_nodes());
    for (const auto& nd : g.nodes()) sem.noise_vars.push_back(noise.lookup(nd));
    sem.validate();
    return sem;
}

namespace {

struct SamplePlan {
    std::vector<int> order;                               // topological
    std::vector<std::vector<std::pair<int, double>>> in;  // per node: (parent, coeff)
    std::vector<double> noise_sd;
};

SamplePlan make_plan(const LinearSem& sem) {
    sem.validate();
    SamplePlan plan;
    plan.order = sem.graph.topological_order();
    plan.in.resize(sem.graph.num_nodes());
    const auto& edges = sem.graph.edges();
    for (size_t e = 0; e < edges.size(); ++e)
        plan.in[edges[e].second].emplace_back(edges[e].first, sem.coeffs[e]);
    for (double v : sem.noise_vars) plan.noise_sd.push_back(std::sqrt(v));
    return plan;
}

// One row of ancestral sampling; draws one normal per node in topo order.
void sample_row(const SamplePlan& plan, uint64_t row_seed, double* values) {
    auto rng = make_rng(row_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int v : plan.order) {
        double x = plan.noise_sd[v] * normal(rng);
        for (const auto& [p, c] : plan.in[v]) x += c * values[p];
        values[v] = x;
    }
}

Dataset finalize_dataset(const LinearSem& sem, Eigen::MatrixXd all, bool standardize,
                         bool include_latent) {
    const auto& g = sem.graph;
    std::vector<int> keep;
    for (int i = 0; i < g.num_nodes(); ++i)
        if (include_latent || g.node(i).role != NodeRole::U) keep.push_back(i);

    Dataset out;
    out.matrix.resize(all.rows(), static_cast<long>(keep.size()));
    for (size_t j = 0; j < keep.size(); ++j) {
        out.matrix.col(static_cast<long>(j)) = all.col(keep[j]);
        const auto& nd = g.node(keep[j]);
        out.columns.push_back({nd.id, nd.role, nd.block});
    }
    out.scale_factors.assign(keep.size(), 1.0);
    if (standardize) {
        const double n = static_cast<double>(out.matrix.rows());
        for (int j = 0; j < out.cols(); ++j) {
            auto col = out.matrix.col(j);
            const double mean = col.mean();
            const double sd = std::sqrt((col.array() - mean).square().sum() / (n - 1.0));
            if (!(sd > 0.0))
                throw std::runtime_error("cannot standardize degenerate column " +
                                         out.columns[j].id);
            col /= sd;
            out.scale_factors[j] = sd;
        }
        out.standardized = true;
    }
    return out;
}

}  // namespace

Dataset sample_data(const LinearSem& sem, long n, uint64_t seed, bool standardize,
                    bool include_latent) {
    if (n < 1) throw std::invalid_argument("sample_data: n must be >= 1");
    const SamplePlan plan = make_plan(sem);
    const int p = sem.graph.num_nodes();
    Eigen::MatrixXd all(n, p);
    const uint64_t data_seed = derive_seed(seed, "sem-data");
#pragma omp parallel for schedule(static)
    for (long r = 0; r < n; ++r) {
        std::vector<double> row(p);
        sample_row(plan, derive_seed(data_seed, static_cast<uint64_t>(r)), row.data());
        for (int j = 0; j < p; ++j) all(r, j) = row[j];
    }
    return finalize_dataset(sem, std::move(all), standardize, include_latent);
}

Dataset sample_data_serial(const LinearSem& sem, long n, uint64_t seed, bool standardize,
                           bool include_latent) {
    if (n < 1) throw std::invalid_argument("sample_data: n must be >= 1");
    const SamplePlan plan = make_plan(sem);
    const int p = sem.graph.num_nodes();
    Eigen::MatrixXd all(n, p);
    const uint64_t data_seed = derive_seed(seed, "sem-data");
    std::vector<double> row(p);
    for (long r = 0; r < n; ++r) {
        sample_row(plan, derive_seed(data_seed, static_cast<uint64_t>(r)), row.data());
        for (int j = 0; j < p; ++j) all(r, j) = row[j];
    }
    return finalize_dataset(sem, std::move(all), standardize, include_latent);
}

CovView implied_covariance(const LinearSem& sem) {
    sem.validate();
    const int n = sem.graph.num_nodes();
    const Eigen::MatrixXd B = sem.coefficient_matrix();
    Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    // x = B^T x + eps  =>  x = (I - B^T)^-1 eps
    Eigen::MatrixXd A = (I - B.transpose()).partialPivLu().solve(I);
    Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(sem.noise_vars.data(), n);
    Eigen::MatrixXd sigma = A * d.asDiagonal() * A.transpose();
    sigma = ((sigma + sigma.transpose()) / 2.0).eval();  // enforce exact symmetry

    CovView out;
    out.m = std::move(sigma);
    for (const auto& nd : sem.graph.nodes()) out.labels.push_back(nd.id);
    out.validate();
    return out;
}

CovView population_dataset_view(const LinearSem& sem) {
    CovView full = implied_covariance(sem);
    std::vector<std::string> keep;
    for (const auto& nd : sem.graph.nodes())
        if (nd.role != NodeRole::U) keep.push_back(nd.id);
    return full.submatrix(keep);
}

GraphSpec build_simulation_graph(const SimDims& dims) {
    for (int d : {dims.z1, dims.z2, dims.z3, dims.z4, dims.u, dims.uprime})
        if (d < 1) throw std::invalid_argument("every block dimension must be >= 1");

    std::vector<NodeSpec> nodes;
    auto add_block = [&](const std::string& block, NodeRole role, int count) {
        std::vector<std::string> ids;
        for (int i = 0; i < count; ++i) {
            std::string id = count == 1 && (role == NodeRole::W || role == NodeRole::X ||
                                            role == NodeRole::Y)
                                 ? block
                                 : block + "_" + std::to_string(i);
            nodes.push_back({id, role, block});
            ids.push_back(std::move(id));
        }
        return ids;
    };

    const auto u = add_block("U", NodeRole::U, dims.u);
    const auto up = add_block("Up", NodeRole::U, dims.uprime);
    const auto w = add_block("W", NodeRole::W, 1);
    const auto z1 = add_block("Z1", NodeRole::Z, dims.z1);
    const auto z2 = add_block("Z2", NodeRole::Z, dims.z2);
    const auto z3 = add_block("Z3", NodeRole::Z, dims.z3);
    const auto z4 = add_block("Z4", NodeRole::Z, dims.z4);
    const auto x = add_block("X", NodeRole::X, 1);
    const auto y = add_block("Y", NodeRole::Y, 1);

    std::vector<std::pair<std::string, std::string>> edges;
    for (const auto& t : z1) {
        edges.emplace_back(w[0], t);
        for (const auto& s : u) edges.emplace_back(s, t);
        for (const auto& s : up) edges.emplace_back(s, t);
    }
    for (const auto& t : z2) edges.emplace_back(w[0], t);
    for (const auto& s : u) edges.emplace_back(s, x[0]);
    for (const auto& s : z2) edges.emplace_back(s, x[0]);
    for (const auto& s : z3) edges.emplace_back(s, x[0]);
    for (const auto& s : up) edges.emplace_back(s, y[0]);
    for (const auto& s : z2) edges.emplace_back(s, y[0]);
    for (const auto& s : z4) edges.emplace_back(s, y[0]);
    edges.emplace_back(x[0], y[0]);

    return GraphSpec(std::move(nodes), std::move(edges), /*treatment_active=*/true);
}

GraphSpec build_nhs_graph() {
    std::vector<NodeSpec> nodes;
    std::vector<std::pair<std::string, std::string>> edges;

    auto add = [&](const std::string& block, NodeRole role, int count) {
        std::vector<std::string> ids;
        for (int i = 0; i < count; ++i) {
            std::string id = count == 1 ? block : block + "_" + std::to_string(i);
            nodes.push_back({id, role, block});
            ids.push_back(std::move(id));
        }
        return ids;
    };

    const auto u = add("U", NodeRole::U, 5);
    const auto up = add("Up", NodeRole::U, 5);
    const auto w = add("W", NodeRole::W, 1);
    const auto z1 = add("Z1", NodeRole::Z, 5);  // job satisfaction
    const auto z2 = add("Z2", NodeRole::Z, 7);  // organisation effectiveness
    const auto x = add("X", NodeRole::X, 1);
    const auto y = add("Y", NodeRole::Y, 1);

    for (int k = 0; k < 5; ++k) {
        edges.emplace_back(u[k], z1[k]);
        edges.emplace_back(up[k], z1[k]);
        edges.emplace_back(u[k], x[0]);
        edges.emplace_back(up[k], y[0]);
    }
    for (const auto& s : z2) {
        edges.emplace_back(s, x[0]);
        edges.emplace_back(s, y[0]);
    }
    edges.emplace_back(w[0], x[0]);
    edges.emplace_back(x[0], y[0]);

    return GraphSpec(std::move(nodes), std::move(edges), /*treatment_active=*/true);
}

LinearSem nhs_fixture_sem(double omega) {
    const GraphSpec g = build_nhs_graph();
    LinearSem sem{g, {}, {}};
    sem.coeffs.reserve(g.num_edges());
    for (const auto& [p, c] : g.edges()) {
        const auto& pn = g.node(p);
        const auto& cn = g.node(c);
        double v = 0.0;
        if (pn.block == "U" && cn.block == "Z1") v = 0.8;
        else if (pn.block == "Up" && cn.block == "Z1") v = 0.8;
        else if (pn.block == "U" && cn.role == NodeRole::X) v = 0.6;
        else if (pn.block == "Up" && cn.role == NodeRole::Y) v = 0.6;
        else if (pn.block == "Z2" && cn.role == NodeRole::X) v = 0.5;
        else if (pn.block == "Z2" && cn.role == NodeRole::Y) v = 0.6;
        else if (pn.role == NodeRole::W) v = 0.8;
        else if (pn.role == NodeRole::X && cn.role == NodeRole::Y) v = omega;
        else throw std::logic_error("unexpected edge in NHS fixture");
        sem.coeffs.push_back(v);
    }
    sem.noise_vars.assign(g.num_nodes(), 1.0);
    for (int i : g.nodes_in_block("Z1")) sem.noise_vars[i] = 0.25;
    sem.noise_vars[g.x_index()] = 0.25;
    sem.noise_vars[g.y_index()] = 0.25;
    sem.validate();
    return sem;
}

}  // namespace causal
