#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "causal/graph.hpp"

namespace causal {

struct CovView;

/// Linear-Gaussian structural model over a GraphSpec: one coefficient per
/// edge (aligned with graph.edges()), one noise variance per node,
/// intercepts fixed at zero.
struct LinearSem {
    GraphSpec graph;
    std::vector<double> coeffs;      // coeffs[e] belongs to graph.edges()[e]
    std::vector<double> noise_vars;  // per node index, strictly positive

    double coeff(const std::string& parent, const std::string& child) const;
    double noise_var(const std::string& id) const { return noise_vars.at(graph.index_of(id)); }

    /// Coefficient matrix B with B(i,j) = coefficient of edge i->j.
    Eigen::MatrixXd coefficient_matrix() const;

    void validate() const;
    bool operator==(const LinearSem& other) const;
};

struct ColumnInfo {
    std::string id;
    NodeRole role = NodeRole::Z;
    std::string block;
};

/// Column-major numeric data with role-tagged columns. scale_factors
/// records the pre-standardization standard deviation of each column
/// (all 1.0 when not standardized).
struct Dataset {
    Eigen::MatrixXd matrix;  // n x p
    std::vector<ColumnInfo> columns;
    bool standardized = false;
    std::vector<double> scale_factors;

    long rows() const { return matrix.rows(); }
    int cols() const { return static_cast<int>(columns.size()); }
    int col_index(const std::string& id) const;
    std::vector<int> role_cols(NodeRole role) const;
    std::vector<std::string> role_ids(NodeRole role) const;
    double scale_of(const std::string& id) const { return scale_factors.at(col_index(id)); }

    Dataset head(long n) const;
    Dataset tail(long n) const;
};

/// Noise variances per node or per block label; nodes not listed get the
/// fallback (1.0). A node-id entry wins over its block entry.
struct SemNoise {
    std::map<std::string, double> by_label;
    double fallback = 1.0;

    double lookup(const NodeSpec& node) const;
};

/// Edge coefficients pinned to fixed values instead of being sampled
/// (e.g. the treatment effect on X->Y).
using FixedCoeffs = std::map<std::pair<std::string, std::string>, double>;

/// Draw edge coefficients as |N(0,1)|, then flip each sign to negative with
/// probability sign_flip_prob. Noise variances come from `noise`, never from
/// the rng. Edges listed in `fixed` are pinned and consume no draws.
/// Deterministic: identical inputs give bit-identical output.
LinearSem sample_parameters(const GraphSpec& g, uint64_t seed, double sign_flip_prob = 0.5,
                            const SemNoise& noise = {}, const FixedCoeffs& fixed = {});

/// Ancestral sampling of n rows. Rows are independent, each driven by an rng
/// derived from (seed, row), so the result is identical whether rows are
/// filled serially or in parallel. U-role columns are dropped unless
/// include_latent. With standardize, every kept column is rescaled to unit
/// sample variance and the original standard deviations recorded.
Dataset sample_data(const LinearSem& sem, long n, uint64_t seed, bool standardize,
                    bool include_latent = false);

/// Serial reference for sample_data's row loop; bit-identical by contract.
Dataset sample_data_serial(const LinearSem& sem, long n, uint64_t seed, bool standardize,
                           bool include_latent = false);

/// Exact population covariance over all nodes (observed and latent):
/// Sigma = (I - B)^-T D (I - B)^-1.
CovView implied_covariance(const LinearSem& sem);

/// implied_covariance restricted to observed (non-U) nodes.
CovView population_dataset_view(const LinearSem& sem);

struct SimDims {
    int z1 = 1, z2 = 1, z3 = 1, z4 = 1, u = 1, uprime = 1;

    SimDims() = default;
    explicit SimDims(int all) : z1(all), z2(all), z3(all), z4(all), u(all), uprime(all) {}
};

/// The four-block simulation graph: U, U' and W exogenous;
/// Z1 <- {W, U, U'}; Z2 <- {W}; Z3, Z4 exogenous; X <- {U, Z2, Z3};
/// Y <- {U', Z2, Z4, X}.
GraphSpec build_simulation_graph(const SimDims& dims);

/// Survey-shaped synthetic benchmark graph, 25 nodes: scalar W, X, Y;
/// Z1 block of 5 (job satisfaction), Z2 block of 7 (organisation
/// effectiveness), latent U and U' blocks of 5. The edge set is a
/// documented fixture: W->X; U->X and U'->Y componentwise; Z1_k <- {U_k,
/// U'_k}; every Z2 node -> X and -> Y; X->Y.
GraphSpec build_nhs_graph();

/// Fixed fixture parameters for build_nhs_graph (see docs/nhs_fixture.md).
LinearSem nhs_fixture_sem(double omega = 0.5);

}  // namespace causal
