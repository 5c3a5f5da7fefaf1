#pragma once

// Test-only reference implementations, kept independent of the library
// code paths they check.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "causal/graph.hpp"
#include "causal/scm.hpp"
#include "causal/stats.hpp"

namespace oracles {

/// d-separation by exhaustive enumeration of simple undirected paths with
/// the blocking rules applied per interior node. Exponential; for test
/// graphs only (path length capped at the node count).
bool d_separated_bruteforce(const causal::GraphSpec& g, int a, int b, const std::vector<int>& s);

/// All subsets of {0..n-1} \ excluded, as index vectors.
std::vector<std::vector<int>> all_subsets(int n, const std::vector<int>& excluded);

/// Random connected-ish DAG over n nodes: each pair (i<j) gets edge i->j
/// with probability p. Node 0 is X, node 1 is Y (treatment edge optional),
/// the rest are Z.
causal::GraphSpec random_dag(int n, double p, uint64_t seed);

/// Random DAG that also has a W node and optional latent U nodes, suitable
/// for SEM-level checks (X->Y always present).
causal::GraphSpec random_sem_graph(int n_z, int n_u, double p, uint64_t seed);

/// Random PD covariance with the given labels: A A^T / k + delta I.
causal::CovView random_pd_cov(const std::vector<std::string>& labels, uint64_t seed,
                              double delta = 0.05);

/// Partial correlation computed from data columns by explicit residual
/// regression on the raw matrix (no covariance shortcut).
double partial_corr_from_data(const Eigen::MatrixXd& data, int a, int b,
                              const std::vector<int>& s);

/// Central finite differences of a scalar function of gamma.
Eigen::VectorXd finite_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                  const Eigen::VectorXd& gamma, double h);

/// Shared fixture: the two-equation system Y = b_yx X + b_yz^T Z + e_y,
/// X = b_xw W + b_xz^T Z + e_x with exogenous W and independent Z.
struct Example2 {
    causal::LinearSem sem;
    Eigen::VectorXd beta_yz;  // the outcome-side Z coefficients
    double beta_yx;
};
Example2 example2();

}  // namespace oracles
