#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "causal/stats.hpp"

namespace causal {

/// What stops the lambda2 ladder. Quoted: raise lambda2 while the test of
/// H0: rho(W,Y|phi) = 0 rejects, stop once it does not (the procedure as
/// stated in prose). DependenceStop: the reverse reading, consistent with
/// the constraint d(W,Y|phi) > alpha -- stop as soon as the null IS
/// rejected, i.e. once the auxiliary dependence is confirmed.
enum class Lambda2Rule { Quoted, DependenceStop };

enum class InitKind { Pilot, Random, Given };

struct DiscoveryConfig {
    double lambda1 = 0.1;
    double lambda2 = 1e-4;  // initial value of the sparsity weight
    double lambda2_growth = 2.0;
    int max_rounds = 12;  // lambda2 ladder length
    Lambda2Rule lambda2_rule = Lambda2Rule::Quoted;

    double eta = 0.5;      // initial step size
    int max_iters = 1500;  // per smoothing stage
    double grad_tol = 1e-9;
    /// Smoothing continuation for the |rho| kinks: descend at each epsilon
    /// in turn. The last entry is the reporting epsilon used by gradient().
    std::vector<double> smoothing_stages = {1e-2, 1e-4, 1e-8};

    InitKind init_kind = InitKind::Pilot;
    Eigen::VectorXd init_gamma;  // used when init_kind == Given
    uint64_t init_seed = 0;      // used when init_kind == Random

    double alpha_test = 0.05;       // base level for the lambda2 test
    double support_threshold = -1;  // negative -> 1 / (2 sqrt(d))
    int cv_folds = 3;
    double ridge = 0.0;  // optional diagonal ridge for near-singular regimes

    // Documentation-only: the constrained formulation's dependence floor and
    // sparsity budget, both subsumed by (lambda1, lambda2) here.
    double constraint_alpha = 0.0;
    double sparsity_budget = 0.0;

    double effective_support_threshold(int d) const;
    void validate() const;
};

struct ObjectiveTerms {
    double value = 0.0;     // dep - lambda1 * aux_dep + lambda2 * l1
    double dep = 0.0;       // |rho(W, Y | X, phi)|
    double aux_dep = 0.0;   // |rho(W, Y | phi)|
    double l1 = 0.0;        // ||beta||_1
};

struct DiscoveryResult {
    Eigen::VectorXd beta;  // unit l2 norm
    std::vector<int> selected;
    std::vector<std::string> selected_ids;
    ObjectiveTerms objective_terms;  // unsmoothed, at the returned beta
    std::vector<double> trace;       // smoothed objective per accepted iterate
    int tests_run = 0;
    bool converged = false;
    double lambda2_final = 0.0;
    int rounds = 1;
    uint64_t seed = 0;
};

/// The covariance handed to the discovery operations must be labelled
/// (w, y, x, z_1..z_d) in that order; this helper builds one from a
/// role-tagged dataset covariance.
CovView discovery_view(const CovView& cov, const std::string& w, const std::string& y,
                       const std::string& x, const std::vector<std::string>& z);
CovView discovery_view(const Dataset& data);

/// Exact objective at beta = gamma/||gamma||_2, unsmoothed terms.
ObjectiveTerms objective(const CovView& cov, const Eigen::VectorXd& gamma, double lambda1,
                         double lambda2, double ridge = 0.0);

/// Smoothed total used by the optimizer: |r| replaced by sqrt(r^2 + eps^2).
double objective_smoothed(const CovView& cov, const Eigen::VectorXd& gamma, double lambda1,
                          double lambda2, double eps = 1e-8, double ridge = 0.0);

/// Analytic gradient with respect to gamma of the smoothed objective
/// (subgradient 0 at beta_i = 0 for the l1 term).
Eigen::VectorXd gradient(const CovView& cov, const Eigen::VectorXd& gamma, double lambda1,
                         double lambda2, double eps = 1e-8, double ridge = 0.0);

/// Gradient descent with backtracking over the smoothing stages, then the
/// lambda2 ladder driven by a Fisher z test of rho(W,Y|phi) = 0 at level
/// alpha_test / tests_run (Bonferroni over the tests this call performed).
/// Population covariances skip the ladder (no sampling distribution).
DiscoveryResult optimize(const CovView& cov, const DiscoveryConfig& config);

/// k-fold cross-validation over a candidate grid: fit on k-1 folds, score
/// |rho(W,Y|X,phi)| on the held-out fold, select the grid point with the
/// smallest mean score. Ties break toward smaller lambda1, then smaller
/// eta, then smaller init seed. Fold assignment is deterministic in seed.
DiscoveryConfig tune(const Dataset& train, const std::vector<DiscoveryConfig>& grid,
                     uint64_t seed);

/// Holdout variant used by three-way splits: fit each grid point on train,
/// score on the validation set.
DiscoveryConfig tune_holdout(const Dataset& train, const Dataset& valid,
                             const std::vector<DiscoveryConfig>& grid);

}  // namespace causal
