#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <vector>

#include "causal/scm.hpp"

namespace causal {

/// Covariance matrix with column labels and an effective sample count.
/// n_eff is +inf for population views (closed-form covariances).
struct CovView {
    Eigen::MatrixXd m;
    std::vector<std::string> labels;
    double n_eff = std::numeric_limits<double>::infinity();

    int index_of(const std::string& label) const;
    bool has_label(const std::string& label) const;
    bool population() const { return !std::isfinite(n_eff); }
    CovView submatrix(const std::vector<std::string>& keep) const;

    /// Checks symmetry (1e-12 relative) and positive definiteness.
    void validate() const;
};

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    bool reject = false;
    double alpha_used = 0.0;
};

/// Unbiased sample covariance (divisor n-1) over the requested columns
/// (all columns when empty). Two-pass, parallel over column pairs.
CovView sample_cov(const Dataset& data, const std::vector<std::string>& cols = {});

/// Serial reference: single-pass streaming co-moment update. Kept for
/// testing and as the second computation route for the covariance.
CovView sample_cov_streaming(const Dataset& data, const std::vector<std::string>& cols = {});

/// Partial correlation rho(a,b|s) via the precision matrix of the
/// submatrix on {a,b} u s. Singular submatrix raises ConditioningError
/// unless ridge > 0, which adds ridge to the diagonal first (documented
/// deviation from exact math for near-collinear regimes).
double partial_corr(const CovView& cov, const std::string& a, const std::string& b,
                    const std::vector<std::string>& s, double ridge = 0.0);

/// Second route: correlation of the residuals of a and b after projecting
/// out s. Must agree with the precision route to 1e-10 on PD inputs.
double partial_corr_residual(const CovView& cov, const std::string& a, const std::string& b,
                             const std::vector<std::string>& s, double ridge = 0.0);

/// Covariance of (W, Y, X, phi) with phi = beta^T Z, built by bilinear
/// contraction from a covariance over (W, Y, X, Z_1..Z_d). The label order
/// of `cov` must be w, y, x, then the d Z columns. Raises
/// DegenerateDirectionError when Var(phi) < 1e-12.
CovView synthetic_column_cov(const CovView& cov, const Eigen::VectorXd& beta,
                             const std::string& phi_label = "phi");

struct OlsFit {
    Eigen::VectorXd coeffs;
    double residual_variance = 0.0;  // population-style: Syy - Syx Sxx^-1 Sxy
};

/// Least squares of y on xs from second moments: coeffs = Sxx^-1 Sxy.
OlsFit ols(const CovView& cov, const std::string& y, const std::vector<std::string>& xs);
OlsFit ols(const Dataset& data, const std::string& y, const std::vector<std::string>& xs);

/// Fisher z test of H0: rho = 0 given a sample partial correlation r
/// computed with |s| conditioning variables on n samples. Refuses
/// population inputs (no sampling distribution at n = inf).
TestResult fisher_z_test(double r, double n, int s_size, double alpha);

inline double bonferroni(double alpha, int m) { return alpha / m; }

}  // namespace causal
