#include "causal/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "causal/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace causal {

int CovView::index_of(const std::string& label) const {
    for (size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label) return static_cast<int>(i);
    throw std::invalid_argument("unknown covariance label: " + label);
}

bool CovView::has_label(const std::string& label) const {
    return std::find(labels.begin(), labels.end(), label) != labels.end();
}

CovView CovView::submatrix(const std::vector<std::string>& keep) const {
    std::vector<int> idx;
    idx.reserve(keep.size());
    for (const auto& l : keep) idx.push_back(index_of(l));
    CovView out;
    out.labels = keep;
    out.n_eff = n_eff;
    out.m.resize(idx.size(), idx.size());
    for (size_t i = 0; i < idx.size(); ++i)
        for (size_t j = 0; j < idx.size(); ++j) out.m(i, j) = m(idx[i], idx[j]);
    return out;
}

void CovView::validate() const {
    if (m.rows() != m.cols() || static_cast<size_t>(m.rows()) != labels.size())
        throw std::invalid_argument("covariance shape does not match labels");
    {
        std::vector<std::string> sorted = labels;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw std::invalid_argument("covariance labels must be unique");
    }
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("covariance not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("covariance not positive definite");
}

namespace {

std::vector<int> resolve_cols(const Dataset& data, const std::vector<std::string>& cols) {
    std::vector<int> idx;
    if (cols.empty()) {
        for (int j = 0; j < data.cols(); ++j) idx.push_back(j);
    } else {
        for (const auto& id : cols) idx.push_back(data.col_index(id));
    }
    return idx;
}

void check_cov_pre(const Dataset& data, size_t k) {
    if (data.rows() < static_cast<long>(k) + 2)
        throw std::invalid_argument("sample_cov needs n >= #cols + 2");
}

}  // namespace

CovView sample_cov(const Dataset& data, const std::vector<std::string>& cols) {
    const auto idx = resolve_cols(data, cols);
    const int p = static_cast<int>(idx.size());
    const long n = data.rows();
    check_cov_pre(data, idx.size());

    Eigen::MatrixXd centered(n, p);
    for (int j = 0; j < p; ++j) {
        const auto col = data.matrix.col(idx[j]);
        centered.col(j) = col.array() - col.mean();
    }

    CovView out;
    out.m.resize(p, p);
    out.n_eff = static_cast<double>(n);
    for (int j = 0; j < p; ++j) out.labels.push_back(data.columns[idx[j]].id);

    // upper triangle in parallel; each (i,j) owned by exactly one task
#pragma omp parallel for schedule(dynamic, 4)
    for (int i = 0; i < p; ++i) {
        for (int j = i; j < p; ++j) {
            const double v = centered.col(i).dot(centered.col(j)) / static_cast<double>(n - 1);
            out.m(i, j) = v;
            out.m(j, i) = v;
        }
    }

    for (int j = 0; j < p; ++j)
        if (!(out.m(j, j) > 0.0))
            throw std::invalid_argument("degenerate (zero variance) column: " + out.labels[j]);
    return out;
}

CovView sample_cov_streaming(const Dataset& data, const std::vector<std::string>& cols) {
    const auto idx = resolve_cols(data, cols);
    const int p = static_cast<int>(idx.size());
    const long n = data.rows();
    check_cov_pre(data, idx.size());

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd comoment = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd row(p), delta(p);
    for (long r = 0; r < n; ++r) {
        for (int j = 0; j < p; ++j) row(j) = data.matrix(r, idx[j]);
        delta = row - mean;
        mean += delta / static_cast<double>(r + 1);
        // C += delta_old * delta_new^T, symmetrized by construction
        comoment.noalias() += delta * (row - mean).transpose();
    }
    comoment = ((comoment + comoment.transpose()) / 2.0).eval();

    CovView out;
    out.m = comoment / static_cast<double>(n - 1);
    out.n_eff = static_cast<double>(n);
    for (int j = 0; j < p; ++j) out.labels.push_back(data.columns[idx[j]].id);
    for (int j = 0; j < p; ++j)
        if (!(out.m(j, j) > 0.0))
            throw std::invalid_argument("degenerate (zero variance) column: " + out.labels[j]);
    return out;
}

namespace {

Eigen::MatrixXd conditioning_submatrix(const CovView& cov, const std::string& a,
                                       const std::string& b, const std::vector<std::string>& s,
                                       double ridge, std::vector<std::string>* order_out) {
    std::vector<std::string> order = {a, b};
    for (const auto& l : s) {
        if (l == a || l == b)
            throw std::invalid_argument("conditioning set must not contain the endpoints");
        order.push_back(l);
    }
    CovView sub = cov.submatrix(order);
    if (ridge > 0.0) sub.m.diagonal().array() += ridge;
    if (order_out) *order_out = std::move(order);
    return std::move(sub.m);
}

}  // namespace

double partial_corr(const CovView& cov, const std::string& a, const std::string& b,
                    const std::vector<std::string>& s, double ridge) {
    std::vector<std::string> order;
    Eigen::MatrixXd sub = conditioning_submatrix(cov, a, b, s, ridge, &order);
    Eigen::LLT<Eigen::MatrixXd> llt(sub);
    if (llt.info() != Eigen::Success)
        throw ConditioningError("singular covariance submatrix in partial correlation", order);
    Eigen::MatrixXd prec =
        llt.solve(Eigen::MatrixXd::Identity(sub.rows(), sub.cols()));
    const double denom = prec(0, 0) * prec(1, 1);
    if (!(denom > 0.0))
        throw ConditioningError("non-positive precision diagonal", order);
    return -prec(0, 1) / std::sqrt(denom);
}

double partial_corr_residual(const CovView& cov, const std::string& a, const std::string& b,
                             const std::vector<std::string>& s, double ridge) {
    std::vector<std::string> order;
    Eigen::MatrixXd sub = conditioning_submatrix(cov, a, b, s, ridge, &order);
    const int k = static_cast<int>(s.size());
    if (k == 0) return sub(0, 1) / std::sqrt(sub(0, 0) * sub(1, 1));

    Eigen::MatrixXd Sss = sub.bottomRightCorner(k, k);
    Eigen::VectorXd Ssa = sub.block(2, 0, k, 1);
    Eigen::VectorXd Ssb = sub.block(2, 1, k, 1);
    Eigen::LLT<Eigen::MatrixXd> llt(Sss);
    if (llt.info() != Eigen::Success)
        throw ConditioningError("singular conditioning block in partial correlation", order);
    const Eigen::VectorXd wa = llt.solve(Ssa);
    const Eigen::VectorXd wb = llt.solve(Ssb);
    const double var_a = sub(0, 0) - Ssa.dot(wa);
    const double var_b = sub(1, 1) - Ssb.dot(wb);
    const double cov_ab = sub(0, 1) - Ssa.dot(wb);
    if (!(var_a > 0.0) || !(var_b > 0.0))
        throw ConditioningError("residual variance not positive", order);
    return cov_ab / std::sqrt(var_a * var_b);
}

CovView synthetic_column_cov(const CovView& cov, const Eigen::VectorXd& beta,
                             const std::string& phi_label) {
    const int d = static_cast<int>(beta.size());
    if (d < 1) throw std::invalid_argument("synthetic_column_cov: beta must be non-empty");
    if (static_cast<int>(cov.labels.size()) != d + 3)
        throw std::invalid_argument("synthetic_column_cov expects labels (w, y, x, z_1..z_d)");

    const auto zz = cov.m.bottomRightCorner(d, d);
    const Eigen::VectorXd qb = zz * beta;
    const double var_phi = beta.dot(qb);
    if (var_phi < 1e-12)
        throw DegenerateDirectionError("projection direction has ~zero variance");

    CovView out;
    out.n_eff = cov.n_eff;
    out.labels = {cov.labels[0], cov.labels[1], cov.labels[2], phi_label};
    out.m.resize(4, 4);
    out.m.topLeftCorner(3, 3) = cov.m.topLeftCorner(3, 3);
    for (int j = 0; j < 3; ++j) {
        const double c = beta.dot(cov.m.col(j).tail(d));
        out.m(3, j) = c;
        out.m(j, 3) = c;
    }
    out.m(3, 3) = var_phi;
    return out;
}

OlsFit ols(const CovView& cov, const std::string& y, const std::vector<std::string>& xs) {
    if (xs.empty()) throw std::invalid_argument("ols needs at least one regressor");
    std::vector<std::string> order = xs;
    order.push_back(y);
    CovView sub = cov.submatrix(order);
    const int k = static_cast<int>(xs.size());
    Eigen::MatrixXd Sxx = sub.m.topLeftCorner(k, k);
    Eigen::VectorXd Sxy = sub.m.block(0, k, k, 1);
    Eigen::LLT<Eigen::MatrixXd> llt(Sxx);
    if (llt.info() != Eigen::Success)
        throw ConditioningError("singular design in ols", order);
    OlsFit fit;
    fit.coeffs = llt.solve(Sxy);
    fit.residual_variance = sub.m(k, k) - Sxy.dot(fit.coeffs);
    return fit;
}

OlsFit ols(const Dataset& data, const std::string& y, const std::vector<std::string>& xs) {
    std::vector<std::string> need = xs;
    need.push_back(y);
    return ols(sample_cov(data, need), y, xs);
}

TestResult fisher_z_test(double r, double n, int s_size, double alpha) {
    if (!std::isfinite(n))
        throw std::invalid_argument("fisher_z_test refuses population views (n = inf)");
    const double dof = n - s_size - 3.0;
    if (dof < 1.0) throw std::invalid_argument("fisher_z_test needs n - |s| - 3 >= 1");
    if (std::abs(r) > 1.0) throw std::invalid_argument("|r| must be <= 1");

    TestResult t;
    t.alpha_used = alpha;
    if (std::abs(r) == 1.0) {
        t.statistic = std::numeric_limits<double>::infinity();
        t.p_value = 0.0;
        t.reject = true;
        return t;
    }
    const double z = 0.5 * std::log((1.0 + r) / (1.0 - r));
    t.statistic = std::sqrt(dof) * z;
    t.p_value = std::erfc(std::abs(t.statistic) / std::sqrt(2.0));  // two-sided
    t.reject = t.p_value < alpha;
    return t;
}

}  // namespace causal
