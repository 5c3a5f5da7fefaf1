#include "causal/estimation.hpp"

#include <cmath>
#include <stdexcept>

#include "causal/errors.hpp"

namespace causal {

namespace {

double x_coefficient(const CovView& cov, const std::string& x, const std::string& y,
                     const std::vector<std::string>& zstar, double ridge) {
    std::vector<std::string> xs = {x};
    xs.insert(xs.end(), zstar.begin(), zstar.end());
    if (ridge > 0.0) {
        std::vector<std::string> order = xs;
        order.push_back(y);
        CovView sub = cov.submatrix(order);
        sub.m.diagonal().head(xs.size()).array() += ridge;
        return ols(sub, y, xs).coeffs(0);
    }
    return ols(cov, y, xs).coeffs(0);
}

}  // namespace

double backdoor_ate(const CovView& cov, const std::string& x, const std::string& y,
                    const std::vector<std::string>& zstar, double ridge) {
    return x_coefficient(cov, x, y, zstar, ridge);
}

double backdoor_ate(const Dataset& data, const std::vector<std::string>& zstar, double ridge) {
    const auto xs = data.role_ids(NodeRole::X);
    const auto ys = data.role_ids(NodeRole::Y);
    if (xs.size() != 1 || ys.size() != 1)
        throw std::invalid_argument("backdoor_ate needs exactly one X and one Y column");
    for (const auto& z : zstar)
        if (data.columns[data.col_index(z)].role != NodeRole::Z)
            throw std::invalid_argument("adjustment set may contain only Z columns, got " + z);

    std::vector<std::string> need = {xs[0], ys[0]};
    need.insert(need.end(), zstar.begin(), zstar.end());
    const CovView cov = sample_cov(data, need);
    double est = x_coefficient(cov, xs[0], ys[0], zstar, ridge);
    if (data.standardized) est *= data.scale_of(ys[0]) / data.scale_of(xs[0]);
    return est;
}

}  // namespace causal
