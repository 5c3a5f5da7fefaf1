#pragma once

#include <string>
#include <vector>

#include "causal/stats.hpp"

namespace causal {

/// Backdoor ATE: the X coefficient of the least-squares fit Y ~ X + Z*.
/// Estimates from a standardized Dataset are mapped back to the original
/// units via the recorded scale factors, so results are always comparable
/// with the structural treatment effect. An empty zstar gives the marginal
/// (unadjusted) regression.
double backdoor_ate(const Dataset& data, const std::vector<std::string>& zstar,
                    double ridge = 0.0);

/// Population version on a covariance view; x and y name the treatment and
/// outcome columns.
double backdoor_ate(const CovView& cov, const std::string& x, const std::string& y,
                    const std::vector<std::string>& zstar, double ridge = 0.0);

inline double ate_error(double estimate, double truth) { return std::abs(estimate - truth); }

}  // namespace causal
