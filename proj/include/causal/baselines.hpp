#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "causal/stats.hpp"

namespace causal {

/// Unadjusted regression of Y on X alone.
double marginal_ate(const Dataset& data);
double marginal_ate(const CovView& cov, const std::string& x, const std::string& y);

/// Adjusts for every Z column. Falls back to the marginal estimate when
/// there are no Z columns.
double allz_ate(const Dataset& data, double ridge = 0.0);
double allz_ate(const CovView& cov, const std::string& x, const std::string& y,
                const std::vector<std::string>& zs, double ridge = 0.0);

enum class EntnerStrategy { Greedy, Random };

struct EntnerConfig {
    double alpha = 0.05;
    int max_subset_size = -1;  // negative -> all of Z
    int budget = 500;          // max candidate subsets tested
    EntnerStrategy strategy = EntnerStrategy::Greedy;
    uint64_t seed = 0;
    double ridge = 0.0;
};

struct EntnerResult {
    std::vector<std::string> zstar;
    double ate = 0.0;
    bool certified = false;
    int tests_run = 0;
    double alpha_used = 0.0;  // Bonferroni-corrected level at acceptance time
};

/// Search over candidate subsets S of Z for one satisfying both
///   not reject rho(W,Y | S u {X}) = 0   and   reject rho(W,Y | S) = 0,
/// each Fisher z test at alpha / (tests executed so far in this call).
/// Greedy grows S by the element most reducing |rho(W,Y|S u {X})|; random
/// draws uniform subsets up to max_subset_size. The first accepted subset
/// supplies the backdoor ATE. When nothing certifies within budget the
/// result carries the all-Z estimate with certified = false.
EntnerResult entner_search(const Dataset& data, const EntnerConfig& cfg);

}  // namespace causal
