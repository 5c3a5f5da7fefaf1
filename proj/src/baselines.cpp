#include "causal/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "causal/estimation.hpp"
#include "causal/rng.hpp"

namespace causal {

double marginal_ate(const Dataset& data) { return backdoor_ate(data, {}); }

double marginal_ate(const CovView& cov, const std::string& x, const std::string& y) {
    return backdoor_ate(cov, x, y, {});
}

double allz_ate(const Dataset& data, double ridge) {
    return backdoor_ate(data, data.role_ids(NodeRole::Z), ridge);
}

double allz_ate(const CovView& cov, const std::string& x, const std::string& y,
                const std::vector<std::string>& zs, double ridge) {
    return backdoor_ate(cov, x, y, zs, ridge);
}

namespace {

struct SearchContext {
    CovView cov;  // over (W, Y, X, Z...)
    std::string w, x, y;
    std::vector<std::string> zs;
    double n;
    double ridge;
};

double dep_given_s_and_x(const SearchContext& ctx, const std::vector<std::string>& s) {
    std::vector<std::string> cond = s;
    cond.push_back(ctx.x);
    return std::abs(partial_corr(ctx.cov, ctx.w, ctx.y, cond, ctx.ridge));
}

/// Both certificate tests for candidate S; the pair shares the running
/// Bonferroni denominator.
bool certify(const SearchContext& ctx, const std::vector<std::string>& s, double alpha,
             int& tests_run, double& alpha_used) {
    std::vector<std::string> cond1 = s;
    cond1.push_back(ctx.x);
    const double r1 = partial_corr(ctx.cov, ctx.w, ctx.y, cond1, ctx.ridge);
    ++tests_run;
    double level = bonferroni(alpha, tests_run);
    const TestResult t1 =
        fisher_z_test(r1, ctx.n, static_cast<int>(cond1.size()), level);

    const double r2 = partial_corr(ctx.cov, ctx.w, ctx.y, s, ctx.ridge);
    ++tests_run;
    level = bonferroni(alpha, tests_run);
    const TestResult t2 = fisher_z_test(r2, ctx.n, static_cast<int>(s.size()), level);

    alpha_used = level;
    return !t1.reject && t2.reject;
}

std::vector<std::vector<std::string>> greedy_candidates(const SearchContext& ctx,
                                                        int max_size) {
    std::vector<std::vector<std::string>> out;
    std::vector<std::string> current;
    std::set<std::string> used;
    out.push_back(current);  // start from the empty set
    while (static_cast<int>(current.size()) < max_size) {
        std::string best;
        double best_dep = std::numeric_limits<double>::infinity();
        for (const auto& z : ctx.zs) {
            if (used.count(z)) continue;
            auto trial = current;
            trial.push_back(z);
            double dep;
            try {
                dep = dep_given_s_and_x(ctx, trial);
            } catch (const std::exception&) {
                continue;  // singular candidate, skip
            }
            if (dep < best_dep) {
                best_dep = dep;
                best = z;
            }
        }
        if (best.empty()) break;
        used.insert(best);
        current.push_back(best);
        out.push_back(current);
    }
    return out;
}

}  // namespace

EntnerResult entner_search(const Dataset& data, const EntnerConfig& cfg) {
    if (cfg.budget < 1) throw std::invalid_argument("entner_search: budget must be >= 1");
    const auto ws = data.role_ids(NodeRole::W);
    const auto xs = data.role_ids(NodeRole::X);
    const auto ys = data.role_ids(NodeRole::Y);
    if (ws.size() != 1 || xs.size() != 1 || ys.size() != 1)
        throw std::invalid_argument("entner_search needs exactly one W, X and Y column");

    SearchContext ctx;
    ctx.w = ws[0];
    ctx.x = xs[0];
    ctx.y = ys[0];
    ctx.zs = data.role_ids(NodeRole::Z);
    ctx.ridge = cfg.ridge;
    const int d = static_cast<int>(ctx.zs.size());
    const int max_size =
        cfg.max_subset_size < 0 ? d : std::min(cfg.max_subset_size, d);

    std::vector<std::string> order = {ctx.w, ctx.y, ctx.x};
    order.insert(order.end(), ctx.zs.begin(), ctx.zs.end());
    ctx.cov = sample_cov(data, order);
    ctx.n = ctx.cov.n_eff;

    EntnerResult res;

    std::vector<std::vector<std::string>> candidates;
    if (cfg.strategy == EntnerStrategy::Greedy) {
        candidates = greedy_candidates(ctx, max_size);
    } else {
        auto rng = make_rng(derive_seed(cfg.seed, "entner-random"));
        std::uniform_int_distribution<int> size_dist(0, max_size);
        std::set<std::vector<std::string>> seen;
        candidates.push_back({});  // always try the empty set first
        seen.insert({});
        int attempts = 0;
        while (static_cast<int>(candidates.size()) < cfg.budget && attempts < cfg.budget * 20) {
            ++attempts;
            const int k = size_dist(rng);
            std::vector<std::string> pool = ctx.zs;
            std::shuffle(pool.begin(), pool.end(), rng);
            std::vector<std::string> s(pool.begin(), pool.begin() + k);
            std::sort(s.begin(), s.end());
            if (seen.insert(s).second) candidates.push_back(std::move(s));
        }
    }
    if (static_cast<int>(candidates.size()) > cfg.budget) candidates.resize(cfg.budget);

    for (const auto& s : candidates) {
        double alpha_used = 0.0;
        bool ok;
        try {
            ok = certify(ctx, s, cfg.alpha, res.tests_run, alpha_used);
        } catch (const std::exception&) {
            continue;  // singular conditioning set: not a usable certificate
        }
        if (ok) {
            res.zstar = s;
            res.certified = true;
            res.alpha_used = alpha_used;
            res.ate = backdoor_ate(data, s, cfg.ridge);
            return res;
        }
    }

    // nothing certified: fall back to adjusting for everything
    res.certified = false;
    res.zstar = ctx.zs;
    res.ate = allz_ate(data, cfg.ridge);
    return res;
}

}  // namespace causal
