#include "causal/discovery.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "causal/errors.hpp"
#include "causal/rng.hpp"

namespace causal {

double DiscoveryConfig::effective_support_threshold(int d) const {
    if (support_threshold >= 0.0) return support_threshold;
    return 1.0 / (2.0 * std::sqrt(static_cast<double>(d)));
}

void DiscoveryConfig::validate() const {
    if (lambda1 < 0.0 || lambda2 < 0.0) throw std::invalid_argument("lambdas must be >= 0");
    if (lambda2_growth <= 1.0) throw std::invalid_argument("lambda2_growth must be > 1");
    if (eta <= 0.0) throw std::invalid_argument("eta must be > 0");
    if (max_iters < 1 || max_rounds < 1) throw std::invalid_argument("iteration counts must be >= 1");
    if (support_threshold >= 1.0)
        throw std::invalid_argument("support_threshold must be < 1 (beta is unit norm)");
    if (smoothing_stages.empty()) throw std::invalid_argument("need at least one smoothing stage");
    if (cv_folds < 2) throw std::invalid_argument("cv_folds must be >= 2");
}

CovView discovery_view(const CovView& cov, const std::string& w, const std::string& y,
                       const std::string& x, const std::vector<std::string>& z) {
    std::vector<std::string> order = {w, y, x};
    order.insert(order.end(), z.begin(), z.end());
    return cov.submatrix(order);
}

CovView discovery_view(const Dataset& data) {
    const auto ws = data.role_ids(NodeRole::W);
    const auto xs = data.role_ids(NodeRole::X);
    const auto ys = data.role_ids(NodeRole::Y);
    const auto zs = data.role_ids(NodeRole::Z);
    if (ws.size() != 1 || xs.size() != 1 || ys.size() != 1 || zs.empty())
        throw std::invalid_argument("discovery needs exactly one W, X, Y and at least one Z column");
    std::vector<std::string> order = {ws[0], ys[0], xs[0]};
    order.insert(order.end(), zs.begin(), zs.end());
    return sample_cov(data, order);
}

namespace {

constexpr int kW = 0, kY = 1, kX = 2, kPhi = 3;

double smooth_abs(double r, double eps) { return std::sqrt(r * r + eps * eps); }

/// Pre-extracted pieces of the (w,y,x,z) covariance.
struct Workspace {
    Eigen::Matrix3d head;    // cov of (w, y, x)
    Eigen::MatrixXd zvecs;   // d x 3, columns cov(Z, w), cov(Z, y), cov(Z, x)
    Eigen::MatrixXd zz;      // d x d
    double n_eff;
    int d;

    explicit Workspace(const CovView& cov) {
        d = static_cast<int>(cov.labels.size()) - 3;
        if (d < 1) throw std::invalid_argument("discovery covariance needs at least one Z column");
        head = cov.m.topLeftCorner(3, 3);
        zvecs = cov.m.bottomLeftCorner(d, 3);
        zz = cov.m.bottomRightCorner(d, d);
        n_eff = cov.n_eff;
    }

    Eigen::Matrix4d synth(const Eigen::VectorXd& beta, double ridge) const {
        Eigen::Matrix4d c;
        c.topLeftCorner<3, 3>() = head;
        const Eigen::Vector3d cross = zvecs.transpose() * beta;
        c.block<3, 1>(0, 3) = cross;
        c.block<1, 3>(3, 0) = cross.transpose();
        c(3, 3) = beta.dot(zz * beta);
        if (c(3, 3) < 1e-12)
            throw DegenerateDirectionError("projection direction has ~zero variance");
        if (ridge > 0.0) c.diagonal().array() += ridge;
        return c;
    }
};

struct RhoGrad {
    double rho;
    Eigen::Matrix4d dC;  // d rho / d C, zero outside the active submatrix
};

/// rho(a,b | rest of idx) from the covariance entries listed in idx,
/// together with its derivative w.r.t. the full 4x4.
template <int K>
RhoGrad rho_with_grad(const Eigen::Matrix4d& c, const std::array<int, K>& idx,
                      const std::vector<std::string>& labels_for_error) {
    Eigen::Matrix<double, K, K> sub;
    for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j) sub(i, j) = c(idx[i], idx[j]);

    Eigen::FullPivLU<Eigen::Matrix<double, K, K>> lu(sub);
    if (!lu.isInvertible())
        throw ConditioningError("singular covariance in discovery objective", labels_for_error);
    const Eigen::Matrix<double, K, K> prec = lu.inverse();
    const double denom = prec(0, 0) * prec(1, 1);
    if (!(denom > 0.0))
        throw ConditioningError("non-positive precision diagonal in discovery objective",
                                labels_for_error);
    RhoGrad out;
    out.rho = -prec(0, 1) / std::sqrt(denom);

    Eigen::Matrix<double, K, K> gp = Eigen::Matrix<double, K, K>::Zero();
    gp(0, 1) = -1.0 / std::sqrt(denom);
    gp(0, 0) = -out.rho / (2.0 * prec(0, 0));
    gp(1, 1) = -out.rho / (2.0 * prec(1, 1));
    const Eigen::Matrix<double, K, K> gc = -prec * gp * prec;

    out.dC.setZero();
    for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j) out.dC(idx[i], idx[j]) = gc(i, j);
    return out;
}

double rho_only(const Eigen::Matrix4d& c, const std::vector<int>& idx) {
    const int k = static_cast<int>(idx.size());
    Eigen::MatrixXd sub(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) sub(i, j) = c(idx[i], idx[j]);
    Eigen::MatrixXd prec = sub.inverse();
    return -prec(0, 1) / std::sqrt(prec(0, 0) * prec(1, 1));
}

std::pair<double, double> rho_pair(const Workspace& ws, const Eigen::VectorXd& beta,
                                   double ridge) {
    const Eigen::Matrix4d c = ws.synth(beta, ridge);
    return {rho_only(c, {kW, kY, kX, kPhi}), rho_only(c, {kW, kY, kPhi})};
}

Eigen::VectorXd normalized(const Eigen::VectorXd& gamma) {
    const double nrm = gamma.norm();
    if (nrm < 1e-12)
        throw DegenerateDirectionError("gamma ~ 0: objective not differentiable at beta = 0");
    return gamma / nrm;
}

double smoothed_value(const Workspace& ws, const Eigen::VectorXd& beta, double lambda1,
                      double lambda2, double eps, double ridge) {
    const auto [r1, r2] = rho_pair(ws, beta, ridge);
    return smooth_abs(r1, eps) - lambda1 * smooth_abs(r2, eps) + lambda2 * beta.lpNorm<1>();
}

/// d(objective)/d(gamma) through beta = gamma/||gamma||.
Eigen::VectorXd smoothed_gradient(const Workspace& ws, const Eigen::VectorXd& gamma,
                                  double lambda1, double lambda2, double eps, double ridge) {
    const double nrm = gamma.norm();
    const Eigen::VectorXd beta = normalized(gamma);
    const Eigen::Matrix4d c = ws.synth(beta, ridge);
    static const std::vector<std::string> err_labels = {"w", "y", "x", "phi"};

    const auto g1 = rho_with_grad<4>(c, std::array<int, 4>{kW, kY, kX, kPhi}, err_labels);
    const auto g2 = rho_with_grad<3>(c, std::array<int, 3>{kW, kY, kPhi}, err_labels);

    const Eigen::VectorXd qb = ws.zz * beta;
    auto chain_to_beta = [&](const Eigen::Matrix4d& dC) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(ws.d);
        for (int j = 0; j < 3; ++j) g += (dC(kPhi, j) + dC(j, kPhi)) * ws.zvecs.col(j);
        g += 2.0 * dC(kPhi, kPhi) * qb;
        return g;
    };

    Eigen::VectorXd db = (g1.rho / smooth_abs(g1.rho, eps)) * chain_to_beta(g1.dC) -
                         lambda1 * (g2.rho / smooth_abs(g2.rho, eps)) * chain_to_beta(g2.dC);
    if (lambda2 > 0.0)
        db += lambda2 * beta.unaryExpr([](double b) { return b > 0.0 ? 1.0 : (b < 0.0 ? -1.0 : 0.0); });

    return (db - beta * beta.dot(db)) / nrm;
}

enum class DescentExit { GradTol, Stalled, MaxIters };

struct DescentOutcome {
    Eigen::VectorXd beta;
    DescentExit exit = DescentExit::MaxIters;
};

/// One gradient-descent run across the smoothing stages. Backtracking line
/// search with step carryover: start each iteration at twice the last
/// accepted step, halve until the smoothed objective decreases.
DescentOutcome descend(const Workspace& ws, const Eigen::VectorXd& init, double lambda1,
                       double lambda2, const DiscoveryConfig& cfg, std::vector<double>* trace) {
    constexpr double kFtol = 1e-13;
    constexpr int kStallPatience = 10;
    constexpr int kMaxHalvings = 60;

    DescentOutcome out;
    Eigen::VectorXd beta = normalized(init);
    out.exit = DescentExit::MaxIters;
    for (double eps : cfg.smoothing_stages) {
        double f = smoothed_value(ws, beta, lambda1, lambda2, eps, cfg.ridge);
        double step = cfg.eta;
        int stall = 0;
        out.exit = DescentExit::MaxIters;
        for (int it = 0; it < cfg.max_iters; ++it) {
            const Eigen::VectorXd g =
                smoothed_gradient(ws, beta, lambda1, lambda2, eps, cfg.ridge);
            if (g.norm() < cfg.grad_tol) {
                out.exit = DescentExit::GradTol;
                break;
            }
            step = std::min(step * 2.0, 1e3);
            bool accepted = false;
            Eigen::VectorXd cand;
            double fc = 0.0;
            for (int h = 0; h < kMaxHalvings; ++h) {
                cand = normalized(beta - step * g);
                fc = smoothed_value(ws, cand, lambda1, lambda2, eps, cfg.ridge);
                if (fc < f) {
                    accepted = true;
                    break;
                }
                step /= 2.0;
            }
            if (!accepted) {
                out.exit = DescentExit::Stalled;
                break;
            }
            if (f - fc < kFtol) {
                if (++stall > kStallPatience) {
                    beta = cand;
                    f = fc;
                    if (trace) trace->push_back(f);
                    out.exit = DescentExit::Stalled;
                    break;
                }
            } else {
                stall = 0;
            }
            beta = cand;
            f = fc;
            if (trace) trace->push_back(f);
        }
    }
    out.beta = beta;
    return out;
}

Eigen::VectorXd pilot_init(const Workspace& ws) {
    // coefficients of Z when regressing Y on (X, Z), from second moments
    const int d = ws.d;
    Eigen::MatrixXd sxx(d + 1, d + 1);
    sxx(0, 0) = ws.head(kX, kX);
    sxx.block(0, 1, 1, d) = ws.zvecs.col(kX).transpose();
    sxx.block(1, 0, d, 1) = ws.zvecs.col(kX);
    sxx.bottomRightCorner(d, d) = ws.zz;
    Eigen::VectorXd sxy(d + 1);
    sxy(0) = ws.head(kX, kY);
    sxy.tail(d) = ws.zvecs.col(kY);
    Eigen::LLT<Eigen::MatrixXd> llt(sxx);
    if (llt.info() != Eigen::Success) return Eigen::VectorXd();
    Eigen::VectorXd coef = llt.solve(sxy).tail(d);
    if (coef.norm() < 1e-10) return Eigen::VectorXd();
    return coef;
}

Eigen::VectorXd random_unit(int d, uint64_t seed) {
    auto rng = make_rng(derive_seed(seed, "gamma-init"));
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v(i) = normal(rng);
    return v / v.norm();
}

Eigen::VectorXd choose_init(const Workspace& ws, const DiscoveryConfig& cfg) {
    switch (cfg.init_kind) {
        case InitKind::Given:
            if (cfg.init_gamma.size() != ws.d)
                throw std::invalid_argument("init_gamma dimension does not match Z count");
            return cfg.init_gamma;
        case InitKind::Random:
            return random_unit(ws.d, cfg.init_seed);
        case InitKind::Pilot: {
            Eigen::VectorXd pilot = pilot_init(ws);
            if (pilot.size() == ws.d) return pilot;
            return random_unit(ws.d, cfg.init_seed);  // degenerate pilot fallback
        }
    }
    throw std::logic_error("unreachable init kind");
}

}  // namespace

ObjectiveTerms objective(const CovView& cov, const Eigen::VectorXd& gamma, double lambda1,
                         double lambda2, double ridge) {
    const Workspace ws(cov);
    const Eigen::VectorXd beta = normalized(gamma);
    const auto [r1, r2] = rho_pair(ws, beta, ridge);
    ObjectiveTerms t;
    t.dep = std::abs(r1);
    t.aux_dep = std::abs(r2);
    t.l1 = beta.lpNorm<1>();
    t.value = t.dep - lambda1 * t.aux_dep + lambda2 * t.l1;
    return t;
}

double objective_smoothed(const CovView& cov, const Eigen::VectorXd& gamma, double lambda1,
                          double lambda2, double eps, double ridge) {
    const Workspace ws(cov);
    return smoothed_value(ws, normalized(gamma), lambda1, lambda2, eps, ridge);
}

Eigen::VectorXd gradient(const CovView& cov, const Eigen::VectorXd& gamma, double lambda1,
                         double lambda2, double eps, double ridge) {
    const Workspace ws(cov);
    if (gamma.size() != ws.d) throw std::invalid_argument("gamma dimension does not match Z count");
    return smoothed_gradient(ws, gamma, lambda1, lambda2, eps, ridge);
}

DiscoveryResult optimize(const CovView& cov, const DiscoveryConfig& config) {
    config.validate();
    const Workspace ws(cov);

    DiscoveryResult res;
    res.seed = config.init_seed;
    Eigen::VectorXd gamma = choose_init(ws, config);

    double lambda2 = config.lambda2;
    const double final_eps = config.smoothing_stages.back();
    bool rule_stopped = false;
    DescentExit last_exit = DescentExit::MaxIters;

    // Ladder runs only on sample covariances: a population view has no
    // sampling distribution for the Fisher test.
    const bool can_test = !cov.population();
    for (int round = 1; round <= config.max_rounds; ++round) {
        res.rounds = round;
        res.lambda2_final = lambda2;
        const auto run = descend(ws, gamma, config.lambda1, lambda2, config, &res.trace);
        gamma = run.beta;
        last_exit = run.exit;

        if (!can_test) {
            rule_stopped = true;
            break;
        }
        const auto [r1, r2] = rho_pair(ws, gamma, config.ridge);
        (void)r1;
        res.tests_run += 1;
        const double level = bonferroni(config.alpha_test, res.tests_run);
        const TestResult t = fisher_z_test(r2, ws.n_eff, /*s_size=*/1, level);
        const bool stop = config.lambda2_rule == Lambda2Rule::Quoted ? !t.reject : t.reject;
        if (stop) {
            rule_stopped = true;
            break;
        }
        lambda2 *= config.lambda2_growth;
    }

    res.beta = gamma;
    res.converged = rule_stopped && last_exit != DescentExit::MaxIters;
    res.objective_terms = [&] {
        const auto [r1, r2] = rho_pair(ws, res.beta, config.ridge);
        ObjectiveTerms t;
        t.dep = std::abs(r1);
        t.aux_dep = std::abs(r2);
        t.l1 = res.beta.lpNorm<1>();
        t.value = t.dep - config.lambda1 * t.aux_dep + res.lambda2_final * t.l1;
        return t;
    }();
    if (res.trace.empty())
        res.trace.push_back(smoothed_value(ws, res.beta, config.lambda1, res.lambda2_final,
                                           final_eps, config.ridge));

    const double thr = config.effective_support_threshold(ws.d);
    for (int i = 0; i < ws.d; ++i)
        if (std::abs(res.beta(i)) > thr) {
            res.selected.push_back(i);
            res.selected_ids.push_back(cov.labels[3 + i]);
        }
    return res;
}

namespace {

double holdout_score(const CovView& fit_view, const CovView& score_view,
                     const DiscoveryConfig& cfg) {
    DiscoveryConfig inner = cfg;
    inner.max_rounds = 1;  // lambda2 ladder only in the final fit
    const DiscoveryResult fit = optimize(fit_view, inner);
    const Workspace ws(score_view);
    return std::abs(rho_pair(ws, fit.beta, cfg.ridge).first);
}

bool tie_before(const DiscoveryConfig& a, const DiscoveryConfig& b) {
    if (a.lambda1 != b.lambda1) return a.lambda1 < b.lambda1;
    if (a.eta != b.eta) return a.eta < b.eta;
    return a.init_seed < b.init_seed;
}

DiscoveryConfig select_best(const std::vector<DiscoveryConfig>& grid,
                            const std::vector<double>& scores) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(grid.size()); ++i) {
        if (scores[i] < scores[best] ||
            (scores[i] == scores[best] && tie_before(grid[i], grid[best])))
            best = i;
    }
    return grid[best];
}

}  // namespace

DiscoveryConfig tune(const Dataset& train, const std::vector<DiscoveryConfig>& grid,
                     uint64_t seed) {
    if (grid.empty()) throw std::invalid_argument("tune: empty grid");
    const int folds = grid.front().cv_folds;
    const long n = train.rows();
    if (folds < 2 || n < folds) throw std::invalid_argument("tune: bad fold count");

    // deterministic fold assignment: shuffled row ids dealt round-robin
    std::vector<long> perm(n);
    for (long i = 0; i < n; ++i) perm[i] = i;
    auto rng = make_rng(derive_seed(seed, "cv-folds"));
    std::shuffle(perm.begin(), perm.end(), rng);

    const auto ws = discovery_view(train);  // label order reused per fold
    const auto& order = ws.labels;

    std::vector<Dataset> fold_data(folds), rest_data(folds);
    for (int f = 0; f < folds; ++f) {
        std::vector<long> in_fold, out_fold;
        for (long i = 0; i < n; ++i)
            ((i % folds == f) ? in_fold : out_fold).push_back(perm[i]);
        auto gather = [&](const std::vector<long>& rows) {
            Dataset d = train;
            d.matrix.resize(static_cast<long>(rows.size()), train.matrix.cols());
            for (size_t r = 0; r < rows.size(); ++r) d.matrix.row(static_cast<long>(r)) = train.matrix.row(rows[r]);
            return d;
        };
        fold_data[f] = gather(in_fold);
        rest_data[f] = gather(out_fold);
    }

    std::vector<CovView> fit_views, score_views;
    for (int f = 0; f < folds; ++f) {
        std::vector<std::string> picked(order.begin(), order.end());
        fit_views.push_back(sample_cov(rest_data[f], picked));
        score_views.push_back(sample_cov(fold_data[f], picked));
    }

    std::vector<double> scores(grid.size(), 0.0);
#pragma omp parallel for schedule(dynamic)
    for (int gi = 0; gi < static_cast<int>(grid.size()); ++gi) {
        double total = 0.0;
        for (int f = 0; f < folds; ++f)
            total += holdout_score(fit_views[f], score_views[f], grid[gi]);
        scores[gi] = total / folds;
    }
    return select_best(grid, scores);
}

DiscoveryConfig tune_holdout(const Dataset& train, const Dataset& valid,
                             const std::vector<DiscoveryConfig>& grid) {
    if (grid.empty()) throw std::invalid_argument("tune_holdout: empty grid");
    const auto fit_view = discovery_view(train);
    const auto score_view = discovery_view(valid);
    std::vector<double> scores(grid.size(), 0.0);
#pragma omp parallel for schedule(dynamic)
    for (int gi = 0; gi < static_cast<int>(grid.size()); ++gi)
        scores[gi] = holdout_score(fit_view, score_view, grid[gi]);
    return select_best(grid, scores);
}

}  // namespace causal
