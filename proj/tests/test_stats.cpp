#include <doctest.h>

#include <cmath>

#include "causal/errors.hpp"
#include "causal/rng.hpp"
#include "causal/scm.hpp"
#include "causal/stats.hpp"
#include "oracles.hpp"

using namespace causal;

namespace {

Dataset random_dataset(int n, int p, uint64_t seed) {
    auto rng = make_rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Dataset d;
    d.matrix.resize(n, p);
    for (int j = 0; j < p; ++j) {
        for (int r = 0; r < n; ++r) d.matrix(r, j) = normal(rng);
        d.columns.push_back({"c" + std::to_string(j), NodeRole::Z, ""});
    }
    d.scale_factors.assign(p, 1.0);
    return d;
}

}  // namespace

TEST_CASE("sample covariance basics") {
    SUBCASE("duplicated column: off-diagonal equals diagonal") {
        Dataset d = random_dataset(100, 1, 1);
        Dataset dd = d;
        dd.matrix.conservativeResize(Eigen::NoChange, 2);
        dd.matrix.col(1) = dd.matrix.col(0);
        dd.columns.push_back({"copy", NodeRole::Z, ""});
        dd.scale_factors.push_back(1.0);
        const auto cov = sample_cov(dd);
        CHECK(cov.m(0, 1) == doctest::Approx(cov.m(0, 0)));
    }
    SUBCASE("independent pair is nearly uncorrelated at n = 1e5") {
        const auto cov = sample_cov(random_dataset(100000, 2, 2));
        CHECK(std::abs(cov.m(0, 1)) < 0.02);
    }
    SUBCASE("two-pass matches the streaming reference to 1e-10") {
        const Dataset d = random_dataset(5000, 8, 3);
        const auto a = sample_cov(d);
        const auto b = sample_cov_streaming(d);
        CHECK((a.m - b.m).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("degenerate column is flagged") {
        Dataset d = random_dataset(50, 2, 4);
        d.matrix.col(1).setConstant(3.0);
        CHECK_THROWS_AS(sample_cov(d), std::invalid_argument);
    }
    SUBCASE("needs enough rows") {
        const Dataset d = random_dataset(5, 4, 5);
        CHECK_THROWS_AS(sample_cov(d), std::invalid_argument);
    }
}

TEST_CASE("partial correlation reduces to plain correlation with empty s") {
    const auto cov = oracles::random_pd_cov({"a", "b", "c"}, 10);
    const double expect = cov.m(0, 1) / std::sqrt(cov.m(0, 0) * cov.m(1, 1));
    CHECK(partial_corr(cov, "a", "b", {}) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("precision route and residual route agree to 1e-10") {
    for (uint64_t seed = 0; seed < 30; ++seed) {
        const int p = 3 + static_cast<int>(seed % 5);
        std::vector<std::string> labels;
        for (int i = 0; i < p; ++i) labels.push_back("v" + std::to_string(i));
        const auto cov = oracles::random_pd_cov(labels, 100 + seed);
        std::vector<std::string> s(labels.begin() + 2, labels.end());
        const double r1 = partial_corr(cov, "v0", "v1", s);
        const double r2 = partial_corr_residual(cov, "v0", "v1", s);
        CHECK(std::abs(r1 - r2) < 1e-10);
        CHECK(std::abs(r1) <= 1.0 + 1e-12);
    }
}

TEST_CASE("partial correlation matches the data-level residual oracle") {
    const Dataset d = random_dataset(2000, 5, 8);
    const auto cov = sample_cov(d);
    const double mine = partial_corr(cov, "c0", "c1", {"c2", "c3", "c4"});
    const double ref = oracles::partial_corr_from_data(d.matrix, 0, 1, {2, 3, 4});
    CHECK(mine == doctest::Approx(ref).epsilon(1e-9));
}

TEST_CASE("partial correlation is invariant to positive column rescaling") {
    auto cov = oracles::random_pd_cov({"a", "b", "s1", "s2"}, 23);
    const double base = partial_corr(cov, "a", "b", {"s1", "s2"});
    // rescale column/row s1 by 7, b by 0.3
    CovView scaled = cov;
    const std::vector<double> f = {1.0, 0.3, 7.0, 1.0};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) scaled.m(i, j) *= f[i] * f[j];
    CHECK(partial_corr(scaled, "a", "b", {"s1", "s2"}) ==
          doctest::Approx(base).epsilon(1e-10));
}

TEST_CASE("Example 2 population: rho(W, Y | X, byz^T Z) is exactly zero") {
    const auto ex = oracles::example2();
    const auto pop = population_dataset_view(ex.sem);
    std::vector<std::string> zids;
    for (int i = 0; i < 6; ++i) zids.push_back("Z" + std::to_string(i));
    const auto view = pop.submatrix([&] {
        std::vector<std::string> order = {"W", "Y", "X"};
        order.insert(order.end(), zids.begin(), zids.end());
        return order;
    }());
    const auto synth = synthetic_column_cov(view, ex.beta_yz);
    const double rho = partial_corr(synth, "W", "Y", {"X", "phi"});
    CHECK(std::abs(rho) < 1e-12);
    // and the auxiliary dependence is nonzero
    CHECK(std::abs(partial_corr(synth, "W", "Y", {"phi"})) > 0.05);
}

TEST_CASE("singular conditioning raises with the offending set") {
    CovView cov;
    cov.labels = {"a", "b", "s"};
    cov.m.resize(3, 3);
    // s perfectly collinear with a
    cov.m << 1.0, 0.3, 1.0, 0.3, 1.0, 0.3, 1.0, 0.3, 1.0;
    try {
        partial_corr(cov, "a", "b", {"s"});
        FAIL("expected ConditioningError");
    } catch (const ConditioningError& e) {
        const auto& labels = e.labels();
        CHECK(std::find(labels.begin(), labels.end(), "s") != labels.end());
    }
    // a small ridge regularizes it
    CHECK_NOTHROW(partial_corr(cov, "a", "b", {"s"}, 1e-8));
}

TEST_CASE("synthetic column covariance") {
    const auto ex = oracles::example2();
    const auto pop = population_dataset_view(ex.sem);
    std::vector<std::string> order = {"W", "Y", "X"};
    for (int i = 0; i < 6; ++i) order.push_back("Z" + std::to_string(i));
    const auto view = pop.submatrix(order);

    SUBCASE("one-hot beta selects the matching Z row") {
        Eigen::VectorXd e2 = Eigen::VectorXd::Zero(6);
        e2(2) = 1.0;
        const auto synth = synthetic_column_cov(view, e2);
        CHECK(synth.m(3, 0) == doctest::Approx(view.m(view.index_of("Z2"), 0)));
        CHECK(synth.m(3, 3) == doctest::Approx(view.m(view.index_of("Z2"), view.index_of("Z2"))));
    }
    SUBCASE("positive scaling of beta leaves the partial correlation unchanged") {
        Eigen::VectorXd beta(6);
        beta << 0.3, -0.2, 0.8, 0.1, -0.5, 0.4;
        const auto a = synthetic_column_cov(view, beta);
        const auto b = synthetic_column_cov(view, (3.7 * beta).eval());
        CHECK(partial_corr(a, "W", "Y", {"X", "phi"}) ==
              doctest::Approx(partial_corr(b, "W", "Y", {"X", "phi"})).epsilon(1e-12));
    }
    SUBCASE("contraction matches an explicitly materialized phi column") {
        const auto data = sample_data(ex.sem, 4000, 33, false);
        Eigen::VectorXd beta(6);
        beta << 1.0, 0.5, -0.7, 0.2, 0.9, -1.1;
        std::vector<std::string> zids;
        for (int i = 0; i < 6; ++i) zids.push_back("Z" + std::to_string(i));

        Dataset with_phi = data;
        Eigen::VectorXd phi = Eigen::VectorXd::Zero(data.rows());
        for (int i = 0; i < 6; ++i) phi += beta(i) * data.matrix.col(data.col_index(zids[i]));
        with_phi.matrix.conservativeResize(Eigen::NoChange, data.cols() + 1);
        with_phi.matrix.col(data.cols()) = phi;
        with_phi.columns.push_back({"phi", NodeRole::Z, ""});
        with_phi.scale_factors.push_back(1.0);

        std::vector<std::string> base_order = {"W", "Y", "X"};
        base_order.insert(base_order.end(), zids.begin(), zids.end());
        const auto synth = synthetic_column_cov(sample_cov(data, base_order), beta);
        const auto direct = sample_cov(with_phi, {"W", "Y", "X", "phi"});
        CHECK((synth.m - direct.m).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("zero-variance direction raises") {
        Eigen::VectorXd tiny = Eigen::VectorXd::Constant(6, 1e-8);
        CHECK_THROWS_AS(synthetic_column_cov(view, tiny), DegenerateDirectionError);
    }
}

TEST_CASE("ols") {
    SUBCASE("y identical to x gives coefficient 1, residual 0") {
        Dataset d = random_dataset(200, 1, 40);
        Dataset dd = d;
        dd.matrix.conservativeResize(Eigen::NoChange, 2);
        dd.matrix.col(1) = dd.matrix.col(0);
        dd.columns.push_back({"y", NodeRole::Y, ""});
        dd.scale_factors.push_back(1.0);
        const auto fit = ols(dd, "y", {"c0"});
        CHECK(fit.coeffs(0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(fit.residual_variance) < 1e-10);
    }
    SUBCASE("Example 2 population regression recovers (b_yx, b_yz)") {
        const auto ex = oracles::example2();
        const auto pop = population_dataset_view(ex.sem);
        std::vector<std::string> xs = {"X"};
        for (int i = 0; i < 6; ++i) xs.push_back("Z" + std::to_string(i));
        const auto fit = ols(pop, "Y", xs);
        CHECK(fit.coeffs(0) == doctest::Approx(ex.beta_yx).epsilon(1e-10));
        for (int i = 0; i < 6; ++i)
            CHECK(fit.coeffs(i + 1) == doctest::Approx(ex.beta_yz(i)).epsilon(1e-10));
    }
    SUBCASE("sample ols approaches population ols") {
        const auto ex = oracles::example2();
        const auto data = sample_data(ex.sem, 100000, 77, false);
        std::vector<std::string> xs = {"X"};
        for (int i = 0; i < 6; ++i) xs.push_back("Z" + std::to_string(i));
        const auto sfit = ols(data, "Y", xs);
        const auto pfit = ols(population_dataset_view(ex.sem), "Y", xs);
        for (int i = 0; i < sfit.coeffs.size(); ++i)
            CHECK(std::abs(sfit.coeffs(i) - pfit.coeffs(i)) < 0.02);
    }
    SUBCASE("singular design raises") {
        CovView cov;
        cov.labels = {"x1", "x2", "y"};
        cov.m.resize(3, 3);
        cov.m << 1.0, 1.0, 0.5, 1.0, 1.0, 0.5, 0.5, 0.5, 1.0;
        CHECK_THROWS_AS(ols(cov, "y", {"x1", "x2"}), ConditioningError);
    }
}

TEST_CASE("fisher z test") {
    SUBCASE("r = 0 gives statistic 0, p 1, no rejection") {
        const auto t = fisher_z_test(0.0, 1000, 2, 0.05);
        CHECK(t.statistic == 0.0);
        CHECK(t.p_value == doctest::Approx(1.0));
        CHECK_FALSE(t.reject);
    }
    SUBCASE("r = 0.1 at n = 10000, |s| = 2") {
        const auto t = fisher_z_test(0.1, 10000, 2, 0.05);
        // 0.5 ln(1.1/0.9) * sqrt(9995)
        CHECK(t.statistic == doctest::Approx(10.0310).epsilon(1e-4));
        CHECK(t.reject);
    }
    SUBCASE("|r| = 1 rejects with p = 0") {
        const auto t = fisher_z_test(1.0, 100, 0, 0.05);
        CHECK(t.p_value == 0.0);
        CHECK(t.reject);
    }
    SUBCASE("population views are refused") {
        CHECK_THROWS_AS(fisher_z_test(0.1, std::numeric_limits<double>::infinity(), 0, 0.05),
                        std::invalid_argument);
    }
    SUBCASE("needs degrees of freedom") {
        CHECK_THROWS_AS(fisher_z_test(0.1, 5, 2, 0.05), std::invalid_argument);
    }
    SUBCASE("reject iff p < alpha") {
        const auto t = fisher_z_test(0.02, 4000, 1, 0.05);
        CHECK(t.reject == (t.p_value < t.alpha_used));
    }
}

TEST_CASE("bonferroni") {
    CHECK(bonferroni(0.05, 1) == doctest::Approx(0.05));
    CHECK(bonferroni(0.05, 5) == doctest::Approx(0.01));
    CHECK(bonferroni(0.05, 20) == doctest::Approx(0.0025));
}

TEST_CASE("covview validation") {
    auto cov = oracles::random_pd_cov({"a", "b"}, 3);
    CHECK_NOTHROW(cov.validate());
    cov.m(0, 1) += 1e-6;  // break symmetry
    CHECK_THROWS_AS(cov.validate(), std::invalid_argument);
}
