#include <doctest.h>

#include "causal/scm.hpp"
#include "causal/stats.hpp"

using namespace causal;

// The OpenMP kernels must match their serial references: bit-identical for
// row sampling (the per-row rng makes order irrelevant) and 1e-10 for the
// covariance (different summation orders).

TEST_CASE("parallel and serial sampling are bit-identical") {
    const auto g = build_simulation_graph(SimDims(3));
    const auto sem = sample_parameters(g, 13, 0.5);
    for (bool standardize : {false, true}) {
        const auto par = sample_data(sem, 4000, 99, standardize);
        const auto ser = sample_data_serial(sem, 4000, 99, standardize);
        CHECK((par.matrix - ser.matrix).cwiseAbs().maxCoeff() == 0.0);
        CHECK(par.scale_factors == ser.scale_factors);
    }
}

TEST_CASE("two-pass parallel covariance matches the streaming serial reference") {
    const auto g = build_simulation_graph(SimDims(4));
    const auto sem = sample_parameters(g, 14, 0.5);
    const auto data = sample_data(sem, 6000, 15, false);
    const auto par = sample_cov(data);
    const auto ser = sample_cov_streaming(data);
    REQUIRE(par.labels == ser.labels);
    CHECK((par.m - ser.m).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("covariance kernel is invariant to column subsetting order") {
    const auto g = build_simulation_graph(SimDims(2));
    const auto sem = sample_parameters(g, 16, 0.5);
    const auto data = sample_data(sem, 1000, 17, false);
    const auto full = sample_cov(data);
    const auto sub = sample_cov(data, {"Y", "W"});
    CHECK(sub.m(0, 1) ==
          doctest::Approx(full.m(full.index_of("Y"), full.index_of("W"))).epsilon(1e-14));
}
