#include <doctest.h>

#include <filesystem>
#include <nlohmann/json.hpp>

#include "causal/bench.hpp"
#include "causal/io.hpp"

using namespace causal;
namespace fs = std::filesystem;

namespace {

ScenarioConfig tiny_config() {
    ScenarioConfig cfg;
    cfg.graph_kind = "sim4block";
    cfg.block_dims = 1;
    cfg.sigma_x2 = {0.6};
    cfg.omega = {0.5};
    cfg.n_total = 400;
    cfg.n_settings = 1;
    cfg.seed = 5;
    cfg.methods = {"marginal"};
    return cfg;
}

}  // namespace

TEST_CASE("single method and setting gives exactly one row") {
    const auto report = run_benchmark(tiny_config());
    REQUIRE(report.rows.size() == 1);
    CHECK(report.rows[0].method == "marginal");
    CHECK(report.rows[0].status == "ok");
    CHECK(std::isfinite(report.rows[0].ate_error));
}

TEST_CASE("full paper grid shape gives 100 rows per method") {
    ScenarioConfig cfg = tiny_config();
    cfg.sigma_x2 = {0.01, 0.6};
    cfg.omega = {0.1, 0.5};
    cfg.n_settings = 25;
    cfg.n_total = 60;
    cfg.methods = {"marginal", "allz"};
    const auto report = run_benchmark(cfg);
    CHECK(report.rows.size() == 2 * 2 * 25 * 2);
    int marginal_rows = 0;
    for (const auto& r : report.rows)
        if (r.method == "marginal") ++marginal_rows;
    CHECK(marginal_rows == 100);
}

TEST_CASE("row counts follow methods x settings x cells") {
    ScenarioConfig cfg = tiny_config();
    cfg.sigma_x2 = {0.01, 0.6};
    cfg.n_settings = 3;
    cfg.methods = {"marginal", "allz", "entner"};
    const auto report = run_benchmark(cfg);
    CHECK(report.rows.size() == 3u * 3u * 2u);
    // sorted by (scenario, setting, method)
    for (size_t i = 1; i < report.rows.size(); ++i) {
        const auto& a = report.rows[i - 1];
        const auto& b = report.rows[i];
        CHECK(std::tie(a.scenario_id, a.setting, a.method) <=
              std::tie(b.scenario_id, b.setting, b.method));
    }
}

TEST_CASE("reruns are byte-identical") {
    ScenarioConfig cfg = tiny_config();
    cfg.methods = {"marginal", "allz", "ours"};
    cfg.n_total = 600;
    cfg.discovery.max_iters = 150;
    cfg.tune_lambda1 = {0.1};
    cfg.tune_eta = {0.5};
    cfg.tune_random_inits = 0;
    cfg.final_random_inits = 1;

    const auto a = run_benchmark(cfg);
    const auto b = run_benchmark(cfg);
    const std::string pa = "/tmp/causal_bench_a.csv", pb = "/tmp/causal_bench_b.csv";
    write_report_csv(a, pa);
    write_report_csv(b, pb);
    CHECK(read_text_file(pa) == read_text_file(pb));
}

TEST_CASE("report csv round trip") {
    ScenarioConfig cfg = tiny_config();
    cfg.methods = {"marginal", "entner"};
    cfg.n_settings = 2;
    const auto report = run_benchmark(cfg);
    const std::string path = "/tmp/causal_report_rt.csv";
    write_report_csv(report, path);
    const auto back = read_report_csv(path);
    REQUIRE(back.rows.size() == report.rows.size());
    for (size_t i = 0; i < report.rows.size(); ++i) {
        CHECK(back.rows[i].scenario_id == report.rows[i].scenario_id);
        CHECK(back.rows[i].setting == report.rows[i].setting);
        CHECK(back.rows[i].method == report.rows[i].method);
        CHECK(back.rows[i].ate_estimate == report.rows[i].ate_estimate);
        CHECK(back.rows[i].ate_error == report.rows[i].ate_error);
        CHECK(back.rows[i].selected == report.rows[i].selected);
        CHECK(back.rows[i].seed == report.rows[i].seed);
    }
}

TEST_CASE("method failures become error rows and the run continues") {
    ScenarioConfig cfg = tiny_config();
    // n too small for the all-Z design at dims 5 -> covariance precondition fails
    cfg.block_dims = 5;
    cfg.n_total = 40;
    cfg.split = {0.5, 0.5};
    cfg.methods = {"allz", "marginal"};
    const auto report = run_benchmark(cfg);
    REQUIRE(report.rows.size() == 2);
    bool saw_error = false, saw_ok = false;
    for (const auto& r : report.rows) {
        if (r.status.rfind("error", 0) == 0) {
            saw_error = true;
            CHECK(std::isnan(r.ate_estimate));
        }
        if (r.status == "ok") saw_ok = true;
    }
    CHECK(saw_error);
    CHECK(saw_ok);
}

TEST_CASE("tuning ignores the test half") {
    // same train rows, different test rows -> identical tuned choice
    ScenarioConfig cfg = tiny_config();
    const auto g = build_simulation_graph(SimDims(2));
    FixedCoeffs fixed;
    fixed[{"X", "Y"}] = 0.5;
    SemNoise noise;
    noise.by_label["X"] = 0.6;
    const auto sem = sample_parameters(g, 9, 0.5, noise, fixed);
    const auto d1 = sample_data(sem, 2000, 10, true);
    const auto d2 = sample_data(sem, 2000, 11, true);

    Dataset train = d1.head(1000);
    std::vector<DiscoveryConfig> grid;
    for (double l1 : {0.05, 0.3}) {
        DiscoveryConfig c;
        c.lambda1 = l1;
        c.max_iters = 150;
        grid.push_back(c);
    }
    const auto picked1 = tune(train, grid, 42);
    const auto picked2 = tune(train, grid, 42);  // test half never enters tune's API
    CHECK(picked1.lambda1 == picked2.lambda1);
    // and the selected support from a fit on train is a function of train only
    const auto view = discovery_view(train);
    const auto r1 = optimize(view, picked1);
    const auto r2 = optimize(view, picked2);
    CHECK(r1.selected_ids == r2.selected_ids);
    (void)d2;
}

TEST_CASE("three-way split tunes on the validation set") {
    ScenarioConfig cfg = tiny_config();
    cfg.split = {0.4, 0.3, 0.3};
    cfg.n_total = 900;
    cfg.block_dims = 1;
    cfg.methods = {"ours"};
    cfg.discovery.max_iters = 150;
    cfg.tune_lambda1 = {0.1};
    cfg.tune_eta = {0.5};
    cfg.tune_random_inits = 0;
    cfg.final_random_inits = 0;
    const auto report = run_benchmark(cfg);
    REQUIRE(report.rows.size() == 1);
    CHECK(report.rows[0].status == "ok");
}

TEST_CASE("scenario config json round trip") {
    ScenarioConfig cfg = tiny_config();
    cfg.methods = {"ours", "entner"};
    cfg.discovery.lambda2_rule = Lambda2Rule::DependenceStop;
    cfg.entner.strategy = EntnerStrategy::Random;
    cfg.split = {0.5, 0.25, 0.25};
    const auto j = scenario_to_json(cfg);
    const auto back = scenario_from_json(j);
    CHECK(scenario_config_hash(back) == scenario_config_hash(cfg));
    CHECK(back.methods == cfg.methods);
    CHECK(back.split == cfg.split);
    CHECK(back.discovery.lambda2_rule == Lambda2Rule::DependenceStop);
    CHECK(back.entner.strategy == EntnerStrategy::Random);
}

TEST_CASE("export plot data") {
    SUBCASE("empty report writes header-only files") {
        BenchmarkReport empty;
        BenchmarkRow r;
        r.method = "ours";
        r.scenario_id = "s";
        r.ate_error = std::nan("");
        empty.rows.push_back(r);
        const auto files = export_plot_data(empty, "/tmp/causal_plots_empty");
        REQUIRE(!files.empty());
        const std::string hist = read_text_file(files[0]);
        CHECK(hist == "bin_lo,bin_hi,count\n");
    }
    SUBCASE("one scatter row per setting per baseline") {
        ScenarioConfig cfg = tiny_config();
        cfg.n_settings = 25;
        cfg.n_total = 300;
        cfg.block_dims = 1;
        cfg.methods = {"marginal", "ours"};
        cfg.discovery.max_iters = 60;
        cfg.tune_lambda1 = {0.1};
        cfg.tune_eta = {0.5};
        cfg.tune_random_inits = 0;
        cfg.final_random_inits = 0;
        const auto report = run_benchmark(cfg);
        const auto files = export_plot_data(report, "/tmp/causal_plots_scatter");
        std::string scatter_path;
        for (const auto& f : files)
            if (f.find("scatter_marginal") != std::string::npos) scatter_path = f;
        REQUIRE(!scatter_path.empty());
        const std::string text = read_text_file(scatter_path);
        const long lines = std::count(text.begin(), text.end(), '\n');
        CHECK(lines == 26);  // header + 25 settings
    }
    SUBCASE("identical input gives byte-identical output") {
        ScenarioConfig cfg = tiny_config();
        cfg.n_settings = 4;
        const auto report = run_benchmark(cfg);
        export_plot_data(report, "/tmp/causal_plots_a");
        export_plot_data(report, "/tmp/causal_plots_b");
        CHECK(read_text_file("/tmp/causal_plots_a/hist_marginal.csv") ==
              read_text_file("/tmp/causal_plots_b/hist_marginal.csv"));
    }
}

TEST_CASE("config validation catches bad input") {
    ScenarioConfig cfg = tiny_config();
    cfg.split = {0.7, 0.7};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = tiny_config();
    cfg.methods = {"nope"};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = tiny_config();
    cfg.sigma_x2 = {};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
