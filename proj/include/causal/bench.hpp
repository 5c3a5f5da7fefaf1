#pragma once

#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "causal/baselines.hpp"
#include "causal/discovery.hpp"
#include "causal/scm.hpp"

namespace causal {

/// One benchmark specification: a graph family, the grid of treatment-noise
/// and treatment-effect values, and per-method settings. Every cell of
/// sigma_x2 x omega is run for n_settings parameter draws.
struct ScenarioConfig {
    std::string graph_kind = "sim4block";  // sim4block | nhs | custom
    std::string graph_file;                // graph JSON when graph_kind == custom
    int block_dims = 5;
    std::vector<double> sigma_x2 = {0.6};
    std::vector<double> omega = {0.5};
    long n_total = 4000;
    std::vector<double> split = {0.5, 0.5};  // 2-way train/test or 3-way train/valid/test
    int n_settings = 10;
    uint64_t seed = 1;
    std::vector<std::string> methods = {"ours", "allz", "marginal", "entner"};
    /// Probability of a negative structural coefficient. Near-symmetric
    /// signs let confounding path contributions cancel, which defeats the
    /// grid's designed baseline breakage (and strains faithfulness); the
    /// harness therefore defaults to mostly-positive draws.
    double sign_flip_prob = 0.05;
    bool standardize = true;
    bool timing = false;  // wall-clock runtime_ms breaks bit-exact replay; off by default
    bool nhs_sample_params = false;  // nhs default: fixed fixture parameters
    double ridge = 1e-8;

    DiscoveryConfig discovery;
    std::vector<double> tune_lambda1 = {0.05, 0.1, 0.2};
    std::vector<double> tune_eta = {0.25, 0.5};
    int tune_random_inits = 1;   // random inits in the CV grid, besides the pilot
    int final_random_inits = 4;  // multi-start for the final fit, besides the pilot

    EntnerConfig entner;

    void validate() const;
};

struct BenchmarkRow {
    std::string scenario_id;
    int setting = 0;
    std::string method;
    double ate_estimate = 0.0;
    double ate_error = 0.0;
    std::vector<std::string> selected;
    double runtime_ms = 0.0;
    uint64_t seed = 0;
    std::string config_hash;
    std::string status = "ok";
};

struct MethodSummary {
    std::string scenario_id;
    std::string method;
    double median_ate_error = 0.0;
    int rows = 0;
    int errors = 0;
};

struct BenchmarkReport {
    std::vector<BenchmarkRow> rows;
    std::vector<MethodSummary> summary;
    std::string config_hash;
    std::string lambda2_rule;  // which ladder flag produced the "ours" rows
};

std::string scenario_config_hash(const ScenarioConfig& cfg);
nlohmann::json scenario_to_json(const ScenarioConfig& cfg);
ScenarioConfig scenario_from_json(const nlohmann::json& j);

/// Run the grid. Settings execute in a worker pool; all seeds derive from
/// (config seed, cell, setting), so results are independent of scheduling
/// and identical across reruns. A method failure becomes a row with an
/// error status; the run continues.
BenchmarkReport run_benchmark(const ScenarioConfig& cfg);

void write_report_csv(const BenchmarkReport& report, const std::string& path);
BenchmarkReport read_report_csv(const std::string& path);
nlohmann::json summary_to_json(const BenchmarkReport& report);

/// Plot-ready exports: one histogram CSV per method (bin_lo, bin_hi, count;
/// Freedman-Diaconis width unless bin_width > 0) and one scatter CSV per
/// baseline pairing its per-setting error against ours.
std::vector<std::string> export_plot_data(const BenchmarkReport& report,
                                          const std::string& out_dir, double bin_width = 0.0);

}  // namespace causal
