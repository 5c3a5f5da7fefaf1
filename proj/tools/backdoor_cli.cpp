// Command-line front end: simulate data from the benchmark SEM families,
// run the adjustment discovery on a CSV, estimate backdoor ATEs, drive the
// full benchmark grid, and export plot-ready summaries.

#include <CLI11.hpp>
#include <iostream>
#include <nlohmann/json.hpp>

#include "causal/bench.hpp"
#include "causal/estimation.hpp"
#include "causal/io.hpp"
#include "causal/rng.hpp"

using namespace causal;
using nlohmann::json;

namespace {

GraphSpec graph_for(const std::string& kind, int dims, const std::string& file) {
    if (kind == "sim4block") return build_simulation_graph(SimDims(dims));
    if (kind == "nhs") return build_nhs_graph();
    if (kind == "custom") return graph_from_json(json::parse(read_text_file(file)));
    throw CLI::ValidationError("--graph must be sim4block, nhs or custom");
}

int cmd_simulate(const std::string& kind, int dims, double sigma_x2, double omega, long n,
                 uint64_t seed, bool standardize, double sign_flip_prob,
                 const std::string& graph_file, const std::string& out,
                 const std::string& roles_out, const std::string& sem_out) {
    LinearSem sem = [&] {
        if (kind == "nhs") {
            LinearSem s = nhs_fixture_sem(omega);
            s.noise_vars[s.graph.x_index()] = sigma_x2;
            return s;
        }
        GraphSpec g = graph_for(kind, dims, graph_file);
        SemNoise noise;
        noise.by_label["X"] = sigma_x2;
        FixedCoeffs fixed;
        fixed[{g.node(g.x_index()).id, g.node(g.y_index()).id}] = omega;
        return sample_parameters(g, derive_seed(seed, "params"), sign_flip_prob, noise, fixed);
    }();

    const Dataset data = sample_data(sem, n, derive_seed(seed, "data"), standardize);
    write_dataset_csv(data, out);
    write_roles_json(data, roles_out);
    if (!sem_out.empty()) write_text_file(sem_out, sem_to_json(sem).dump(2) + "\n");
    std::cout << "wrote " << data.rows() << " rows x " << data.cols() << " cols to " << out
              << "\n";
    return 0;
}

int cmd_discover(const std::string& data_path, const std::string& roles_path,
                 DiscoveryConfig cfg, const std::string& rule, const std::string& out) {
    cfg.lambda2_rule = rule == "quoted" ? Lambda2Rule::Quoted : Lambda2Rule::DependenceStop;
    const Dataset data = read_dataset_csv(data_path, roles_path);
    const CovView view = discovery_view(data);
    const DiscoveryResult res = optimize(view, cfg);
    const json j = discovery_result_to_json(res, cfg);
    if (out.empty())
        std::cout << j.dump(2) << "\n";
    else
        write_text_file(out, j.dump(2) + "\n");
    return 0;
}

int cmd_estimate(const std::string& data_path, const std::string& roles_path,
                 const std::vector<std::string>& adjust, double ridge) {
    const Dataset data = read_dataset_csv(data_path, roles_path);
    const double est = backdoor_ate(data, adjust, ridge);
    std::cout << format_double(est) << "\n";
    return 0;
}

int cmd_benchmark(ScenarioConfig cfg, const std::string& config_file, const std::string& report_out,
                  const std::string& summary_out) {
    if (!config_file.empty()) {
        // config file overrides flags
        cfg = scenario_from_json(json::parse(read_text_file(config_file)));
    }
    cfg.validate();
    const BenchmarkReport report = run_benchmark(cfg);
    write_report_csv(report, report_out);
    if (!summary_out.empty()) write_text_file(summary_out, summary_to_json(report).dump(2) + "\n");
    std::cout << "wrote " << report.rows.size() << " rows to " << report_out << "\n";
    for (const auto& s : report.summary)
        std::cout << s.scenario_id << " " << s.method << " median |ATE error| "
                  << format_double(s.median_ate_error) << " (" << s.rows << " rows, " << s.errors
                  << " errors)\n";
    return 0;
}

int cmd_export_plots(const std::string& report_path, const std::string& out_dir,
                     double bin_width) {
    const BenchmarkReport report = read_report_csv(report_path);
    const auto files = export_plot_data(report, out_dir, bin_width);
    for (const auto& f : files) std::cout << "wrote " << f << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Differentiable backdoor adjustment discovery"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Sample a dataset from a benchmark SEM");
    std::string kind = "sim4block", graph_file, out = "data.csv", roles_out = "roles.json",
                sem_out;
    int dims = 5;
    double sigma_x2 = 0.6, omega = 0.5, sign_flip_prob = 0.5;
    long n = 4000;
    uint64_t seed = 1;
    bool no_standardize = false;
    sim->add_option("--graph", kind, "sim4block | nhs | custom");
    sim->add_option("--graph-file", graph_file, "graph JSON for --graph custom");
    sim->add_option("--dims", dims, "per-block dimension for sim4block");
    sim->add_option("--sigma-x2", sigma_x2, "treatment noise variance");
    sim->add_option("--omega", omega, "true treatment effect");
    sim->add_option("--n", n, "number of rows");
    sim->add_option("--seed", seed, "base seed");
    sim->add_option("--sign-flip-prob", sign_flip_prob, "probability of a negative coefficient");
    sim->add_flag("--no-standardize", no_standardize, "keep original column scales");
    sim->add_option("--out", out, "dataset CSV path");
    sim->add_option("--roles-out", roles_out, "roles sidecar path");
    sim->add_option("--sem-out", sem_out, "optional SEM JSON path");

    // discover
    auto* disc = app.add_subcommand("discover", "Run the discovery optimizer on a CSV");
    std::string d_data, d_roles, d_out, d_rule = "quoted";
    DiscoveryConfig dcfg;
    uint64_t d_seed = 0;
    std::string d_init = "pilot";
    disc->add_option("--data", d_data, "dataset CSV")->required();
    disc->add_option("--roles", d_roles, "roles sidecar JSON")->required();
    disc->add_option("--lambda1", dcfg.lambda1, "auxiliary dependence weight");
    disc->add_option("--lambda2", dcfg.lambda2, "initial sparsity weight");
    disc->add_option("--lambda2-growth", dcfg.lambda2_growth, "ladder multiplier");
    disc->add_option("--max-rounds", dcfg.max_rounds, "lambda2 ladder length");
    disc->add_option("--lambda2-rule", d_rule, "quoted | dependence");
    disc->add_option("--eta", dcfg.eta, "initial step size");
    disc->add_option("--max-iters", dcfg.max_iters, "iterations per smoothing stage");
    disc->add_option("--alpha", dcfg.alpha_test, "test level for the lambda2 ladder");
    disc->add_option("--support-threshold", dcfg.support_threshold,
                     "|beta_i| cut for Z*; negative means 1/(2 sqrt(d))");
    disc->add_option("--ridge", dcfg.ridge, "diagonal ridge for near-singular covariances");
    disc->add_option("--init", d_init, "pilot | random");
    disc->add_option("--seed", d_seed, "seed for random init");
    disc->add_option("--out", d_out, "result JSON path (stdout when omitted)");

    // estimate
    auto* est = app.add_subcommand("estimate", "Backdoor ATE for an explicit adjustment set");
    std::string e_data, e_roles;
    std::vector<std::string> e_adjust;
    double e_ridge = 0.0;
    est->add_option("--data", e_data, "dataset CSV")->required();
    est->add_option("--roles", e_roles, "roles sidecar JSON")->required();
    est->add_option("--adjust", e_adjust, "Z column ids (comma separated or repeated)")
        ->delimiter(',');
    est->add_option("--ridge", e_ridge, "diagonal ridge");

    // benchmark
    auto* bench = app.add_subcommand("benchmark", "Run the scenario grid");
    ScenarioConfig bcfg;
    std::string b_config, b_report = "report.csv", b_summary = "summary.json";
    std::string b_rule = "dependence";
    bool b_nhs_defaults_touched = false;
    bench->add_option("--config", b_config, "scenario config JSON (overrides all flags)");
    bench->add_option("--graph", bcfg.graph_kind, "sim4block | nhs | custom");
    bench->add_option("--graph-file", bcfg.graph_file, "graph JSON for custom");
    bench->add_option("--dims", bcfg.block_dims, "per-block dimension");
    bench->add_option("--sigma-x2", bcfg.sigma_x2, "treatment noise grid")->delimiter(',');
    bench
        ->add_option_function<std::vector<double>>(
            "--omega", [&](const std::vector<double>& v) { bcfg.omega = v; },
            "treatment effect grid")
        ->delimiter(',');
    bench->add_option("--n", bcfg.n_total, "rows per setting");
    bench->add_option("--settings", bcfg.n_settings, "parameter draws per grid cell");
    bench->add_option("--seed", bcfg.seed, "base seed");
    bench->add_option("--sign-flip-prob", bcfg.sign_flip_prob,
                      "probability of a negative structural coefficient");
    bench->add_option("--split", bcfg.split, "2 or 3 split fractions")->delimiter(',');
    bench->add_option("--methods", bcfg.methods, "subset of ours,allz,marginal,entner")
        ->delimiter(',');
    bench->add_option("--lambda2-rule", b_rule, "quoted | dependence (reported in summary)");
    bench->add_option("--ridge", bcfg.ridge, "diagonal ridge");
    bench->add_flag("--timing", bcfg.timing,
                    "record wall-clock runtime_ms (breaks bit-exact replay)");
    bench->add_flag("--nhs-sample-params", bcfg.nhs_sample_params,
                    "sample NHS parameters per setting instead of the fixture");
    bench->add_option("--report-out", b_report, "report CSV path");
    bench->add_option("--summary-out", b_summary, "summary JSON path");
    bench->callback([&] { b_nhs_defaults_touched = bench->count("--sigma-x2") > 0; });

    // export-plots
    auto* plots = app.add_subcommand("export-plots", "Histogram and scatter CSVs from a report");
    std::string p_report, p_out = "plots";
    double p_bin_width = 0.0;
    plots->add_option("--report", p_report, "report CSV")->required();
    plots->add_option("--out-dir", p_out, "output directory");
    plots->add_option("--bin-width", p_bin_width,
                      "histogram bin width (default: Freedman-Diaconis)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return cmd_simulate(kind, dims, sigma_x2, omega, n, seed, !no_standardize,
                                sign_flip_prob, graph_file, out, roles_out, sem_out);
        if (disc->parsed()) {
            dcfg.init_kind = d_init == "random" ? InitKind::Random : InitKind::Pilot;
            dcfg.init_seed = d_seed;
            return cmd_discover(d_data, d_roles, dcfg, d_rule, d_out);
        }
        if (est->parsed()) return cmd_estimate(e_data, e_roles, e_adjust, e_ridge);
        if (bench->parsed()) {
            bcfg.discovery.lambda2_rule =
                b_rule == "quoted" ? Lambda2Rule::Quoted : Lambda2Rule::DependenceStop;
            if (bcfg.graph_kind == "nhs" && !b_nhs_defaults_touched) bcfg.sigma_x2 = {0.25};
            return cmd_benchmark(bcfg, b_config, b_report, b_summary);
        }
        if (plots->parsed()) return cmd_export_plots(p_report, p_out, p_bin_width);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
