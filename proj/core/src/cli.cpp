#include "nsim/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>

#include <CLI11.hpp>

#include "nsim/config.hpp"
#include "nsim/dyngraph.hpp"
#include "nsim/experiment.hpp"
#include "nsim/report.hpp"

namespace nsim {

namespace {

struct CommonOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> policies;
    std::optional<double> gamma;
    std::optional<std::uint32_t> replicas;
};

ExperimentConfig load_config(const std::string& path, const CommonOverrides& ov) {
    ExperimentConfig cfg = parse_config_file(path);
    if (ov.seed) cfg.master_seed = *ov.seed;
    if (ov.out_dir) cfg.output_dir = *ov.out_dir;
    if (ov.replicas) cfg.replicas = *ov.replicas;
    if (ov.policies) {
        // restrict to a comma-separated subset of the configured policies
        std::vector<PolicySpec> keep;
        std::string cur;
        const auto flush = [&] {
            if (cur.empty()) return;
            for (const PolicySpec& p : cfg.policies)
                if (p.name == cur) {
                    keep.push_back(p);
                    cur.clear();
                    return;
                }
            throw std::runtime_error("--policies names unknown policy `" + cur + "`");
        };
        for (const char c : *ov.policies + ",") {
            if (c == ',')
                flush();
            else if (c != ' ')
                cur += c;
        }
        cfg.policies = std::move(keep);
    }
    if (ov.gamma) {
        for (PolicySpec& p : cfg.policies)
            if (p.kind == "rsb") p.gamma = *ov.gamma;
    }
    cfg.validate();
    return cfg;
}

void add_common(CLI::App* cmd, std::string& config_path, CommonOverrides& ov) {
    cmd->add_option("--config", config_path, "experiment config file")->required();
    cmd->add_option("--seed", ov.seed, "override master_seed");
    cmd->add_option("--out", ov.out_dir, "override output.dir");
    cmd->add_option("--policies", ov.policies, "comma-separated subset of configured policies");
    cmd->add_option("--gamma", ov.gamma, "override gamma of every rsb policy");
    cmd->add_option("--replicas", ov.replicas, "override replica count");
}

}  // namespace

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"online influence maximization simulator"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "write a synthetic dynamic-graph trace");
    std::uint32_t gen_nodes = 5000;
    double gen_edge_prob = 0.005;
    std::uint32_t gen_rewire = 1000;
    std::uint32_t gen_horizon = 100;
    std::uint64_t gen_seed = 1;
    std::string gen_out = "trace.txt";
    gen->add_option("--nodes", gen_nodes, "node count")->check(CLI::Range(2u, 10000000u));
    gen->add_option("--edge-prob", gen_edge_prob, "directed edge probability")
        ->check(CLI::Range(0.0, 1.0));
    gen->add_option("--rewire", gen_rewire, "head reassignments per stage");
    gen->add_option("--horizon", gen_horizon, "number of stages")->check(CLI::Range(1u, 1000000u));
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--out", gen_out, "trace output path");

    // run
    auto* run = app.add_subcommand("run", "run an experiment config");
    std::string run_config;
    CommonOverrides run_ov;
    add_common(run, run_config, run_ov);

    // oracle
    auto* oracle = app.add_subcommand("oracle", "compute and persist the offline benchmark");
    std::string oracle_config;
    CommonOverrides oracle_ov;
    std::string oracle_out_file;
    add_common(oracle, oracle_config, oracle_ov);
    oracle->add_option("--file", oracle_out_file, "benchmark JSON path (default <out>/benchmark.json)");

    // report
    auto* report = app.add_subcommand("report", "summarize a results.csv");
    std::string report_csv;
    std::uint32_t report_points = 10;
    std::string report_plot;
    report->add_option("--csv", report_csv, "results.csv path")->required();
    report->add_option("--points", report_points, "checkpoint count (0 = every stage)");
    report->add_option("--plot", report_plot, "write an SVG ratio chart to this path");

    try {
        std::reverse(args.begin(), args.end());  // CLI11 vector parse order
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            out << app.help();
            return 0;
        }
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (gen->parsed()) {
            Rng rng = derive_stream(gen_seed, "graph", 0);
            const DynamicGraph g =
                generate_er_rewire(gen_nodes, gen_edge_prob, gen_rewire, gen_horizon, rng);
            write_trace(g, gen_out);
            out << "wrote " << g.n_snapshots() << " stages, "
                << g.base_snapshot(0).n_edges() << " edges each, to " << gen_out << '\n';
        } else if (run->parsed()) {
            const ExperimentConfig cfg = load_config(run_config, run_ov);
            const ExperimentResult result = run_experiment(cfg);
            write_outputs(result, cfg.output_dir);
            out << "wrote results for " << cfg.replicas << " replicas x "
                << cfg.policies.size() << " policies to " << cfg.output_dir.string() << '\n';
        } else if (oracle->parsed()) {
            const ExperimentConfig cfg = load_config(oracle_config, oracle_ov);
            const DynamicGraph graph = build_graph(cfg);
            const BenchmarkDoc doc = compute_benchmark(cfg, graph);
            const std::filesystem::path path = oracle_out_file.empty()
                                                   ? cfg.output_dir / "benchmark.json"
                                                   : std::filesystem::path(oracle_out_file);
            if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
            save_benchmark(doc, path);
            out << "wrote benchmark (" << doc.mode << " mode, " << doc.replicas.size()
                << " replicas) to " << path.string() << '\n';
        } else if (report->parsed()) {
            const auto rows = summarize_csv(report_csv, report_points);
            out << render_table(rows);
            if (!report_plot.empty()) {
                write_ratio_svg(report_csv, report_plot);
                out << "wrote chart to " << report_plot << '\n';
            }
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace nsim
