#include "nsim/experiment.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "nsim/environment.hpp"
#include "nsim/parallel.hpp"

namespace nsim {

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::runtime_error("double formatting failed");
    return std::string(buf, ptr);
}

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, std::uint32_t n_nodes,
                                    std::uint32_t seeds_per_stage) {
    if (spec.kind == "rsb") {
        RsbParams p;
        p.gamma = spec.gamma;
        p.scale_c = spec.scale_c;
        p.seeds_per_stage = seeds_per_stage;
        p.n_nodes = n_nodes;
        return std::make_unique<RsbPolicy>(spec.name, p);
    }
    if (spec.kind == "ucb") {
        UcbParams p;
        p.reward_cap = spec.reward_cap;
        p.exploration_coeff = spec.exploration_coeff;
        p.seeds_per_stage = seeds_per_stage;
        p.n_nodes = n_nodes;
        return std::make_unique<UcbPolicy>(spec.name, p);
    }
    if (spec.kind == "random")
        return std::make_unique<RandomPolicy>(spec.name, n_nodes, seeds_per_stage);
    throw std::invalid_argument("unknown policy kind: " + spec.kind);
}

Policy* find_policy(std::span<const std::unique_ptr<Policy>> policies, std::string_view name) {
    for (const auto& p : policies)
        if (p->name() == name) return p.get();
    return nullptr;
}

DynamicGraph build_graph(const ExperimentConfig& cfg) {
    if (cfg.graph_source == "trace") return load_trace(cfg.trace_path, cfg.horizon, cfg.cycle);
    Rng rng = derive_stream(cfg.master_seed, "graph", 0);
    return generate_er_rewire(cfg.n_nodes, cfg.edge_prob, cfg.rewire_per_stage, cfg.horizon,
                              rng);
}

namespace {

BenchmarkEntry benchmark_replica(const ExperimentConfig& cfg, const DynamicGraph& graph,
                                 std::uint32_t replica) {
    const Environment env(graph, cfg.model, derive_seed(cfg.master_seed, "env", replica));
    const std::uint64_t oracle_seed = derive_seed(cfg.master_seed, "oracle", replica);
    BenchmarkEntry entry;
    entry.replica = replica;
    if (cfg.oracle_mode == "exact") {
        ExhaustiveResult opt = exhaustive_opt(env, cfg.seeds_per_stage, cfg.oracle_final_reps,
                                              oracle_seed, cfg.oracle_enum_cap);
        entry.seeds = std::move(opt.seeds);
        entry.estimate = opt.estimate.mean;
        entry.std_error = opt.estimate.std_error;
        entry.per_stage = std::move(opt.estimate.per_stage);
        return entry;
    }
    OfflineGreedyResult greedy =
        greedy_offline(env, cfg.seeds_per_stage, cfg.oracle_greedy_reps, oracle_seed);
    SpreadEstimate final_est = estimate_overall_spread(
        env, greedy.seeds, cfg.oracle_final_reps,
        derive_seed(cfg.master_seed, "oracle-final", replica));
    entry.seeds = std::move(greedy.seeds);
    entry.estimate = final_est.mean;
    entry.std_error = final_est.std_error;
    entry.per_stage = std::move(final_est.per_stage);
    return entry;
}

class OutcomeHandle final : public StageHandle {
public:
    OutcomeHandle(StageOutcome& out, std::uint32_t t) : out_(&out), t_(t) {}
    std::uint32_t stage() const override { return t_; }
    std::uint32_t add_seed(NodeId seed) override { return out_->add_seed(seed); }

private:
    StageOutcome* out_;
    std::uint32_t t_;
};

RunRecord run_policy(const ExperimentConfig& cfg, const Environment& env,
                     const PolicySpec& spec, std::uint32_t replica) {
    std::unique_ptr<Policy> policy = make_policy(spec, env.n_nodes(), cfg.seeds_per_stage);
    Rng rng = derive_stream(cfg.master_seed, "policy:" + spec.name, replica);
    RunRecord rec;
    rec.replica = replica;
    rec.policy = spec.name;
    std::uint64_t cum = 0;
    for (std::uint32_t t = 1; t <= env.horizon(); ++t) {
        const auto start = std::chrono::steady_clock::now();
        StageOutcome out = env.run_stage(t);
        OutcomeHandle handle(out, t);
        StageSelection sel = policy->play_stage(handle, rng);
        const auto stop = std::chrono::steady_clock::now();
        const std::uint32_t reward = out.total_spread();
        cum += reward;
        rec.stage_reward.push_back(reward);
        rec.cum_reward.push_back(cum);
        rec.stage_ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
        rec.log.stage_seeds.push_back(std::move(sel.seeds));
    }
    return rec;
}

std::vector<double> benchmark_cum_series(const ExperimentConfig& cfg,
                                         const BenchmarkEntry& entry) {
    // Exact mode benchmarks against the guaranteed greedy lower bound
    // (1 - 1/e) * OPT; experiment mode against the greedy estimate itself.
    const double factor =
        cfg.oracle_mode == "exact" ? 1.0 - 1.0 / std::exp(1.0) : 1.0;
    std::vector<double> cum(entry.per_stage.size(), 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < entry.per_stage.size(); ++i) {
        acc += factor * entry.per_stage[i];
        cum[i] = acc;
    }
    return cum;
}

}  // namespace

BenchmarkDoc compute_benchmark(const ExperimentConfig& cfg, const DynamicGraph& graph) {
    BenchmarkDoc doc;
    doc.mode = cfg.oracle_mode;
    doc.repetitions = cfg.oracle_final_reps;
    doc.master_seed = cfg.master_seed;
    doc.replicas.resize(cfg.replicas);
    parallel_for(cfg.replicas, [&](std::size_t r) {
        doc.replicas[r] = benchmark_replica(cfg, graph, static_cast<std::uint32_t>(r));
    });
    return doc;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const DynamicGraph graph = build_graph(cfg);
    if (cfg.seeds_per_stage > graph.n_nodes())
        throw std::invalid_argument("seeds_per_stage exceeds the graph's node count");

    ExperimentResult result;
    result.config = cfg;

    if (!cfg.benchmark_path.empty()) {
        result.benchmark = load_benchmark(cfg.benchmark_path);
        if (result.benchmark.master_seed != cfg.master_seed)
            throw std::runtime_error("benchmark file was computed for master_seed " +
                                     std::to_string(result.benchmark.master_seed));
        if (result.benchmark.mode != cfg.oracle_mode)
            throw std::runtime_error("benchmark file mode `" + result.benchmark.mode +
                                     "` does not match oracle.mode");
        if (result.benchmark.replicas.size() < cfg.replicas)
            throw std::runtime_error("benchmark file covers fewer replicas than configured");
        for (std::uint32_t r = 0; r < cfg.replicas; ++r)
            if (result.benchmark.replicas[r].per_stage.size() != cfg.horizon)
                throw std::runtime_error("benchmark file horizon does not match config");
    } else {
        result.benchmark = compute_benchmark(cfg, graph);
    }

    const std::size_t n_policies = cfg.policies.size();
    std::vector<RunRecord> records(static_cast<std::size_t>(cfg.replicas) * n_policies);
    std::vector<std::unique_ptr<Environment>> envs(cfg.replicas);
    parallel_for(cfg.replicas, [&](std::size_t r) {
        envs[r] = std::make_unique<Environment>(
            graph, cfg.model, derive_seed(cfg.master_seed, "env", r));
    });
    parallel_for(records.size(), [&](std::size_t i) {
        const std::uint32_t replica = static_cast<std::uint32_t>(i / n_policies);
        const PolicySpec& spec = cfg.policies[i % n_policies];
        records[i] = run_policy(cfg, *envs[replica], spec, replica);
    });

    for (std::uint32_t r = 0; r < cfg.replicas; ++r) {
        ReplicaResult rep;
        rep.replica = r;
        rep.benchmark = result.benchmark.replicas[r];
        std::vector<std::string> names;
        std::vector<std::vector<double>> cums;
        for (std::size_t p = 0; p < n_policies; ++p) {
            RunRecord& rec = records[static_cast<std::size_t>(r) * n_policies + p];
            names.push_back(rec.policy);
            cums.emplace_back(rec.cum_reward.begin(), rec.cum_reward.end());
            rep.records.push_back(std::move(rec));
        }
        rep.series = build_regret_series(std::move(names), std::move(cums),
                                         benchmark_cum_series(cfg, rep.benchmark));
        result.replicas.push_back(std::move(rep));
    }
    return result;
}

std::string ExperimentResult::to_csv() const {
    std::string out = "replica,policy,t,stage_reward,cum_reward,benchmark_cum,regret_ratio\n";
    for (const ReplicaResult& rep : replicas) {
        for (std::size_t p = 0; p < rep.records.size(); ++p) {
            const RunRecord& rec = rep.records[p];
            for (std::size_t i = 0; i < rec.stage_reward.size(); ++i) {
                out += std::to_string(rep.replica);
                out += ',';
                out += rec.policy;
                out += ',';
                out += std::to_string(i + 1);
                out += ',';
                out += std::to_string(rec.stage_reward[i]);
                out += ',';
                out += std::to_string(rec.cum_reward[i]);
                out += ',';
                out += format_double(rep.series.benchmark_cum[i]);
                out += ',';
                const double ratio = rep.series.ratio[p][i];
                if (!std::isnan(ratio)) out += format_double(ratio);
                out += '\n';
            }
        }
    }
    return out;
}

double ExperimentResult::mean_final_ratio(const std::string& policy, std::uint32_t t) const {
    double sum = 0.0;
    std::size_t count = 0;
    for (const ReplicaResult& rep : replicas) {
        for (std::size_t p = 0; p < rep.series.policy_names.size(); ++p) {
            if (rep.series.policy_names[p] != policy) continue;
            const double r = rep.series.ratio[p].at(t - 1);
            if (!std::isnan(r)) {
                sum += r;
                ++count;
            }
        }
    }
    if (count == 0) throw std::invalid_argument("no defined ratio for policy " + policy);
    return sum / static_cast<double>(count);
}

void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    {
        std::ofstream csv(dir / "results.csv", std::ios::binary);
        if (!csv) throw std::runtime_error("cannot write " + (dir / "results.csv").string());
        csv << result.to_csv();
    }
    save_benchmark(result.benchmark, dir / "benchmark.json");

    nlohmann::json runs = nlohmann::json::array();
    for (const ReplicaResult& rep : result.replicas) {
        for (const RunRecord& rec : rep.records) {
            nlohmann::json r;
            r["replica"] = rec.replica;
            r["policy"] = rec.policy;
            r["stage_reward"] = rec.stage_reward;
            r["cum_reward"] = rec.cum_reward;
            r["stage_ms"] = rec.stage_ms;
            r["seeds"] = rec.log.stage_seeds;
            runs.push_back(std::move(r));
        }
    }
    std::ofstream rec(dir / "records.json");
    if (!rec) throw std::runtime_error("cannot write " + (dir / "records.json").string());
    rec << runs.dump(2) << '\n';
}

}  // namespace nsim
