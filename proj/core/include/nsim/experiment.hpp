#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "nsim/config.hpp"
#include "nsim/dyngraph.hpp"
#include "nsim/oracle.hpp"
#include "nsim/policies.hpp"

namespace nsim {

struct RunRecord {
    std::uint32_t replica = 0;
    std::string policy;
    std::vector<std::uint32_t> stage_reward;
    std::vector<std::uint64_t> cum_reward;
    std::vector<double> stage_ms;  // wall time per stage
    DecisionLog log;
};

struct ReplicaResult {
    std::uint32_t replica = 0;
    BenchmarkEntry benchmark;
    RegretSeries series;
    std::vector<RunRecord> records;  // one per policy, in config order
};

struct ExperimentResult {
    ExperimentConfig config;
    BenchmarkDoc benchmark;
    std::vector<ReplicaResult> replicas;

    // Full results table, columns
    // `replica,policy,t,stage_reward,cum_reward,benchmark_cum,regret_ratio`,
    // rows sorted by (replica, policy order, t). Undefined ratios are
    // empty fields. Rendering is locale-free, so equal runs give equal
    // bytes.
    std::string to_csv() const;

    // Mean regret ratio at stage t for one policy, across replicas.
    double mean_final_ratio(const std::string& policy, std::uint32_t t) const;
};

Policy* find_policy(std::span<const std::unique_ptr<Policy>>, std::string_view name);

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, std::uint32_t n_nodes,
                                    std::uint32_t seeds_per_stage);

// Resolves the config's graph source (generation is seeded from the
// master seed, so the same config always yields the same graph).
DynamicGraph build_graph(const ExperimentConfig& cfg);

// Per-replica benchmark: greedy seeds (or the exhaustive optimum in exact
// mode) plus a final spread estimate with oracle_final_reps replays.
BenchmarkDoc compute_benchmark(const ExperimentConfig& cfg, const DynamicGraph& graph);

// Runs every (replica, policy) pair. Within a replica all policies face
// the same probability trajectory and the same per-stage cascade coins.
// Replicas and policies run concurrently (see NSIM_THREADS); outputs are
// deterministic for a fixed config and master seed at any thread count.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Writes results.csv, benchmark.json and records.json under dir.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

// Locale-free shortest-round-trip double formatting used by all outputs.
std::string format_double(double v);

}  // namespace nsim
