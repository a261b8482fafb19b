#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "nsim/environment.hpp"

namespace nsim {

struct SpreadEstimate {
    double mean = 0.0;       // estimated overall spread F(S)
    double std_error = 0.0;  // sample standard error over replays
    std::uint32_t repetitions = 0;
    std::vector<double> per_stage;  // mean spread per stage (prefix sums give F up to t)
};

// Monte-Carlo estimate of F(S) = sum_t E[f_t(S)] over `repetitions` full
// horizon replays. Each replay restarts the probability trajectory from
// the environment's fixed tables and draws fresh live-edge coins.
SpreadEstimate estimate_overall_spread(const Environment& env, std::span<const NodeId> seeds,
                                       std::uint32_t repetitions, std::uint64_t seed);

struct OfflineGreedyResult {
    std::vector<NodeId> seeds;  // selection order
    SpreadEstimate f_estimate;
    std::vector<double> per_position_gain;
};

// Offline greedy benchmark: position k takes the node with the largest
// estimated marginal F-gain, ties broken by node index. Marginals are
// estimated on one shared set of live-edge realizations (common random
// numbers), so lazy (priority-queue) evaluation returns exactly the naive
// argmax sequence.
OfflineGreedyResult greedy_offline(const Environment& env, std::uint32_t k,
                                   std::uint32_t repetitions, std::uint64_t seed,
                                   bool lazy = true);

struct ExhaustiveResult {
    std::vector<NodeId> seeds;
    SpreadEstimate estimate;
};

// Exact optimum by enumerating every K-subset under common random
// numbers. Refuses instances with more than `enumeration_cap` subsets.
ExhaustiveResult exhaustive_opt(const Environment& env, std::uint32_t k,
                                std::uint32_t repetitions, std::uint64_t seed,
                                std::uint64_t enumeration_cap = 100000);

// Greedy weak regret. Experiment mode (use_factor=false) measures the gap
// to the greedy benchmark estimate itself; exact mode (use_factor=true)
// measures the gap to (1 - 1/e) * OPT.
double greedy_weak_regret(const SpreadEstimate& benchmark, double achieved_total,
                          bool use_factor);

// Ordered seed choices of one policy run, one entry per stage.
struct DecisionLog {
    std::vector<std::vector<NodeId>> stage_seeds;
};

// Replay-estimated expected overall reward sum_t E[f_t(S_t)] of a logged
// run, expectations over fresh cascade coins.
SpreadEstimate estimate_log_reward(const Environment& env, const DecisionLog& log,
                                   std::uint32_t repetitions, std::uint64_t seed);

struct PositionRegretEstimate {
    double regret = 0.0;     // best fixed kth seed minus the policy, expected
    double std_error = 0.0;  // of the paired difference estimator
    NodeId best_node = 0;
    double best_total = 0.0;
    double achieved_total = 0.0;
};

// Position weak regret for one seed position: replays every stage's
// logged prefix with fresh coins, estimates each candidate's expected
// marginal sum, and compares the best candidate against the policy's own
// choices. Intended for small, replayable instances.
PositionRegretEstimate position_weak_regret(const Environment& env, const DecisionLog& log,
                                            std::uint32_t position, std::uint32_t repetitions,
                                            std::uint64_t seed);

// ratio(t) = (benchmark(t) - achieved(t)) / benchmark(t); NaN marks
// prefixes with non-positive benchmark (undefined points).
std::vector<double> regret_ratio_series(std::span<const double> benchmark_cum,
                                        std::span<const double> achieved_cum);

// Per-stage cumulative rewards for each policy plus the offline benchmark
// prefix values and the derived regret ratios.
struct RegretSeries {
    std::vector<std::string> policy_names;
    std::vector<std::vector<double>> cum_reward;  // [policy][t-1]
    std::vector<double> benchmark_cum;            // [t-1]
    std::vector<std::vector<double>> ratio;       // [policy][t-1], NaN where undefined
};

RegretSeries build_regret_series(std::vector<std::string> policy_names,
                                 std::vector<std::vector<double>> cum_reward,
                                 std::vector<double> benchmark_cum);

// Persisted benchmark document (JSON), reusable across harness runs.
struct BenchmarkEntry {
    std::uint32_t replica = 0;
    std::vector<NodeId> seeds;
    double estimate = 0.0;
    double std_error = 0.0;
    std::vector<double> per_stage;
};

struct BenchmarkDoc {
    std::string mode = "experiment";  // "experiment" or "exact"
    std::uint32_t repetitions = 0;
    std::uint64_t master_seed = 0;
    std::vector<BenchmarkEntry> replicas;
};

void save_benchmark(const BenchmarkDoc& doc, const std::filesystem::path& path);
BenchmarkDoc load_benchmark(const std::filesystem::path& path);

}  // namespace nsim
