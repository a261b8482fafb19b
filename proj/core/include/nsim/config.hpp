#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nsim/propagation.hpp"

namespace nsim {

struct PolicySpec {
    std::string name;
    std::string kind;  // "rsb", "ucb", "random"
    double gamma = 0.2;
    double scale_c = 1.0;
    double reward_cap = 120.0;
    double exploration_coeff = std::sqrt(1.5);
};

// Flat key-value experiment description; see docs/config.md for the
// schema. Unknown keys are rejected.
struct ExperimentConfig {
    // graph source
    std::string graph_source = "generate";  // "generate" | "trace"
    std::filesystem::path trace_path;
    bool cycle = true;
    std::uint32_t n_nodes = 0;
    double edge_prob = 0.0;
    std::uint32_t rewire_per_stage = 0;

    InfluenceKind model = InfluenceKind::WC;
    std::uint32_t horizon = 100;
    std::uint32_t seeds_per_stage = 5;
    std::uint32_t replicas = 1;
    std::uint64_t master_seed = 1;

    std::vector<PolicySpec> policies;

    std::string oracle_mode = "experiment";  // "experiment" | "exact"
    std::uint32_t oracle_greedy_reps = 200;
    std::uint32_t oracle_final_reps = 2000;
    std::uint64_t oracle_enum_cap = 100000;
    std::filesystem::path benchmark_path;  // load instead of computing, when set

    std::filesystem::path output_dir = ".";

    void validate() const;
};

ExperimentConfig parse_config_text(std::string_view text, std::string_view origin);
ExperimentConfig parse_config_file(const std::filesystem::path& path);

}  // namespace nsim
