#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace nsim {

struct ReportRow {
    std::string policy;
    std::uint32_t t = 0;
    double mean_cum_reward = 0.0;
    double mean_benchmark_cum = 0.0;
    double mean_ratio = 0.0;  // NaN when undefined at every replica
    std::uint32_t replicas = 0;
};

// Aggregates a results.csv across replicas at `checkpoints` evenly spaced
// stages (0 = every stage). One row per (policy, checkpoint).
std::vector<ReportRow> summarize_csv(const std::filesystem::path& csv_path,
                                     std::uint32_t checkpoints = 10);

std::string render_table(const std::vector<ReportRow>& rows);

// Minimal static line chart of the mean regret-ratio curves, one polyline
// per policy.
void write_ratio_svg(const std::filesystem::path& csv_path,
                     const std::filesystem::path& svg_path);

}  // namespace nsim
