#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nsim/dyngraph.hpp"
#include "nsim/propagation.hpp"
#include "nsim/rng.hpp"

namespace nsim {

// One replica's world: a dynamic graph plus the realized influence
// probability trajectory for every stage. The trajectory is fixed at
// construction (derived from env_seed), so every policy in a replica and
// every oracle replay sees the same probabilities; only the cascade coins
// differ. run_stage uses per-stage coins derived from env_seed (identical
// for every policy: the paired comparison), replay_stage takes coins from
// a caller-owned stream (fresh randomness for spread estimation).
class Environment {
public:
    Environment(const DynamicGraph& graph, InfluenceKind kind, std::uint64_t env_seed);

    // Explicit probability tables (one vector per stage, aligned with each
    // snapshot's edge indices). Used for deterministic test instances and
    // replayed probability traces.
    Environment(const DynamicGraph& graph, std::vector<std::vector<double>> stage_probs,
                std::uint64_t env_seed);

    std::uint32_t horizon() const { return graph_->horizon(); }
    std::uint32_t n_nodes() const { return graph_->n_nodes(); }
    const DynamicGraph& graph() const { return *graph_; }
    std::optional<InfluenceKind> kind() const { return kind_; }
    std::uint64_t env_seed() const { return env_seed_; }

    const GraphSnapshot& snapshot(std::uint32_t t) const { return graph_->snapshot(t); }
    const std::vector<double>& stage_probs(std::uint32_t t) const;

    // The stage realization every policy of this replica faces.
    StageOutcome run_stage(std::uint32_t t) const;

    // A fresh realization of stage t with coins from `coin_rng`.
    StageOutcome replay_stage(std::uint32_t t, Rng& coin_rng) const;

private:
    const DynamicGraph* graph_;
    std::optional<InfluenceKind> kind_;
    std::uint64_t env_seed_;
    std::vector<std::vector<double>> probs_;  // [t-1][edge]
};

}  // namespace nsim
