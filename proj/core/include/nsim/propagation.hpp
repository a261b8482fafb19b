#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nsim/dyngraph.hpp"
#include "nsim/rng.hpp"

namespace nsim {

enum class InfluenceKind { WC, TR, FR };

InfluenceKind parse_influence_kind(std::string_view s);
std::string_view to_string(InfluenceKind k);

struct FrEdgeState {
    double p;  // in [0, 0.1]
    int dir;   // +1 or -1
};

// Per-edge, per-stage influence probabilities.
//
//   WC: 1/indegree(head), recomputed from each snapshot.
//   TR: one of {0.1, 0.01, 0.001} per edge, redrawn independently every
//       stage (stable within a stage).
//   FR: per-edge drift in [0, 0.1] at rate 0.3/horizon, reflecting at the
//       bounds; state starts uniform in [0, 0.1] with a random direction
//       when an edge first appears, and is discarded when it vanishes.
//
// TR draws and FR initial states are keyed on (seed, edge, stage), so two
// models built with the same seed expose identical probability
// trajectories regardless of query order. FR stepping is sequential:
// bind_stage must be called for t = 1, 2, ... with advance_fr between
// consecutive stages.
class InfluenceModel {
public:
    InfluenceModel(InfluenceKind kind, std::uint32_t horizon, std::uint64_t seed);

    InfluenceKind kind() const { return kind_; }
    std::uint32_t horizon() const { return horizon_; }
    double fr_rate() const { return 0.3 / horizon_; }

    // Makes stage t's probabilities available for snap's edges. For FR
    // this drops state of vanished edges and initializes newly appeared
    // ones; for WC/TR any (snap, t) may be bound at any time.
    void bind_stage(const GraphSnapshot& snap, std::uint32_t t);

    // Probabilities aligned with the bound snapshot's edge indices.
    const std::vector<double>& stage_probs() const { return probs_; }

    // Probability of a single edge at stage t (FR requires the bound stage).
    double edge_prob(const GraphSnapshot& snap, std::uint32_t t, NodeId src, NodeId dst) const;

    // Steps every tracked FR edge by +-0.3/horizon with reflection at
    // 0 and 0.1. Errors on WC/TR models.
    void advance_fr();

    std::optional<FrEdgeState> fr_state(NodeId src, NodeId dst) const;
    void set_fr_state(NodeId src, NodeId dst, double p, int dir);

private:
    double fresh_prob(std::uint32_t t, NodeId src, NodeId dst, std::uint32_t indeg) const;

    InfluenceKind kind_;
    std::uint32_t horizon_;
    std::uint64_t seed_;
    std::unordered_map<std::uint64_t, FrEdgeState> fr_;
    std::vector<double> probs_;
    std::uint32_t bound_stage_ = 0;
    bool advanced_since_bind_ = false;
};

// One stage's coupled live-edge realization. Every edge's Bernoulli coin
// is flipped exactly once up front; seeds added afterwards observe their
// marginal spread on that fixed realization, so per-seed marginals sum to
// the total spread exactly.
class StageOutcome {
public:
    StageOutcome(const GraphSnapshot& snap, std::vector<std::uint8_t> live_edges);

    // Realized marginal spread of adding `seed`: newly reached nodes via
    // live-edge forward reachability (the seed counts as activated).
    std::uint32_t add_seed(NodeId seed);

    std::uint32_t total_spread() const { return reached_count_; }

    std::span<const std::uint32_t> per_seed_marginals() const { return marginals_; }
    std::span<const NodeId> seeds() const { return seeds_; }

    bool edge_live(std::uint32_t e) const { return live_[e] != 0; }
    bool node_reached(NodeId n) const { return reached_[n] != 0; }
    std::uint32_t live_edge_count() const;

    const GraphSnapshot& snapshot() const { return *snap_; }

private:
    const GraphSnapshot* snap_;
    std::vector<std::uint8_t> live_;     // per edge
    std::vector<std::uint8_t> reached_;  // per node
    std::vector<NodeId> seeds_;
    std::vector<std::uint32_t> marginals_;
    std::uint32_t reached_count_ = 0;
    std::vector<NodeId> stack_;
};

// Flips one coin per edge of `snap` (in edge-index order) against the
// given probabilities and returns the fixed realization.
StageOutcome sample_stage(const GraphSnapshot& snap, std::span<const double> edge_probs,
                          Rng& rng);

// Same, with probabilities taken from `model` bound to (snap, t).
StageOutcome begin_stage(InfluenceModel& model, const GraphSnapshot& snap, std::uint32_t t,
                         Rng& rng);

}  // namespace nsim
