#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nsim/rng.hpp"

namespace nsim {

using NodeId = std::uint32_t;

using EdgeList = std::vector<std::pair<NodeId, NodeId>>;

// One directed graph snapshot in CSR form. Edges are stored in canonical
// order (ascending source, then ascending target); an edge's position in
// that order is its edge index, which aligns all per-edge data elsewhere
// (probability tables, live-edge flags).
class GraphSnapshot {
public:
    GraphSnapshot() = default;

    // Validates: ids in [0, n_nodes), no self-loops, no duplicate edges.
    GraphSnapshot(std::uint32_t n_nodes, EdgeList edges);

    std::uint32_t n_nodes() const { return n_nodes_; }
    std::uint32_t n_edges() const { return static_cast<std::uint32_t>(targets_.size()); }

    std::span<const NodeId> out_neighbors(NodeId n) const {
        return {targets_.data() + offsets_[n], targets_.data() + offsets_[n + 1]};
    }
    std::uint32_t out_begin(NodeId n) const { return offsets_[n]; }
    std::uint32_t out_end(NodeId n) const { return offsets_[n + 1]; }

    NodeId edge_source(std::uint32_t e) const { return sources_[e]; }
    NodeId edge_target(std::uint32_t e) const { return targets_[e]; }

    std::uint32_t indegree(NodeId n) const { return indegree_[n]; }

    bool has_edge(NodeId src, NodeId dst) const { return edge_index(src, dst) >= 0; }

    // Edge index of (src, dst), or -1 if absent.
    std::int64_t edge_index(NodeId src, NodeId dst) const;

private:
    std::uint32_t n_nodes_ = 0;
    std::vector<std::uint32_t> offsets_;  // n_nodes + 1
    std::vector<NodeId> targets_;
    std::vector<NodeId> sources_;
    std::vector<std::uint32_t> indegree_;
};

// Ordered sequence of snapshots forming a dynamic social network.
// Stages are 1-based. With cycle=true the base sequence of length L
// repeats: snapshot(t) = base[(t-1) mod L]; otherwise L must cover the
// whole horizon.
class DynamicGraph {
public:
    DynamicGraph(std::vector<GraphSnapshot> base, std::uint32_t horizon, bool cycle);

    const GraphSnapshot& snapshot(std::uint32_t t) const;

    // Direct 0-based access to the base sequence (ignores cycling).
    const GraphSnapshot& base_snapshot(std::uint32_t i) const { return base_.at(i); }

    std::uint32_t horizon() const { return horizon_; }
    std::uint32_t n_snapshots() const { return static_cast<std::uint32_t>(base_.size()); }
    std::uint32_t n_nodes() const { return base_.front().n_nodes(); }
    bool cycle() const { return cycle_; }

private:
    std::vector<GraphSnapshot> base_;
    std::uint32_t horizon_;
    bool cycle_;
};

// Loads a snapshot edge-list trace: lines `t src dst` with t a 1-based
// stage label, plus an optional `#nodes N` header. `path` may be a single
// file or a directory of such files (read in lexicographic name order).
// Without a header, node ids are remapped to a dense [0, N) range and the
// mapping is written to a `<path>.nodemap` sidecar.
DynamicGraph load_trace(const std::filesystem::path& path, std::uint32_t horizon, bool cycle);

// Synthetic dynamic graph: stage 1 is a directed Erdos-Renyi draw; each
// later stage reassigns the heads of `rewire_per_stage` uniformly chosen
// edges, the new head drawn with probability proportional to indegree+1
// (self-loops and duplicate edges are resampled). Edge count is constant
// across stages.
DynamicGraph generate_er_rewire(std::uint32_t n_nodes, double edge_prob,
                                std::uint32_t rewire_per_stage, std::uint32_t horizon,
                                Rng& rng);

// Writes every base snapshot of `g` in the trace format (with a
// `#nodes N` header), stage labels 1..L.
void write_trace(const DynamicGraph& g, const std::filesystem::path& path);

}  // namespace nsim
