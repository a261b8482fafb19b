#include "nsim/dyngraph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace nsim {

GraphSnapshot::GraphSnapshot(std::uint32_t n_nodes, EdgeList edges) : n_nodes_(n_nodes) {
    std::sort(edges.begin(), edges.end());
    offsets_.assign(n_nodes_ + 1, 0);
    targets_.reserve(edges.size());
    sources_.reserve(edges.size());
    indegree_.assign(n_nodes_, 0);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto [src, dst] = edges[i];
        if (src >= n_nodes_ || dst >= n_nodes_)
            throw std::out_of_range("edge endpoint " + std::to_string(std::max(src, dst)) +
                                    " outside node range [0," + std::to_string(n_nodes_) + ")");
        if (src == dst)
            throw std::invalid_argument("self-loop at node " + std::to_string(src));
        if (i > 0 && edges[i] == edges[i - 1])
            throw std::invalid_argument("duplicate edge (" + std::to_string(src) + "," +
                                        std::to_string(dst) + ")");
        ++offsets_[src + 1];
        ++indegree_[dst];
        sources_.push_back(src);
        targets_.push_back(dst);
    }
    for (std::uint32_t n = 0; n < n_nodes_; ++n) offsets_[n + 1] += offsets_[n];
}

std::int64_t GraphSnapshot::edge_index(NodeId src, NodeId dst) const {
    if (src >= n_nodes_ || dst >= n_nodes_) return -1;
    const auto first = targets_.begin() + offsets_[src];
    const auto last = targets_.begin() + offsets_[src + 1];
    const auto it = std::lower_bound(first, last, dst);
    if (it == last || *it != dst) return -1;
    return it - targets_.begin();
}

DynamicGraph::DynamicGraph(std::vector<GraphSnapshot> base, std::uint32_t horizon, bool cycle)
    : base_(std::move(base)), horizon_(horizon), cycle_(cycle) {
    if (base_.empty()) throw std::invalid_argument("dynamic graph needs at least one snapshot");
    if (horizon_ == 0) throw std::invalid_argument("horizon must be at least 1");
    for (const auto& s : base_)
        if (s.n_nodes() != base_.front().n_nodes())
            throw std::invalid_argument("snapshots must share the same node count");
    if (!cycle_ && base_.size() < horizon_)
        throw std::invalid_argument("non-cycling graph has " + std::to_string(base_.size()) +
                                    " snapshots but horizon " + std::to_string(horizon_));
}

const GraphSnapshot& DynamicGraph::snapshot(std::uint32_t t) const {
    if (t < 1 || t > horizon_)
        throw std::out_of_range("stage " + std::to_string(t) + " outside [1," +
                                std::to_string(horizon_) + "]");
    const std::size_t i = cycle_ ? (t - 1) % base_.size() : (t - 1);
    return base_[i];
}

namespace {

struct TraceLine {
    std::uint32_t stage;
    std::uint64_t src, dst;
};

void parse_trace_stream(std::istream& in, const std::string& name, std::vector<TraceLine>& lines,
                        std::int64_t& declared_nodes) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto at = [&] { return name + ":" + std::to_string(lineno); };
        std::size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos) continue;
        if (line[start] == '#') {
            std::istringstream hs(line.substr(start + 1));
            std::string word;
            hs >> word;
            if (word == "nodes") {
                std::int64_t n = -1;
                if (!(hs >> n) || n <= 0)
                    throw std::runtime_error(at() + ": malformed #nodes header");
                if (declared_nodes >= 0 && declared_nodes != n)
                    throw std::runtime_error(at() + ": conflicting #nodes headers");
                declared_nodes = n;
            }
            continue;  // other # lines are comments
        }
        std::istringstream ls(line);
        std::int64_t t = 0, src = -1, dst = -1;
        std::string extra;
        if (!(ls >> t >> src >> dst) || (ls >> extra))
            throw std::runtime_error(at() + ": expected `t src dst`");
        if (t < 1) throw std::runtime_error(at() + ": stage labels are 1-based");
        if (src < 0 || dst < 0) throw std::runtime_error(at() + ": negative node id");
        lines.push_back({static_cast<std::uint32_t>(t), static_cast<std::uint64_t>(src),
                         static_cast<std::uint64_t>(dst)});
    }
}

}  // namespace

DynamicGraph load_trace(const std::filesystem::path& path, std::uint32_t horizon, bool cycle) {
    namespace fs = std::filesystem;
    std::vector<TraceLine> lines;
    std::int64_t declared_nodes = -1;

    std::vector<fs::path> files;
    if (fs::is_directory(path)) {
        for (const auto& entry : fs::directory_iterator(path))
            if (entry.is_regular_file() && entry.path().filename().string().front() != '.')
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        if (files.empty()) throw std::runtime_error("trace directory is empty: " + path.string());
    } else {
        files.push_back(path);
    }
    for (const auto& f : files) {
        std::ifstream in(f);
        if (!in) throw std::runtime_error("cannot open trace file: " + f.string());
        parse_trace_stream(in, f.filename().string(), lines, declared_nodes);
    }
    if (lines.empty()) throw std::runtime_error("trace contains no edges: " + path.string());

    std::uint32_t n_nodes = 0;
    if (declared_nodes >= 0) {
        n_nodes = static_cast<std::uint32_t>(declared_nodes);
        for (const auto& l : lines)
            if (l.src >= n_nodes || l.dst >= n_nodes)
                throw std::out_of_range("node id " + std::to_string(std::max(l.src, l.dst)) +
                                        " >= declared node count " + std::to_string(n_nodes));
    } else {
        // No header: remap arbitrary ids to a dense [0, N) range, mapping
        // recorded in a sidecar so external ids stay recoverable.
        std::map<std::uint64_t, NodeId> remap;
        for (const auto& l : lines) {
            remap.emplace(l.src, 0);
            remap.emplace(l.dst, 0);
        }
        NodeId next = 0;
        for (auto& [orig, dense] : remap) dense = next++;
        n_nodes = next;
        for (auto& l : lines) {
            l.src = remap.at(l.src);
            l.dst = remap.at(l.dst);
        }
        fs::path sidecar = path;
        sidecar += ".nodemap";
        std::ofstream out(sidecar);
        if (out)
            for (const auto& [orig, dense] : remap) out << orig << ' ' << dense << '\n';
    }

    std::map<std::uint32_t, EdgeList> by_stage;
    for (const auto& l : lines)
        by_stage[l.stage].emplace_back(static_cast<NodeId>(l.src), static_cast<NodeId>(l.dst));

    std::vector<GraphSnapshot> snaps;
    snaps.reserve(by_stage.size());
    for (auto& [stage, edges] : by_stage) snaps.emplace_back(n_nodes, std::move(edges));
    return DynamicGraph(std::move(snaps), horizon, cycle);
}

namespace {

// Fenwick tree over integer node weights; supports prefix-sum sampling.
class WeightTree {
public:
    explicit WeightTree(const std::vector<std::uint32_t>& weights)
        : n_(weights.size()), tree_(n_ + 1, 0), total_(0) {
        for (std::size_t i = 0; i < n_; ++i) {
            tree_[i + 1] += weights[i];
            const std::size_t parent = (i + 1) + ((i + 1) & -(i + 1));
            if (parent <= n_) tree_[parent] += tree_[i + 1];
            total_ += weights[i];
        }
    }

    void add(std::size_t i, std::int64_t delta) {
        total_ += delta;
        for (std::size_t j = i + 1; j <= n_; j += j & -j) tree_[j] += delta;
    }

    std::uint64_t total() const { return total_; }

    // Largest index whose prefix sum is <= x; x must be in [0, total).
    std::size_t sample(std::uint64_t x) const {
        std::size_t pos = 0;
        std::size_t mask = std::bit_floor(n_);
        for (; mask != 0; mask >>= 1) {
            const std::size_t next = pos + mask;
            if (next <= n_ && static_cast<std::uint64_t>(tree_[next]) <= x) {
                pos = next;
                x -= tree_[next];
            }
        }
        return pos;  // pos in [0, n)
    }

private:
    std::size_t n_;
    std::vector<std::int64_t> tree_;
    std::uint64_t total_;
};

}  // namespace

DynamicGraph generate_er_rewire(std::uint32_t n_nodes, double edge_prob,
                                std::uint32_t rewire_per_stage, std::uint32_t horizon,
                                Rng& rng) {
    if (n_nodes < 2) throw std::invalid_argument("generator needs at least 2 nodes");
    if (edge_prob < 0.0 || edge_prob > 1.0)
        throw std::invalid_argument("edge probability must be in [0,1]");
    if (horizon == 0) throw std::invalid_argument("horizon must be at least 1");

    // Initial Erdos-Renyi draw over the N*(N-1) ordered pairs, with
    // geometric skipping so sparse graphs cost O(E) rather than O(N^2).
    EdgeList edges;
    const std::uint64_t n_pairs = static_cast<std::uint64_t>(n_nodes) * (n_nodes - 1);
    const auto pair_to_edge = [n_nodes](std::uint64_t idx) {
        const NodeId src = static_cast<NodeId>(idx / (n_nodes - 1));
        const std::uint32_t r = static_cast<std::uint32_t>(idx % (n_nodes - 1));
        const NodeId dst = r + (r >= src ? 1 : 0);
        return std::make_pair(src, dst);
    };
    if (edge_prob >= 1.0) {
        edges.reserve(n_pairs);
        for (std::uint64_t i = 0; i < n_pairs; ++i) edges.push_back(pair_to_edge(i));
    } else if (edge_prob > 0.0) {
        const double log1mp = std::log1p(-edge_prob);
        std::uint64_t idx = 0;
        for (;;) {
            const double u = rng.next_double();
            const double skip = std::floor(std::log1p(-u) / log1mp);
            if (skip >= static_cast<double>(n_pairs)) break;
            idx += static_cast<std::uint64_t>(skip);
            if (idx >= n_pairs) break;
            edges.push_back(pair_to_edge(idx));
            ++idx;
        }
    }

    if (rewire_per_stage > edges.size())
        throw std::invalid_argument("rewire count " + std::to_string(rewire_per_stage) +
                                    " exceeds edge count " + std::to_string(edges.size()));

    std::vector<std::uint32_t> indegree(n_nodes, 0);
    std::vector<std::unordered_set<NodeId>> out_sets(n_nodes);
    for (const auto& [src, dst] : edges) {
        ++indegree[dst];
        out_sets[src].insert(dst);
    }
    // preferential weight indegree+1 keeps zero-indegree nodes reachable
    std::vector<std::uint32_t> weights(n_nodes);
    for (std::uint32_t i = 0; i < n_nodes; ++i) weights[i] = indegree[i] + 1;
    WeightTree tree(weights);

    std::vector<GraphSnapshot> snaps;
    snaps.reserve(horizon);
    snaps.emplace_back(n_nodes, edges);

    std::vector<std::uint32_t> perm(edges.size());
    for (std::uint32_t t = 2; t <= horizon; ++t) {
        // pick rewire_per_stage distinct edges uniformly (partial Fisher-Yates)
        for (std::uint32_t i = 0; i < perm.size(); ++i) perm[i] = i;
        for (std::uint32_t i = 0; i < rewire_per_stage; ++i) {
            const std::uint64_t j = i + rng.next_below(perm.size() - i);
            std::swap(perm[i], perm[j]);
            auto& [src, dst] = edges[perm[i]];
            NodeId head = dst;
            int attempts = 0;
            do {
                if (++attempts > 1 << 20)
                    throw std::runtime_error("rewiring stalled: node " + std::to_string(src) +
                                             " has no admissible new head");
                head = static_cast<NodeId>(tree.sample(rng.next_below(tree.total())));
            } while (head == src || out_sets[src].contains(head));
            out_sets[src].erase(dst);
            out_sets[src].insert(head);
            tree.add(dst, -1);
            tree.add(head, +1);
            --indegree[dst];
            ++indegree[head];
            dst = head;
        }
        snaps.emplace_back(n_nodes, edges);
    }
    return DynamicGraph(std::move(snaps), horizon, /*cycle=*/false);
}

void write_trace(const DynamicGraph& g, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trace file: " + path.string());
    out << "#nodes " << g.n_nodes() << '\n';
    for (std::uint32_t s = 0; s < g.n_snapshots(); ++s) {
        const GraphSnapshot& snap = g.base_snapshot(s);
        for (std::uint32_t e = 0; e < snap.n_edges(); ++e)
            out << (s + 1) << ' ' << snap.edge_source(e) << ' ' << snap.edge_target(e) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace nsim
