#include "nsim/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>

#include <json.hpp>

namespace nsim {

namespace {

double sample_std_error(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 2) return 0.0;
    double mean = 0.0;
    for (const double v : values) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (const double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / (static_cast<double>(n) * (n - 1)));
}

// One live-edge draw of one (replay, stage) pair, plus the set of nodes
// covered by the greedy seeds committed so far. Covered sets are closed
// under live-edge reachability, so marginal BFS can prune at any covered
// node without missing new ones. Live flags are bit-packed to keep full
// passes over the store memory-cheap.
struct LiveSample {
    const GraphSnapshot* snap;
    std::vector<std::uint64_t> live;     // per edge, bit-packed
    std::vector<std::uint64_t> covered;  // per node, bit-packed
    std::uint32_t covered_count = 0;

    bool edge_live(std::uint32_t e) const { return (live[e >> 6] >> (e & 63)) & 1; }
    bool node_covered(NodeId n) const { return (covered[n >> 6] >> (n & 63)) & 1; }
    void cover(NodeId n) { covered[n >> 6] |= std::uint64_t{1} << (n & 63); }
};

// R x T live realizations with shared coverage state; every marginal and
// set evaluation runs against the same coins (common random numbers).
// Candidate evaluations are batched per pass over the samples: one pass
// prices many candidates, which keeps greedy selection bandwidth-bound on
// the sample count rather than on candidates * samples.
class SampleStore {
public:
    SampleStore(const Environment& env, std::uint32_t repetitions, std::uint64_t seed,
                std::string_view tag)
        : horizon_(env.horizon()), repetitions_(repetitions) {
        if (repetitions == 0) throw std::invalid_argument("repetitions must be >= 1");
        samples_.reserve(static_cast<std::size_t>(repetitions) * horizon_);
        for (std::uint32_t r = 0; r < repetitions; ++r) {
            Rng rng = derive_stream(seed, tag, r);
            for (std::uint32_t t = 1; t <= horizon_; ++t) {
                const GraphSnapshot& snap = env.snapshot(t);
                const std::vector<double>& probs = env.stage_probs(t);
                LiveSample s;
                s.snap = &snap;
                s.live.assign((snap.n_edges() + 63) / 64, 0);
                for (std::uint32_t e = 0; e < snap.n_edges(); ++e)
                    if (rng.bernoulli(probs[e])) s.live[e >> 6] |= std::uint64_t{1} << (e & 63);
                s.covered.assign((snap.n_nodes() + 63) / 64, 0);
                samples_.push_back(std::move(s));
            }
        }
        n_nodes_ = env.n_nodes();
        words_ = (n_nodes_ + 63) / 64;
        scratch_.assign(n_nodes_, 0);
        epoch_ = 0;
    }

    std::uint32_t repetitions() const { return repetitions_; }
    std::uint32_t horizon() const { return horizon_; }

    // Marginal-gain sums of several candidates against the committed
    // set, in one pass over the samples. Wide batches use per-sample SCC
    // condensation with bitset reach accumulation (prices every node in
    // near-linear time); narrow batches use per-candidate pruned BFS.
    // Both give identical values: covered sets are reachability-closed,
    // so gain(v) = |reach(v) \ covered| either way.
    std::vector<double> marginal_sums(std::span<const NodeId> candidates) {
        std::vector<double> sums(candidates.size(), 0.0);
        if (candidates.size() >= 24) {
            std::vector<std::uint32_t> reach_count(n_nodes_);
            for (LiveSample& s : samples_) {
                all_reach_counts(s, reach_count);
                for (std::size_t i = 0; i < candidates.size(); ++i)
                    sums[i] += reach_count[candidates[i]];
            }
        } else {
            for (LiveSample& s : samples_)
                for (std::size_t i = 0; i < candidates.size(); ++i)
                    sums[i] += gain(s, candidates[i]);
        }
        return sums;
    }

    double marginal_sum(NodeId v) { return marginal_sums(std::vector<NodeId>{v})[0]; }

    // Adds `v` to the committed set on every sample.
    void commit(NodeId v) {
        for (LiveSample& s : samples_) {
            if (s.node_covered(v)) continue;
            stack_.clear();
            s.cover(v);
            ++s.covered_count;
            stack_.push_back(v);
            expand_covered(s);
        }
    }

    double committed_total() const {
        double total = 0.0;
        for (const LiveSample& s : samples_) total += s.covered_count;
        return total;
    }

    std::vector<double> per_replay_committed_totals() const {
        std::vector<double> totals(repetitions_, 0.0);
        for (std::size_t i = 0; i < samples_.size(); ++i)
            totals[i / horizon_] += samples_[i].covered_count;
        return totals;
    }

    // Mean committed spread per stage across replays.
    std::vector<double> per_stage_committed_means() const {
        std::vector<double> means(horizon_, 0.0);
        for (std::size_t i = 0; i < samples_.size(); ++i)
            means[i % horizon_] += samples_[i].covered_count;
        for (double& m : means) m /= static_cast<double>(repetitions_);
        return means;
    }

    // Spread of an arbitrary seed set, ignoring the committed marks.
    double set_spread_sum(std::span<const NodeId> seeds) {
        double total = 0.0;
        for (LiveSample& s : samples_) total += set_spread(s, seeds);
        return total;
    }

    std::vector<double> per_replay_set_totals(std::span<const NodeId> seeds) {
        std::vector<double> totals(repetitions_, 0.0);
        for (std::size_t i = 0; i < samples_.size(); ++i)
            totals[i / horizon_] += set_spread(samples_[i], seeds);
        return totals;
    }

    std::vector<double> per_stage_set_means(std::span<const NodeId> seeds) {
        std::vector<double> means(horizon_, 0.0);
        for (std::size_t i = 0; i < samples_.size(); ++i)
            means[i % horizon_] += set_spread(samples_[i], seeds);
        for (double& m : means) m /= static_cast<double>(repetitions_);
        return means;
    }

private:
    // Nodes newly reachable from v through non-covered nodes.
    std::uint32_t gain(LiveSample& s, NodeId v) {
        if (s.node_covered(v)) return 0;
        ++epoch_;
        std::uint32_t count = 1;
        scratch_[v] = epoch_;
        stack_.clear();
        stack_.push_back(v);
        while (!stack_.empty()) {
            const NodeId u = stack_.back();
            stack_.pop_back();
            const std::uint32_t end = s.snap->out_end(u);
            for (std::uint32_t e = s.snap->out_begin(u); e < end; ++e) {
                const NodeId w = s.snap->edge_target(e);
                if (s.edge_live(e) && !s.node_covered(w) && scratch_[w] != epoch_) {
                    scratch_[w] = epoch_;
                    ++count;
                    stack_.push_back(w);
                }
            }
        }
        return count;
    }

    void expand_covered(LiveSample& s) {
        while (!stack_.empty()) {
            const NodeId u = stack_.back();
            stack_.pop_back();
            const std::uint32_t end = s.snap->out_end(u);
            for (std::uint32_t e = s.snap->out_begin(u); e < end; ++e) {
                const NodeId w = s.snap->edge_target(e);
                if (s.edge_live(e) && !s.node_covered(w)) {
                    s.cover(w);
                    ++s.covered_count;
                    stack_.push_back(w);
                }
            }
        }
    }

    // Fills reach_count[v] = |reach(v) \ covered| for every node of one
    // sample: Tarjan SCC over the live subgraph, then reach bitsets
    // accumulated in completion order (which is reverse topological order
    // of the condensation, so successors are always ready).
    void all_reach_counts(LiveSample& s, std::vector<std::uint32_t>& reach_count) {
        const GraphSnapshot& snap = *s.snap;
        scc_index_.assign(n_nodes_, 0);
        scc_low_.resize(n_nodes_);
        scc_comp_.assign(n_nodes_, -1);
        scc_onstack_.assign(n_nodes_, 0);
        scc_stack_.clear();
        scc_frames_.clear();
        comp_members_.clear();
        comp_offsets_.assign(1, 0);
        std::uint32_t next_index = 1;

        for (NodeId root = 0; root < n_nodes_; ++root) {
            if (scc_index_[root] != 0) continue;
            scc_frames_.push_back({root, snap.out_begin(root)});
            scc_index_[root] = scc_low_[root] = next_index++;
            scc_onstack_[root] = 1;
            scc_stack_.push_back(root);
            while (!scc_frames_.empty()) {
                auto& [u, e] = scc_frames_.back();
                const std::uint32_t end = snap.out_end(u);
                bool descended = false;
                while (e < end) {
                    const std::uint32_t cur = e++;
                    if (!s.edge_live(cur)) continue;
                    const NodeId w = snap.edge_target(cur);
                    if (scc_index_[w] == 0) {
                        scc_frames_.push_back({w, snap.out_begin(w)});
                        scc_index_[w] = scc_low_[w] = next_index++;
                        scc_onstack_[w] = 1;
                        scc_stack_.push_back(w);
                        descended = true;
                        break;
                    }
                    if (scc_onstack_[w]) scc_low_[u] = std::min(scc_low_[u], scc_index_[w]);
                }
                if (descended) continue;
                if (scc_low_[u] == scc_index_[u]) {
                    const std::int32_t comp = static_cast<std::int32_t>(comp_offsets_.size()) - 1;
                    for (;;) {
                        const NodeId w = scc_stack_.back();
                        scc_stack_.pop_back();
                        scc_onstack_[w] = 0;
                        scc_comp_[w] = comp;
                        comp_members_.push_back(w);
                        if (w == u) break;
                    }
                    comp_offsets_.push_back(static_cast<std::uint32_t>(comp_members_.size()));
                }
                const NodeId done = u;
                scc_frames_.pop_back();
                if (!scc_frames_.empty()) {
                    const NodeId parent = scc_frames_.back().first;
                    scc_low_[parent] = std::min(scc_low_[parent], scc_low_[done]);
                }
            }
        }

        const std::size_t n_comps = comp_offsets_.size() - 1;
        comp_reach_.assign(n_comps * words_, 0);
        for (std::size_t c = 0; c < n_comps; ++c) {
            std::uint64_t* bits = comp_reach_.data() + c * words_;
            for (std::uint32_t i = comp_offsets_[c]; i < comp_offsets_[c + 1]; ++i) {
                const NodeId u = comp_members_[i];
                bits[u >> 6] |= std::uint64_t{1} << (u & 63);
                const std::uint32_t end = snap.out_end(u);
                for (std::uint32_t e = snap.out_begin(u); e < end; ++e) {
                    if (!s.edge_live(e)) continue;
                    const std::int32_t wc = scc_comp_[snap.edge_target(e)];
                    if (wc == static_cast<std::int32_t>(c)) continue;
                    const std::uint64_t* other = comp_reach_.data() + wc * words_;
                    for (std::uint32_t w = 0; w < words_; ++w) bits[w] |= other[w];
                }
            }
        }
        for (NodeId v = 0; v < n_nodes_; ++v) {
            const std::uint64_t* bits = comp_reach_.data() + scc_comp_[v] * words_;
            std::uint32_t count = 0;
            for (std::uint32_t w = 0; w < words_; ++w)
                count += static_cast<std::uint32_t>(std::popcount(bits[w] & ~s.covered[w]));
            reach_count[v] = count;
        }
    }

    std::uint32_t set_spread(LiveSample& s, std::span<const NodeId> seeds) {
        ++epoch_;
        std::uint32_t count = 0;
        stack_.clear();
        for (const NodeId v : seeds)
            if (scratch_[v] != epoch_) {
                scratch_[v] = epoch_;
                ++count;
                stack_.push_back(v);
            }
        while (!stack_.empty()) {
            const NodeId u = stack_.back();
            stack_.pop_back();
            const std::uint32_t end = s.snap->out_end(u);
            for (std::uint32_t e = s.snap->out_begin(u); e < end; ++e) {
                const NodeId w = s.snap->edge_target(e);
                if (s.edge_live(e) && scratch_[w] != epoch_) {
                    scratch_[w] = epoch_;
                    ++count;
                    stack_.push_back(w);
                }
            }
        }
        return count;
    }

    std::uint32_t horizon_;
    std::uint32_t repetitions_;
    std::uint32_t n_nodes_ = 0;
    std::uint32_t words_ = 0;
    std::vector<LiveSample> samples_;
    std::vector<std::uint64_t> scratch_;  // epoch marks, reused across BFS calls
    std::uint64_t epoch_;
    std::vector<NodeId> stack_;
    // SCC pass scratch
    std::vector<std::uint32_t> scc_index_, scc_low_;
    std::vector<std::int32_t> scc_comp_;
    std::vector<std::uint8_t> scc_onstack_;
    std::vector<NodeId> scc_stack_;
    std::vector<std::pair<NodeId, std::uint32_t>> scc_frames_;
    std::vector<NodeId> comp_members_;
    std::vector<std::uint32_t> comp_offsets_;
    std::vector<std::uint64_t> comp_reach_;
};

}  // namespace

namespace {

// Cascade spread with lazily drawn coins: edge e of replay key `key` is
// live iff hash(key, e) falls below its probability. Hash-keyed coins are
// order-independent, so two seed sets replayed under the same key share
// every examined edge's coin exactly (common random numbers), and only
// edges reachable from the cascade cost a draw.
class HashedCascade {
public:
    explicit HashedCascade(std::uint32_t n_nodes) : scratch_(n_nodes, 0), epoch_(0) {}

    std::uint32_t spread(const GraphSnapshot& snap, std::span<const double> probs,
                         std::uint64_t key, std::span<const NodeId> seeds) {
        ++epoch_;
        std::uint32_t count = 0;
        stack_.clear();
        for (const NodeId v : seeds)
            if (scratch_[v] != epoch_) {
                scratch_[v] = epoch_;
                ++count;
                stack_.push_back(v);
            }
        while (!stack_.empty()) {
            const NodeId u = stack_.back();
            stack_.pop_back();
            const std::uint32_t end = snap.out_end(u);
            for (std::uint32_t e = snap.out_begin(u); e < end; ++e) {
                const NodeId w = snap.edge_target(e);
                if (scratch_[w] == epoch_) continue;
                if (to_unit_double(mix64(key ^ (0x9e3779b97f4a7c15ULL * (e + 1)))) <
                    probs[e]) {
                    scratch_[w] = epoch_;
                    ++count;
                    stack_.push_back(w);
                }
            }
        }
        return count;
    }

private:
    std::vector<std::uint64_t> scratch_;
    std::uint64_t epoch_;
    std::vector<NodeId> stack_;
};

SpreadEstimate estimate_replayed(const Environment& env,
                                 const std::function<std::span<const NodeId>(std::uint32_t)>&
                                     seeds_at_stage,
                                 std::uint32_t repetitions, std::uint64_t seed) {
    if (repetitions == 0) throw std::invalid_argument("repetitions must be >= 1");
    SpreadEstimate est;
    est.repetitions = repetitions;
    est.per_stage.assign(env.horizon(), 0.0);
    std::vector<double> totals(repetitions, 0.0);
    HashedCascade cascade(env.n_nodes());
    for (std::uint32_t r = 0; r < repetitions; ++r) {
        const std::uint64_t replay_key = derive_seed(seed, "spread", r);
        for (std::uint32_t t = 1; t <= env.horizon(); ++t) {
            const double spread =
                cascade.spread(env.snapshot(t), env.stage_probs(t),
                               hash_combine(replay_key, t), seeds_at_stage(t));
            totals[r] += spread;
            est.per_stage[t - 1] += spread;
        }
    }
    for (double& m : est.per_stage) m /= static_cast<double>(repetitions);
    for (const double v : totals) est.mean += v;
    est.mean /= static_cast<double>(repetitions);
    est.std_error = sample_std_error(totals);
    return est;
}

}  // namespace

SpreadEstimate estimate_overall_spread(const Environment& env, std::span<const NodeId> seeds,
                                       std::uint32_t repetitions, std::uint64_t seed) {
    return estimate_replayed(
        env, [&](std::uint32_t) { return seeds; }, repetitions, seed);
}

namespace {

struct HeapEntry {
    double gain_sum;
    NodeId node;
    std::uint32_t evaluated_at;
};

struct HeapLess {
    // max-heap on gain, ties popping the lowest node index first
    bool operator()(const HeapEntry& a, const HeapEntry& b) const {
        if (a.gain_sum != b.gain_sum) return a.gain_sum < b.gain_sum;
        return a.node > b.node;
    }
};

}  // namespace

OfflineGreedyResult greedy_offline(const Environment& env, std::uint32_t k,
                                   std::uint32_t repetitions, std::uint64_t seed, bool lazy) {
    const std::uint32_t n = env.n_nodes();
    if (k > n) throw std::invalid_argument("cannot select more seeds than nodes");
    SampleStore store(env, repetitions, seed, "greedy-coins");

    OfflineGreedyResult result;
    std::vector<std::uint8_t> selected(n, 0);

    if (lazy) {
        std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapLess> heap;
        {
            std::vector<NodeId> all(n);
            for (NodeId v = 0; v < n; ++v) all[v] = v;
            const std::vector<double> sums = store.marginal_sums(all);
            for (NodeId v = 0; v < n; ++v) heap.push({sums[v], v, 0});
        }
        for (std::uint32_t pos = 0; pos < k; ++pos) {
            for (;;) {
                if (heap.top().evaluated_at == pos && !selected[heap.top().node]) {
                    const HeapEntry top = heap.top();
                    heap.pop();
                    selected[top.node] = 1;
                    result.seeds.push_back(top.node);
                    result.per_position_gain.push_back(top.gain_sum /
                                                       static_cast<double>(repetitions));
                    store.commit(top.node);
                    break;
                }
                // refresh a block of stale entries in one store pass
                std::vector<HeapEntry> stale;
                while (!heap.empty() && stale.size() < 64 &&
                       (heap.top().evaluated_at != pos || selected[heap.top().node])) {
                    if (!selected[heap.top().node]) stale.push_back(heap.top());
                    heap.pop();
                }
                std::vector<NodeId> nodes;
                for (const HeapEntry& e : stale) nodes.push_back(e.node);
                const std::vector<double> sums = store.marginal_sums(nodes);
                for (std::size_t i = 0; i < stale.size(); ++i)
                    heap.push({sums[i], stale[i].node, pos});
            }
        }
    } else {
        std::vector<NodeId> candidates;
        for (std::uint32_t pos = 0; pos < k; ++pos) {
            candidates.clear();
            for (NodeId v = 0; v < n; ++v)
                if (!selected[v]) candidates.push_back(v);
            const std::vector<double> sums = store.marginal_sums(candidates);
            double best = -1.0;
            std::int64_t best_node = -1;
            for (std::size_t i = 0; i < candidates.size(); ++i) {
                if (sums[i] > best) {  // strict: ties keep the lowest node index
                    best = sums[i];
                    best_node = candidates[i];
                }
            }
            selected[best_node] = 1;
            result.seeds.push_back(static_cast<NodeId>(best_node));
            result.per_position_gain.push_back(best / static_cast<double>(repetitions));
            store.commit(static_cast<NodeId>(best_node));
        }
    }

    const std::vector<double> totals = store.per_replay_committed_totals();
    result.f_estimate.mean = store.committed_total() / static_cast<double>(repetitions);
    result.f_estimate.std_error = sample_std_error(totals);
    result.f_estimate.repetitions = repetitions;
    result.f_estimate.per_stage = store.per_stage_committed_means();
    return result;
}

ExhaustiveResult exhaustive_opt(const Environment& env, std::uint32_t k,
                                std::uint32_t repetitions, std::uint64_t seed,
                                std::uint64_t enumeration_cap) {
    const std::uint32_t n = env.n_nodes();
    if (k > n) throw std::invalid_argument("cannot select more seeds than nodes");

    // C(n, k) with early bail above the cap
    double subsets = 1.0;
    for (std::uint32_t i = 0; i < k; ++i) {
        subsets *= static_cast<double>(n - i) / static_cast<double>(i + 1);
        if (subsets > 2.0 * static_cast<double>(enumeration_cap)) break;
    }
    if (subsets > static_cast<double>(enumeration_cap))
        throw std::runtime_error(
            "exhaustive enumeration would exceed the cap of " +
            std::to_string(enumeration_cap) + " subsets; use greedy_offline instead");

    SampleStore store(env, repetitions, seed, "exhaustive-coins");

    std::vector<NodeId> combo(k);
    for (std::uint32_t i = 0; i < k; ++i) combo[i] = i;
    std::vector<NodeId> best_combo;
    double best_sum = -1.0;
    for (;;) {
        const double sum = store.set_spread_sum(combo);
        if (sum > best_sum) {  // first (lexicographically smallest) argmax wins
            best_sum = sum;
            best_combo = combo;
        }
        // next lexicographic k-combination of [0, n)
        std::int64_t i = static_cast<std::int64_t>(k) - 1;
        while (i >= 0 && combo[i] == n - k + i) --i;
        if (i < 0) break;
        ++combo[i];
        for (std::uint32_t j = static_cast<std::uint32_t>(i) + 1; j < k; ++j)
            combo[j] = combo[j - 1] + 1;
    }

    ExhaustiveResult result;
    result.seeds = best_combo;
    result.estimate.mean = best_sum / static_cast<double>(repetitions);
    result.estimate.repetitions = repetitions;
    result.estimate.std_error = sample_std_error(store.per_replay_set_totals(best_combo));
    result.estimate.per_stage = store.per_stage_set_means(best_combo);
    return result;
}

double greedy_weak_regret(const SpreadEstimate& benchmark, double achieved_total,
                          bool use_factor) {
    const double factor = use_factor ? 1.0 - 1.0 / std::exp(1.0) : 1.0;
    return factor * benchmark.mean - achieved_total;
}

SpreadEstimate estimate_log_reward(const Environment& env, const DecisionLog& log,
                                   std::uint32_t repetitions, std::uint64_t seed) {
    if (log.stage_seeds.size() != env.horizon())
        throw std::invalid_argument("decision log does not cover the horizon");
    return estimate_replayed(
        env,
        [&](std::uint32_t t) {
            return std::span<const NodeId>(log.stage_seeds[t - 1]);
        },
        repetitions, seed);
}

PositionRegretEstimate position_weak_regret(const Environment& env, const DecisionLog& log,
                                            std::uint32_t position, std::uint32_t repetitions,
                                            std::uint64_t seed) {
    const std::uint32_t n = env.n_nodes();
    const std::uint32_t horizon = env.horizon();
    if (log.stage_seeds.size() != horizon)
        throw std::invalid_argument("decision log does not cover the horizon");
    for (const auto& seeds : log.stage_seeds)
        if (position >= seeds.size())
            throw std::invalid_argument("decision log has no seed at the requested position");
    if (static_cast<double>(n) * repetitions > 2e8)
        throw std::invalid_argument(
            "instance too large for the replay estimator (N x R beyond 2e8)");

    // per-candidate, per-replay accumulated marginal gains
    std::vector<double> cand(static_cast<std::size_t>(n) * repetitions, 0.0);
    std::vector<double> achieved(repetitions, 0.0);

    std::vector<std::uint8_t> covered;
    std::vector<std::uint64_t> scratch(n, 0);
    std::uint64_t epoch = 0;
    std::vector<NodeId> stack;

    const auto expand = [&](const GraphSnapshot& snap, const std::vector<std::uint8_t>& live,
                            NodeId from, auto&& visit) {
        stack.clear();
        stack.push_back(from);
        while (!stack.empty()) {
            const NodeId u = stack.back();
            stack.pop_back();
            const std::uint32_t end = snap.out_end(u);
            for (std::uint32_t e = snap.out_begin(u); e < end; ++e) {
                const NodeId w = snap.edge_target(e);
                if (live[e] && visit(w)) stack.push_back(w);
            }
        }
    };

    std::vector<std::uint8_t> live;
    for (std::uint32_t t = 1; t <= horizon; ++t) {
        const GraphSnapshot& snap = env.snapshot(t);
        const std::vector<double>& probs = env.stage_probs(t);
        const std::span<const NodeId> prefix{log.stage_seeds[t - 1].data(), position};
        const NodeId played = log.stage_seeds[t - 1][position];
        for (std::uint32_t r = 0; r < repetitions; ++r) {
            Rng rng = derive_stream(seed, "position-regret",
                                    static_cast<std::uint64_t>(t - 1) * repetitions + r);
            live.resize(snap.n_edges());
            for (std::uint32_t e = 0; e < snap.n_edges(); ++e)
                live[e] = rng.bernoulli(probs[e]) ? 1 : 0;

            covered.assign(n, 0);
            for (const NodeId s : prefix) {
                if (covered[s]) continue;
                covered[s] = 1;
                expand(snap, live, s, [&](NodeId w) {
                    if (covered[w]) return false;
                    covered[w] = 1;
                    return true;
                });
            }
            for (NodeId a = 0; a < n; ++a) {
                std::uint32_t g = 0;
                if (!covered[a]) {
                    ++epoch;
                    scratch[a] = epoch;
                    g = 1;
                    expand(snap, live, a, [&](NodeId w) {
                        if (covered[w] || scratch[w] == epoch) return false;
                        scratch[w] = epoch;
                        ++g;
                        return true;
                    });
                }
                cand[static_cast<std::size_t>(a) * repetitions + r] += g;
                if (a == played) achieved[r] += g;
            }
        }
    }

    const double inv_r = 1.0 / static_cast<double>(repetitions);
    double best_total = -1.0;
    NodeId best_node = 0;
    for (NodeId a = 0; a < n; ++a) {
        double sum = 0.0;
        for (std::uint32_t r = 0; r < repetitions; ++r)
            sum += cand[static_cast<std::size_t>(a) * repetitions + r];
        const double total = sum * inv_r;
        if (total > best_total) {  // strict: ties keep the lowest node index
            best_total = total;
            best_node = a;
        }
    }
    double achieved_total = 0.0;
    for (const double v : achieved) achieved_total += v;
    achieved_total *= inv_r;

    // paired difference per replay (same coins on both sides)
    std::vector<double> diffs(repetitions);
    for (std::uint32_t r = 0; r < repetitions; ++r)
        diffs[r] = cand[static_cast<std::size_t>(best_node) * repetitions + r] - achieved[r];

    PositionRegretEstimate est;
    est.best_node = best_node;
    est.best_total = best_total;
    est.achieved_total = achieved_total;
    est.regret = best_total - achieved_total;
    est.std_error = sample_std_error(diffs);
    return est;
}

std::vector<double> regret_ratio_series(std::span<const double> benchmark_cum,
                                        std::span<const double> achieved_cum) {
    if (benchmark_cum.size() != achieved_cum.size())
        throw std::invalid_argument("benchmark and achieved series lengths differ");
    std::vector<double> ratio(benchmark_cum.size());
    for (std::size_t i = 0; i < ratio.size(); ++i)
        ratio[i] = benchmark_cum[i] > 0.0
                       ? (benchmark_cum[i] - achieved_cum[i]) / benchmark_cum[i]
                       : std::numeric_limits<double>::quiet_NaN();
    return ratio;
}

RegretSeries build_regret_series(std::vector<std::string> policy_names,
                                 std::vector<std::vector<double>> cum_reward,
                                 std::vector<double> benchmark_cum) {
    if (policy_names.size() != cum_reward.size())
        throw std::invalid_argument("one cumulative series per policy required");
    RegretSeries series;
    series.policy_names = std::move(policy_names);
    series.cum_reward = std::move(cum_reward);
    series.benchmark_cum = std::move(benchmark_cum);
    series.ratio.reserve(series.cum_reward.size());
    for (const auto& cum : series.cum_reward) {
        if (cum.size() != series.benchmark_cum.size())
            throw std::invalid_argument("cumulative series lengths differ");
        series.ratio.push_back(regret_ratio_series(series.benchmark_cum, cum));
    }
    return series;
}

void save_benchmark(const BenchmarkDoc& doc, const std::filesystem::path& path) {
    nlohmann::json j;
    j["mode"] = doc.mode;
    j["repetitions"] = doc.repetitions;
    j["master_seed"] = doc.master_seed;
    // top-level seeds/estimate/stderr mirror the first replica
    if (!doc.replicas.empty()) {
        j["seeds"] = doc.replicas.front().seeds;
        j["estimate"] = doc.replicas.front().estimate;
        j["stderr"] = doc.replicas.front().std_error;
    }
    nlohmann::json reps = nlohmann::json::array();
    for (const BenchmarkEntry& e : doc.replicas) {
        nlohmann::json r;
        r["replica"] = e.replica;
        r["seeds"] = e.seeds;
        r["estimate"] = e.estimate;
        r["stderr"] = e.std_error;
        r["per_stage"] = e.per_stage;
        reps.push_back(std::move(r));
    }
    j["replicas"] = std::move(reps);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write benchmark file: " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

BenchmarkDoc load_benchmark(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open benchmark file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("benchmark file " + path.string() + " is not valid JSON: " +
                                 e.what());
    }
    BenchmarkDoc doc;
    doc.mode = j.at("mode").get<std::string>();
    doc.repetitions = j.at("repetitions").get<std::uint32_t>();
    doc.master_seed = j.at("master_seed").get<std::uint64_t>();
    for (const auto& r : j.at("replicas")) {
        BenchmarkEntry e;
        e.replica = r.at("replica").get<std::uint32_t>();
        e.seeds = r.at("seeds").get<std::vector<NodeId>>();
        e.estimate = r.at("estimate").get<double>();
        e.std_error = r.at("stderr").get<double>();
        e.per_stage = r.at("per_stage").get<std::vector<double>>();
        doc.replicas.push_back(std::move(e));
    }
    return doc;
}

}  // namespace nsim
