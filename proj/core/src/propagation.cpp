#include "nsim/propagation.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace nsim {

namespace {

constexpr double kFrMax = 0.1;

std::uint64_t edge_key(NodeId src, NodeId dst) {
    return (static_cast<std::uint64_t>(src) << 32) | dst;
}

constexpr std::uint64_t kTrTag = 0x7472ULL;      // "tr"
constexpr std::uint64_t kFrTag = 0x6672ULL;      // "fr"
constexpr double kTrLevels[3] = {0.1, 0.01, 0.001};

}  // namespace

InfluenceKind parse_influence_kind(std::string_view s) {
    if (s == "wc" || s == "WC") return InfluenceKind::WC;
    if (s == "tr" || s == "TR") return InfluenceKind::TR;
    if (s == "fr" || s == "FR") return InfluenceKind::FR;
    throw std::invalid_argument("unknown influence model: " + std::string(s));
}

std::string_view to_string(InfluenceKind k) {
    switch (k) {
        case InfluenceKind::WC: return "wc";
        case InfluenceKind::TR: return "tr";
        case InfluenceKind::FR: return "fr";
    }
    return "?";
}

InfluenceModel::InfluenceModel(InfluenceKind kind, std::uint32_t horizon, std::uint64_t seed)
    : kind_(kind), horizon_(horizon), seed_(seed) {
    if (horizon_ == 0) throw std::invalid_argument("influence model horizon must be >= 1");
}

double InfluenceModel::fresh_prob(std::uint32_t t, NodeId src, NodeId dst,
                                  std::uint32_t indeg) const {
    switch (kind_) {
        case InfluenceKind::WC:
            return 1.0 / static_cast<double>(indeg);
        case InfluenceKind::TR: {
            std::uint64_t h = hash_combine(mix64(seed_), kTrTag);
            h = hash_combine(h, t);
            h = hash_combine(h, edge_key(src, dst));
            return kTrLevels[mix64(h) % 3];
        }
        case InfluenceKind::FR:
            throw std::logic_error("FR probabilities come from drift state");
    }
    throw std::logic_error("unreachable");
}

void InfluenceModel::bind_stage(const GraphSnapshot& snap, std::uint32_t t) {
    if (t < 1 || t > horizon_)
        throw std::out_of_range("stage " + std::to_string(t) + " outside [1," +
                                std::to_string(horizon_) + "]");
    if (kind_ == InfluenceKind::FR) {
        if (bound_stage_ == 0) {
            if (t != 1) throw std::logic_error("FR stages must be bound in order from 1");
        } else if (t == bound_stage_) {
            // rebind of the current stage is a no-op
        } else if (t == bound_stage_ + 1) {
            if (!advanced_since_bind_)
                throw std::logic_error("advance_fr must run between consecutive FR stages");
        } else {
            throw std::logic_error("FR stages must be bound in order (got " + std::to_string(t) +
                                   " after " + std::to_string(bound_stage_) + ")");
        }
        // Sync state with this stage's edge set: keep surviving edges,
        // initialize edges appearing at stage t, drop vanished ones.
        std::unordered_map<std::uint64_t, FrEdgeState> next;
        next.reserve(snap.n_edges());
        for (std::uint32_t e = 0; e < snap.n_edges(); ++e) {
            const std::uint64_t key = edge_key(snap.edge_source(e), snap.edge_target(e));
            if (auto it = fr_.find(key); it != fr_.end()) {
                next.emplace(key, it->second);
            } else {
                std::uint64_t h = hash_combine(mix64(seed_), kFrTag);
                h = hash_combine(h, key);
                h = hash_combine(h, t);
                const std::uint64_t u = mix64(h);
                next.emplace(key, FrEdgeState{to_unit_double(u) * kFrMax,
                                              (mix64(u) & 1) ? +1 : -1});
            }
        }
        fr_ = std::move(next);
    }
    probs_.resize(snap.n_edges());
    for (std::uint32_t e = 0; e < snap.n_edges(); ++e) {
        const NodeId src = snap.edge_source(e);
        const NodeId dst = snap.edge_target(e);
        probs_[e] = kind_ == InfluenceKind::FR
                        ? fr_.at(edge_key(src, dst)).p
                        : fresh_prob(t, src, dst, snap.indegree(dst));
    }
    bound_stage_ = t;
    advanced_since_bind_ = false;
}

double InfluenceModel::edge_prob(const GraphSnapshot& snap, std::uint32_t t, NodeId src,
                                 NodeId dst) const {
    const std::int64_t e = snap.edge_index(src, dst);
    if (e < 0)
        throw std::out_of_range("edge (" + std::to_string(src) + "," + std::to_string(dst) +
                                ") not in snapshot");
    if (kind_ == InfluenceKind::FR) {
        if (t != bound_stage_)
            throw std::logic_error("FR probabilities are only defined for the bound stage");
        return fr_.at(edge_key(src, dst)).p;
    }
    return fresh_prob(t, src, dst, snap.indegree(dst));
}

void InfluenceModel::advance_fr() {
    if (kind_ != InfluenceKind::FR)
        throw std::logic_error("advance_fr called on a non-FR model");
    const double rate = fr_rate();
    for (auto& [key, st] : fr_) {
        const double next = st.p + st.dir * rate;
        if (next > kFrMax) {
            st.p = kFrMax;
            st.dir = -1;
        } else if (next < 0.0) {
            st.p = 0.0;
            st.dir = +1;
        } else {
            st.p = next;
        }
    }
    advanced_since_bind_ = true;
}

std::optional<FrEdgeState> InfluenceModel::fr_state(NodeId src, NodeId dst) const {
    const auto it = fr_.find(edge_key(src, dst));
    if (it == fr_.end()) return std::nullopt;
    return it->second;
}

void InfluenceModel::set_fr_state(NodeId src, NodeId dst, double p, int dir) {
    if (kind_ != InfluenceKind::FR)
        throw std::logic_error("set_fr_state called on a non-FR model");
    if (p < 0.0 || p > kFrMax) throw std::invalid_argument("FR probability outside [0, 0.1]");
    if (dir != 1 && dir != -1) throw std::invalid_argument("FR direction must be +-1");
    fr_[edge_key(src, dst)] = FrEdgeState{p, dir};
}

StageOutcome::StageOutcome(const GraphSnapshot& snap, std::vector<std::uint8_t> live_edges)
    : snap_(&snap), live_(std::move(live_edges)), reached_(snap.n_nodes(), 0) {
    if (live_.size() != snap.n_edges())
        throw std::invalid_argument("live-edge vector does not match snapshot edge count");
}

std::uint32_t StageOutcome::add_seed(NodeId seed) {
    if (seed >= snap_->n_nodes()) throw std::out_of_range("seed node out of range");
    for (const NodeId s : seeds_)
        if (s == seed) throw std::logic_error("seed " + std::to_string(seed) + " added twice");
    seeds_.push_back(seed);

    std::uint32_t gained = 0;
    if (!reached_[seed]) {
        reached_[seed] = 1;
        ++gained;
        stack_.clear();
        stack_.push_back(seed);
        while (!stack_.empty()) {
            const NodeId u = stack_.back();
            stack_.pop_back();
            const std::uint32_t end = snap_->out_end(u);
            for (std::uint32_t e = snap_->out_begin(u); e < end; ++e) {
                const NodeId v = snap_->edge_target(e);
                if (live_[e] && !reached_[v]) {
                    reached_[v] = 1;
                    ++gained;
                    stack_.push_back(v);
                }
            }
        }
    }
    reached_count_ += gained;
    marginals_.push_back(gained);
    return gained;
}

std::uint32_t StageOutcome::live_edge_count() const {
    return static_cast<std::uint32_t>(
        std::count(live_.begin(), live_.end(), std::uint8_t{1}));
}

StageOutcome sample_stage(const GraphSnapshot& snap, std::span<const double> edge_probs,
                          Rng& rng) {
    if (edge_probs.size() != snap.n_edges())
        throw std::invalid_argument("probability table does not match snapshot edge count");
    std::vector<std::uint8_t> live(snap.n_edges());
    for (std::uint32_t e = 0; e < snap.n_edges(); ++e)
        live[e] = rng.bernoulli(edge_probs[e]) ? 1 : 0;
    return StageOutcome(snap, std::move(live));
}

StageOutcome begin_stage(InfluenceModel& model, const GraphSnapshot& snap, std::uint32_t t,
                         Rng& rng) {
    model.bind_stage(snap, t);
    return sample_stage(snap, model.stage_probs(), rng);
}

}  // namespace nsim
