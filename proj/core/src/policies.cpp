#include "nsim/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace nsim {

namespace {

constexpr double kRenormThreshold = 1e150;
// exp cap: beyond e^700 the chosen arm dominates every ratio anyway and
// the uncapped factor would overflow to infinity.
constexpr double kMaxExponent = 700.0;

}  // namespace

void RsbParams::validate() const {
    if (!(gamma >= 0.0 && gamma <= 1.0))
        throw std::invalid_argument("gamma must lie in [0,1]");
    if (!(scale_c > 0.0)) throw std::invalid_argument("scale C must be positive");
    if (n_nodes == 0) throw std::invalid_argument("node count must be positive");
    if (seeds_per_stage < 1 || seeds_per_stage > n_nodes)
        throw std::invalid_argument("seeds per stage must lie in [1, n_nodes]");
}

RsbState::RsbState(RsbParams params) : params_(params) {
    params_.validate();
    v_.assign(static_cast<std::size_t>(params_.seeds_per_stage) * params_.n_nodes, 1.0);
}

std::span<const double> RsbState::row(std::uint32_t position) const {
    if (position >= params_.seeds_per_stage) throw std::out_of_range("position out of range");
    return {v_.data() + static_cast<std::size_t>(position) * params_.n_nodes, params_.n_nodes};
}

void RsbState::multiply(std::uint32_t position, NodeId node, double factor) {
    if (position >= params_.seeds_per_stage) throw std::out_of_range("position out of range");
    if (node >= params_.n_nodes) throw std::out_of_range("node out of range");
    if (!(factor >= 1.0) || !std::isfinite(factor))
        throw std::logic_error("rsb update factor must be finite and >= 1");
    double* row = v_.data() + static_cast<std::size_t>(position) * params_.n_nodes;
    row[node] *= factor;
    if (row[node] > kRenormThreshold) {
        const double row_max = *std::max_element(row, row + params_.n_nodes);
        const double scale = std::exp2(std::floor(std::log2(row_max)));
        for (std::uint32_t n = 0; n < params_.n_nodes; ++n)
            row[n] = std::max(row[n] / scale, std::numeric_limits<double>::min());
    }
}

std::vector<double> rsb_weights(std::span<const double> v_row, double gamma) {
    const std::size_t n = v_row.size();
    if (n == 0) throw std::invalid_argument("empty weight row");
    double sum = 0.0;
    for (const double v : v_row) {
        if (!(v > 0.0)) throw std::logic_error("rsb state corrupted: non-positive v entry");
        sum += v;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        // s + gamma*(1/N - s) == (1-gamma)*s + gamma/N, but is exact when
        // the row is uniform (s == 1/N gives w == 1/N for any gamma)
        const double s = v_row[i] / sum;
        w[i] = s + gamma * (inv_n - s);
    }
    return w;
}

std::vector<double> rsb_probs(std::span<const double> weights,
                              std::span<const std::uint8_t> excluded) {
    if (weights.size() != excluded.size())
        throw std::invalid_argument("weights and exclusion mask sizes differ");
    double denom = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i)
        if (!excluded[i]) denom += weights[i];
    if (denom <= 0.0) throw std::invalid_argument("no candidate nodes left to draw from");
    std::vector<double> q(weights.size(), 0.0);
    for (std::size_t i = 0; i < weights.size(); ++i)
        if (!excluded[i]) q[i] = weights[i] / denom;
    return q;
}

NodeId rsb_draw(std::span<const double> q, Rng& rng) {
    const double x = rng.next_double();
    double cum = 0.0;
    std::int64_t last = -1;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i] <= 0.0) continue;
        cum += q[i];
        last = static_cast<std::int64_t>(i);
        if (x < cum) return static_cast<NodeId>(i);
    }
    if (last < 0) throw std::invalid_argument("draw distribution has no positive mass");
    return static_cast<NodeId>(last);  // x landed in rounding slack past the last entry
}

void rsb_update(RsbState& state, std::uint32_t position, NodeId chosen, double reward,
                double draw_prob) {
    if (!(draw_prob > 0.0) || draw_prob > 1.0)
        throw std::invalid_argument("draw probability must lie in (0,1]");
    if (reward < 0.0) throw std::invalid_argument("reward must be non-negative");
    const RsbParams& p = state.params();
    const double estimate = reward / draw_prob;  // r-hat; 0 for all other arms
    const double exponent =
        std::min(p.gamma * estimate / (static_cast<double>(p.n_nodes) * p.scale_c),
                 kMaxExponent);
    state.multiply(position, chosen, std::exp(exponent));
}

StageSelection rsb_select_stage(RsbState& state, StageHandle& env, Rng& rng) {
    const RsbParams& p = state.params();
    std::vector<std::uint8_t> excluded(p.n_nodes, 0);
    StageSelection sel;
    sel.seeds.reserve(p.seeds_per_stage);
    sel.draw_probs.reserve(p.seeds_per_stage);
    for (std::uint32_t k = 0; k < p.seeds_per_stage; ++k) {
        const std::vector<double> w = rsb_weights(state.row(k), p.gamma);
        const std::vector<double> q = rsb_probs(w, excluded);
        const NodeId a = rsb_draw(q, rng);
        const std::uint32_t reward = env.add_seed(a);
        rsb_update(state, k, a, static_cast<double>(reward), q[a]);
        excluded[a] = 1;
        sel.seeds.push_back(a);
        sel.draw_probs.push_back(q[a]);
    }
    return sel;
}

double compute_gamma_star(std::uint32_t n_nodes, double scale_c, double reward_cap,
                          double reward_scale) {
    if (n_nodes < 2) throw std::domain_error("gamma* needs at least 2 nodes (ln N > 0)");
    if (!(scale_c > 0.0) || !(reward_cap > 0.0) || !(reward_scale > 0.0))
        throw std::invalid_argument("C, D and g must be positive");
    const double n = static_cast<double>(n_nodes);
    const double radicand = n * scale_c * std::log(n) /
                            ((1.0 + (std::exp(1.0) - 2.0) * reward_cap / scale_c) * reward_scale);
    return std::min(1.0, std::sqrt(radicand));
}

StageSelection RsbPolicy::play_stage(StageHandle& env, Rng& rng) {
    return rsb_select_stage(state_, env, rng);
}

void UcbParams::validate() const {
    if (!(reward_cap > 0.0)) throw std::invalid_argument("reward cap D must be positive");
    if (!(exploration_coeff > 0.0))
        throw std::invalid_argument("exploration coefficient must be positive");
    if (n_nodes == 0) throw std::invalid_argument("node count must be positive");
    if (seeds_per_stage < 1 || seeds_per_stage > n_nodes)
        throw std::invalid_argument("seeds per stage must lie in [1, n_nodes]");
}

UcbPolicy::UcbPolicy(std::string name, UcbParams params)
    : name_(std::move(name)), params_(params) {
    params_.validate();
    const std::size_t cells =
        static_cast<std::size_t>(params_.seeds_per_stage) * params_.n_nodes;
    mean_.assign(cells, 0.0);
    count_.assign(cells, 0);
}

double UcbPolicy::mean(std::uint32_t position, NodeId n) const {
    return mean_[static_cast<std::size_t>(position) * params_.n_nodes + n];
}

std::uint32_t UcbPolicy::count(std::uint32_t position, NodeId n) const {
    return count_[static_cast<std::size_t>(position) * params_.n_nodes + n];
}

StageSelection UcbPolicy::play_stage(StageHandle& env, Rng& rng) {
    (void)rng;  // deterministic baseline
    const std::uint32_t n_nodes = params_.n_nodes;
    const double log_t = std::log(static_cast<double>(env.stage()));
    std::vector<std::uint8_t> selected(n_nodes, 0);
    StageSelection sel;
    for (std::uint32_t k = 0; k < params_.seeds_per_stage; ++k) {
        const std::size_t base = static_cast<std::size_t>(k) * n_nodes;
        std::int64_t choice = -1;
        for (std::uint32_t n = 0; n < n_nodes; ++n)  // untried arms first
            if (!selected[n] && count_[base + n] == 0) {
                choice = n;
                break;
            }
        if (choice < 0) {
            double best = -std::numeric_limits<double>::infinity();
            for (std::uint32_t n = 0; n < n_nodes; ++n) {
                if (selected[n]) continue;
                const double bonus =
                    params_.exploration_coeff * std::sqrt(log_t / count_[base + n]);
                const double index = mean_[base + n] + bonus;
                if (index > best) {  // strict: ties keep the lowest node index
                    best = index;
                    choice = n;
                }
            }
        }
        const NodeId a = static_cast<NodeId>(choice);
        const std::uint32_t reward = env.add_seed(a);
        const double normalized =
            std::clamp(static_cast<double>(reward) / params_.reward_cap, 0.0, 1.0);
        const std::uint32_t c = ++count_[base + a];
        mean_[base + a] += (normalized - mean_[base + a]) / c;
        selected[a] = 1;
        sel.seeds.push_back(a);
        sel.draw_probs.push_back(1.0);
    }
    return sel;
}

StageSelection random_select_stage(std::uint32_t n_nodes, std::uint32_t k, Rng& rng) {
    if (k > n_nodes) throw std::invalid_argument("cannot select more seeds than nodes");
    std::vector<NodeId> pool(n_nodes);
    std::iota(pool.begin(), pool.end(), NodeId{0});
    StageSelection sel;
    sel.seeds.reserve(k);
    sel.draw_probs.reserve(k);
    for (std::uint32_t i = 0; i < k; ++i) {
        const std::uint64_t j = i + rng.next_below(n_nodes - i);
        std::swap(pool[i], pool[j]);
        sel.seeds.push_back(pool[i]);
        sel.draw_probs.push_back(1.0 / static_cast<double>(n_nodes - i));
    }
    return sel;
}

StageSelection RandomPolicy::play_stage(StageHandle& env, Rng& rng) {
    StageSelection sel = random_select_stage(n_nodes_, k_, rng);
    for (const NodeId s : sel.seeds) env.add_seed(s);
    return sel;
}

}  // namespace nsim
