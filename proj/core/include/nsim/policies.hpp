#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "nsim/dyngraph.hpp"
#include "nsim/rng.hpp"

namespace nsim {

// What a policy may see of one stage: it submits seeds one at a time and
// observes each seed's realized marginal spread. The live-edge
// realization behind the numbers stays hidden.
class StageHandle {
public:
    virtual ~StageHandle() = default;
    virtual std::uint32_t stage() const = 0;
    virtual std::uint32_t add_seed(NodeId seed) = 0;
};

struct StageSelection {
    std::vector<NodeId> seeds;       // ordered, distinct
    std::vector<double> draw_probs;  // probability each seed was drawn under
};

class Policy {
public:
    virtual ~Policy() = default;
    virtual const std::string& name() const = 0;
    virtual StageSelection play_stage(StageHandle& env, Rng& rng) = 0;
};

// ---------------------------------------------------------------------------
// RSB: randomized sequential multi-armed bandit.
//
// Per stage, K seeds are drawn one after another. For the kth draw:
//   w_n = (1-gamma) * v[k][n]/sum(v[k]) + gamma/N        (over all nodes)
//   q_n = w_n / sum of w over nodes not yet selected
//   draw a ~ q, observe reward r, then
//   v[k][a] *= exp(gamma * (r/q_a) / (N*C))
// v persists across stages; it is all-ones only at the start of the run.
// ---------------------------------------------------------------------------

struct RsbParams {
    double gamma = 0.2;    // exploration share; 0 is accepted but degenerate
    double scale_c = 1.0;  // reward scale C in the exponential update
    std::uint32_t seeds_per_stage = 1;
    std::uint32_t n_nodes = 0;

    void validate() const;
};

// The K x N table of positive arm weights v, the policy's entire memory.
class RsbState {
public:
    explicit RsbState(RsbParams params);

    const RsbParams& params() const { return params_; }

    std::span<const double> row(std::uint32_t position) const;

    // Multiplies one entry by `factor` (>= 1), rescaling the row by a
    // power of two when it outgrows the overflow threshold. Weights
    // depend only on ratios within a row, and power-of-two scaling is
    // exact, so rescaling never changes any probability.
    void multiply(std::uint32_t position, NodeId node, double factor);

private:
    RsbParams params_;
    std::vector<double> v_;  // K x N, row-major
};

// Weights for one position: w_n = (1-gamma) * v_n/sum(v) + gamma/N.
std::vector<double> rsb_weights(std::span<const double> v_row, double gamma);

// Draw distribution over the non-excluded nodes; excluded entries are 0.
std::vector<double> rsb_probs(std::span<const double> weights,
                              std::span<const std::uint8_t> excluded);

// Inverse-CDF draw over ascending node index.
NodeId rsb_draw(std::span<const double> q, Rng& rng);

// Importance-weighted exponential update for the chosen arm; all other
// arms keep their weight exactly (exp(0) = 1).
void rsb_update(RsbState& state, std::uint32_t position, NodeId chosen, double reward,
                double draw_prob);

StageSelection rsb_select_stage(RsbState& state, StageHandle& env, Rng& rng);

// gamma* = min{1, sqrt(N C ln N / ((1 + (e-2) D/C) g))}: the exploration
// share minimizing the theoretical regret bound, given reward cap D and a
// bound g on the best arm's total expected reward.
double compute_gamma_star(std::uint32_t n_nodes, double scale_c, double reward_cap,
                          double reward_scale);

class RsbPolicy final : public Policy {
public:
    RsbPolicy(std::string name, RsbParams params)
        : name_(std::move(name)), state_(params) {}

    const std::string& name() const override { return name_; }
    StageSelection play_stage(StageHandle& env, Rng& rng) override;

    const RsbState& state() const { return state_; }

private:
    std::string name_;
    RsbState state_;
};

// ---------------------------------------------------------------------------
// Per-position UCB1 baseline. Rewards are normalized by the cap D and
// clamped to [0,1]; untried arms take priority, ties break on node index.
// ---------------------------------------------------------------------------

struct UcbParams {
    double reward_cap = 120.0;                          // D
    double exploration_coeff = 1.224744871391589;      // sqrt(3/2)
    std::uint32_t seeds_per_stage = 1;
    std::uint32_t n_nodes = 0;

    void validate() const;
};

class UcbPolicy final : public Policy {
public:
    UcbPolicy(std::string name, UcbParams params);

    const std::string& name() const override { return name_; }
    StageSelection play_stage(StageHandle& env, Rng& rng) override;

    double mean(std::uint32_t position, NodeId n) const;
    std::uint32_t count(std::uint32_t position, NodeId n) const;

private:
    std::string name_;
    UcbParams params_;
    std::vector<double> mean_;       // K x N
    std::vector<std::uint32_t> count_;  // K x N
};

// ---------------------------------------------------------------------------
// Uniform-random baseline: K distinct nodes, uniform without replacement.
// ---------------------------------------------------------------------------

StageSelection random_select_stage(std::uint32_t n_nodes, std::uint32_t k, Rng& rng);

class RandomPolicy final : public Policy {
public:
    RandomPolicy(std::string name, std::uint32_t n_nodes, std::uint32_t seeds_per_stage)
        : name_(std::move(name)), n_nodes_(n_nodes), k_(seeds_per_stage) {}

    const std::string& name() const override { return name_; }
    StageSelection play_stage(StageHandle& env, Rng& rng) override;

private:
    std::string name_;
    std::uint32_t n_nodes_;
    std::uint32_t k_;
};

}  // namespace nsim
