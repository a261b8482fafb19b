#include "nsim/environment.hpp"

#include <stdexcept>
#include <string>

namespace nsim {

Environment::Environment(const DynamicGraph& graph, InfluenceKind kind, std::uint64_t env_seed)
    : graph_(&graph), kind_(kind), env_seed_(env_seed) {
    InfluenceModel model(kind, graph.horizon(), derive_seed(env_seed, "model", 0));
    probs_.reserve(graph.horizon());
    for (std::uint32_t t = 1; t <= graph.horizon(); ++t) {
        model.bind_stage(graph.snapshot(t), t);
        probs_.push_back(model.stage_probs());
        if (kind == InfluenceKind::FR && t < graph.horizon()) model.advance_fr();
    }
}

Environment::Environment(const DynamicGraph& graph, std::vector<std::vector<double>> stage_probs,
                         std::uint64_t env_seed)
    : graph_(&graph), kind_(std::nullopt), env_seed_(env_seed), probs_(std::move(stage_probs)) {
    if (probs_.size() != graph.horizon())
        throw std::invalid_argument("need one probability table per stage");
    for (std::uint32_t t = 1; t <= graph.horizon(); ++t) {
        if (probs_[t - 1].size() != graph.snapshot(t).n_edges())
            throw std::invalid_argument("stage " + std::to_string(t) +
                                        " probability table does not match its snapshot");
        for (const double p : probs_[t - 1])
            if (!(p >= 0.0 && p <= 1.0))
                throw std::invalid_argument("probabilities must lie in [0,1]");
    }
}

const std::vector<double>& Environment::stage_probs(std::uint32_t t) const {
    if (t < 1 || t > horizon())
        throw std::out_of_range("stage " + std::to_string(t) + " outside [1," +
                                std::to_string(horizon()) + "]");
    return probs_[t - 1];
}

StageOutcome Environment::run_stage(std::uint32_t t) const {
    Rng coins = derive_stream(env_seed_, "stage-coins", t);
    return sample_stage(snapshot(t), stage_probs(t), coins);
}

StageOutcome Environment::replay_stage(std::uint32_t t, Rng& coin_rng) const {
    return sample_stage(snapshot(t), stage_probs(t), coin_rng);
}

}  // namespace nsim
