#include "nsim/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace nsim {

void ExperimentConfig::validate() const {
    if (graph_source != "generate" && graph_source != "trace")
        throw std::invalid_argument("graph.source must be `generate` or `trace`");
    if (graph_source == "trace" && trace_path.empty())
        throw std::invalid_argument("graph.trace is required with graph.source = trace");
    if (graph_source == "generate") {
        if (n_nodes < 2) throw std::invalid_argument("graph.nodes must be >= 2");
        if (edge_prob < 0.0 || edge_prob > 1.0)
            throw std::invalid_argument("graph.edge_prob must lie in [0,1]");
    }
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (seeds_per_stage < 1) throw std::invalid_argument("seeds_per_stage must be >= 1");
    if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");
    if (policies.empty()) throw std::invalid_argument("at least one policy is required");
    std::set<std::string> names;
    for (const PolicySpec& p : policies) {
        if (!names.insert(p.name).second)
            throw std::invalid_argument("duplicate policy name: " + p.name);
        if (p.kind != "rsb" && p.kind != "ucb" && p.kind != "random")
            throw std::invalid_argument("policy " + p.name + ": unknown kind `" + p.kind + "`");
        if (p.kind == "rsb" && !(p.gamma >= 0.0 && p.gamma <= 1.0))
            throw std::invalid_argument("policy " + p.name + ": gamma must lie in [0,1]");
        if (p.kind == "rsb" && !(p.scale_c > 0.0))
            throw std::invalid_argument("policy " + p.name + ": scale_c must be positive");
        if (p.kind == "ucb" && !(p.reward_cap > 0.0))
            throw std::invalid_argument("policy " + p.name + ": reward_cap must be positive");
        if (p.kind == "ucb" && !(p.exploration_coeff > 0.0))
            throw std::invalid_argument("policy " + p.name +
                                        ": exploration_coeff must be positive");
    }
    if (oracle_mode != "experiment" && oracle_mode != "exact")
        throw std::invalid_argument("oracle.mode must be `experiment` or `exact`");
    if (oracle_greedy_reps < 1 || oracle_final_reps < 1)
        throw std::invalid_argument("oracle repetition counts must be >= 1");
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

class KeyValues {
public:
    KeyValues(std::string_view text, std::string_view origin) : origin_(origin) {
        std::istringstream in{std::string(text)};
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string stripped = trim(line.substr(0, line.find('#')));
            if (stripped.empty()) continue;
            const auto eq = stripped.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error(where(lineno) + ": expected `key = value`");
            const std::string key = trim(stripped.substr(0, eq));
            const std::string value = trim(stripped.substr(eq + 1));
            if (key.empty()) throw std::runtime_error(where(lineno) + ": empty key");
            if (!kv_.emplace(key, std::pair{value, lineno}).second)
                throw std::runtime_error(where(lineno) + ": duplicate key `" + key + "`");
        }
    }

    bool has(const std::string& key) const { return kv_.contains(key); }

    std::string take_string(const std::string& key, std::string def) {
        const auto it = kv_.find(key);
        if (it == kv_.end()) return def;
        consumed_.insert(key);
        return it->second.first;
    }

    template <typename T>
    T take_number(const std::string& key, T def) {
        const auto it = kv_.find(key);
        if (it == kv_.end()) return def;
        consumed_.insert(key);
        const std::string& text = it->second.first;
        T value{};
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc{} || ptr != text.data() + text.size())
            throw std::runtime_error(where(it->second.second) + ": `" + key +
                                     "` is not a valid number: " + text);
        return value;
    }

    bool take_bool(const std::string& key, bool def) {
        const auto it = kv_.find(key);
        if (it == kv_.end()) return def;
        consumed_.insert(key);
        const std::string& t = it->second.first;
        if (t == "true" || t == "1") return true;
        if (t == "false" || t == "0") return false;
        throw std::runtime_error(where(it->second.second) + ": `" + key +
                                 "` must be true or false");
    }

    // Fail fast on anything not consumed.
    void reject_unknown() const {
        for (const auto& [key, value] : kv_)
            if (!consumed_.contains(key))
                throw std::runtime_error(where(value.second) + ": unknown key `" + key + "`");
    }

private:
    std::string where(std::size_t lineno) const {
        return std::string(origin_) + ":" + std::to_string(lineno);
    }

    std::string origin_;
    std::map<std::string, std::pair<std::string, std::size_t>> kv_;
    std::set<std::string> consumed_;
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    for (const char c : s) {
        if (c == ',') {
            const std::string p = trim(cur);
            if (!p.empty()) parts.push_back(p);
            cur.clear();
        } else {
            cur += c;
        }
    }
    const std::string p = trim(cur);
    if (!p.empty()) parts.push_back(p);
    return parts;
}

}  // namespace

ExperimentConfig parse_config_text(std::string_view text, std::string_view origin) {
    KeyValues kv(text, origin);
    ExperimentConfig cfg;

    cfg.graph_source = kv.take_string("graph.source", cfg.graph_source);
    cfg.trace_path = kv.take_string("graph.trace", {});
    cfg.cycle = kv.take_bool("graph.cycle", cfg.cycle);
    cfg.n_nodes = kv.take_number<std::uint32_t>("graph.nodes", cfg.n_nodes);
    cfg.edge_prob = kv.take_number<double>("graph.edge_prob", cfg.edge_prob);
    cfg.rewire_per_stage =
        kv.take_number<std::uint32_t>("graph.rewire", cfg.rewire_per_stage);

    cfg.model = parse_influence_kind(kv.take_string("model", std::string(to_string(cfg.model))));
    cfg.horizon = kv.take_number<std::uint32_t>("horizon", cfg.horizon);
    cfg.seeds_per_stage = kv.take_number<std::uint32_t>("seeds_per_stage", cfg.seeds_per_stage);
    cfg.replicas = kv.take_number<std::uint32_t>("replicas", cfg.replicas);
    cfg.master_seed = kv.take_number<std::uint64_t>("master_seed", cfg.master_seed);

    for (const std::string& name : split_list(kv.take_string("policies", ""))) {
        PolicySpec spec;
        spec.name = name;
        spec.kind = kv.take_string("policy." + name + ".kind", name);
        spec.gamma = kv.take_number<double>("policy." + name + ".gamma", spec.gamma);
        spec.scale_c = kv.take_number<double>("policy." + name + ".scale_c", spec.scale_c);
        spec.reward_cap =
            kv.take_number<double>("policy." + name + ".reward_cap", spec.reward_cap);
        spec.exploration_coeff = kv.take_number<double>(
            "policy." + name + ".exploration_coeff", spec.exploration_coeff);
        cfg.policies.push_back(std::move(spec));
    }

    cfg.oracle_mode = kv.take_string("oracle.mode", cfg.oracle_mode);
    cfg.oracle_greedy_reps =
        kv.take_number<std::uint32_t>("oracle.greedy_reps", cfg.oracle_greedy_reps);
    cfg.oracle_final_reps =
        kv.take_number<std::uint32_t>("oracle.final_reps", cfg.oracle_final_reps);
    cfg.oracle_enum_cap = kv.take_number<std::uint64_t>("oracle.enum_cap", cfg.oracle_enum_cap);
    cfg.benchmark_path = kv.take_string("oracle.benchmark", {});

    cfg.output_dir = kv.take_string("output.dir", cfg.output_dir.string());

    kv.reject_unknown();
    cfg.validate();
    return cfg;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path.filename().string());
}

}  // namespace nsim
