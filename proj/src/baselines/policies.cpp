#include "edgeoff/baselines/policies.hpp"

#include <cmath>
#include <limits>
#include <memory>

#include "edgeoff/common/error.hpp"
#include "edgeoff/common/rng.hpp"
#include "edgeoff/sim/task.hpp"

namespace edgeoff::baselines {

namespace {

constexpr double kBitsPerMb = 8e6;
constexpr double kCyclesPerGcycle = 1e9;

struct Tag {
    PolicyKind kind;
    std::string_view name;
};

constexpr Tag kTags[] = {
    {PolicyKind::local_only, "local-only"},
    {PolicyKind::random, "random"},
    {PolicyKind::greedy, "greedy"},
    {PolicyKind::round_robin, "round-robin"},
    {PolicyKind::amarl, "amarl"},
    {PolicyKind::independent_critic_ablation, "independent-critic-ablation"},
};

class LocalOnlyPolicy : public agent::AgentPolicy {
public:
    int act(const agent::AgentView&) override { return policy_local_only(); }
};

class RandomPolicy : public agent::AgentPolicy {
public:
    RandomPolicy(std::uint64_t seed, std::size_t num_ess) : seed_(seed), num_ess_(num_ess) {}
    void reset_episode(std::uint64_t episode) override { episode_ = episode; }
    int act(const agent::AgentView& view) override {
        return policy_random(seed_, view.ied, episode_, view.t, num_ess_);
    }

private:
    std::uint64_t seed_;
    std::size_t num_ess_;
    std::uint64_t episode_ = 0;
};

class GreedyPolicy : public agent::AgentPolicy {
public:
    int act(const agent::AgentView& view) override {
        if (!view.has_task) return sim::kNoOp;
        if (!view.raw || !view.system) throw ProtocolError("greedy policy needs the raw observation and system view");
        return policy_greedy(*view.raw, *view.system, view.ied);
    }
};

/// Cycles local, ES 1, ..., ES M over the agent's own tasks.
class RoundRobinPolicy : public agent::AgentPolicy {
public:
    explicit RoundRobinPolicy(std::size_t num_ess) : options_(num_ess + 1) {}
    void reset_episode(std::uint64_t) override { next_ = 0; }
    int act(const agent::AgentView& view) override {
        if (!view.has_task) return sim::kNoOp;
        const int a = static_cast<int>(next_);
        next_ = (next_ + 1) % options_;
        return a;
    }

private:
    std::size_t options_;
    std::size_t next_ = 0;
};

}  // namespace

PolicyKind parse_policy_kind(std::string_view tag) {
    for (const auto& t : kTags) {
        if (t.name == tag) return t.kind;
    }
    throw ConfigError("policy", "unknown policy '" + std::string(tag) +
                      "' (expected local-only, random, greedy, round-robin, amarl or independent-critic-ablation)");
}

std::string_view to_string(PolicyKind kind) {
    for (const auto& t : kTags) {
        if (t.kind == kind) return t.name;
    }
    return "unknown";
}

bool is_heuristic(PolicyKind kind) {
    return kind != PolicyKind::amarl && kind != PolicyKind::independent_critic_ablation;
}

int policy_local_only() { return 0; }

int policy_random(std::uint64_t seed, std::size_t ied, std::uint64_t episode, std::int64_t t, std::size_t num_ess) {
    const std::uint64_t per_agent = derive_seed(seed, streams::kPolicy, ied);
    const std::uint64_t h = derive_seed(per_agent, episode, static_cast<std::uint64_t>(t));
    return static_cast<int>(h % (num_ess + 1));
}

std::vector<double> greedy_estimates(const agent::RawObservation& raw, const sim::SystemState& system,
                                     std::size_t ied) {
    const auto& cfg = system.config;
    const std::size_t M = cfg.num_ess;
    const double dt = cfg.interval_s;
    std::vector<double> out(M + 1, std::numeric_limits<double>::infinity());

    const double work = raw.size_mb * raw.density * kCyclesPerGcycle;
    out[0] = raw.local_wait_s + static_cast<double>(sim::ceil_intervals(work / (dt * system.ied_gpu_hz[ied]))) * dt;

    std::size_t valid_comm = 0;
    for (const auto& q : system.comm) valid_comm += q.valid() ? 1 : 0;
    for (std::size_t m = 0; m < M; ++m) {
        const std::size_t uplinks = valid_comm + (system.comm_queue(ied, m).valid() ? 0 : 1);
        const double share = sim::equal_bandwidth_share(cfg.bandwidth_hz, uplinks);
        const double rate = sim::uplink_rate_bps(share, cfg.tx_power_w * raw.gain[m] / cfg.noise_power);
        if (!(rate > 0.0)) continue;
        const double tx_budget_mb = rate * dt / kBitsPerMb;
        const auto tx = sim::ceil_intervals((raw.comm_backlog_mb[m] + raw.size_mb) / tx_budget_mb);

        std::size_t sharers = system.edge_queue(ied, m).valid() ? 0 : 1;
        for (std::size_t i = 0; i < cfg.num_ieds; ++i) sharers += system.edge_queue(i, m).valid() ? 1 : 0;
        const double edge_budget_mb =
            system.es_gpu_hz[m] * dt / (static_cast<double>(sharers) * raw.density * kCyclesPerGcycle);
        const auto edge = sim::ceil_intervals((raw.edge_backlog_mb[m] + raw.size_mb) / edge_budget_mb);
        // Computing starts in the interval the upload completes.
        out[m + 1] = static_cast<double>(tx + edge - 1) * dt;
    }
    return out;
}

int policy_greedy(const agent::RawObservation& raw, const sim::SystemState& system, std::size_t ied) {
    const auto est = greedy_estimates(raw, system, ied);
    int best = 0;
    for (std::size_t k = 1; k < est.size(); ++k) {
        if (est[k] < est[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
    }
    return best;
}

agent::PolicySet make_heuristic_policies(PolicyKind kind, std::size_t num_ieds, std::size_t num_ess,
                                         std::uint64_t seed) {
    agent::PolicySet out;
    for (std::size_t i = 0; i < num_ieds; ++i) {
        switch (kind) {
            case PolicyKind::local_only: out.push_back(std::make_unique<LocalOnlyPolicy>()); break;
            case PolicyKind::random: out.push_back(std::make_unique<RandomPolicy>(seed, num_ess)); break;
            case PolicyKind::greedy: out.push_back(std::make_unique<GreedyPolicy>()); break;
            case PolicyKind::round_robin: out.push_back(std::make_unique<RoundRobinPolicy>(num_ess)); break;
            default: throw ConfigError("policy", "policy '" + std::string(to_string(kind)) + "' needs training, not a heuristic");
        }
    }
    return out;
}

amarl::TrainConfig ablation_config(amarl::TrainConfig config) {
    config.attention = false;
    return config;
}

}  // namespace edgeoff::baselines
