#include "edgeoff/agent/evaluation.hpp"

#include <cmath>

#include "edgeoff/sim/system.hpp"

namespace edgeoff::agent {

MeanStd mean_std(const std::vector<double>& values) {
    MeanStd out;
    if (values.empty()) return out;
    for (double v : values) out.mean += v;
    out.mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(var / static_cast<double>(values.size()));
    return out;
}

EvalReport summarize(std::vector<EpisodeMetrics> episodes) {
    EvalReport r;
    r.episodes = episodes.size();
    std::vector<double> reward, completion, latency, objective;
    for (const auto& m : episodes) {
        reward.push_back(m.mean_reward);
        completion.push_back(m.completion_rate);
        latency.push_back(m.avg_latency_s);
        objective.push_back(m.objective_s);
    }
    r.reward = mean_std(reward);
    r.completion_rate = mean_std(completion);
    r.avg_latency_s = mean_std(latency);
    r.objective_s = mean_std(objective);
    r.per_episode = std::move(episodes);
    return r;
}

EvalReport evaluate_policies(const sim::SystemConfig& config, std::uint64_t seed, PolicySet& policies,
                             std::size_t episodes, const RolloutOptions& options, std::uint64_t first_episode) {
    auto env = sim::new_system(config, seed);
    std::vector<EpisodeMetrics> metrics;
    for (std::size_t e = 0; e < episodes; ++e) {
        sim::reset_episode(env, first_episode + e);
        auto run = rollout(env, policies, config.episode_intervals, options);
        metrics.push_back(std::move(run.metrics));
    }
    return summarize(std::move(metrics));
}

}  // namespace edgeoff::agent
