#include "edgeoff/agent/rollout.hpp"

#include <algorithm>
#include <ostream>
#include <string>

#include "edgeoff/common/error.hpp"
#include "json.hpp"

namespace edgeoff::agent {

double step_reward(std::span<const sim::LatencyRecord> records, std::size_t ied, double reward_constant) {
    double r = 0.0;
    for (const auto& rec : records) {
        if (rec.ied == ied) r += reward_constant - rec.cost_s;
    }
    return r;
}

double discounted_return(std::span<const double> rewards, double gamma) {
    double total = 0.0;
    double weight = 1.0;
    for (double r : rewards) {
        total += weight * r;
        weight *= gamma;
    }
    return total;
}

Rollout rollout(sim::SystemState& env, PolicySet& policies, std::size_t intervals, const RolloutOptions& options) {
    const std::size_t I = env.num_ieds();
    if (policies.size() != I) {
        throw ProtocolError("rollout: " + std::to_string(policies.size()) + " policies for " + std::to_string(I) +
                            " IEDs");
    }
    for (auto& p : policies) p->reset_episode(env.episode);

    Rollout out;
    auto& m = out.metrics;
    m.agents = I;
    m.reward_per_agent.assign(I, 0.0);
    const std::size_t obs_dim = observation_size(env.num_ess());
    std::vector<std::vector<double>> critic_memory(I, std::vector<double>(obs_dim, 0.0));
    const double decay = options.critic_memory_decay;
    const std::size_t generated_before = env.total_generated;
    const std::size_t completed_before = env.total_completed;
    const std::size_t dropped_before = env.total_dropped;
    const std::size_t ignored_before = env.ignored_actions;

    Experience pending;
    bool have_pending = false;
    std::vector<RawObservation> raws(I);
    std::vector<std::vector<double>> obs(I);
    std::vector<int> actions(I, sim::kNoOp);

    for (std::size_t step = 0; step < intervals; ++step) {
        sim::begin_interval(env);
        const std::int64_t t = env.clock;
        for (std::size_t i = 0; i < I; ++i) {
            raws[i] = build_raw_observation(env, i);
            obs[i] = normalize_observation(raws[i], env.config, options.observation);
            for (std::size_t k = 0; k < obs_dim; ++k) {
                critic_memory[i][k] = decay * critic_memory[i][k] + (1.0 - decay) * obs[i][k];
            }
        }
        Experience exp;
        if (options.record_experience) {
            exp.t = t;
            exp.obs = obs;
            exp.has_task.resize(I);
            exp.actor_hidden.resize(I);
            exp.critic_hidden = critic_memory;
        }
        for (std::size_t i = 0; i < I; ++i) {
            AgentView view;
            view.ied = i;
            view.t = t;
            view.has_task = raws[i].has_task;
            view.explore = options.explore;
            view.observation = obs[i];
            view.raw = &raws[i];
            view.system = &env;
            const int a = policies[i]->act(view);
            if (view.has_task) {
                if (a < 0 || a > static_cast<int>(env.num_ess())) {
                    throw ProtocolError("policy for IED " + std::to_string(i) + " returned action " +
                                        std::to_string(a) + " outside [0, " + std::to_string(env.num_ess()) + "]");
                }
                actions[i] = a;
                if (a > 0) m.offloaded += 1;
            } else {
                actions[i] = sim::kNoOp;
            }
            if (options.record_experience) {
                exp.has_task[i] = view.has_task ? 1 : 0;
                exp.actor_hidden[i] = policies[i]->hidden_before_act();
            }
        }
        sim::apply_actions(env, actions);
        const auto interval = sim::finish_interval(env);

        if (options.events) options.events->insert(options.events->end(), env.events.begin(), env.events.end());
        if (interval.bandwidth_allocated_hz > env.config.bandwidth_hz) m.bandwidth_violations += 1;
        m.max_bandwidth_hz = std::max(m.max_bandwidth_hz, interval.bandwidth_allocated_hz);
        for (const auto& e : env.events) {
            if (e.kind == sim::EventKind::done && e.latency_s > e.deadline_s + 1e-9) m.deadline_violations += 1;
        }
        if (env.total_generated != env.total_completed + env.total_dropped + interval.tasks_in_flight) {
            m.conservation_violations += 1;
        }
        m.objective_s += interval.objective_term_s;

        std::vector<double> rewards(I, 0.0);
        for (std::size_t i = 0; i < I; ++i) {
            rewards[i] = step_reward(interval.records, i, options.reward_constant);
            m.reward_per_agent[i] += rewards[i];
        }
        if (options.record_experience) {
            exp.actions = actions;
            exp.rewards = std::move(rewards);
            if (have_pending) {
                pending.next_obs = exp.obs;
                pending.next_has_task = exp.has_task;
                pending.next_actor_hidden = exp.actor_hidden;
                pending.next_critic_hidden = exp.critic_hidden;
                out.steps.push_back(std::move(pending));
            }
            pending = std::move(exp);
            have_pending = true;
        }
        m.intervals += 1;
    }

    if (have_pending) {
        // Terminal step; successor fields are placeholders of the right shape.
        pending.next_obs = pending.obs;
        pending.next_has_task.assign(I, 0);
        pending.next_actor_hidden = pending.actor_hidden;
        pending.next_critic_hidden = pending.critic_hidden;
        pending.done = true;
        out.steps.push_back(std::move(pending));
    }

    m.generated = env.total_generated - generated_before;
    m.completed = env.total_completed - completed_before;
    m.dropped = env.total_dropped - dropped_before;
    m.ignored_actions = env.ignored_actions - ignored_before;
    double total_reward = 0.0;
    for (double r : m.reward_per_agent) total_reward += r;
    m.mean_reward = I > 0 ? total_reward / static_cast<double>(I) : 0.0;
    if (m.generated == 0) {
        m.completion_rate = 1.0;
        m.no_tasks = true;
    } else {
        m.completion_rate = static_cast<double>(m.completed) / static_cast<double>(m.generated);
    }
    const std::size_t finished = m.completed + m.dropped;
    m.avg_latency_s = finished > 0 ? m.objective_s / static_cast<double>(finished) : 0.0;
    return out;
}

void write_trajectory(std::ostream& out, std::span<const Experience> steps) {
    for (const auto& s : steps) {
        for (std::size_t i = 0; i < s.obs.size(); ++i) {
            nlohmann::json rec;
            rec["t"] = s.t;
            rec["i"] = i;
            rec["obs"] = s.obs[i];
            rec["action"] = s.actions[i];
            rec["reward"] = s.rewards[i];
            out << rec.dump() << '\n';
        }
    }
}

}  // namespace edgeoff::agent
