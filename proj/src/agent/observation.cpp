#include "edgeoff/agent/observation.hpp"

#include <algorithm>
#include <string>

#include "edgeoff/common/error.hpp"

namespace edgeoff::agent {
namespace {

double unit(double v, double low, double high) {
    if (!(high > low)) return v >= high ? 1.0 : 0.0;
    return std::clamp((v - low) / (high - low), 0.0, 1.0);
}

}  // namespace

RawObservation build_raw_observation(const sim::SystemState& state, std::size_t ied) {
    const std::size_t M = state.num_ess();
    const auto& cfg = state.config;
    RawObservation raw;
    if (state.fresh[ied]) {
        const auto& task = state.tasks[*state.fresh[ied]];
        raw.has_task = true;
        raw.size_mb = task.size_mb;
        raw.density = task.density;
        raw.deadline_s = task.deadline_s;
    }
    const auto wait = std::max<std::int64_t>(state.local[ied].last_completion - state.clock, 0);
    raw.local_wait_s = static_cast<double>(wait) * cfg.interval_s;

    double mean_omega = 0.0;
    for (double w : state.radio.largescale) mean_omega += w;
    mean_omega /= static_cast<double>(state.radio.largescale.size());

    raw.comm_backlog_mb.resize(M);
    raw.edge_backlog_mb.resize(M);
    raw.gain.resize(M);
    raw.pathloss_rel.resize(M);
    for (std::size_t m = 0; m < M; ++m) {
        const std::size_t k = state.pair_index(ied, m);
        raw.comm_backlog_mb[m] = state.comm[k].backlog_mb;
        raw.edge_backlog_mb[m] = state.edge[k].backlog_mb;
        raw.gain[m] = state.radio.gain[k];
        raw.pathloss_rel[m] = state.radio.largescale[k] / mean_omega;
    }
    return raw;
}

std::vector<double> normalize_observation(const RawObservation& raw, const sim::SystemConfig& config,
                                          const ObservationConfig& obs_config) {
    const std::size_t M = raw.gain.size();
    std::vector<double> obs;
    obs.reserve(observation_size(M));
    if (raw.has_task) {
        obs.push_back(unit(raw.size_mb, config.size_mb.low, config.size_mb.high));
        obs.push_back(unit(raw.density, config.density_gcycles_per_mb.low, config.density_gcycles_per_mb.high));
        obs.push_back(unit(raw.deadline_s, config.deadline_s.low, config.deadline_s.high));
    } else {
        obs.insert(obs.end(), 3, 0.0);
    }
    obs.push_back(unit(raw.local_wait_s, 0.0, config.deadline_s.high));
    for (double q : raw.comm_backlog_mb) obs.push_back(unit(q, 0.0, obs_config.queue_cap_mb));
    for (double q : raw.edge_backlog_mb) obs.push_back(unit(q, 0.0, obs_config.queue_cap_mb));
    for (double g : raw.gain) obs.push_back(unit(g, 0.0, obs_config.gain_cap));
    for (double w : raw.pathloss_rel) obs.push_back(unit(w, 0.0, obs_config.pathloss_cap));
    return obs;
}

std::vector<double> build_observation(const sim::SystemState& state, std::size_t ied,
                                      const ObservationConfig& obs_config) {
    return normalize_observation(build_raw_observation(state, ied), state.config, obs_config);
}

Action decode_action(int index, std::size_t num_ess) {
    if (index < 0 || index > static_cast<int>(num_ess)) {
        throw ProtocolError("action index " + std::to_string(index) + " outside [0, " + std::to_string(num_ess) + "]");
    }
    if (index == 0) return Action{false, 0};
    return Action{true, static_cast<std::size_t>(index - 1)};
}

int encode_action(const Action& action, std::size_t num_ess) {
    if (!action.offload) return 0;
    if (action.es >= num_ess) throw ProtocolError("ES " + std::to_string(action.es) + " does not exist");
    return static_cast<int>(action.es) + 1;
}

std::vector<double> one_hot(int index, std::size_t num_ess) {
    std::vector<double> v(num_ess + 1, 0.0);
    if (index >= 0 && index <= static_cast<int>(num_ess)) v[static_cast<std::size_t>(index)] = 1.0;
    return v;
}

}  // namespace edgeoff::agent
