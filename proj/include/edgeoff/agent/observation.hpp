/**
 * @file observation.hpp
 * @brief Per-agent local observation and the discrete action encoding.
 *
 * Layout (length 4 + 4M), each entry min-max normalized to [0, 1]:
 *
 *   [ s, e, d, T^L, q^Co[0..M), q^EC[0..M), g-bar[0..M), omega[0..M) ]
 *
 * T^L is the wait before the local device frees up, (tau-hat - t) dt, not
 * counting the new task's own service time. omega is the path-loss
 * coefficient relative to the mean over all pairs. An IED with no new task
 * sees zeros in the three task slots.
 */
#pragma once

#include <cstddef>
#include <vector>

#include "edgeoff/sim/system.hpp"

namespace edgeoff::agent {

struct ObservationConfig {
    double queue_cap_mb = 50.0;
    double gain_cap = 10.0;
    double pathloss_cap = 10.0;

    bool operator==(const ObservationConfig&) const = default;
};

/// Unnormalized counterpart, for heuristics.
struct RawObservation {
    bool has_task = false;
    double size_mb = 0.0;
    double density = 0.0;
    double deadline_s = 0.0;
    double local_wait_s = 0.0;
    std::vector<double> comm_backlog_mb;
    std::vector<double> edge_backlog_mb;
    std::vector<double> gain;
    std::vector<double> pathloss_rel;
};

inline std::size_t observation_size(std::size_t num_ess) { return 4 + 4 * num_ess; }

RawObservation build_raw_observation(const sim::SystemState& state, std::size_t ied);

std::vector<double> normalize_observation(const RawObservation& raw, const sim::SystemConfig& config,
                                          const ObservationConfig& obs_config);

std::vector<double> build_observation(const sim::SystemState& state, std::size_t ied,
                                      const ObservationConfig& obs_config = {});

struct Action {
    bool offload = false;
    std::size_t es = 0;

    bool operator==(const Action&) const = default;
};

/// Index 0 is local execution, k >= 1 offloads to ES k - 1. Throws ProtocolError past M.
Action decode_action(int index, std::size_t num_ess);
int encode_action(const Action& action, std::size_t num_ess);
/// Length M + 1; all zeros for the no-op index.
std::vector<double> one_hot(int index, std::size_t num_ess);

}  // namespace edgeoff::agent
