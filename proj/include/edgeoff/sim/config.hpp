/**
 * @file config.hpp
 * @brief Static description of one edge-offloading deployment.
 *
 * Units: sizes in MB (1 MB = 8e6 bit), compute density in Gcycles/MB,
 * frequencies in Hz, durations in seconds.
 */
#pragma once

#include <cstddef>
#include <cstdint>

namespace edgeoff::sim {

struct Range {
    double low = 0.0;
    double high = 0.0;

    bool operator==(const Range&) const = default;
};

struct SystemConfig {
    std::size_t num_ieds = 50;
    std::size_t num_ess = 5;
    /// Carried as an identifier only; uplink queues are keyed by (IED, ES).
    std::size_t num_channels = 5;
    double bandwidth_hz = 10e6;
    double interval_s = 0.1;
    std::size_t episode_intervals = 100;
    double area_m = 100.0;
    double task_prob = 0.5;
    Range size_mb{0.5, 5.0};
    Range density_gcycles_per_mb{0.1, 0.5};
    Range deadline_s{0.5, 2.5};
    Range ied_gpu_hz{0.5e9, 2.0e9};
    Range es_gpu_hz{10e9, 20e9};
    double tx_power_w = 0.5;
    double noise_power = 1.0;
    double pathloss_exp = 3.0;
    /// Unit-mean exponential small-scale fading; off gives h = 1.
    bool fading = true;
    /// Extra latency charged to an abandoned task on top of its deadline.
    double drop_penalty_s = 1.0;
    std::uint64_t seed = 1;

    /// Throws ConfigError naming the first offending field.
    void validate() const;

    bool operator==(const SystemConfig&) const = default;
};

/// Full-scale defaults: 50 IEDs and 5 ESs on a 100 m square.
SystemConfig default_system_config();

/// Desk-scale preset: 8 IEDs, 2 ESs, 2 channels, 10 MHz.
SystemConfig desk_system_config();

}  // namespace edgeoff::sim
