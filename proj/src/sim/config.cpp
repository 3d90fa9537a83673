#include "edgeoff/sim/config.hpp"

#include <cmath>
#include <string>

#include "edgeoff/common/error.hpp"

namespace edgeoff::sim {
namespace {

void check_range(const Range& r, const char* name, bool strictly_positive) {
    if (!std::isfinite(r.low) || !std::isfinite(r.high)) {
        throw ConfigError(name, "range bounds must be finite");
    }
    if (r.low > r.high) {
        throw ConfigError(name, std::string(name) + " low > high");
    }
    if (strictly_positive && r.low <= 0.0) {
        throw ConfigError(name, "range must be strictly positive");
    }
}

void check_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(name, "must be > 0");
}

}  // namespace

void SystemConfig::validate() const {
    if (num_ieds < 1) throw ConfigError("num_ieds", "must be >= 1");
    if (num_ess < 1) throw ConfigError("num_ess", "must be >= 1");
    if (num_channels < 1) throw ConfigError("num_channels", "must be >= 1");
    if (episode_intervals < 1) throw ConfigError("episode_intervals", "must be >= 1");
    check_positive(bandwidth_hz, "bandwidth_hz");
    check_positive(interval_s, "interval_s");
    check_positive(area_m, "area_m");
    if (!(task_prob >= 0.0 && task_prob <= 1.0)) throw ConfigError("task_prob", "must lie in [0, 1]");
    check_range(size_mb, "size_range", true);
    check_range(density_gcycles_per_mb, "density_range", true);
    check_range(deadline_s, "deadline_range", true);
    check_range(ied_gpu_hz, "ied_gpu_hz", true);
    check_range(es_gpu_hz, "es_gpu_hz", true);
    check_positive(tx_power_w, "tx_power_w");
    check_positive(noise_power, "noise_power");
    if (!(pathloss_exp >= 0.0)) throw ConfigError("pathloss_exp", "must be >= 0");
    if (!(drop_penalty_s >= 0.0)) throw ConfigError("drop_penalty_s", "must be >= 0");
}

SystemConfig default_system_config() { return SystemConfig{}; }

SystemConfig desk_system_config() {
    SystemConfig c;
    c.num_ieds = 8;
    c.num_ess = 2;
    c.num_channels = 2;
    c.bandwidth_hz = 10e6;
    return c;
}

}  // namespace edgeoff::sim
