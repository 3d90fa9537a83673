#include "edgeoff/amarl/config.hpp"

#include <string>

#include "edgeoff/common/error.hpp"

namespace edgeoff::amarl {
namespace {

void require(bool ok, const char* field, const std::string& msg) {
    if (!ok) throw ConfigError(field, msg);
}

}  // namespace

void TrainConfig::validate() const {
    require(hidden > 0, "hidden", "must be positive");
    require(heads > 0, "heads", "must be positive");
    require(hidden % heads == 0, "heads", "hidden size must be divisible by the head count");
    require(lr_actor > 0.0, "lr_actor", "must be positive");
    require(lr_critic > 0.0, "lr_critic", "must be positive");
    require(gamma >= 0.0 && gamma <= 1.0, "gamma", "must lie in [0, 1]");
    require(batch > 0, "batch", "must be positive");
    require(dropout >= 0.0 && dropout < 1.0, "dropout", "must lie in [0, 1)");
    require(entropy_weight >= 0.0, "entropy_weight", "must be non-negative");
    require(smoothing_sigma >= 0.0, "smoothing_sigma", "must be non-negative");
    require(smoothing_clip >= 0.0, "smoothing_clip", "must be non-negative");
    require(polyak >= 0.0 && polyak <= 1.0, "polyak", "must lie in [0, 1]");
    require(temperature_start > 0.0, "temperature_start", "must be positive");
    require(temperature_end > 0.0, "temperature_end", "must be positive");
    require(replay_capacity >= batch, "replay_capacity", "must hold at least one batch");
    require(grad_clip > 0.0, "grad_clip", "must be positive");
    require(loss_ceiling > 0.0, "loss_ceiling", "must be positive");
    require(divergence_patience > 0, "divergence_patience", "must be positive");
    require(critic_memory_decay >= 0.0 && critic_memory_decay < 1.0, "critic_memory_decay", "must lie in [0, 1)");
}

double TrainConfig::temperature_at(std::size_t episode) const {
    if (episodes <= 1) return temperature_end;
    const double frac = static_cast<double>(episode) / static_cast<double>(episodes - 1);
    const double f = frac > 1.0 ? 1.0 : frac;
    return temperature_start + (temperature_end - temperature_start) * f;
}

}  // namespace edgeoff::amarl
