/**
 * @file model_io.hpp
 * @brief Actor checkpoint layout shared by training and decentralized execution.
 *
 * A checkpoint directory holds `model.meta` (agents, obs_dim, actions,
 * hidden), one `actor_<i>` store per IED, and on the training side the
 * critic, the targets, the replay buffer and `trainer.state`.
 */
#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "edgeoff/amarl/actor.hpp"

namespace edgeoff::amarl {

struct ModelMeta {
    std::size_t agents = 0;
    std::size_t obs_dim = 0;
    std::size_t actions = 0;
    std::size_t hidden = 0;

    bool operator==(const ModelMeta&) const = default;
};

std::string actor_stem(std::size_t agent);

void save_model_meta(const std::filesystem::path& dir, const ModelMeta& meta);
/// Throws IoError when missing or malformed.
ModelMeta load_model_meta(const std::filesystem::path& dir);

void save_actors(const std::filesystem::path& dir, const std::vector<nn::ParamStore>& actors, bool with_optimizer);

struct LoadedActors {
    ModelMeta meta;
    Actor actor;
    std::vector<nn::ParamStore> stores;
};

/// Throws CompatibilityError when the checkpoint does not fit `expected`.
LoadedActors load_actors(const std::filesystem::path& dir, const ModelMeta& expected);

}  // namespace edgeoff::amarl
