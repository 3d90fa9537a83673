#include "edgeoff/amarl/evaluate.hpp"

#include "edgeoff/amarl/model_io.hpp"

namespace edgeoff::amarl {

agent::EvalReport evaluate(const std::filesystem::path& checkpoint_dir, const sim::SystemConfig& config,
                           std::size_t episodes, std::uint64_t seed, const EvalOptions& options) {
    config.validate();
    ModelMeta expected;
    expected.agents = config.num_ieds;
    expected.obs_dim = agent::observation_size(config.num_ess);
    expected.actions = config.num_ess + 1;
    auto loaded = load_actors(checkpoint_dir, expected);
    auto policies = make_actor_policies(loaded.actor, loaded.stores, seed);
    agent::RolloutOptions ro;
    ro.observation = options.observation;
    ro.reward_constant = options.reward_constant;
    ro.explore = false;
    ro.record_experience = false;
    return agent::evaluate_policies(config, seed, policies, episodes, ro, options.first_episode);
}

}  // namespace edgeoff::amarl
