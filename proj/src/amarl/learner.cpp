#include "edgeoff/amarl/learner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "edgeoff/amarl/model_io.hpp"
#include "edgeoff/common/error.hpp"
#include "edgeoff/common/text.hpp"
#include "edgeoff/nn/checkpoint.hpp"
#include "edgeoff/nn/optim.hpp"

namespace edgeoff::amarl {

using nn::Tensor2;

namespace {

std::string target_actor_stem(std::size_t i) { return "target_actor_" + std::to_string(i); }

/// Rows b * agents + i for one agent, as a (B x cols) tensor.
Tensor2 agent_rows(const Tensor2& t, std::size_t agents, std::size_t i) {
    const std::size_t B = t.rows() / agents;
    Tensor2 out(B, t.cols());
    for (std::size_t b = 0; b < B; ++b) {
        const auto src = t.row(b * agents + i);
        std::copy(src.begin(), src.end(), out.row(b).begin());
    }
    return out;
}

Tensor2 gumbel_noise(std::size_t rows, std::size_t cols, Rng& rng) {
    Tensor2 out(rows, cols);
    for (auto& v : out.values()) v = rng.gumbel();
    return out;
}

double clip_value(double v, double limit) { return std::max(-limit, std::min(limit, v)); }

void require_finite_loss(double loss, const char* what, std::size_t agent = std::numeric_limits<std::size_t>::max()) {
    if (std::isfinite(loss)) return;
    std::ostringstream msg;
    msg << what << " loss is not finite (" << loss << ")";
    if (agent != std::numeric_limits<std::size_t>::max()) msg << " for agent " << agent;
    msg << "; update aborted";
    throw NumericalError(msg.str());
}

}  // namespace

Networks make_networks(std::size_t agents, std::size_t num_ess, const TrainConfig& config, std::uint64_t seed) {
    const std::size_t obs = agent::observation_size(num_ess);
    const std::size_t actions = num_ess + 1;
    Networks net;
    for (std::size_t i = 0; i < agents; ++i) {
        net.actors.push_back(make_actor_store(net.actor, obs, config.hidden, actions, derive_seed(seed, streams::kInit, i + 1)));
    }
    net.target_actors = net.actors;
    net.critic = Critic::create(net.critic_store, obs, actions, config.hidden, config.heads, config.attention);
    nn::init_glorot(net.critic_store, derive_seed(seed, streams::kInit, 0));
    net.target_critic = net.critic_store;
    return net;
}

double soft_target(double reward, double gamma, double q_next, double entropy_weight, double logp_next, bool done) {
    if (done) return reward;
    return reward + gamma * (q_next - entropy_weight * logp_next);
}

std::vector<double> compute_targets(const Networks& net, const Batch& batch, const TrainConfig& config,
                                    Rng& noise_rng, Rng& sample_rng) {
    const std::size_t I = batch.agents;
    const std::size_t B = batch.size;
    const std::size_t A = net.actor.actions();
    Tensor2 next_actions(B * I, A);
    std::vector<double> next_logp(B * I, 0.0);
    for (std::size_t i = 0; i < I; ++i) {
        ActorCache cache;
        Tensor2 logits = net.actor.forward(net.target_actors[i], agent_rows(batch.next_obs, I, i),
                                           agent_rows(batch.next_actor_hidden, I, i), cache);
        const Tensor2 logp = nn::log_softmax_rows(logits);
        if (config.smoothing_sigma > 0.0) {
            for (auto& v : logits.values()) {
                v += clip_value(config.smoothing_sigma * noise_rng.normal(), config.smoothing_clip);
            }
        }
        for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t k = 0; k < A; ++k) logits(b, k) += sample_rng.gumbel();
            const std::size_t row = b * I + i;
            if (!batch.next_has_task[row]) continue;
            const std::size_t a = nn::argmax_row(logits, b);
            next_actions(row, a) = 1.0;
            next_logp[row] = logp(b, a);
        }
    }
    CriticCache cache;
    const Tensor2 q_next =
        net.critic.forward(net.target_critic, CriticInput{batch.next_obs, next_actions, batch.next_context}, I, cache);
    std::vector<double> y(B * I);
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t i = 0; i < I; ++i) {
            const std::size_t row = b * I + i;
            y[row] = soft_target(batch.rewards[row], config.gamma, q_next(row, 0), config.entropy_weight,
                                 next_logp[row], batch.done[b] != 0);
        }
    }
    return y;
}

double critic_loss(const Critic& critic, nn::ParamStore& critic_store, const Batch& batch,
                   const std::vector<double>& targets, const Tensor2* dropout, bool store_grads) {
    const std::size_t n = batch.size * batch.agents;
    if (targets.size() != n) throw ShapeError("critic loss: target count differs from the batch rows");
    CriticCache cache;
    const Tensor2 q = critic.forward(critic_store, CriticInput{batch.obs, batch.actions, batch.context}, batch.agents,
                                     cache, dropout);
    const double inv_b = 1.0 / static_cast<double>(batch.size);
    double loss = 0.0;
    Tensor2 dq(n, 1);
    for (std::size_t r = 0; r < n; ++r) {
        const double diff = q(r, 0) - targets[r];
        loss += diff * diff * inv_b;
        dq(r, 0) = 2.0 * diff * inv_b;
    }
    if (store_grads) critic.backward(critic_store, cache, dq);
    return loss;
}

std::vector<double> actor_losses(const Actor& actor, std::vector<nn::ParamStore>& actors, const Critic& critic,
                                 const nn::ParamStore& critic_store, const Batch& batch,
                                 const ActorLossInputs& inputs, bool store_grads) {
    const std::size_t I = batch.agents;
    const std::size_t B = batch.size;
    const std::size_t A = actor.actions();
    const double lam = inputs.entropy_weight;
    if (inputs.noise.size() != I) throw ShapeError("actor loss: need one noise tensor per agent");
    // Gradients w.r.t. actions need a backward pass; the scratch copy keeps the shared critic untouched.
    nn::ParamStore scratch = critic_store;
    const CriticKeys base = critic.encode_keys(critic_store, CriticInput{batch.obs, batch.actions, batch.context});
    std::vector<double> losses(I, 0.0);
    for (std::size_t i = 0; i < I; ++i) {
        std::size_t n_i = 0;
        for (std::size_t b = 0; b < B; ++b) n_i += batch.has_task[b * I + i] ? 1 : 0;
        if (n_i == 0) continue;
        const double w = 1.0 / static_cast<double>(n_i);

        ActorCache acache;
        const Tensor2* mask = inputs.dropout.size() == I && !inputs.dropout[i].empty() ? &inputs.dropout[i] : nullptr;
        const Tensor2 logits = actor.forward(actors[i], agent_rows(batch.obs, I, i),
                                             agent_rows(batch.actor_hidden, I, i), acache, mask);
        const Tensor2 logp = nn::log_softmax_rows(logits);
        const Tensor2 relaxed = nn::relaxed_one_hot(logits, inputs.noise[i], inputs.temperature);

        CriticInput query{agent_rows(batch.obs, I, i), agent_rows(batch.actions, I, i), agent_rows(batch.context, I, i)};
        for (std::size_t b = 0; b < B; ++b) {
            if (!batch.has_task[b * I + i]) continue;
            std::copy(relaxed.row(b).begin(), relaxed.row(b).end(), query.actions.row(b).begin());
        }
        CriticCache ccache;
        const Tensor2 q = critic.forward(scratch, query, I, ccache, nullptr, &base, i);

        Tensor2 dq(B, 1);
        double loss = 0.0;
        for (std::size_t b = 0; b < B; ++b) {
            if (!batch.has_task[b * I + i]) continue;
            double ent = 0.0;
            for (std::size_t k = 0; k < A; ++k) ent += relaxed(b, k) * logp(b, k);
            loss += w * (lam * ent - q(b, 0));
            dq(b, 0) = -w;
        }
        losses[i] = loss;
        if (!store_grads) continue;

        const Tensor2 dactions = critic.backward(scratch, ccache, dq);
        Tensor2 drelaxed(B, A);
        Tensor2 dlogp(B, A);
        for (std::size_t b = 0; b < B; ++b) {
            if (!batch.has_task[b * I + i]) continue;
            for (std::size_t k = 0; k < A; ++k) {
                drelaxed(b, k) = lam * logp(b, k) * w + dactions(b, k);
                dlogp(b, k) = lam * relaxed(b, k) * w;
            }
        }
        Tensor2 dlogits = nn::relaxed_one_hot_backward(relaxed, drelaxed, inputs.temperature);
        nn::add_inplace(dlogits, nn::log_softmax_backward(logp, dlogp));
        actor.backward(actors[i], acache, dlogits);
    }
    return losses;
}

void soft_update_targets(Networks& net, double tau) {
    for (std::size_t i = 0; i < net.actors.size(); ++i) nn::soft_update(net.target_actors[i], net.actors[i], tau);
    nn::soft_update(net.target_critic, net.critic_store, tau);
}

UpdateStats update(Networks& net, const Batch& batch, const TrainConfig& config, double temperature, Rng& noise_rng,
                   Rng& dropout_rng) {
    const std::size_t I = batch.agents;
    const std::size_t B = batch.size;
    Rng sample_rng(noise_rng.next_u64());
    const auto targets = compute_targets(net, batch, config, noise_rng, sample_rng);

    UpdateStats stats;
    net.critic_store.zero_grad();
    Tensor2 critic_mask;
    if (config.dropout > 0.0) critic_mask = nn::dropout_mask(B * I, config.hidden, config.dropout, dropout_rng);
    stats.critic_loss = critic_loss(net.critic, net.critic_store, batch, targets,
                                    critic_mask.empty() ? nullptr : &critic_mask, true);
    require_finite_loss(stats.critic_loss, "critic");
    nn::clip_grad_norm(net.critic_store, config.grad_clip);
    nn::adam_step(net.critic_store, nn::AdamConfig{config.lr_critic});

    ActorLossInputs inputs;
    inputs.temperature = temperature;
    inputs.entropy_weight = config.entropy_weight;
    for (std::size_t i = 0; i < I; ++i) {
        inputs.noise.push_back(gumbel_noise(B, net.actor.actions(), noise_rng));
        if (config.dropout > 0.0) inputs.dropout.push_back(nn::dropout_mask(B, config.hidden, config.dropout, dropout_rng));
    }
    for (auto& s : net.actors) s.zero_grad();
    const auto losses = actor_losses(net.actor, net.actors, net.critic, net.critic_store, batch, inputs, true);
    for (std::size_t i = 0; i < I; ++i) {
        require_finite_loss(losses[i], "actor", i);
        stats.actor_loss += losses[i] / static_cast<double>(I);
    }
    for (auto& s : net.actors) {
        nn::clip_grad_norm(s, config.grad_clip);
        nn::adam_step(s, nn::AdamConfig{config.lr_actor});
    }
    soft_update_targets(net, config.polyak);
    return stats;
}

Trainer::Trainer(const sim::SystemConfig& system, const TrainConfig& config)
    : system_(system),
      config_(config),
      env_((system.validate(), config.validate(), sim::new_system(system, config.seed))),
      net_(make_networks(system.num_ieds, system.num_ess, config, config.seed)),
      replay_(config.replay_capacity, system.num_ieds, agent::observation_size(system.num_ess), system.num_ess + 1,
              config.hidden) {}

EpisodeRecord Trainer::run_episode() {
    if (finished()) throw ParameterError("trainer: all configured episodes have run");
    const std::uint64_t ep = episode_;
    sim::reset_episode(env_, ep);
    auto policies = make_actor_policies(net_.actor, net_.actors, config_.seed);
    agent::RolloutOptions ro;
    ro.observation = config_.observation;
    ro.reward_constant = config_.reward_constant;
    ro.critic_memory_decay = config_.critic_memory_decay;
    ro.explore = true;
    ro.record_experience = true;
    auto run = agent::rollout(env_, policies, system_.episode_intervals, ro);
    replay_.push_episode(run.steps);

    EpisodeRecord rec;
    rec.episode = episode_;
    rec.metrics = std::move(run.metrics);
    rec.critic_loss = std::numeric_limits<double>::quiet_NaN();
    rec.actor_loss = std::numeric_limits<double>::quiet_NaN();

    if (replay_.size() >= std::max(config_.warmup, config_.batch)) {
        Rng replay_rng(derive_seed(config_.seed, streams::kReplay, ep));
        Rng noise_rng(derive_seed(config_.seed, streams::kNoise, ep));
        Rng dropout_rng(derive_seed(config_.seed, streams::kDropout, ep));
        const double temperature = config_.temperature_at(episode_);
        double closs = 0.0;
        double aloss = 0.0;
        for (std::size_t u = 0; u < config_.updates_per_episode; ++u) {
            const Batch batch = replay_.sample(config_.batch, replay_rng);
            const auto stats = update(net_, batch, config_, temperature, noise_rng, dropout_rng);
            closs += stats.critic_loss;
            aloss += stats.actor_loss;
            rec.updates += 1;
            over_ceiling_ = stats.critic_loss > config_.loss_ceiling ? over_ceiling_ + 1 : 0;
            if (over_ceiling_ >= config_.divergence_patience) {
                std::ostringstream msg;
                msg << "training diverged: critic loss above " << config_.loss_ceiling << " for " << over_ceiling_
                    << " consecutive updates (episode " << episode_ << ", update " << u << ", last loss "
                    << stats.critic_loss << ", actor loss " << stats.actor_loss << ")";
                throw NumericalError(msg.str());
            }
        }
        if (rec.updates > 0) {
            rec.critic_loss = closs / static_cast<double>(rec.updates);
            rec.actor_loss = aloss / static_cast<double>(rec.updates);
        }
    }
    episode_ += 1;
    return rec;
}

void Trainer::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    ModelMeta meta{system_.num_ieds, agent::observation_size(system_.num_ess), system_.num_ess + 1, config_.hidden};
    save_model_meta(dir, meta);
    save_actors(dir, net_.actors, true);
    for (std::size_t i = 0; i < net_.target_actors.size(); ++i) {
        nn::save_checkpoint(dir, target_actor_stem(i), net_.target_actors[i], false);
    }
    nn::save_checkpoint(dir, "critic", net_.critic_store, true);
    nn::save_checkpoint(dir, "target_critic", net_.target_critic, false);
    nn::save_checkpoint(dir, "replay", replay_.to_store(), false);
    const auto path = dir / "trainer.state";
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "episode " << episode_ << "\nover_ceiling " << over_ceiling_ << "\nseed " << config_.seed << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

void Trainer::load(const std::filesystem::path& dir) {
    const auto path = dir / "trainer.state";
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::map<std::string, std::uint64_t> fields;
    std::string line;
    while (std::getline(in, line)) {
        const auto parts = split(line, ' ');
        std::uint64_t v = 0;
        if (parts.size() != 2 || !parse_u64(parts[1], v)) throw IoError(path.string() + ": malformed line '" + line + "'");
        fields[parts[0]] = v;
    }
    for (const char* key : {"episode", "over_ceiling", "seed"}) {
        if (!fields.count(key)) throw IoError(path.string() + ": missing '" + key + "'");
    }
    if (fields["seed"] != config_.seed) {
        throw CompatibilityError("checkpoint was trained with seed " + std::to_string(fields["seed"]) +
                                 ", the run uses " + std::to_string(config_.seed));
    }
    ModelMeta meta{system_.num_ieds, agent::observation_size(system_.num_ess), system_.num_ess + 1, config_.hidden};
    if (load_model_meta(dir) != meta) throw CompatibilityError("checkpoint network shapes do not match the configuration");

    Networks net = make_networks(system_.num_ieds, system_.num_ess, config_, config_.seed);
    for (std::size_t i = 0; i < net.actors.size(); ++i) {
        nn::load_checkpoint(dir, actor_stem(i), net.actors[i], true);
        nn::load_checkpoint(dir, target_actor_stem(i), net.target_actors[i], false);
    }
    nn::load_checkpoint(dir, "critic", net.critic_store, true);
    nn::load_checkpoint(dir, "target_critic", net.target_critic, false);
    ReplayBuffer replay(replay_.capacity(), system_.num_ieds, meta.obs_dim, meta.actions, config_.hidden);
    nn::ParamStore rstore = replay.to_store();
    nn::load_checkpoint(dir, "replay", rstore, false);
    replay.from_store(rstore);

    net_ = std::move(net);
    replay_ = std::move(replay);
    episode_ = fields["episode"];
    over_ceiling_ = fields["over_ceiling"];
}

TrainResult train(const sim::SystemConfig& system, const TrainConfig& config, const TrainOptions& options) {
    Trainer trainer(system, config);
    const auto& dir = options.checkpoint_dir;
    if (options.resume && dir && std::filesystem::exists(*dir / "trainer.state")) trainer.load(*dir);
    TrainResult result;
    while (!trainer.finished()) {
        auto rec = trainer.run_episode();
        if (options.on_episode) options.on_episode(rec);
        result.history.push_back(std::move(rec));
        if (dir && config.checkpoint_every > 0 && trainer.next_episode() % config.checkpoint_every == 0 &&
            !trainer.finished()) {
            trainer.save(*dir);
        }
    }
    if (dir) trainer.save(*dir);
    result.networks = trainer.networks();
    return result;
}

}  // namespace edgeoff::amarl
