#include "edgeoff/amarl/replay.hpp"

#include <algorithm>
#include <string>

#include "edgeoff/common/error.hpp"

namespace edgeoff::amarl {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t agents, std::size_t obs_dim, std::size_t num_actions,
                           std::size_t hidden_dim)
    : capacity_(capacity), agents_(agents), obs_dim_(obs_dim), actions_(num_actions), hidden_dim_(hidden_dim) {
    if (capacity == 0 || agents == 0) throw ParameterError("replay buffer needs positive capacity and agent count");
    obs_.assign(capacity * agents * obs_dim, 0.0);
    context_.assign(capacity * agents * obs_dim, 0.0);
    hidden_.assign(capacity * agents * hidden_dim, 0.0);
    rewards_.assign(capacity * agents, 0.0);
    actions_taken_.assign(capacity * agents, -1);
    has_task_.assign(capacity * agents, 0);
    done_.assign(capacity, 0);
}

std::size_t ReplayBuffer::slot_of(std::size_t logical) const noexcept {
    const std::size_t oldest = (head_ + capacity_ - count_) % capacity_;
    return (oldest + logical) % capacity_;
}

void ReplayBuffer::push_episode(std::span<const agent::Experience> steps) {
    for (const auto& s : steps) {
        if (s.obs.size() != agents_ || s.actions.size() != agents_ || s.rewards.size() != agents_ ||
            s.critic_hidden.size() != agents_ || s.actor_hidden.size() != agents_ || s.has_task.size() != agents_) {
            throw ShapeError("replay: experience agent count differs from the buffer's " + std::to_string(agents_));
        }
        const std::size_t slot = head_;
        for (std::size_t i = 0; i < agents_; ++i) {
            const std::size_t k = slot * agents_ + i;
            if (s.obs[i].size() != obs_dim_ || s.critic_hidden[i].size() != obs_dim_) {
                throw ShapeError("replay: observation width differs from the buffer's");
            }
            std::copy(s.obs[i].begin(), s.obs[i].end(), obs_.begin() + static_cast<std::ptrdiff_t>(k * obs_dim_));
            std::copy(s.critic_hidden[i].begin(), s.critic_hidden[i].end(),
                      context_.begin() + static_cast<std::ptrdiff_t>(k * obs_dim_));
            const auto& h = s.actor_hidden[i];
            if (!h.empty() && h.size() != hidden_dim_) throw ShapeError("replay: actor hidden width differs");
            for (std::size_t c = 0; c < hidden_dim_; ++c) hidden_[k * hidden_dim_ + c] = h.empty() ? 0.0 : h[c];
            rewards_[k] = s.rewards[i];
            actions_taken_[k] = s.actions[i];
            has_task_[k] = s.has_task[i];
        }
        done_[slot] = s.done ? 1 : 0;
        head_ = (head_ + 1) % capacity_;
        count_ = std::min(count_ + 1, capacity_);
        pushed_ += 1;
    }
}

Batch ReplayBuffer::sample(std::size_t n, Rng& rng) const {
    if (n > count_) {
        throw ParameterError("replay: requested " + std::to_string(n) + " samples from " + std::to_string(count_));
    }
    // Floyd's algorithm: n distinct indices in [0, count).
    std::vector<std::size_t> picked;
    picked.reserve(n);
    for (std::size_t j = count_ - n; j < count_; ++j) {
        const auto t = static_cast<std::size_t>(rng.below(j + 1));
        if (std::find(picked.begin(), picked.end(), t) == picked.end()) {
            picked.push_back(t);
        } else {
            picked.push_back(j);
        }
    }
    return gather(picked);
}

Batch ReplayBuffer::gather(std::span<const std::size_t> logical) const {
    const std::size_t B = logical.size();
    const std::size_t I = agents_;
    Batch b;
    b.size = B;
    b.agents = I;
    b.obs = nn::Tensor2(B * I, obs_dim_);
    b.next_obs = nn::Tensor2(B * I, obs_dim_);
    b.context = nn::Tensor2(B * I, obs_dim_);
    b.next_context = nn::Tensor2(B * I, obs_dim_);
    b.actions = nn::Tensor2(B * I, actions_);
    b.actor_hidden = nn::Tensor2(B * I, hidden_dim_);
    b.next_actor_hidden = nn::Tensor2(B * I, hidden_dim_);
    b.rewards.resize(B * I);
    b.has_task.resize(B * I);
    b.next_has_task.resize(B * I);
    b.done.resize(B);
    for (std::size_t s = 0; s < B; ++s) {
        if (logical[s] >= count_) throw ParameterError("replay: position past the stored transitions");
        const std::size_t slot = slot_of(logical[s]);
        const bool done = done_[slot] != 0;
        if (!done && logical[s] + 1 >= count_) throw ProtocolError("replay: transition without a stored successor");
        const std::size_t next = done ? slot : slot_of(logical[s] + 1);
        b.done[s] = done ? 1 : 0;
        for (std::size_t i = 0; i < I; ++i) {
            const std::size_t row = s * I + i;
            const std::size_t k = slot * I + i;
            const std::size_t kn = next * I + i;
            std::copy_n(obs_.begin() + static_cast<std::ptrdiff_t>(k * obs_dim_), obs_dim_, b.obs.row(row).begin());
            std::copy_n(obs_.begin() + static_cast<std::ptrdiff_t>(kn * obs_dim_), obs_dim_,
                        b.next_obs.row(row).begin());
            std::copy_n(context_.begin() + static_cast<std::ptrdiff_t>(k * obs_dim_), obs_dim_,
                        b.context.row(row).begin());
            std::copy_n(context_.begin() + static_cast<std::ptrdiff_t>(kn * obs_dim_), obs_dim_,
                        b.next_context.row(row).begin());
            std::copy_n(hidden_.begin() + static_cast<std::ptrdiff_t>(k * hidden_dim_), hidden_dim_,
                        b.actor_hidden.row(row).begin());
            std::copy_n(hidden_.begin() + static_cast<std::ptrdiff_t>(kn * hidden_dim_), hidden_dim_,
                        b.next_actor_hidden.row(row).begin());
            const int a = actions_taken_[k];
            if (has_task_[k] && a >= 0 && static_cast<std::size_t>(a) < actions_) {
                b.actions(row, static_cast<std::size_t>(a)) = 1.0;
            }
            b.rewards[row] = rewards_[k];
            b.has_task[row] = has_task_[k];
            b.next_has_task[row] = done ? 0 : has_task_[kn];
        }
    }
    return b;
}

nn::ParamStore ReplayBuffer::to_store() const {
    nn::ParamStore store;
    const auto put = [&store](const std::string& name, const auto& data) {
        const auto idx = store.add(name, 1, data.size());
        for (std::size_t k = 0; k < data.size(); ++k) store[idx].value.data()[k] = static_cast<double>(data[k]);
    };
    put("replay.meta", std::vector<double>{static_cast<double>(head_), static_cast<double>(count_),
                                           static_cast<double>(pushed_)});
    put("replay.obs", obs_);
    put("replay.context", context_);
    put("replay.hidden", hidden_);
    put("replay.rewards", rewards_);
    put("replay.actions", actions_taken_);
    put("replay.has_task", has_task_);
    put("replay.done", done_);
    return store;
}

void ReplayBuffer::from_store(const nn::ParamStore& store) {
    const auto get = [&store](const std::string& name, auto& data) {
        const auto& v = store[store.index_of(name)].value;
        if (v.size() != data.size()) throw CompatibilityError("replay: '" + name + "' has the wrong length");
        using T = typename std::decay_t<decltype(data)>::value_type;
        for (std::size_t k = 0; k < data.size(); ++k) data[k] = static_cast<T>(v.data()[k]);
    };
    std::vector<double> meta(3);
    get("replay.meta", meta);
    head_ = static_cast<std::size_t>(meta[0]);
    count_ = static_cast<std::size_t>(meta[1]);
    pushed_ = static_cast<std::uint64_t>(meta[2]);
    get("replay.obs", obs_);
    get("replay.context", context_);
    get("replay.hidden", hidden_);
    get("replay.rewards", rewards_);
    get("replay.actions", actions_taken_);
    get("replay.has_task", has_task_);
    get("replay.done", done_);
}

}  // namespace edgeoff::amarl
