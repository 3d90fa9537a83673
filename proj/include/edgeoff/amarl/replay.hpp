/**
 * @file replay.hpp
 * @brief Shared ring buffer of joint transitions.
 *
 * Steps are stored once; the successor of a non-terminal step is the next
 * stored step, so whole episodes must be pushed in order. Eviction is FIFO.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "edgeoff/agent/rollout.hpp"
#include "edgeoff/common/rng.hpp"
#include "edgeoff/nn/param_store.hpp"
#include "edgeoff/nn/tensor.hpp"

namespace edgeoff::amarl {

/// Sample-major: row b * agents + i. Action rows are one-hot (zero for no-op).
struct Batch {
    std::size_t size = 0;
    std::size_t agents = 0;
    nn::Tensor2 obs;
    nn::Tensor2 next_obs;
    nn::Tensor2 actions;
    nn::Tensor2 context;
    nn::Tensor2 next_context;
    nn::Tensor2 actor_hidden;
    nn::Tensor2 next_actor_hidden;
    std::vector<double> rewards;
    std::vector<std::uint8_t> has_task;
    std::vector<std::uint8_t> next_has_task;
    /// Per sample.
    std::vector<std::uint8_t> done;
};

class ReplayBuffer {
public:
    ReplayBuffer(std::size_t capacity, std::size_t agents, std::size_t obs_dim, std::size_t num_actions,
                 std::size_t hidden_dim);

    /// Appends one episode. Throws ShapeError on inconsistent agent counts or widths.
    void push_episode(std::span<const agent::Experience> steps);

    std::size_t size() const noexcept { return count_; }
    std::size_t capacity() const noexcept { return capacity_; }
    std::uint64_t pushed() const noexcept { return pushed_; }

    /// `n` distinct transitions uniformly at random. Throws ParameterError if n > size().
    Batch sample(std::size_t n, Rng& rng) const;
    /// Transitions by logical position (0 = oldest); used by tests.
    Batch gather(std::span<const std::size_t> logical) const;

    /// Round-trip through a parameter store, for checkpointing.
    nn::ParamStore to_store() const;
    void from_store(const nn::ParamStore& store);

private:
    std::size_t slot_of(std::size_t logical) const noexcept;

    std::size_t capacity_;
    std::size_t agents_;
    std::size_t obs_dim_;
    std::size_t actions_;
    std::size_t hidden_dim_;
    std::size_t head_ = 0;
    std::size_t count_ = 0;
    std::uint64_t pushed_ = 0;

    std::vector<double> obs_;
    std::vector<double> context_;
    std::vector<double> hidden_;
    std::vector<double> rewards_;
    std::vector<int> actions_taken_;
    std::vector<std::uint8_t> has_task_;
    std::vector<std::uint8_t> done_;
};

}  // namespace edgeoff::amarl
