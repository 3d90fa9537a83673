/**
 * @file attention.hpp
 * @brief Multi-head scaled dot-product attention over grouped sets.
 *
 * Rows are partitioned into consecutive groups of `group` rows (one group per
 * batch sample, one row per agent). Query row r attends over the key rows of
 * its own group, optionally skipping itself. A query with no admissible key
 * produces a zero output.
 *
 * Projections carry no bias: q = x Wq, k = x Wk, v = x Wv, out = concat(heads) Wo.
 */
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "edgeoff/nn/param_store.hpp"
#include "edgeoff/nn/tensor.hpp"

namespace edgeoff::nn {

struct AttentionSpec {
    std::size_t heads = 4;
    std::size_t model_dim = 32;
    std::size_t key_dim = 8;
    std::string query_name;
    std::string key_name;
    std::string value_name;
    std::string output_name;
};

/// Key and value projections of a key set, reusable across query passes.
struct AttentionKeys {
    Tensor2 xkv;
    Tensor2 k;
    Tensor2 v;
};

struct AttentionCache {
    Tensor2 xq;
    Tensor2 xkv;
    Tensor2 q;
    Tensor2 k;
    Tensor2 v;
    Tensor2 concat;
    /// weights[(row * heads + h) * group + j]; excluded slots hold 0.
    std::vector<double> weights;
    std::size_t group = 1;
    bool exclude_self = true;
    /// Set when each query row stands for one slot of a whole key group.
    std::optional<std::size_t> query_slot;
    /// False when the keys were projected ahead of time; backward then skips them.
    bool key_grads = true;
};

class MultiHeadAttention {
public:
    MultiHeadAttention() = default;
    /// Throws ParameterError unless model_dim is divisible by heads.
    static MultiHeadAttention create(ParamStore& store, const std::string& name, std::size_t model_dim,
                                     std::size_t heads);

    const AttentionSpec& spec() const noexcept { return spec_; }

    /// `xq` and `xkv` must have the same row count, a multiple of `group`.
    /// With `query_slot` set, `xq` instead has one row per group and row b
    /// queries group b as its member `query_slot`.
    Tensor2 forward(const ParamStore& store, const Tensor2& xq, const Tensor2& xkv, std::size_t group,
                    bool exclude_self, AttentionCache* cache = nullptr,
                    std::optional<std::size_t> query_slot = std::nullopt) const;

    AttentionKeys project_keys(const ParamStore& store, const Tensor2& xkv) const;

    /// Same as above with fixed, pre-projected keys. Backward then leaves the key
    /// and value projections alone and returns an empty d xkv.
    Tensor2 forward(const ParamStore& store, const Tensor2& xq, const AttentionKeys& keys, std::size_t group,
                    bool exclude_self, AttentionCache* cache = nullptr,
                    std::optional<std::size_t> query_slot = std::nullopt) const;

    /// Returns (d xq, d xkv); accumulates projection gradients.
    std::pair<Tensor2, Tensor2> backward(ParamStore& store, const AttentionCache& cache, const Tensor2& dout) const;

    /// Attention weights of one query row and head, over its group's slots.
    static std::vector<double> weights_of(const AttentionCache& cache, std::size_t row, std::size_t head,
                                          std::size_t heads);

private:
    AttentionSpec spec_;
    std::size_t wq_ = 0;
    std::size_t wk_ = 0;
    std::size_t wv_ = 0;
    std::size_t wo_ = 0;
};

}  // namespace edgeoff::nn
