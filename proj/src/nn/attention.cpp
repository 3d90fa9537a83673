#include "edgeoff/nn/attention.hpp"

#include <algorithm>
#include <cmath>

#include "edgeoff/common/error.hpp"

namespace edgeoff::nn {

MultiHeadAttention MultiHeadAttention::create(ParamStore& store, const std::string& name, std::size_t model_dim,
                                              std::size_t heads) {
    if (heads == 0 || model_dim % heads != 0) {
        throw ParameterError("attention '" + name + "': model_dim " + std::to_string(model_dim) +
                             " not divisible by " + std::to_string(heads) + " heads");
    }
    MultiHeadAttention a;
    a.spec_.heads = heads;
    a.spec_.model_dim = model_dim;
    a.spec_.key_dim = model_dim / heads;
    a.spec_.query_name = name + ".query.w";
    a.spec_.key_name = name + ".key.w";
    a.spec_.value_name = name + ".value.w";
    a.spec_.output_name = name + ".output.w";
    a.wq_ = store.add(a.spec_.query_name, model_dim, model_dim);
    a.wk_ = store.add(a.spec_.key_name, model_dim, model_dim);
    a.wv_ = store.add(a.spec_.value_name, model_dim, model_dim);
    a.wo_ = store.add(a.spec_.output_name, model_dim, model_dim);
    return a;
}

AttentionKeys MultiHeadAttention::project_keys(const ParamStore& store, const Tensor2& xkv) const {
    if (xkv.cols() != spec_.model_dim) throw ShapeError("attention: inputs must have model_dim columns");
    return {xkv, matmul(xkv, store[wk_].value), matmul(xkv, store[wv_].value)};
}

Tensor2 MultiHeadAttention::forward(const ParamStore& store, const Tensor2& xq, const Tensor2& xkv,
                                    std::size_t group, bool exclude_self, AttentionCache* cache,
                                    std::optional<std::size_t> query_slot) const {
    Tensor2 out = forward(store, xq, project_keys(store, xkv), group, exclude_self, cache, query_slot);
    if (cache) cache->key_grads = true;
    return out;
}

Tensor2 MultiHeadAttention::forward(const ParamStore& store, const Tensor2& xq, const AttentionKeys& keys,
                                    std::size_t group, bool exclude_self, AttentionCache* cache,
                                    std::optional<std::size_t> query_slot) const {
    const std::size_t d = spec_.model_dim;
    const std::size_t H = spec_.heads;
    const std::size_t dk = spec_.key_dim;
    const Tensor2& xkv = keys.xkv;
    const Tensor2& k = keys.k;
    const Tensor2& v = keys.v;
    if (xq.cols() != d || xkv.cols() != d) throw ShapeError("attention: inputs must have model_dim columns");
    if (k.rows() != xkv.rows() || v.rows() != xkv.rows()) throw ShapeError("attention: key projections out of step");
    if (group == 0 || xkv.rows() % group != 0) throw ShapeError("attention: row count not a multiple of group size");
    if (query_slot) {
        if (*query_slot >= group) throw ShapeError("attention: query slot outside the group");
        if (xq.rows() * group != xkv.rows()) throw ShapeError("attention: need one query row per key group");
    } else if (xq.rows() != xkv.rows()) {
        throw ShapeError("attention: query and key sets differ in row count");
    }

    const std::size_t n = xq.rows();
    Tensor2 q = matmul(xq, store[wq_].value);
    Tensor2 concat(n, d);
    std::vector<double> weights(n * H * group, 0.0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
    std::vector<double> scores(group);

    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t base = query_slot ? r * group : (r / group) * group;
        const std::size_t self = query_slot ? *query_slot : r - base;
        for (std::size_t h = 0; h < H; ++h) {
            const std::size_t off = h * dk;
            double mx = -HUGE_VAL;
            bool any = false;
            for (std::size_t j = 0; j < group; ++j) {
                if (exclude_self && j == self) continue;
                double s = 0.0;
                for (std::size_t c = 0; c < dk; ++c) s += q(r, off + c) * k(base + j, off + c);
                scores[j] = s * scale;
                mx = std::max(mx, scores[j]);
                any = true;
            }
            if (!any) continue;
            double* w = weights.data() + (r * H + h) * group;
            double total = 0.0;
            for (std::size_t j = 0; j < group; ++j) {
                if (exclude_self && j == self) continue;
                w[j] = std::exp(scores[j] - mx);
                total += w[j];
            }
            for (std::size_t j = 0; j < group; ++j) {
                w[j] /= total;
                if (w[j] == 0.0) continue;
                for (std::size_t c = 0; c < dk; ++c) concat(r, off + c) += w[j] * v(base + j, off + c);
            }
        }
    }
    Tensor2 out = matmul(concat, store[wo_].value);
    if (cache) {
        cache->xq = xq;
        cache->xkv = xkv;
        cache->q = std::move(q);
        cache->k = k;
        cache->v = v;
        cache->concat = std::move(concat);
        cache->weights = std::move(weights);
        cache->group = group;
        cache->exclude_self = exclude_self;
        cache->query_slot = query_slot;
        cache->key_grads = false;
    }
    return out;
}

std::pair<Tensor2, Tensor2> MultiHeadAttention::backward(ParamStore& store, const AttentionCache& cache,
                                                         const Tensor2& dout) const {
    const std::size_t d = spec_.model_dim;
    const std::size_t H = spec_.heads;
    const std::size_t dk = spec_.key_dim;
    const std::size_t n = cache.xq.rows();
    const std::size_t group = cache.group;
    if (dout.rows() != n || dout.cols() != d) throw ShapeError("attention backward: upstream gradient shape");

    matmul_tn_acc(cache.concat, dout, store[wo_].grad);
    const Tensor2 dconcat = matmul_nt(dout, store[wo_].value);
    const bool kg = cache.key_grads;
    const std::size_t nkv = kg ? cache.xkv.rows() : 0;
    Tensor2 dq(n, d), dk_(nkv, d), dv(nkv, d);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
    std::vector<double> dw(group);

    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t base = cache.query_slot ? r * group : (r / group) * group;
        const std::size_t self = cache.query_slot ? *cache.query_slot : r - base;
        for (std::size_t h = 0; h < H; ++h) {
            const std::size_t off = h * dk;
            const double* w = cache.weights.data() + (r * H + h) * group;
            double dot = 0.0;
            bool any = false;
            for (std::size_t j = 0; j < group; ++j) {
                if (cache.exclude_self && j == self) {
                    dw[j] = 0.0;
                    continue;
                }
                any = true;
                double s = 0.0;
                for (std::size_t c = 0; c < dk; ++c) {
                    s += dconcat(r, off + c) * cache.v(base + j, off + c);
                    if (kg) dv(base + j, off + c) += w[j] * dconcat(r, off + c);
                }
                dw[j] = s;
                dot += w[j] * s;
            }
            if (!any) continue;
            for (std::size_t j = 0; j < group; ++j) {
                if (cache.exclude_self && j == self) continue;
                const double ds = w[j] * (dw[j] - dot) * scale;
                if (ds == 0.0) continue;
                for (std::size_t c = 0; c < dk; ++c) {
                    dq(r, off + c) += ds * cache.k(base + j, off + c);
                    if (kg) dk_(base + j, off + c) += ds * cache.q(r, off + c);
                }
            }
        }
    }
    matmul_tn_acc(cache.xq, dq, store[wq_].grad);
    Tensor2 dxq = matmul_nt(dq, store[wq_].value);
    if (!kg) return {std::move(dxq), Tensor2()};
    matmul_tn_acc(cache.xkv, dk_, store[wk_].grad);
    matmul_tn_acc(cache.xkv, dv, store[wv_].grad);
    Tensor2 dxkv = matmul_nt(dk_, store[wk_].value);
    add_inplace(dxkv, matmul_nt(dv, store[wv_].value));
    return {std::move(dxq), std::move(dxkv)};
}

std::vector<double> MultiHeadAttention::weights_of(const AttentionCache& cache, std::size_t row, std::size_t head,
                                                   std::size_t heads) {
    const double* w = cache.weights.data() + (row * heads + head) * cache.group;
    return {w, w + cache.group};
}

}  // namespace edgeoff::nn
