#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dcht/core/ops.hpp"
#include "dcht/core/tensor.hpp"

namespace dcht {

// Named parameter list used by the optimizer and the checkpoint writer.
// Collection order is the canonical serialization order.
using ParamMap = std::vector<std::pair<std::string, Tensor>>;

inline void add_param(ParamMap& pm, const std::string& name, const Tensor& t) {
    pm.emplace_back(name, t);
}

struct Linear {
    int64_t in = 0, out = 0;
    Tensor W;  // [in, out]
    Tensor b;  // [out]

    Linear() = default;
    Linear(int64_t in_, int64_t out_, Rng& rng);

    Tensor forward(const Tensor& x) const;  // [..., in] -> [..., out]
    void collect(const std::string& prefix, ParamMap& pm) const;
};

struct LayerNorm {
    int64_t dim = 0;
    double eps = 1e-5;
    Tensor gamma;  // [dim]
    Tensor beta;   // [dim]

    LayerNorm() = default;
    explicit LayerNorm(int64_t dim_, double eps_ = 1e-5);

    Tensor forward(const Tensor& x) const;  // normalizes the last axis
    void collect(const std::string& prefix, ParamMap& pm) const;
};

struct PReLU {
    Tensor a;  // single learnable negative slope

    PReLU() = default;
    explicit PReLU(double init);

    Tensor forward(const Tensor& x) const;
    void collect(const std::string& prefix, ParamMap& pm) const;
};

// Inverted dropout; a single Bernoulli mask drawn from `rng`, scaled by
// 1/(1-p). Identity when not training or p == 0.
struct Dropout {
    double p = 0.0;

    Dropout() = default;
    explicit Dropout(double p_) : p(p_) {}

    Tensor forward(const Tensor& x, bool training, Rng& rng) const;
    // Same mask applied to two tensors of equal shape (for complex pairs).
    std::pair<Tensor, Tensor> forward2(const Tensor& re, const Tensor& im, bool training, Rng& rng) const;
};

// Unidirectional GRU over [B, T, in] -> [B, T, hidden]. Gate layout in the
// packed weights is (reset, update, candidate); the candidate sees the hidden
// projection gated by reset, and h = n + z * (h_prev - n).
struct GRU {
    int64_t in = 0, hidden = 0;
    Tensor Wi;  // [in, 3*hidden]
    Tensor Wh;  // [hidden, 3*hidden]
    Tensor bi;  // [3*hidden]
    Tensor bh;  // [3*hidden]

    GRU() = default;
    GRU(int64_t in_, int64_t hidden_, Rng& rng);

    Tensor forward(const Tensor& x) const;
    void collect(const std::string& prefix, ParamMap& pm) const;
};

// Self-attention over [B, T, d]. When `compression` >= 1 the key/value
// sequences are shortened by a strided 1-D convolution (kernel = stride =
// compression) after projection; 0 disables the conv path entirely, and
// sequences shorter than one compressed step (T < compression) pass through
// uncompressed. The attention arithmetic downstream of the projections is
// shared, so a factor-1 compression with an identity kernel reproduces the
// uncompressed output bit for bit.
struct MultiheadAttention {
    int64_t d = 0, heads = 0;
    int64_t compression = 0;
    Linear wq, wk, wv, wo;
    Tensor ck_w, ck_b;  // [d, d, c], [d]
    Tensor cv_w, cv_b;

    MultiheadAttention() = default;
    MultiheadAttention(int64_t d_, int64_t heads_, int64_t compression_, Rng& rng);

    Tensor forward(const Tensor& x) const;
    void collect(const std::string& prefix, ParamMap& pm) const;
};

}  // namespace dcht
