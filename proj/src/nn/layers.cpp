#include "dcht/nn/layers.hpp"

#include <cmath>

namespace dcht {

Linear::Linear(int64_t in_, int64_t out_, Rng& rng) : in(in_), out(out_) {
    const double limit = 1.0 / std::sqrt(static_cast<double>(in));
    W = Tensor::rand_uniform({in, out}, rng, -limit, limit).mark_parameter();
    b = Tensor::rand_uniform({out}, rng, -limit, limit).mark_parameter();
}

Tensor Linear::forward(const Tensor& x) const {
    if (x.extent(-1) != in)
        throw std::invalid_argument("linear expects last extent " + std::to_string(in) + ", got " +
                                    shape_str(x.shape()));
    Shape s = x.shape();
    Tensor y = matmul(reshape(x, {-1, in}), W);
    y = add(y, expand_to(b, y.shape()));
    s.back() = out;
    return reshape(y, s);
}

void Linear::collect(const std::string& prefix, ParamMap& pm) const {
    add_param(pm, prefix + ".weight", W);
    add_param(pm, prefix + ".bias", b);
}

LayerNorm::LayerNorm(int64_t dim_, double eps_) : dim(dim_), eps(eps_) {
    gamma = Tensor::full({dim}, 1.0).mark_parameter();
    beta = Tensor::zeros({dim}).mark_parameter();
}

Tensor LayerNorm::forward(const Tensor& x) const {
    Tensor centered = sub(x, mean_last(x, true));
    Tensor denom = sqrt_op(add(variance_last(x, true), eps));
    Tensor normed = divide(centered, denom);
    return add(mul(normed, expand_to(gamma, x.shape())), expand_to(beta, x.shape()));
}

void LayerNorm::collect(const std::string& prefix, ParamMap& pm) const {
    add_param(pm, prefix + ".gamma", gamma);
    add_param(pm, prefix + ".beta", beta);
}

PReLU::PReLU(double init) { a = Tensor::scalar(init).mark_parameter(); }

Tensor PReLU::forward(const Tensor& x) const {
    Tensor pos = relu(x);
    Tensor negpart = sub(x, pos);  // min(x, 0)
    return add(pos, mul(negpart, expand_to(a, x.shape())));
}

void PReLU::collect(const std::string& prefix, ParamMap& pm) const { add_param(pm, prefix + ".slope", a); }

Tensor Dropout::forward(const Tensor& x, bool training, Rng& rng) const {
    if (!training || p <= 0.0) return x;
    const double keep = 1.0 - p;
    Tensor mask = Tensor::zeros(x.shape());
    double* mv = mask.data();
    for (int64_t i = 0; i < mask.size(); ++i) mv[i] = rng.uniform() < keep ? 1.0 / keep : 0.0;
    return mul(x, mask);
}

std::pair<Tensor, Tensor> Dropout::forward2(const Tensor& re, const Tensor& im, bool training, Rng& rng) const {
    if (!training || p <= 0.0) return {re, im};
    const double keep = 1.0 - p;
    Tensor mask = Tensor::zeros(re.shape());
    double* mv = mask.data();
    for (int64_t i = 0; i < mask.size(); ++i) mv[i] = rng.uniform() < keep ? 1.0 / keep : 0.0;
    return {mul(re, mask), mul(im, mask)};
}

GRU::GRU(int64_t in_, int64_t hidden_, Rng& rng) : in(in_), hidden(hidden_) {
    const double limit = 1.0 / std::sqrt(static_cast<double>(hidden));
    Wi = Tensor::rand_uniform({in, 3 * hidden}, rng, -limit, limit).mark_parameter();
    Wh = Tensor::rand_uniform({hidden, 3 * hidden}, rng, -limit, limit).mark_parameter();
    bi = Tensor::rand_uniform({3 * hidden}, rng, -limit, limit).mark_parameter();
    bh = Tensor::rand_uniform({3 * hidden}, rng, -limit, limit).mark_parameter();
}

Tensor GRU::forward(const Tensor& x) const {
    if (x.dim() != 3 || x.extent(2) != in) throw std::invalid_argument("gru expects [B,T," + std::to_string(in) + "]");
    const int64_t B = x.extent(0), T = x.extent(1), H = hidden;
    Tensor xp = matmul(reshape(x, {-1, in}), Wi);
    xp = add(xp, expand_to(bi, xp.shape()));
    xp = reshape(xp, {B, T, 3 * H});

    Tensor h = Tensor::zeros({B, H});
    std::vector<Tensor> outs;
    outs.reserve(static_cast<size_t>(T));
    for (int64_t t = 0; t < T; ++t) {
        Tensor xt = reshape(slice(xp, 1, t, t + 1), {B, 3 * H});
        Tensor hp = matmul(h, Wh);
        hp = add(hp, expand_to(bh, hp.shape()));
        Tensor r = sigmoid(add(slice(xt, 1, 0, H), slice(hp, 1, 0, H)));
        Tensor z = sigmoid(add(slice(xt, 1, H, 2 * H), slice(hp, 1, H, 2 * H)));
        Tensor n = tanh_op(add(slice(xt, 1, 2 * H, 3 * H), mul(r, slice(hp, 1, 2 * H, 3 * H))));
        h = add(n, mul(z, sub(h, n)));
        outs.push_back(reshape(h, {B, 1, H}));
    }
    return concat(outs, 1);
}

void GRU::collect(const std::string& prefix, ParamMap& pm) const {
    add_param(pm, prefix + ".w_input", Wi);
    add_param(pm, prefix + ".w_hidden", Wh);
    add_param(pm, prefix + ".b_input", bi);
    add_param(pm, prefix + ".b_hidden", bh);
}

MultiheadAttention::MultiheadAttention(int64_t d_, int64_t heads_, int64_t compression_, Rng& rng)
    : d(d_), heads(heads_), compression(compression_) {
    if (d % heads != 0) throw std::invalid_argument("attention width must divide evenly across heads");
    if (compression < 0) throw std::invalid_argument("compression factor must be >= 0");
    wq = Linear(d, d, rng);
    wk = Linear(d, d, rng);
    wv = Linear(d, d, rng);
    wo = Linear(d, d, rng);
    if (compression >= 1) {
        const double limit = 1.0 / std::sqrt(static_cast<double>(d * compression));
        ck_w = Tensor::rand_uniform({d, d, compression}, rng, -limit, limit).mark_parameter();
        ck_b = Tensor::zeros({d}).mark_parameter();
        cv_w = Tensor::rand_uniform({d, d, compression}, rng, -limit, limit).mark_parameter();
        cv_b = Tensor::zeros({d}).mark_parameter();
    }
}

Tensor MultiheadAttention::forward(const Tensor& x) const {
    if (x.dim() != 3 || x.extent(2) != d) throw std::invalid_argument("attention expects [B,T," + std::to_string(d) + "]");
    const int64_t B = x.extent(0), T = x.extent(1), dh = d / heads;

    Tensor q = wq.forward(x);
    Tensor k = wk.forward(x);
    Tensor v = wv.forward(x);
    if (compression >= 1 && T >= compression) {
        // Shorten key/value sequences: [B,T,d] -> [B,d,T] -> strided conv -> back.
        // Sequences shorter than one compressed step pass through uncompressed.
        k = permute(conv1d(permute(k, {0, 2, 1}), ck_w, ck_b, compression, 0), {0, 2, 1});
        v = permute(conv1d(permute(v, {0, 2, 1}), cv_w, cv_b, compression, 0), {0, 2, 1});
    }
    const int64_t S = k.extent(1);

    auto heads_split = [&](const Tensor& t, int64_t len) {
        return permute(reshape(t, {B, len, heads, dh}), {0, 2, 1, 3});  // [B,h,len,dh]
    };
    Tensor qh = heads_split(q, T);
    Tensor kh = heads_split(k, S);
    Tensor vh = heads_split(v, S);

    Tensor logits = matmul(qh, permute(kh, {0, 1, 3, 2}));
    logits = mul(logits, 1.0 / std::sqrt(static_cast<double>(dh)));
    Tensor attn = softmax_last(logits);            // [B,h,T,S]
    Tensor ctx = matmul(attn, vh);                 // [B,h,T,dh]
    Tensor merged = reshape(permute(ctx, {0, 2, 1, 3}), {B, T, d});
    return wo.forward(merged);
}

void MultiheadAttention::collect(const std::string& prefix, ParamMap& pm) const {
    wq.collect(prefix + ".q", pm);
    wk.collect(prefix + ".k", pm);
    wv.collect(prefix + ".v", pm);
    wo.collect(prefix + ".out", pm);
    if (compression >= 1) {
        add_param(pm, prefix + ".compress_k.weight", ck_w);
        add_param(pm, prefix + ".compress_k.bias", ck_b);
        add_param(pm, prefix + ".compress_v.weight", cv_w);
        add_param(pm, prefix + ".compress_v.bias", cv_b);
    }
}

}  // namespace dcht
