#include "dcht/nn/attention.hpp"

#include <cmath>

namespace dcht {

ComplexTensor window_partition(const ComplexTensor& x, int64_t window) {
    if (x.dim() != 3) throw std::invalid_argument("window_partition expects [H, W, C]");
    const int64_t H = x.extent(0), W = x.extent(1), C = x.extent(2);
    if (H % window != 0 || W % window != 0)
        throw std::invalid_argument("grid " + shape_str(x.shape()) + " not divisible by window " +
                                    std::to_string(window));
    ComplexTensor t = creshape(x, {H / window, window, W / window, window, C});
    t = cpermute(t, {0, 2, 1, 3, 4});
    return creshape(t, {(H / window) * (W / window), window * window, C});
}

ComplexTensor window_reverse(const ComplexTensor& windows, int64_t window, int64_t H, int64_t W) {
    const int64_t C = windows.extent(-1);
    ComplexTensor t = creshape(windows, {H / window, W / window, window, window, C});
    t = cpermute(t, {0, 2, 1, 3, 4});
    return creshape(t, {H, W, C});
}

Tensor shifted_window_mask(int64_t H, int64_t W, int64_t window, int64_t shift) {
    NoTapeScope off;  // constant, never differentiated
    // Region ids on the unshifted grid; the three slices per axis mark the
    // pieces that become neighbours only after the cyclic roll.
    std::vector<int> ids(static_cast<size_t>(H * W), 0);
    auto bands = [&](int64_t n) {
        return std::vector<std::pair<int64_t, int64_t>>{{0, n - window}, {n - window, n - shift}, {n - shift, n}};
    };
    int cnt = 0;
    for (auto [r0, r1] : bands(H)) {
        for (auto [c0, c1] : bands(W)) {
            for (int64_t r = r0; r < r1; ++r)
                for (int64_t c = c0; c < c1; ++c) ids[static_cast<size_t>(r * W + c)] = cnt;
            ++cnt;
        }
    }
    const int64_t nw = (H / window) * (W / window);
    const int64_t N = window * window;
    Tensor mask = Tensor::zeros({nw, N, N});
    double* mv = mask.data();
    const int64_t wcols = W / window;
    for (int64_t wi = 0; wi < nw; ++wi) {
        const int64_t wr = (wi / wcols) * window, wc = (wi % wcols) * window;
        std::vector<int> wid(static_cast<size_t>(N));
        for (int64_t i = 0; i < N; ++i)
            wid[static_cast<size_t>(i)] = ids[static_cast<size_t>((wr + i / window) * W + (wc + i % window))];
        for (int64_t i = 0; i < N; ++i)
            for (int64_t j = 0; j < N; ++j)
                mv[(wi * N + i) * N + j] = wid[static_cast<size_t>(i)] == wid[static_cast<size_t>(j)] ? 0.0 : -1e9;
    }
    return mask;
}

namespace {

std::vector<int64_t> relative_index(int64_t window) {
    const int64_t N = window * window;
    const int64_t span = 2 * window - 1;
    std::vector<int64_t> idx(static_cast<size_t>(N * N));
    for (int64_t p = 0; p < N; ++p) {
        const int64_t pi = p / window, pj = p % window;
        for (int64_t q = 0; q < N; ++q) {
            const int64_t qi = q / window, qj = q % window;
            const int64_t di = pi - qi + window - 1;
            const int64_t dj = pj - qj + window - 1;
            idx[static_cast<size_t>(p * N + q)] = di * span + dj;
        }
    }
    return idx;
}

}  // namespace

WindowAttention::WindowAttention(int64_t dim_, int64_t heads_, int64_t window_, ScoreMode mode_, Rng& rng)
    : dim(dim_), heads(heads_), window(window_), mode(mode_) {
    if (dim % heads != 0) throw std::invalid_argument("attention width must divide evenly across heads");
    qkv = ComplexLinear(dim, 3 * dim, rng);
    proj = ComplexLinear(dim, dim, rng);
    const int64_t span = 2 * window - 1;
    bias_table = Tensor::rand_normal({span * span, heads}, rng, 0.0, 0.02).mark_parameter();
    bias_index = relative_index(window);
}

ComplexTensor WindowAttention::forward(const ComplexTensor& x, const Tensor& mask) const {
    if (x.dim() != 3 || x.extent(2) != dim)
        throw std::invalid_argument("window attention expects [windows, N, " + std::to_string(dim) + "]");
    const int64_t nw = x.extent(0), N = x.extent(1), dh = dim / heads;
    if (N != window * window) throw std::invalid_argument("token count does not match the window size");

    ComplexTensor qkv_out = qkv.forward(x);  // [nw, N, 3*dim]
    auto head_split = [&](const ComplexTensor& t) {
        return cpermute(creshape(t, {nw, N, heads, dh}), {0, 2, 1, 3});  // [nw, h, N, dh]
    };
    ComplexTensor q = head_split(cslice(qkv_out, 2, 0, dim));
    ComplexTensor k = head_split(cslice(qkv_out, 2, dim, 2 * dim));
    ComplexTensor v = head_split(cslice(qkv_out, 2, 2 * dim, 3 * dim));

    ComplexTensor kt = cpermute(k, {0, 1, 3, 2});
    Tensor score_re = sub(matmul(q.re, kt.re), matmul(q.im, kt.im));
    Tensor logits;
    if (mode == ScoreMode::Real) {
        logits = score_re;
    } else {
        Tensor score_im = add(matmul(q.re, kt.im), matmul(q.im, kt.re));
        logits = sqrt_op(add(add(mul(score_re, score_re), mul(score_im, score_im)), 1e-24));
    }
    logits = mul(logits, 1.0 / std::sqrt(static_cast<double>(dh)));

    Tensor bias = take_rows(bias_table, bias_index);              // [N*N, h]
    bias = permute(reshape(bias, {N, N, heads}), {2, 0, 1});      // [h, N, N]
    logits = add(logits, expand_to(bias, logits.shape()));
    if (mask.defined()) {
        logits = add(logits, expand_to(reshape(mask, {nw, 1, N, N}), logits.shape()));
    }

    Tensor attn = softmax_last(logits);  // real weights over complex values
    ComplexTensor ctx{matmul(attn, v.re), matmul(attn, v.im)};
    ComplexTensor merged = creshape(cpermute(ctx, {0, 2, 1, 3}), {nw, N, dim});
    return proj.forward(merged);
}

void WindowAttention::collect(const std::string& prefix, ParamMap& pm) const {
    qkv.collect(prefix + ".qkv", pm);
    proj.collect(prefix + ".proj", pm);
    add_param(pm, prefix + ".relpos_table", bias_table);
}

SwinBlock::SwinBlock(int64_t dim_, int64_t heads, int64_t window_, int64_t shift_, double mlp_ratio,
                     double dropout, ScoreMode mode, Rng& rng)
    : dim(dim_),
      window(window_),
      shift(shift_),
      norm1(dim_),
      norm2(dim_),
      attn(dim_, heads, window_, mode, rng),
      mlp(dim_, static_cast<int64_t>(mlp_ratio * static_cast<double>(dim_)), dropout, rng),
      drop(dropout) {
    if (shift < 0 || shift >= window) throw std::invalid_argument("shift must lie in [0, window)");
}

ComplexTensor SwinBlock::forward(const ComplexTensor& x, bool training, Rng& rng) const {
    const int64_t H = x.extent(0), W = x.extent(1);
    ComplexTensor y = norm1.forward(x);
    if (shift > 0) y = croll(croll(y, -shift, 0), -shift, 1);
    ComplexTensor windows = window_partition(y, window);
    Tensor mask;
    if (shift > 0) mask = shifted_window_mask(H, W, window, shift);
    ComplexTensor attned = attn.forward(windows, mask);
    ComplexTensor merged = window_reverse(attned, window, H, W);
    if (shift > 0) merged = croll(croll(merged, shift, 0), shift, 1);
    auto [mr, mi] = drop.forward2(merged.re, merged.im, training, rng);
    ComplexTensor res1 = cadd(x, {mr, mi});
    ComplexTensor ff = mlp.forward(norm2.forward(res1), training, rng);
    return cadd(res1, ff);
}

void SwinBlock::collect(const std::string& prefix, ParamMap& pm) const {
    norm1.collect(prefix + ".norm1", pm);
    attn.collect(prefix + ".attn", pm);
    norm2.collect(prefix + ".norm2", pm);
    mlp.collect(prefix + ".mlp", pm);
}

}  // namespace dcht
