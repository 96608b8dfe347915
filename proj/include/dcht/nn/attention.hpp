#pragma once

#include "dcht/nn/complex_layers.hpp"

namespace dcht {

// [H, W, C] -> [numWindows, window*window, C]; H and W must be multiples of
// the window side.
ComplexTensor window_partition(const ComplexTensor& x, int64_t window);
// Inverse of window_partition.
ComplexTensor window_reverse(const ComplexTensor& windows, int64_t window, int64_t H, int64_t W);

// Additive attention mask for shifted windows: 0 within a contiguous region,
// -1e9 across regions that are only adjacent because of the cyclic shift.
// Shape [numWindows, window*window, window*window].
Tensor shifted_window_mask(int64_t H, int64_t W, int64_t window, int64_t shift);

enum class ScoreMode {
    Real,      // score = Re(q k^T)
    Magnitude  // score = |q k^T|
};

// Windowed multi-head attention on complex tokens. Scores are real (see
// ScoreMode) plus a learned relative-position bias; the resulting softmax
// weights mix complex values.
struct WindowAttention {
    int64_t dim = 0, heads = 0, window = 0;
    ScoreMode mode = ScoreMode::Real;
    ComplexLinear qkv;   // dim -> 3*dim
    ComplexLinear proj;  // dim -> dim
    Tensor bias_table;   // [(2w-1)^2, heads]
    std::vector<int64_t> bias_index;  // [N*N] into the table

    WindowAttention() = default;
    WindowAttention(int64_t dim_, int64_t heads_, int64_t window_, ScoreMode mode_, Rng& rng);

    // x: [numWindows, N, dim]; mask: undefined or [numWindows, N, N].
    ComplexTensor forward(const ComplexTensor& x, const Tensor& mask) const;
    void collect(const std::string& prefix, ParamMap& pm) const;
};

// Complex Swin block: windowed attention and a feed-forward stage, each with
// a pre-norm and a residual connection. A nonzero shift cyclically rolls the
// grid before windowing (and masks cross-region pairs).
struct SwinBlock {
    int64_t dim = 0, window = 0, shift = 0;
    ComplexLayerNorm norm1, norm2;
    WindowAttention attn;
    ComplexMLP mlp;
    Dropout drop;

    SwinBlock() = default;
    SwinBlock(int64_t dim_, int64_t heads, int64_t window_, int64_t shift_, double mlp_ratio,
              double dropout, ScoreMode mode, Rng& rng);

    ComplexTensor forward(const ComplexTensor& x, bool training, Rng& rng) const;  // [H, W, dim]
    void collect(const std::string& prefix, ParamMap& pm) const;
};

}  // namespace dcht
