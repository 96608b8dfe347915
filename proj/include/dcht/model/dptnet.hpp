#pragma once

#include "dcht/nn/layers.hpp"

namespace dcht {

struct DptConfig {
    int64_t enc_channels = 64;  // feature dimension C
    int64_t enc_kernel = 16;
    int64_t enc_stride = 8;
    int64_t chunk = 64;  // chunk length F' with 50% overlap
    int64_t num_blocks = 4;
    int64_t heads = 4;
    int64_t gru_hidden = 0;  // 0 means 2 * enc_channels
    int64_t compress_factor = 3;
    double dropout = 0.0;

    int64_t hop() const { return chunk / 2; }
    int64_t hidden() const { return gru_hidden > 0 ? gru_hidden : 2 * enc_channels; }
    void validate() const;  // throws std::invalid_argument
};

// Frame-domain features cut into 50%-overlapping chunks, with the original
// frame count kept so de-segmentation is an exact inverse.
struct ChunkedTensor {
    Tensor data;        // [C, N, chunk]
    int64_t frames = 0; // T before padding
};

ChunkedTensor segment(const Tensor& x, int64_t chunk);  // x: [C, T]
Tensor desegment(const ChunkedTensor& c);               // -> [C, T]

// Transformer stage whose feed-forward opens with a recurrence:
//   zhat = LayerNorm(MSA(z) + z)
//   out  = LayerNorm(zhat + ReLU(GRU(zhat) W + b))
// No positional encoding anywhere. `compression` > 1 shortens key/value
// sequences in the attention (used for the long inter-chunk axis).
struct ImprovedTransformer {
    int64_t d = 0;
    MultiheadAttention attn;
    LayerNorm norm1, norm2;
    GRU gru;
    Linear ffw;  // hidden -> d
    Dropout drop;

    ImprovedTransformer() = default;
    ImprovedTransformer(int64_t d_, int64_t heads, int64_t hidden, int64_t compression,
                        double dropout, Rng& rng);

    Tensor forward(const Tensor& x, bool training, Rng& rng) const;  // [B, T, d]
    void collect(const std::string& prefix, ParamMap& pm) const;
};

// One dual-path round: a local transformer along the intra-chunk axis,
// then a memory-compressed global transformer along the inter-chunk axis.
struct DptBlock {
    ImprovedTransformer local;   // sequences of length chunk, batched over N
    ImprovedTransformer global;  // sequences of length N, batched over chunk positions

    DptBlock() = default;
    DptBlock(const DptConfig& cfg, Rng& rng);

    ChunkedTensor forward(const ChunkedTensor& x, bool training, Rng& rng) const;
    void collect(const std::string& prefix, ParamMap& pm) const;
};

// Waveform-to-waveform temporal branch: strided 1-D encoder with ReLU,
// stacked dual-path blocks over chunked features, a ReLU mask applied to the
// encoder output, and a transposed-convolution decoder trimmed back to the
// input length. The encoder, mask conv, and decoder carry no bias, so zero
// features yield a zero mask and a zero waveform.
struct Dptnet {
    DptConfig cfg;
    Tensor enc_w;  // [C, 1, kernel]
    std::vector<DptBlock> blocks;
    PReLU mask_act;
    Tensor mask_w;  // pointwise conv [C, C, 1]
    Tensor dec_w;   // transposed conv [C, 1, kernel]

    Dptnet() = default;
    Dptnet(const DptConfig& cfg_, Rng& rng);

    Tensor encode(const Tensor& wave) const;  // [L] -> [C, T]
    Tensor forward(const Tensor& wave, bool training, Rng& rng) const;  // [L] -> [L]
    void collect(const std::string& prefix, ParamMap& pm) const;
};

}  // namespace dcht
