#pragma once

#include "dcht/nn/attention.hpp"

namespace dcht {

struct SwinUnetConfig {
    int64_t patch_size = 4;
    int64_t embed_dim = 24;                 // complex channels at the first stage
    std::vector<int64_t> depths = {2, 2, 2};  // encoder stages, bottleneck last
    std::vector<int64_t> heads = {3, 6, 12};  // one entry per depths entry
    int64_t window = 4;
    double mlp_ratio = 2.0;
    double dropout = 0.0;
    ScoreMode score_mode = ScoreMode::Real;
    bool mask_connection = true;

    int64_t encoder_stages() const { return static_cast<int64_t>(depths.size()) - 1; }
    // The spectrogram is padded so the token grid stays window-divisible
    // through every merge.
    int64_t pad_multiple() const { return patch_size * window * (int64_t{1} << encoder_stages()); }
    void validate() const;  // throws std::invalid_argument
};

// Space-to-depth: [H, W, r^2 * C] -> [r*H, r*W, C] and its inverse. Exact
// bit-level inverses of each other.
ComplexTensor pixel_shuffle(const ComplexTensor& x, int64_t r);
ComplexTensor pixel_unshuffle(const ComplexTensor& x, int64_t r);

// 2x2 token merge: [H, W, C] -> [H/2, W/2, 2C] (norm over the concatenated
// 4C, then a bias-free reduction).
struct PatchMerge {
    ComplexLayerNorm norm;
    ComplexLinear reduce;

    PatchMerge() = default;
    PatchMerge(int64_t dim, Rng& rng);
    ComplexTensor forward(const ComplexTensor& x) const;
    void collect(const std::string& prefix, ParamMap& pm) const;
};

// Inverse-resolution step: [H, W, C] -> [2H, 2W, C/2] via a bias-free C->2C
// expansion, pixel shuffle, and a norm over the halved channels.
struct PatchExpand {
    ComplexLinear grow;
    ComplexLayerNorm norm;

    PatchExpand() = default;
    PatchExpand(int64_t dim, Rng& rng);
    ComplexTensor forward(const ComplexTensor& x) const;
    void collect(const std::string& prefix, ParamMap& pm) const;
};

// Bounded mask from a raw complex estimate: m = tanh(|F|) * F / |F| with the
// magnitude guarded at 1e-12, so |m| <= 1 everywhere and m -> 0 as F -> 0.
ComplexTensor bounded_mask(const ComplexTensor& raw);

struct SwinUnetOutput {
    ComplexTensor enhanced;  // same shape as the input spectrogram
    ComplexTensor mask;      // undefined when mask_connection is off
    ComplexTensor raw;       // head output before bounding
};

// Complex U-shaped encoder/decoder over spectrogram patches: windowed
// attention stages with 2x merges going down, symmetric expands with skip
// fusion coming up, and a single-channel complex head. With the mask
// connection on, the head output is bounded and multiplied onto the input;
// otherwise it is returned directly as the enhanced spectrum.
struct SwinUnet {
    SwinUnetConfig cfg;
    ComplexLinear embed;  // patch_size^2 -> embed_dim, bias-free
    ComplexLayerNorm embed_norm;
    std::vector<std::vector<SwinBlock>> enc_blocks;
    std::vector<PatchMerge> merges;
    std::vector<SwinBlock> bottleneck;
    std::vector<PatchExpand> expands;      // decoder, indexed by stage
    std::vector<ComplexLinear> skip_fuse;  // 2*dim_s -> dim_s
    std::vector<std::vector<SwinBlock>> dec_blocks;
    ComplexLinear final_grow;  // embed_dim -> patch_size^2 * embed_dim, bias-free
    ComplexLayerNorm final_norm;
    ComplexLinear head;  // embed_dim -> 1

    SwinUnet() = default;
    SwinUnet(const SwinUnetConfig& cfg_, Rng& rng);

    // spec: [K, F] complex spectrogram. Throws NumericError naming the stage
    // if activations go non-finite.
    SwinUnetOutput forward(const ComplexTensor& spec, bool training, Rng& rng) const;
    void collect(const std::string& prefix, ParamMap& pm) const;
};

}  // namespace dcht
