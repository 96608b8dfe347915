#pragma once

#include "dcht/dsp/stft.hpp"
#include "dcht/model/dptnet.hpp"
#include "dcht/model/swinunet.hpp"

namespace dcht {

// Which part of the additive fusion runs. Passthrough returns the input
// unchanged (a do-nothing model, useful as an evaluation baseline).
enum class BranchMode { Both, Spectral, Temporal, Passthrough };

BranchMode branch_mode_from_string(const std::string& s);
std::string to_string(BranchMode m);

struct DchtConfig {
    SwinUnetConfig spectral;
    DptConfig temporal;
    int64_t frame = 512;  // analysis window, power of two
    int64_t hop = 256;
    int sample_rate = 16000;
    BranchMode fusion = BranchMode::Both;

    void validate() const;  // throws std::invalid_argument
};

// Two enhancement branches over the same clip, summed sample-wise: the
// spectral branch round-trips through the short-time transform while the
// temporal branch stays in the waveform domain. The sum is exact additive
// fusion, so a branch-only forward equals that branch's lone output bit for
// bit and the fused output equals their sum bit for bit.
struct DchtModel {
    DchtConfig cfg;
    SwinUnet spectral;
    Dptnet temporal;

    DchtModel() = default;
    DchtModel(const DchtConfig& cfg_, Rng& rng);

    // wave: [L] with L >= frame/2 + 1. Output has length L. Branch failures
    // are rethrown with the branch name prepended.
    Tensor forward(const Tensor& wave, BranchMode mode, bool training, Rng& rng) const;
    Tensor forward(const Tensor& wave, bool training, Rng& rng) const {
        return forward(wave, cfg.fusion, training, rng);
    }

    // Parameters of the branches engaged by `mode`, prefixed "spec." and
    // "wave."; Passthrough yields an empty map.
    ParamMap parameters(BranchMode mode) const;
    ParamMap parameters() const { return parameters(BranchMode::Both); }
};

}  // namespace dcht
