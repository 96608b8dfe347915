#pragma once

#include "dcht/nn/layers.hpp"

namespace dcht {

// Global-norm clipping: when the L2 norm over every gradient coordinate
// exceeds max_norm, all gradients are scaled by max_norm / norm in place.
// Returns the pre-clip norm. Parameters without an allocated gradient count
// as zero. Throws NumericError naming the first offending parameter if any
// gradient coordinate is non-finite (nothing is modified then).
double clip_gradients(ParamMap& params, double max_norm = 5.0);

// Warmup-then-decay rate: scale * d_model^{-1/2} * min(step^{-1/2},
// step * warmup^{-3/2}). Rises linearly to the peak at step == warmup and
// decays as step^{-1/2} after. step counts from 1.
double lr_schedule(int64_t step, int64_t d_model, int64_t warmup, double scale = 1.0);

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.98;
    double eps = 1e-9;
};

// Bias-corrected Adam over a fixed parameter list. Moment slots are keyed by
// position, so every step must pass the same names and shapes (checked).
// A non-finite gradient aborts the step with the parameter's name before any
// value changes.
class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    void step(ParamMap& params, double lr);

    int64_t steps_taken() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    int64_t t_ = 0;
    std::vector<std::string> names_;
    std::vector<std::vector<double>> m_, v_;
};

}  // namespace dcht
