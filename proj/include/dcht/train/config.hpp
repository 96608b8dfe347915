#pragma once

#include "dcht/model/dcht.hpp"
#include "dcht/train/loss.hpp"

namespace dcht {

// Everything a training run needs beyond the model itself. The branch being
// trained lives in model.fusion; only the engaged branch's parameters are
// optimized.
struct TrainConfig {
    DchtConfig model;
    LossWeights loss;
    double lr_scale = 1.0;
    int64_t warmup = 200;
    int64_t lr_dmodel = 0;  // 0: use the temporal feature dimension
    double clip_norm = 5.0;
    int64_t batch = 2;      // clips accumulated per optimizer step
    int64_t epochs = 4;
    int64_t max_steps = 0;  // 0: no cap
    uint64_t seed = 1;

    int64_t schedule_dim() const { return lr_dmodel > 0 ? lr_dmodel : model.temporal.enc_channels; }
    void validate() const;  // throws std::invalid_argument
};

// JSON round trips. Missing keys take the defaults above; unknown keys are
// rejected. Rendering is deterministic (sorted keys, compact), so
// parse-then-render is a fixed point.
std::string to_json_text(const DchtConfig& cfg);
DchtConfig dcht_config_from_json_text(const std::string& text);
std::string to_json_text(const TrainConfig& cfg);
TrainConfig train_config_from_json_text(const std::string& text);

// Reads and validates a config file; every failure (unreadable file, parse
// error, unknown key, out-of-range value) surfaces as DataError.
TrainConfig load_train_config(const std::string& path);

}  // namespace dcht
