#pragma once

#include <limits>
#include <ostream>

#include "dcht/train/checkpoint.hpp"
#include "dcht/train/dataset.hpp"
#include "dcht/train/optim.hpp"

namespace dcht {

struct StepRecord {
    int64_t step = 0;
    double loss = 0.0;       // batch-mean training loss
    double lr = 0.0;
    double grad_norm = 0.0;  // pre-clip global norm
};

struct TrainHistory {
    std::vector<StepRecord> steps;
    std::vector<double> val_losses;  // one per completed epoch; empty without a val set
    int64_t best_epoch = 0;          // 1-based; 0 when no validation ran
    double best_val = std::numeric_limits<double>::infinity();
};

struct TrainResult {
    DchtModel model;       // state after the last step
    ParamMap best_params;  // snapshot at the best validation epoch (final state without a val set)
    TrainHistory history;
};

// Deterministic training: the seed fixes initialization, shuffling, and
// dropout, so identical inputs give bit-identical trajectories and
// parameters. Batches are accumulated clip by clip on one tape (each clip's
// loss is a per-sample mean, so unequal lengths need no padding or masking);
// each step is backward, global-norm clip, warmup-scheduled Adam. When a
// validation set is given, its loss is measured each epoch and the best
// epoch's parameters are retained.
TrainResult train(const TrainConfig& cfg, const std::vector<ClipPair>& train_set,
                  const std::vector<ClipPair>& val_set, std::ostream* log = nullptr);

// Mean loss over a set with a frozen model, off the tape.
double dataset_loss(const DchtModel& model, const LossWeights& weights,
                    const std::vector<ClipPair>& set);

}  // namespace dcht
