#pragma once

#include <iosfwd>

#include "dcht/train/dataset.hpp"
#include "dcht/model/dcht.hpp"

namespace dcht {

// Energy-ratio signal-to-distortion ratio in dB, clamped to [-100, 100] so
// report aggregation never meets an infinity. Throws std::invalid_argument on
// a length mismatch and DataError when the reference is silent.
double sdr(const std::vector<double>& clean, const std::vector<double>& est);

// Scale-invariant variant: the estimate is compared against its own
// projection onto the reference, so si_sdr(c, a*c) hits the +100 dB cap for
// every a != 0. An estimate orthogonal to the reference scores -100 dB.
double si_sdr(const std::vector<double>& clean, const std::vector<double>& est);

struct EvalRow {
    std::string name;
    double sdr_in = 0.0;   // noisy vs clean
    double sdr_out = 0.0;  // enhanced vs clean
    double delta = 0.0;    // sdr_out - sdr_in
    double seconds = 0.0;  // clip duration
};

struct EvalReport {
    std::vector<EvalRow> rows;  // dataset order
    double mean_sdr_in = 0.0;
    double mean_sdr_out = 0.0;
    double mean_delta = 0.0;
    std::string config_digest;      // FNV-1a of the model config JSON
    std::string checkpoint_digest;  // filled by the caller when known

    // Fixed schema: header `name,sdr_in_db,sdr_out_db,delta_db,seconds`,
    // one row per clip, %.6f columns. Byte-identical for identical inputs.
    std::string to_csv() const;
    void print_table(std::ostream& out) const;
};

// Runs the model over every pair (no gradients, eval mode) and scores the
// noisy input and the enhanced output against the clean reference.
// DataError on an empty dataset.
EvalReport evaluate(const DchtModel& model, BranchMode mode, const std::vector<ClipPair>& pairs);

}  // namespace dcht
