#pragma once

#include "dcht/dsp/stft.hpp"

namespace dcht {

// Mixing weight between the spectral and waveform loss terms. When
// energy_mode is set, alpha is recomputed per clip from the clean target as
// E_spec / (E_spec + E_time) — the mean absolute part-wise spectrogram value
// against the mean absolute sample, matching the scales of the two terms.
struct LossWeights {
    double alpha = 0.5;
    bool energy_mode = false;

    void validate() const;  // throws std::invalid_argument when alpha is outside [0, 1]
};

// Mean L1 distance between part-wise magnitudes of two equal-shape spectra:
// (1/(K*F)) * sum(| |y_re| - |e_re| | + | |y_im| - |e_im| |). Depends only on
// the absolute values of the four arrays, so it is invariant to sign flips.
Tensor loss_tf(const ComplexTensor& clean_spec, const ComplexTensor& est_spec);

// Sample-mean L1 error of the estimate plus the same for the implied noise:
// (||y - e||_1 + ||(x - y) - (x - e)||_1) / L with x the mixture. The two
// terms are algebraically equal for every estimate; both are computed as
// written so the identity stays observable.
Tensor loss_t(const Tensor& clean, const Tensor& est, const Tensor& noisy);

// alpha * loss_tf(stft(clean), stft(est)) + (1 - alpha) * loss_t(...), with
// the spectra taken at the given geometry. alpha of exactly 0 or 1 skips the
// unused term entirely.
Tensor loss_total(const Tensor& clean, const Tensor& est, const Tensor& noisy,
                  const LossWeights& w, int64_t frame = 512, int64_t hop = 256);

// The energy_mode weight for a clip, computed off the tape.
double energy_alpha(const Tensor& clean, int64_t frame, int64_t hop);

}  // namespace dcht
