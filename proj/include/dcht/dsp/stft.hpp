#pragma once

#include "dcht/core/complex.hpp"
#include "dcht/core/ops.hpp"

namespace dcht {

// Periodic Hann window: w[n] = 0.5 * (1 - cos(2*pi*n/size)).
Tensor hann_window(int64_t size);

// Number of frames a length-L signal produces under the centered layout
// below: floor(L / hop) + 1.
int64_t stft_frames(int64_t length, int64_t hop = 256);

// Centered short-time transform: reflect-pads frame/2 samples at both ends,
// windows each hop-strided frame with a periodic Hann, and returns the
// one-sided spectrum [K, frame/2 + 1]. frame must be a power of two; the
// signal must be at least frame/2 + 1 samples long. Differentiable.
ComplexTensor stft(const Tensor& x, int64_t frame = 512, int64_t hop = 256);

// Inverse via windowed overlap-add with window-square normalization. `length`
// is the sample count to reconstruct (at most K * hop). Differentiable with
// respect to the spectrogram.
Tensor istft(const ComplexTensor& spec, int64_t length, int64_t frame = 512, int64_t hop = 256);

}  // namespace dcht
