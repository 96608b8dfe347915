#pragma once

#include <cstdint>
#include <vector>

namespace dcht {

// In-place iterative radix-2 FFT on split real/imag buffers. Size must be a
// power of two. The inverse transform includes the 1/N scaling.
void fft_inplace(std::vector<double>& re, std::vector<double>& im, bool inverse);

bool is_pow2(int64_t n);

}  // namespace dcht
