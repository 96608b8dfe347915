#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dcht/core/tensor.hpp"

namespace dcht {

struct AudioClip {
    std::vector<double> samples;  // mono, nominal range [-1, 1]
    int sample_rate = 16000;

    int64_t length() const { return static_cast<int64_t>(samples.size()); }
    double rms() const;
};

// RIFF/WAVE reader for 16-bit PCM and 32-bit float; multi-channel input is
// downmixed by averaging. Throws DataError on anything malformed or
// unsupported.
AudioClip read_wav(const std::string& path);
// Writes mono 16-bit PCM (values clamped to [-1, 1]).
void write_wav(const std::string& path, const AudioClip& clip);

// Windowed-sinc resampler (32 taps per side, Hann-windowed, low-pass at the
// narrower Nyquist). Returns the input untouched when rates already match.
AudioClip resample(const AudioClip& clip, int target_rate);

enum class NoiseKind { White, Pink, Babble };
NoiseKind noise_kind_from_string(const std::string& s);

// Deterministic generators, unit RMS.
std::vector<double> make_noise(NoiseKind kind, int64_t length, int sample_rate, Rng& rng);

// Speech-like synthetic clean signal: gliding fundamental with harmonics and
// a syllabic amplitude envelope. Peak-normalized to 0.5.
std::vector<double> make_voice(int64_t length, int sample_rate, Rng& rng);

// noisy = clean + g * noise with g chosen so the clean-to-scaled-noise power
// ratio is exactly `snr_db`. The noise is tiled or truncated to the clean
// length. Returns the scaled noise actually added via `added_noise`.
std::vector<double> mix_at_snr(const std::vector<double>& clean, const std::vector<double>& noise,
                               double snr_db, std::vector<double>* added_noise = nullptr);

// Zero-pads clips to the longest one; returns [B, Lmax] plus original lengths.
std::pair<Tensor, std::vector<int64_t>> pad_batch(const std::vector<std::vector<double>>& clips);

}  // namespace dcht
