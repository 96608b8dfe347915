#include "dcht/dsp/stft.hpp"

#include <cmath>

#include "dcht/core/tensor.hpp"

namespace dcht {

Tensor hann_window(int64_t size) {
    if (size < 2) throw std::invalid_argument("window size must be at least 2");
    std::vector<double> w(static_cast<size_t>(size));
    for (int64_t n = 0; n < size; ++n)
        w[static_cast<size_t>(n)] = 0.5 * (1.0 - std::cos(2.0 * M_PI * n / static_cast<double>(size)));
    return Tensor::from_vector({size}, std::move(w));
}

int64_t stft_frames(int64_t length, int64_t hop) { return length / hop + 1; }

namespace {

void check_geometry(int64_t frame, int64_t hop) {
    if (frame < 2 || (frame & (frame - 1)) != 0)
        throw std::invalid_argument("frame length must be a power of two, got " + std::to_string(frame));
    if (hop < 1 || hop > frame)
        throw std::invalid_argument("hop must be in [1, frame], got " + std::to_string(hop));
}

}  // namespace

ComplexTensor stft(const Tensor& x, int64_t frame, int64_t hop) {
    check_geometry(frame, hop);
    if (x.dim() != 1) throw std::invalid_argument("stft expects a rank-1 signal, got " + shape_str(x.shape()));
    const int64_t pad = frame / 2;
    if (x.size() < pad + 1)
        throw DataError("signal too short for analysis: " + std::to_string(x.size()) +
                        " samples, need at least " + std::to_string(pad + 1));
    Tensor frames = frame_signal(x, frame, hop, pad);  // [K, frame]
    const int64_t k = frames.shape()[0];
    Tensor win;
    {
        NoTapeScope no_tape;
        win = expand_to(hann_window(frame), {k, frame});
    }
    Tensor packed = rdft(mul(frames, win));  // [K, 2, F]
    const int64_t f = frame / 2 + 1;
    Tensor re = reshape(slice(packed, 1, 0, 1), {k, f});
    Tensor im = reshape(slice(packed, 1, 1, 2), {k, f});
    return ComplexTensor(re, im);
}

Tensor istft(const ComplexTensor& spec, int64_t length, int64_t frame, int64_t hop) {
    check_geometry(frame, hop);
    if (spec.dim() != 2)
        throw std::invalid_argument("istft expects a rank-2 spectrogram, got " + shape_str(spec.shape()));
    const int64_t k = spec.extent(0);
    const int64_t f = spec.extent(1);
    if (f != frame / 2 + 1)
        throw std::invalid_argument("spectrogram has " + std::to_string(f) + " bins, expected " +
                                    std::to_string(frame / 2 + 1) + " for frame " + std::to_string(frame));
    if (length < 1 || length > k * hop)
        throw std::invalid_argument("cannot reconstruct " + std::to_string(length) + " samples from " +
                                    std::to_string(k) + " frames (max " + std::to_string(k * hop) + ")");

    Tensor packed = concat({reshape(spec.re, {k, 1, f}), reshape(spec.im, {k, 1, f})}, 1);
    Tensor frames = irdft(packed);  // [K, frame]
    Tensor win, denom;
    {
        NoTapeScope no_tape;
        Tensor w = hann_window(frame);
        win = expand_to(w, {k, frame});
        denom = overlap_add(expand_to(mul(w, w), {k, frame}), hop);
    }
    const int64_t pad = frame / 2;
    Tensor num = overlap_add(mul(frames, win), hop);
    return divide(slice(num, 0, pad, pad + length), slice(denom, 0, pad, pad + length));
}

}  // namespace dcht
