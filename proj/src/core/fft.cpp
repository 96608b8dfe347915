#include "dcht/core/fft.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace dcht {

bool is_pow2(int64_t n) { return n > 0 && (n & (n - 1)) == 0; }

namespace {

struct Twiddles {
    std::vector<double> cos_fwd, sin_fwd;  // e^{-2pi i k / n} per stage, packed
    std::vector<int> bitrev;
};

const Twiddles& twiddles_for(size_t n) {
    static std::map<size_t, Twiddles> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    Twiddles t;
    t.bitrev.resize(n);
    int log2n = 0;
    while ((size_t(1) << log2n) < n) ++log2n;
    for (size_t i = 0; i < n; ++i) {
        size_t r = 0;
        for (int b = 0; b < log2n; ++b)
            if (i & (size_t(1) << b)) r |= size_t(1) << (log2n - 1 - b);
        t.bitrev[i] = static_cast<int>(r);
    }
    // Half-size table of roots e^{-2pi i k / n}, k in [0, n/2).
    t.cos_fwd.resize(n / 2);
    t.sin_fwd.resize(n / 2);
    const double step = -2.0 * M_PI / static_cast<double>(n);
    for (size_t k = 0; k < n / 2; ++k) {
        t.cos_fwd[k] = std::cos(step * static_cast<double>(k));
        t.sin_fwd[k] = std::sin(step * static_cast<double>(k));
    }
    return cache.emplace(n, std::move(t)).first->second;
}

}  // namespace

void fft_inplace(std::vector<double>& re, std::vector<double>& im, bool inverse) {
    const size_t n = re.size();
    if (im.size() != n) throw std::invalid_argument("fft: re/im size mismatch");
    if (!is_pow2(static_cast<int64_t>(n))) throw std::invalid_argument("fft: size must be a power of two");
    if (n == 1) return;

    const Twiddles& t = twiddles_for(n);
    for (size_t i = 0; i < n; ++i) {
        const size_t j = static_cast<size_t>(t.bitrev[i]);
        if (i < j) {
            std::swap(re[i], re[j]);
            std::swap(im[i], im[j]);
        }
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const size_t half = len >> 1;
        const size_t tstep = n / len;
        for (size_t start = 0; start < n; start += len) {
            for (size_t k = 0; k < half; ++k) {
                const double wr = t.cos_fwd[k * tstep];
                const double wi = inverse ? -t.sin_fwd[k * tstep] : t.sin_fwd[k * tstep];
                const size_t a = start + k;
                const size_t b = a + half;
                const double xr = re[b] * wr - im[b] * wi;
                const double xi = re[b] * wi + im[b] * wr;
                re[b] = re[a] - xr;
                im[b] = im[a] - xi;
                re[a] += xr;
                im[a] += xi;
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (size_t i = 0; i < n; ++i) {
            re[i] *= inv;
            im[i] *= inv;
        }
    }
}

}  // namespace dcht
