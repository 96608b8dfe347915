#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "dcht/core/gradcheck.hpp"
#include "dcht/core/ops.hpp"
#include "dcht/dsp/audio.hpp"
#include "dcht/dsp/stft.hpp"

using namespace dcht;

namespace {

std::vector<double> sine(double freq, int64_t length, int rate, double amp = 1.0) {
    std::vector<double> v(static_cast<size_t>(length));
    for (int64_t i = 0; i < length; ++i)
        v[static_cast<size_t>(i)] = amp * std::sin(2.0 * M_PI * freq * i / rate);
    return v;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

std::string temp_path(const std::string& name) { return "/tmp/dcht_test_" + name; }

}  // namespace

TEST_CASE("wav write/read round trip preserves samples to 16-bit precision") {
    AudioClip clip;
    clip.sample_rate = 16000;
    clip.samples = sine(440.0, 800, 16000, 0.7);
    clip.samples.push_back(1.5);    // clamps to 1.0
    clip.samples.push_back(-1.5);   // clamps to -1.0

    const std::string path = temp_path("roundtrip.wav");
    write_wav(path, clip);
    AudioClip back = read_wav(path);
    CHECK(back.sample_rate == 16000);
    REQUIRE(back.length() == clip.length());
    for (int64_t i = 0; i < 800; ++i)
        CHECK(std::fabs(back.samples[i] - clip.samples[i]) <= 1.0 / 32768.0);
    CHECK(back.samples[800] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(back.samples[801] == doctest::Approx(-1.0).epsilon(1e-3));
    std::remove(path.c_str());
}

TEST_CASE("wav reader handles float32 and downmixes stereo") {
    // Hand-build a stereo float32 file: L = 0.25, R = 0.75 -> mean 0.5.
    std::vector<uint8_t> raw;
    auto u32 = [&](uint32_t x) {
        for (int i = 0; i < 4; ++i) raw.push_back(static_cast<uint8_t>(x >> (8 * i)));
    };
    auto u16 = [&](uint16_t x) {
        raw.push_back(static_cast<uint8_t>(x & 0xff));
        raw.push_back(static_cast<uint8_t>(x >> 8));
    };
    auto f32 = [&](float x) {
        uint32_t u;
        std::memcpy(&u, &x, 4);
        u32(u);
    };
    const int frames = 5;
    raw.insert(raw.end(), {'R', 'I', 'F', 'F'});
    u32(36 + frames * 8);
    raw.insert(raw.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
    u32(16);
    u16(3);  // float
    u16(2);  // stereo
    u32(8000);
    u32(8000 * 8);
    u16(8);
    u16(32);
    raw.insert(raw.end(), {'d', 'a', 't', 'a'});
    u32(frames * 8);
    for (int i = 0; i < frames; ++i) {
        f32(0.25f);
        f32(0.75f);
    }
    const std::string path = temp_path("stereo_f32.wav");
    std::ofstream(path, std::ios::binary).write(reinterpret_cast<const char*>(raw.data()), raw.size());

    AudioClip clip = read_wav(path);
    CHECK(clip.sample_rate == 8000);
    REQUIRE(clip.length() == frames);
    for (double v : clip.samples) CHECK(v == doctest::Approx(0.5).epsilon(1e-7));
    std::remove(path.c_str());
}

TEST_CASE("wav reader rejects malformed files") {
    const std::string path = temp_path("bad.wav");
    {
        std::ofstream f(path, std::ios::binary);
        f << "this is not a wav file at all";
    }
    CHECK_THROWS_AS(read_wav(path), DataError);

    {
        // Valid magic but truncated data chunk length.
        std::vector<uint8_t> raw = {'R', 'I', 'F', 'F', 100, 0, 0, 0, 'W', 'A', 'V', 'E',
                                    'd', 'a', 't', 'a', 200, 0, 0, 0, 1, 2, 3};
        std::ofstream(path, std::ios::binary).write(reinterpret_cast<const char*>(raw.data()), raw.size());
    }
    CHECK_THROWS_AS(read_wav(path), DataError);
    CHECK_THROWS_AS(read_wav(temp_path("does_not_exist.wav")), DataError);
    std::remove(path.c_str());
}

TEST_CASE("resample preserves a tone and passes through matching rates") {
    AudioClip hi;
    hi.sample_rate = 48000;
    hi.samples = sine(1000.0, 48000, 48000, 0.8);
    AudioClip lo = resample(hi, 16000);
    CHECK(lo.sample_rate == 16000);
    REQUIRE(lo.length() == 16000);

    // Least-squares fit of a*sin + b*cos at 1 kHz over the interior, away
    // from filter edge effects.
    double ss = 0, sc = 0, cc = 0, xs = 0, xc = 0;
    for (int64_t i = 100; i < 15900; ++i) {
        const double s = std::sin(2.0 * M_PI * 1000.0 * i / 16000.0);
        const double c = std::cos(2.0 * M_PI * 1000.0 * i / 16000.0);
        ss += s * s;
        sc += s * c;
        cc += c * c;
        xs += lo.samples[i] * s;
        xc += lo.samples[i] * c;
    }
    const double det = ss * cc - sc * sc;
    const double a = (xs * cc - xc * sc) / det;
    const double b = (xc * ss - xs * sc) / det;
    CHECK(a == doctest::Approx(0.8).epsilon(0.01));
    CHECK(std::fabs(b) < 0.01);
    double resid = 0.0;
    for (int64_t i = 100; i < 15900; ++i) {
        const double fit = a * std::sin(2.0 * M_PI * 1000.0 * i / 16000.0) +
                           b * std::cos(2.0 * M_PI * 1000.0 * i / 16000.0);
        resid = std::max(resid, std::fabs(lo.samples[i] - fit));
    }
    CHECK(resid < 0.01);

    AudioClip same = resample(lo, 16000);
    CHECK(same.samples == lo.samples);
}

TEST_CASE("synthetic noise is unit RMS and spectrally plausible") {
    Rng rng(7);
    const int64_t n = 16384;
    auto band_energy = [&](const std::vector<double>& x, double lo_hz, double hi_hz) {
        Tensor t = Tensor::from_vector({n}, x);
        Tensor packed = rdft(t);  // [2, F]
        const double* v = packed.data();
        const int64_t f = n / 2 + 1;
        const double bin_hz = 16000.0 / static_cast<double>(n);
        double acc = 0.0;
        for (int64_t k = 0; k < f; ++k) {
            const double hz = k * bin_hz;
            if (hz >= lo_hz && hz < hi_hz) acc += v[k] * v[k] + v[f + k] * v[f + k];
        }
        return acc;
    };

    for (NoiseKind kind : {NoiseKind::White, NoiseKind::Pink, NoiseKind::Babble}) {
        std::vector<double> x = make_noise(kind, n, 16000, rng);
        double acc = 0.0;
        for (double v : x) acc += v * v;
        CHECK(std::sqrt(acc / n) == doctest::Approx(1.0).epsilon(1e-12));
    }

    // White: energy proportional to bandwidth, so the wide high band wins by
    // roughly the bandwidth ratio (16x). Pink: roughly equal energy per
    // octave, so two-octave bands are comparable.
    Rng rng_w(11), rng_p(11);
    std::vector<double> white = make_noise(NoiseKind::White, n, 16000, rng_w);
    std::vector<double> pink = make_noise(NoiseKind::Pink, n, 16000, rng_p);
    const double white_ratio = band_energy(white, 1600, 6400) / band_energy(white, 100, 400);
    const double pink_ratio = band_energy(pink, 1600, 6400) / band_energy(pink, 100, 400);
    CHECK(white_ratio > 6.0);
    CHECK(pink_ratio < 4.0);
    CHECK(pink_ratio < white_ratio / 3.0);

    // Determinism: same seed, same bits.
    Rng r1(99), r2(99);
    CHECK(make_noise(NoiseKind::Babble, 512, 16000, r1) == make_noise(NoiseKind::Babble, 512, 16000, r2));
}

TEST_CASE("synthetic voice peaks at 0.5 and is deterministic") {
    Rng r1(3), r2(3);
    std::vector<double> v1 = make_voice(16000, 16000, r1);
    std::vector<double> v2 = make_voice(16000, 16000, r2);
    CHECK(v1 == v2);
    double peak = 0.0;
    for (double x : v1) peak = std::max(peak, std::fabs(x));
    CHECK(peak == doctest::Approx(0.5).epsilon(1e-12));
    double acc = 0.0;
    for (double x : v1) acc += x * x;
    CHECK(acc > 0.0);
}

TEST_CASE("mix_at_snr hits the requested ratio exactly") {
    Rng rng(5);
    std::vector<double> clean = make_voice(8000, 16000, rng);
    std::vector<double> noise = make_noise(NoiseKind::White, 3000, 16000, rng);  // shorter: tiles

    for (double snr : {-5.0, 0.0, 5.0, 20.0}) {
        std::vector<double> added;
        std::vector<double> noisy = mix_at_snr(clean, noise, snr, &added);
        REQUIRE(noisy.size() == clean.size());
        REQUIRE(added.size() == clean.size());
        double pc = 0, pn = 0;
        for (size_t i = 0; i < clean.size(); ++i) {
            pc += clean[i] * clean[i];
            pn += added[i] * added[i];
            CHECK(noisy[i] == clean[i] + added[i]);
        }
        const double got = 10.0 * std::log10(pc / pn);
        CHECK(std::fabs(got - snr) < 1e-10);
    }

    std::vector<double> silent(100, 0.0);
    CHECK_THROWS_AS(mix_at_snr(silent, noise, 0.0), DataError);
    CHECK_THROWS_AS(mix_at_snr(clean, silent, 0.0), DataError);
    CHECK_THROWS_AS(mix_at_snr({}, noise, 0.0), DataError);
}

TEST_CASE("pad_batch zero-pads to the longest clip") {
    auto [batch, lengths] = pad_batch({{1, 2, 3}, {4, 5}, {6}});
    CHECK(batch.shape() == Shape{3, 3});
    CHECK(batch.values() == std::vector<double>{1, 2, 3, 4, 5, 0, 6, 0, 0});
    CHECK(lengths == std::vector<int64_t>{3, 2, 1});
    CHECK_THROWS_AS(pad_batch({}), DataError);
}

TEST_CASE("hann window endpoints, symmetry, and sum") {
    Tensor w = hann_window(512);
    const double* v = w.data();
    CHECK(v[0] == 0.0);
    CHECK(v[256] == 1.0);
    for (int i = 1; i < 512; ++i) CHECK(v[i] == doctest::Approx(v[512 - i]).epsilon(1e-14));
    double s = 0.0;
    for (int i = 0; i < 512; ++i) s += v[i];
    CHECK(s == doctest::Approx(256.0).epsilon(1e-12));  // periodic form sums to N/2
}

TEST_CASE("stft of a constant matches the exact window spectrum in every frame") {
    // Reflect padding keeps a constant signal constant, so every frame sees
    // the same content: bin 0 = 256*c, bin 1 = -128*c, everything else 0.
    const double c = 0.3;
    Tensor x = Tensor::full({4000}, c);
    ComplexTensor spec = stft(x);
    REQUIRE(spec.shape() == Shape{stft_frames(4000), 257});
    const int64_t k = spec.extent(0);
    const double* re = spec.re.data();
    const double* im = spec.im.data();
    for (int64_t f = 0; f < k; ++f) {
        CHECK(std::fabs(re[f * 257 + 0] - 256.0 * c) < 1e-9);
        CHECK(std::fabs(re[f * 257 + 1] + 128.0 * c) < 1e-9);
        for (int64_t b = 0; b < 257; ++b) {
            CHECK(std::fabs(im[f * 257 + b]) < 1e-9);
            if (b >= 2) CHECK(std::fabs(re[f * 257 + b]) < 1e-9);
        }
    }
}

TEST_CASE("stft of a bin-centered sine concentrates at bin 32 with exact values") {
    // 1 kHz at 16 kHz with frame 512: bin 32, and every interior frame starts
    // at a phase multiple of 2*pi, so X[32] = -128i and X[31] = X[33] = +64i.
    Tensor x = Tensor::from_vector({16000}, sine(1000.0, 16000, 16000));
    ComplexTensor spec = stft(x);
    const int64_t k = spec.extent(0);
    REQUIRE(k == 63);
    const double* re = spec.re.data();
    const double* im = spec.im.data();
    for (int64_t f = 1; f + 1 < k; ++f) {
        const double* rr = re + f * 257;
        const double* ii = im + f * 257;
        CHECK(std::fabs(ii[32] + 128.0) < 1e-9);
        CHECK(std::fabs(ii[31] - 64.0) < 1e-9);
        CHECK(std::fabs(ii[33] - 64.0) < 1e-9);
        for (int64_t b = 0; b < 257; ++b) {
            CHECK(std::fabs(rr[b]) < 1e-9);
            if (b < 31 || b > 33) CHECK(std::fabs(ii[b]) < 1e-9);
        }
    }
}

TEST_CASE("stft is linear") {
    Rng rng(13);
    Tensor x = Tensor::rand_normal({2000}, rng);
    Tensor y = Tensor::rand_normal({2000}, rng);
    ComplexTensor sx = stft(x);
    ComplexTensor sy = stft(y);
    ComplexTensor sm = stft(add(mul(x, 2.0), mul(y, -0.5)));
    Tensor want_re = add(mul(sx.re, 2.0), mul(sy.re, -0.5));
    Tensor want_im = add(mul(sx.im, 2.0), mul(sy.im, -0.5));
    const double* a = sm.re.data();
    const double* b = want_re.data();
    const double* c = sm.im.data();
    const double* d = want_im.data();
    double m = 0.0;
    for (int64_t i = 0; i < sm.size(); ++i)
        m = std::max({m, std::fabs(a[i] - b[i]), std::fabs(c[i] - d[i])});
    CHECK(m < 1e-9);
}

TEST_CASE("stft/istft round trip is transparent at awkward lengths") {
    Rng rng(17);
    for (int64_t len : {257LL, 300LL, 1000LL, 12345LL, 16000LL}) {
        Tensor x = Tensor::rand_normal({len}, rng);
        ComplexTensor spec = stft(x);
        Tensor back = istft(spec, len);
        REQUIRE(back.shape() == Shape{len});
        CHECK(max_abs_diff(back.values(), x.values()) < 1e-6);
    }
}

TEST_CASE("stft/istft validate their inputs") {
    CHECK_THROWS_AS(stft(Tensor::zeros({100})), DataError);                  // too short to center
    CHECK_THROWS_AS(stft(Tensor::zeros({2, 300})), std::invalid_argument);   // rank
    CHECK_THROWS_AS(stft(Tensor::zeros({300}), 500, 250), std::invalid_argument);  // non-pow2 frame
    ComplexTensor spec = stft(Tensor::full({1000}, 0.5));
    const int64_t k = spec.extent(0);
    CHECK_THROWS_AS(istft(spec, k * 256 + 1), std::invalid_argument);  // beyond coverage
    CHECK_THROWS_AS(istft(spec, 0), std::invalid_argument);
    CHECK_THROWS_AS(istft(ComplexTensor::zeros({5, 100}), 50), std::invalid_argument);  // bin count
}

TEST_CASE("analysis-synthesis chain is differentiable") {
    // Small geometry keeps the finite-difference loop cheap.
    Rng rng(23);
    Tensor x = Tensor::rand_normal({40}, rng);
    Tensor wgt = Tensor::rand_normal({40}, rng);
    auto f = [&] {
        ComplexTensor spec = stft(x, 16, 8);
        Tensor y = istft(spec, 40, 16, 8);
        return sum(mul(y, wgt));
    };
    GradCheckResult r = gradcheck(f, {x}, 1e-5);
    INFO(r.worst_param, " coord ", r.worst_coord, " rel ", r.max_rel_err);
    CHECK(r.pass(1e-6));

    // And through a spectral-domain loss on the magnitudes.
    auto g = [&] {
        ComplexTensor spec = stft(x, 16, 8);
        return sum(magnitude(spec, 1e-9));
    };
    GradCheckResult r2 = gradcheck(g, {x}, 1e-5);
    INFO(r2.worst_param, " coord ", r2.worst_coord, " rel ", r2.max_rel_err);
    CHECK(r2.pass(1e-5));
}
