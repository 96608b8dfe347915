#include "dcht/dsp/audio.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace dcht {

double AudioClip::rms() const {
    if (samples.empty()) return 0.0;
    double acc = 0.0;
    for (double v : samples) acc += v * v;
    return std::sqrt(acc / static_cast<double>(samples.size()));
}

namespace {

uint32_t rd_u32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}
uint16_t rd_u16(const uint8_t* p) { return static_cast<uint16_t>(p[0] | (p[1] << 8)); }

void wr_u32(std::vector<uint8_t>& v, uint32_t x) {
    v.push_back(static_cast<uint8_t>(x & 0xff));
    v.push_back(static_cast<uint8_t>((x >> 8) & 0xff));
    v.push_back(static_cast<uint8_t>((x >> 16) & 0xff));
    v.push_back(static_cast<uint8_t>((x >> 24) & 0xff));
}
void wr_u16(std::vector<uint8_t>& v, uint16_t x) {
    v.push_back(static_cast<uint8_t>(x & 0xff));
    v.push_back(static_cast<uint8_t>((x >> 8) & 0xff));
}

}  // namespace

AudioClip read_wav(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open wav file: " + path);
    std::vector<uint8_t> raw((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (raw.size() < 12 || std::memcmp(raw.data(), "RIFF", 4) != 0 || std::memcmp(raw.data() + 8, "WAVE", 4) != 0)
        throw DataError("not a RIFF/WAVE file: " + path);

    uint16_t codec = 0, channels = 0, bits = 0;
    uint32_t rate = 0;
    bool have_fmt = false;
    const uint8_t* data = nullptr;
    size_t data_len = 0;

    size_t pos = 12;
    while (pos + 8 <= raw.size()) {
        const char* tag = reinterpret_cast<const char*>(raw.data() + pos);
        const uint32_t len = rd_u32(raw.data() + pos + 4);
        if (pos + 8 + len > raw.size()) throw DataError("truncated chunk in wav file: " + path);
        const uint8_t* body = raw.data() + pos + 8;
        if (std::memcmp(tag, "fmt ", 4) == 0) {
            if (len < 16) throw DataError("malformed fmt chunk: " + path);
            codec = rd_u16(body);
            channels = rd_u16(body + 2);
            rate = rd_u32(body + 4);
            bits = rd_u16(body + 14);
            have_fmt = true;
        } else if (std::memcmp(tag, "data", 4) == 0) {
            data = body;
            data_len = len;
        }
        pos += 8 + len + (len & 1);  // chunks are word-aligned
    }
    if (!have_fmt || data == nullptr) throw DataError("wav file missing fmt or data chunk: " + path);
    if (channels == 0 || rate == 0) throw DataError("malformed wav header: " + path);

    AudioClip clip;
    clip.sample_rate = static_cast<int>(rate);
    if (codec == 1 && bits == 16) {
        const size_t frames = data_len / (2 * channels);
        clip.samples.resize(frames);
        for (size_t i = 0; i < frames; ++i) {
            double acc = 0.0;
            for (uint16_t c = 0; c < channels; ++c) {
                const int16_t s = static_cast<int16_t>(rd_u16(data + (i * channels + c) * 2));
                acc += static_cast<double>(s) / 32768.0;
            }
            clip.samples[i] = acc / channels;
        }
    } else if (codec == 3 && bits == 32) {
        const size_t frames = data_len / (4 * channels);
        clip.samples.resize(frames);
        for (size_t i = 0; i < frames; ++i) {
            double acc = 0.0;
            for (uint16_t c = 0; c < channels; ++c) {
                const uint32_t u = rd_u32(data + (i * channels + c) * 4);
                float fv;
                std::memcpy(&fv, &u, 4);
                acc += static_cast<double>(fv);
            }
            clip.samples[i] = acc / channels;
        }
    } else {
        throw DataError("unsupported wav encoding (codec " + std::to_string(codec) + ", " +
                        std::to_string(bits) + " bit): " + path);
    }
    return clip;
}

void write_wav(const std::string& path, const AudioClip& clip) {
    std::vector<uint8_t> out;
    const uint32_t n = static_cast<uint32_t>(clip.samples.size());
    out.insert(out.end(), {'R', 'I', 'F', 'F'});
    wr_u32(out, 36 + 2 * n);
    out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
    wr_u32(out, 16);
    wr_u16(out, 1);  // PCM
    wr_u16(out, 1);  // mono
    wr_u32(out, static_cast<uint32_t>(clip.sample_rate));
    wr_u32(out, static_cast<uint32_t>(clip.sample_rate) * 2);
    wr_u16(out, 2);
    wr_u16(out, 16);
    out.insert(out.end(), {'d', 'a', 't', 'a'});
    wr_u32(out, 2 * n);
    for (double v : clip.samples) {
        const long s = std::lround(v * 32768.0);
        const long c = std::min(32767L, std::max(-32768L, s));
        wr_u16(out, static_cast<uint16_t>(static_cast<int16_t>(c)));
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write wav file: " + path);
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) throw DataError("short write to wav file: " + path);
}

AudioClip resample(const AudioClip& clip, int target_rate) {
    if (target_rate <= 0) throw DataError("invalid target sample rate");
    if (clip.sample_rate == target_rate) return clip;
    const double ratio = static_cast<double>(clip.sample_rate) / target_rate;
    const int64_t n_in = clip.length();
    const int64_t n_out = static_cast<int64_t>(std::floor(static_cast<double>(n_in) / ratio));
    const double fc = std::min(1.0, 1.0 / ratio);  // normalized cutoff
    constexpr int kHalf = 32;

    AudioClip out;
    out.sample_rate = target_rate;
    out.samples.resize(static_cast<size_t>(n_out));
    for (int64_t t = 0; t < n_out; ++t) {
        const double center = static_cast<double>(t) * ratio;
        const int64_t n0 = static_cast<int64_t>(std::floor(center));
        double acc = 0.0;
        for (int64_t k = n0 - kHalf + 1; k <= n0 + kHalf; ++k) {
            if (k < 0 || k >= n_in) continue;
            const double d = center - static_cast<double>(k);
            const double u = d / kHalf;
            if (u <= -1.0 || u >= 1.0) continue;
            const double win = 0.5 * (1.0 + std::cos(M_PI * u));
            const double x = M_PI * fc * d;
            const double s = std::fabs(x) < 1e-12 ? 1.0 : std::sin(x) / x;
            acc += clip.samples[static_cast<size_t>(k)] * fc * s * win;
        }
        out.samples[static_cast<size_t>(t)] = acc;
    }
    return out;
}

NoiseKind noise_kind_from_string(const std::string& s) {
    if (s == "white") return NoiseKind::White;
    if (s == "pink") return NoiseKind::Pink;
    if (s == "babble") return NoiseKind::Babble;
    throw DataError("unknown noise kind: " + s + " (expected white, pink, or babble)");
}

namespace {

void normalize_rms(std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    const double r = std::sqrt(acc / static_cast<double>(v.size()));
    if (r > 0.0)
        for (double& x : v) x /= r;
}

}  // namespace

std::vector<double> make_noise(NoiseKind kind, int64_t length, int sample_rate, Rng& rng) {
    if (length <= 0) throw DataError("noise length must be positive");
    std::vector<double> v(static_cast<size_t>(length));
    switch (kind) {
        case NoiseKind::White:
            for (double& x : v) x = rng.normal();
            break;
        case NoiseKind::Pink: {
            // Voss-McCartney: row r refreshes every 2^r samples.
            constexpr int kRows = 16;
            double rows[kRows];
            for (double& r : rows) r = rng.normal();
            for (int64_t i = 0; i < length; ++i) {
                if (i > 0) {
                    uint64_t bits = static_cast<uint64_t>(i);
                    int r = 0;
                    while ((bits & 1) == 0 && r < kRows - 1) {
                        bits >>= 1;
                        ++r;
                    }
                    rows[r] = rng.normal();
                }
                double acc = 0.0;
                for (double r : rows) acc += r;
                v[static_cast<size_t>(i)] = acc / std::sqrt(static_cast<double>(kRows));
            }
            break;
        }
        case NoiseKind::Babble: {
            // A handful of overlapping voice-like harmonic stacks.
            std::fill(v.begin(), v.end(), 0.0);
            for (int voice = 0; voice < 6; ++voice) {
                const double f0 = rng.uniform(90.0, 280.0);
                const double am_rate = rng.uniform(1.5, 5.0);
                const double am_phase = rng.uniform(0.0, 2.0 * M_PI);
                double phases[8];
                for (double& p : phases) p = rng.uniform(0.0, 2.0 * M_PI);
                for (int64_t i = 0; i < length; ++i) {
                    const double t = static_cast<double>(i) / sample_rate;
                    const double env = 0.5 * (1.0 + std::sin(2.0 * M_PI * am_rate * t + am_phase));
                    double s = 0.0;
                    for (int h = 1; h <= 8; ++h)
                        s += std::sin(2.0 * M_PI * f0 * h * t + phases[h - 1]) / h;
                    v[static_cast<size_t>(i)] += env * s;
                }
            }
            break;
        }
    }
    normalize_rms(v);
    return v;
}

std::vector<double> make_voice(int64_t length, int sample_rate, Rng& rng) {
    if (length <= 0) throw DataError("clip length must be positive");
    const double f_start = rng.uniform(100.0, 300.0);
    const double f_end = rng.uniform(100.0, 300.0);
    const double vib_rate = rng.uniform(4.0, 6.0);
    const double vib_depth = rng.uniform(2.0, 8.0);
    const double syllable_rate = rng.uniform(2.0, 4.0);
    double harmonic_phase[10];
    for (double& p : harmonic_phase) p = rng.uniform(0.0, 2.0 * M_PI);

    std::vector<double> v(static_cast<size_t>(length));
    const double dur = static_cast<double>(length) / sample_rate;
    double phase = 0.0;
    for (int64_t i = 0; i < length; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        const double f0 = f_start + (f_end - f_start) * (t / dur) + vib_depth * std::sin(2.0 * M_PI * vib_rate * t);
        phase += 2.0 * M_PI * f0 / sample_rate;
        const double syl = std::max(0.0, std::sin(2.0 * M_PI * syllable_rate * t));
        double s = 0.0;
        for (int h = 1; h <= 10; ++h) {
            if (f0 * h > 0.45 * sample_rate) break;
            s += std::sin(phase * h + harmonic_phase[h - 1]) / (h * h);
        }
        v[static_cast<size_t>(i)] = syl * s;
    }
    double peak = 0.0;
    for (double x : v) peak = std::max(peak, std::fabs(x));
    if (peak > 0.0)
        for (double& x : v) x *= 0.5 / peak;
    return v;
}

std::vector<double> mix_at_snr(const std::vector<double>& clean, const std::vector<double>& noise,
                               double snr_db, std::vector<double>* added_noise) {
    if (clean.empty()) throw DataError("cannot mix an empty clean signal");
    if (noise.empty()) throw DataError("cannot mix with an empty noise signal");
    double pc = 0.0;
    for (double x : clean) pc += x * x;
    if (pc <= 0.0) throw DataError("clean signal is silent; SNR is undefined");

    std::vector<double> tiled(clean.size());
    double pn = 0.0;
    for (size_t i = 0; i < clean.size(); ++i) {
        tiled[i] = noise[i % noise.size()];
        pn += tiled[i] * tiled[i];
    }
    if (pn <= 0.0) throw DataError("noise signal is silent; SNR is undefined");

    const double gain = std::sqrt(pc / (pn * std::pow(10.0, snr_db / 10.0)));
    std::vector<double> noisy(clean.size());
    if (added_noise) added_noise->resize(clean.size());
    for (size_t i = 0; i < clean.size(); ++i) {
        const double scaled = gain * tiled[i];
        noisy[i] = clean[i] + scaled;
        if (added_noise) (*added_noise)[i] = scaled;
    }
    return noisy;
}

std::pair<Tensor, std::vector<int64_t>> pad_batch(const std::vector<std::vector<double>>& clips) {
    if (clips.empty()) throw DataError("empty batch");
    int64_t longest = 0;
    std::vector<int64_t> lengths;
    lengths.reserve(clips.size());
    for (const auto& c : clips) {
        lengths.push_back(static_cast<int64_t>(c.size()));
        longest = std::max(longest, lengths.back());
    }
    if (longest == 0) throw DataError("batch contains only empty clips");
    Tensor out = Tensor::zeros({static_cast<int64_t>(clips.size()), longest});
    double* ov = out.data();
    for (size_t b = 0; b < clips.size(); ++b)
        std::memcpy(ov + static_cast<int64_t>(b) * longest, clips[b].data(), sizeof(double) * clips[b].size());
    return {out, lengths};
}

}  // namespace dcht
