#include "dcht/model/dptnet.hpp"

#include <cmath>

namespace dcht {

void DptConfig::validate() const {
    if (enc_channels < 1) throw std::invalid_argument("enc_channels must be positive");
    if (enc_kernel < 1 || enc_stride < 1 || enc_stride > enc_kernel)
        throw std::invalid_argument("need 1 <= enc_stride <= enc_kernel");
    if (chunk < 2 || chunk % 2 != 0)
        throw std::invalid_argument("chunk length must be even (50% overlap), got " + std::to_string(chunk));
    if (num_blocks < 1) throw std::invalid_argument("num_blocks must be at least 1");
    if (heads < 1 || enc_channels % heads != 0)
        throw std::invalid_argument("enc_channels " + std::to_string(enc_channels) +
                                    " not divisible by " + std::to_string(heads) + " heads");
    if (compress_factor < 0) throw std::invalid_argument("compress_factor must be non-negative");
    if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("dropout must be in [0, 1)");
}

ChunkedTensor segment(const Tensor& x, int64_t chunk) {
    if (x.dim() != 2) throw std::invalid_argument("segment expects [C, T], got " + shape_str(x.shape()));
    if (chunk < 2 || chunk % 2 != 0) throw std::invalid_argument("chunk length must be even");
    const int64_t c = x.extent(0), t = x.extent(1);
    const int64_t hop = chunk / 2;
    const int64_t n = t <= chunk ? 1 : (t - chunk + hop - 1) / hop + 1;
    const int64_t t_pad = (n - 1) * hop + chunk;
    Tensor padded = t_pad == t ? x : pad(x, 1, 0, t_pad - t);
    std::vector<Tensor> chunks;
    chunks.reserve(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i)
        chunks.push_back(reshape(slice(padded, 1, i * hop, i * hop + chunk), {c, 1, chunk}));
    ChunkedTensor out;
    out.data = n == 1 ? chunks[0] : concat(chunks, 1);
    out.frames = t;
    return out;
}

Tensor desegment(const ChunkedTensor& c) {
    if (c.data.dim() != 3) throw std::invalid_argument("desegment expects [C, N, chunk]");
    const int64_t n = c.data.extent(1), chunk = c.data.extent(2);
    const int64_t hop = chunk / 2;
    const int64_t span = (n - 1) * hop + chunk;
    if (c.frames < 1 || c.frames > span)
        throw std::invalid_argument("stored frame count " + std::to_string(c.frames) +
                                    " outside the covered span " + std::to_string(span));
    Tensor num = overlap_add(c.data, hop);  // [C, span]
    Tensor coverage;
    {
        NoTapeScope no_tape;
        coverage = expand_to(overlap_add(Tensor::full({n, chunk}, 1.0), hop), num.shape());
    }
    return slice(divide(num, coverage), 1, 0, c.frames);
}

ImprovedTransformer::ImprovedTransformer(int64_t d_, int64_t heads, int64_t hidden,
                                         int64_t compression, double dropout, Rng& rng)
    : d(d_),
      attn(d_, heads, compression, rng),
      norm1(d_),
      norm2(d_),
      gru(d_, hidden, rng),
      ffw(hidden, d_, rng),
      drop(dropout) {}

Tensor ImprovedTransformer::forward(const Tensor& x, bool training, Rng& rng) const {
    Tensor z = norm1.forward(add(drop.forward(attn.forward(x), training, rng), x));
    Tensor g = drop.forward(relu(ffw.forward(gru.forward(z))), training, rng);
    return norm2.forward(add(z, g));
}

void ImprovedTransformer::collect(const std::string& prefix, ParamMap& pm) const {
    attn.collect(prefix + ".attn", pm);
    norm1.collect(prefix + ".norm1", pm);
    gru.collect(prefix + ".gru", pm);
    ffw.collect(prefix + ".ffw", pm);
    norm2.collect(prefix + ".norm2", pm);
}

DptBlock::DptBlock(const DptConfig& cfg, Rng& rng)
    : local(cfg.enc_channels, cfg.heads, cfg.hidden(), 0, cfg.dropout, rng),
      global(cfg.enc_channels, cfg.heads, cfg.hidden(), cfg.compress_factor, cfg.dropout, rng) {}

ChunkedTensor DptBlock::forward(const ChunkedTensor& x, bool training, Rng& rng) const {
    // Intra-chunk: sequences along the final axis, one per (chunk, channel)…
    Tensor intra = permute(x.data, {1, 2, 0});  // [N, chunk, C]
    intra = local.forward(intra, training, rng);
    // …then inter-chunk: sequences along N, batched over chunk positions.
    Tensor inter = permute(intra, {1, 0, 2});  // [chunk, N, C]
    inter = global.forward(inter, training, rng);
    ChunkedTensor out;
    out.data = permute(inter, {2, 1, 0});  // back to [C, N, chunk]
    out.frames = x.frames;
    return out;
}

void DptBlock::collect(const std::string& prefix, ParamMap& pm) const {
    local.collect(prefix + ".local", pm);
    global.collect(prefix + ".global", pm);
}

Dptnet::Dptnet(const DptConfig& cfg_, Rng& rng) : cfg(cfg_) {
    cfg.validate();
    // Encoder, mask conv, and decoder are bias-free so zeros propagate to
    // zeros through the whole masking chain.
    const int64_t c = cfg.enc_channels, k = cfg.enc_kernel;
    const double enc_limit = 1.0 / std::sqrt(static_cast<double>(k));
    enc_w = Tensor::rand_uniform({c, 1, k}, rng, -enc_limit, enc_limit).mark_parameter();
    for (int64_t b = 0; b < cfg.num_blocks; ++b) blocks.emplace_back(cfg, rng);
    mask_act = PReLU(0.25);
    const double mask_limit = 1.0 / std::sqrt(static_cast<double>(c));
    mask_w = Tensor::rand_uniform({c, c, 1}, rng, -mask_limit, mask_limit).mark_parameter();
    const double dec_limit = 1.0 / std::sqrt(static_cast<double>(c * k));
    dec_w = Tensor::rand_uniform({c, 1, k}, rng, -dec_limit, dec_limit).mark_parameter();
}

namespace {

// Shortest length >= L that the encoder consumes without remainder.
int64_t padded_length(int64_t length, const DptConfig& cfg) {
    if (length <= cfg.enc_kernel) return cfg.enc_kernel;
    const int64_t steps = (length - cfg.enc_kernel + cfg.enc_stride - 1) / cfg.enc_stride;
    return cfg.enc_kernel + steps * cfg.enc_stride;
}

}  // namespace

Tensor Dptnet::encode(const Tensor& wave) const {
    if (wave.dim() != 1) throw std::invalid_argument("expected a rank-1 waveform, got " + shape_str(wave.shape()));
    if (wave.size() < cfg.enc_kernel)
        throw DataError("clip too short for the encoder: " + std::to_string(wave.size()) +
                        " samples, need at least " + std::to_string(cfg.enc_kernel));
    const int64_t lp = padded_length(wave.size(), cfg);
    Tensor x = lp == wave.size() ? wave : pad(wave, 0, 0, lp - wave.size());
    Tensor e = conv1d(reshape(x, {1, 1, lp}), enc_w, Tensor(), cfg.enc_stride, 0);
    return reshape(relu(e), {cfg.enc_channels, -1});
}

Tensor Dptnet::forward(const Tensor& wave, bool training, Rng& rng) const {
    const int64_t length = wave.size();
    Tensor encoded = encode(wave);  // [C, T]
    const int64_t t = encoded.extent(1);

    ChunkedTensor c = segment(encoded, cfg.chunk);
    for (const DptBlock& b : blocks) c = b.forward(c, training, rng);
    Tensor features = desegment(c);  // [C, T]

    Tensor m = conv1d(reshape(mask_act.forward(features), {1, cfg.enc_channels, t}), mask_w, Tensor(), 1, 0);
    Tensor masked = mul(relu(m), reshape(encoded, {1, cfg.enc_channels, t}));
    Tensor y = tconv1d(masked, dec_w, Tensor(), cfg.enc_stride);  // [1, 1, padded length]
    return slice(reshape(y, {y.extent(2)}), 0, 0, length);
}

void Dptnet::collect(const std::string& prefix, ParamMap& pm) const {
    add_param(pm, prefix + ".encoder.weight", enc_w);
    for (size_t b = 0; b < blocks.size(); ++b)
        blocks[b].collect(prefix + ".block" + std::to_string(b), pm);
    mask_act.collect(prefix + ".mask.act", pm);
    add_param(pm, prefix + ".mask.weight", mask_w);
    add_param(pm, prefix + ".decoder.weight", dec_w);
}

}  // namespace dcht
