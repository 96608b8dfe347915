#include "dcht/model/swinunet.hpp"

#include <cmath>

namespace dcht {

void SwinUnetConfig::validate() const {
    if (patch_size < 1) throw std::invalid_argument("patch_size must be positive");
    if (window < 1) throw std::invalid_argument("window must be positive");
    if (embed_dim < 1) throw std::invalid_argument("embed_dim must be positive");
    if (depths.size() < 2)
        throw std::invalid_argument("need at least one encoder stage plus a bottleneck");
    if (heads.size() != depths.size())
        throw std::invalid_argument("heads list must match depths list, got " +
                                    std::to_string(heads.size()) + " vs " + std::to_string(depths.size()));
    for (int64_t d : depths) {
        if (d < 2 || d % 2 != 0)
            throw std::invalid_argument("stage depth must be a positive even number (plain/shifted pairs), got " +
                                        std::to_string(d));
    }
    for (size_t s = 0; s < heads.size(); ++s) {
        const int64_t dim = embed_dim << s;
        if (heads[s] < 1 || dim % heads[s] != 0)
            throw std::invalid_argument("stage " + std::to_string(s) + " dim " + std::to_string(dim) +
                                        " not divisible by " + std::to_string(heads[s]) + " heads");
    }
    if (mlp_ratio <= 0.0) throw std::invalid_argument("mlp_ratio must be positive");
    if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("dropout must be in [0, 1)");
}

ComplexTensor pixel_shuffle(const ComplexTensor& x, int64_t r) {
    if (x.dim() != 3) throw std::invalid_argument("pixel_shuffle expects [H, W, C], got " + shape_str(x.shape()));
    const int64_t h = x.extent(0), w = x.extent(1), c = x.extent(2);
    if (r < 1 || c % (r * r) != 0)
        throw std::invalid_argument("channel extent " + std::to_string(c) + " not divisible by r^2 = " +
                                    std::to_string(r * r));
    const int64_t co = c / (r * r);
    ComplexTensor y = creshape(x, {h, w, r, r, co});
    y = cpermute(y, {0, 2, 1, 3, 4});  // [H, r, W, r, co]
    return creshape(y, {h * r, w * r, co});
}

ComplexTensor pixel_unshuffle(const ComplexTensor& x, int64_t r) {
    if (x.dim() != 3) throw std::invalid_argument("pixel_unshuffle expects [H, W, C], got " + shape_str(x.shape()));
    const int64_t h = x.extent(0), w = x.extent(1), c = x.extent(2);
    if (r < 1 || h % r != 0 || w % r != 0)
        throw std::invalid_argument("grid " + shape_str(x.shape()) + " not divisible by r = " + std::to_string(r));
    ComplexTensor y = creshape(x, {h / r, r, w / r, r, c});
    y = cpermute(y, {0, 2, 1, 3, 4});  // [H/r, W/r, r, r, C]
    return creshape(y, {h / r, w / r, r * r * c});
}

PatchMerge::PatchMerge(int64_t dim, Rng& rng) : norm(4 * dim), reduce(4 * dim, 2 * dim, rng, false) {}

ComplexTensor PatchMerge::forward(const ComplexTensor& x) const {
    if (x.dim() != 3 || x.extent(0) % 2 != 0 || x.extent(1) % 2 != 0)
        throw std::invalid_argument("patch merge needs an even [H, W, C] grid, got " + shape_str(x.shape()));
    return reduce.forward(norm.forward(pixel_unshuffle(x, 2)));
}

void PatchMerge::collect(const std::string& prefix, ParamMap& pm) const {
    norm.collect(prefix + ".norm", pm);
    reduce.collect(prefix + ".reduce", pm);
}

PatchExpand::PatchExpand(int64_t dim, Rng& rng) : grow(dim, 2 * dim, rng, false), norm(dim / 2) {
    if (dim % 2 != 0) throw std::invalid_argument("patch expand needs an even channel count");
}

ComplexTensor PatchExpand::forward(const ComplexTensor& x) const {
    return norm.forward(pixel_shuffle(grow.forward(x), 2));
}

void PatchExpand::collect(const std::string& prefix, ParamMap& pm) const {
    grow.collect(prefix + ".grow", pm);
    norm.collect(prefix + ".norm", pm);
}

ComplexTensor bounded_mask(const ComplexTensor& raw) {
    // r >= 1e-12 keeps the quotient finite; tanh(r)/r <= 1 bounds the result.
    Tensor r = maximum(magnitude(raw, 1e-24), 1e-12);
    Tensor gain = divide(tanh_op(r), r);
    return cscale(raw, gain);
}

namespace {

void check_finite(const ComplexTensor& x, const char* stage) {
    for (const Tensor* part : {&x.re, &x.im}) {
        const double* v = part->data();
        for (int64_t i = 0; i < part->size(); ++i)
            if (!std::isfinite(v[i]))
                throw NumericError(std::string("non-finite activation after ") + stage);
    }
}

}  // namespace

SwinUnet::SwinUnet(const SwinUnetConfig& cfg_, Rng& rng) : cfg(cfg_) {
    cfg.validate();
    const int64_t p = cfg.patch_size;
    const int64_t stages = cfg.encoder_stages();
    embed = ComplexLinear(p * p, cfg.embed_dim, rng, false);
    embed_norm = ComplexLayerNorm(cfg.embed_dim);

    auto stage_blocks = [&](int64_t dim, int64_t heads, int64_t depth) {
        std::vector<SwinBlock> blocks;
        for (int64_t d = 0; d < depth; ++d) {
            const int64_t shift = (d % 2 == 0) ? 0 : cfg.window / 2;
            blocks.emplace_back(dim, heads, cfg.window, shift, cfg.mlp_ratio, cfg.dropout,
                                cfg.score_mode, rng);
        }
        return blocks;
    };

    for (int64_t s = 0; s < stages; ++s) {
        const int64_t dim = cfg.embed_dim << s;
        enc_blocks.push_back(stage_blocks(dim, cfg.heads[s], cfg.depths[s]));
        merges.emplace_back(dim, rng);
    }
    bottleneck = stage_blocks(cfg.embed_dim << stages, cfg.heads[stages], cfg.depths[stages]);
    expands.resize(static_cast<size_t>(stages));
    skip_fuse.resize(static_cast<size_t>(stages));
    dec_blocks.resize(static_cast<size_t>(stages));
    for (int64_t s = stages - 1; s >= 0; --s) {
        const int64_t dim = cfg.embed_dim << s;
        expands[s] = PatchExpand(2 * dim, rng);
        skip_fuse[s] = ComplexLinear(2 * dim, dim, rng);
        dec_blocks[s] = stage_blocks(dim, cfg.heads[s], cfg.depths[s]);
    }
    final_grow = ComplexLinear(cfg.embed_dim, p * p * cfg.embed_dim, rng, false);
    final_norm = ComplexLayerNorm(cfg.embed_dim);
    head = ComplexLinear(cfg.embed_dim, 1, rng);
}

SwinUnetOutput SwinUnet::forward(const ComplexTensor& spec, bool training, Rng& rng) const {
    if (spec.dim() != 2)
        throw std::invalid_argument("expected a [K, F] spectrogram, got " + shape_str(spec.shape()));
    const int64_t k = spec.extent(0), f = spec.extent(1);
    const int64_t m = cfg.pad_multiple();
    const int64_t kp = (k + m - 1) / m * m;
    const int64_t fp = (f + m - 1) / m * m;

    ComplexTensor x = cpad(cpad(spec, 0, 0, kp - k), 1, 0, fp - f);
    x = pixel_unshuffle(creshape(x, {kp, fp, 1}), cfg.patch_size);
    x = embed_norm.forward(embed.forward(x));
    check_finite(x, "patch embedding");

    const int64_t stages = cfg.encoder_stages();
    std::vector<ComplexTensor> skips;
    for (int64_t s = 0; s < stages; ++s) {
        for (const SwinBlock& b : enc_blocks[s]) x = b.forward(x, training, rng);
        skips.push_back(x);
        x = merges[s].forward(x);
        check_finite(x, "encoder stage");
    }
    for (const SwinBlock& b : bottleneck) x = b.forward(x, training, rng);
    check_finite(x, "bottleneck");
    for (int64_t s = stages - 1; s >= 0; --s) {
        x = expands[s].forward(x);
        x = skip_fuse[s].forward(cconcat({x, skips[s]}, 2));
        for (const SwinBlock& b : dec_blocks[s]) x = b.forward(x, training, rng);
        check_finite(x, "decoder stage");
    }

    x = pixel_shuffle(final_grow.forward(x), cfg.patch_size);
    x = head.forward(final_norm.forward(x));  // [Kp, Fp, 1]
    ComplexTensor raw = cslice(cslice(creshape(x, {kp, fp}), 0, 0, k), 1, 0, f);
    check_finite(raw, "output head");

    SwinUnetOutput out;
    out.raw = raw;
    if (cfg.mask_connection) {
        out.mask = bounded_mask(raw);
        out.enhanced = cmul(out.mask, spec);
    } else {
        out.enhanced = raw;
    }
    return out;
}

void SwinUnet::collect(const std::string& prefix, ParamMap& pm) const {
    embed.collect(prefix + ".embed", pm);
    embed_norm.collect(prefix + ".embed_norm", pm);
    const int64_t stages = cfg.encoder_stages();
    for (int64_t s = 0; s < stages; ++s) {
        for (size_t d = 0; d < enc_blocks[s].size(); ++d)
            enc_blocks[s][d].collect(prefix + ".enc" + std::to_string(s) + ".block" + std::to_string(d), pm);
        merges[s].collect(prefix + ".merge" + std::to_string(s), pm);
    }
    for (size_t d = 0; d < bottleneck.size(); ++d)
        bottleneck[d].collect(prefix + ".bottleneck.block" + std::to_string(d), pm);
    for (int64_t s = stages - 1; s >= 0; --s) {
        expands[s].collect(prefix + ".expand" + std::to_string(s), pm);
        skip_fuse[s].collect(prefix + ".fuse" + std::to_string(s), pm);
        for (size_t d = 0; d < dec_blocks[s].size(); ++d)
            dec_blocks[s][d].collect(prefix + ".dec" + std::to_string(s) + ".block" + std::to_string(d), pm);
    }
    final_grow.collect(prefix + ".final_grow", pm);
    final_norm.collect(prefix + ".final_norm", pm);
    head.collect(prefix + ".head", pm);
}

}  // namespace dcht
