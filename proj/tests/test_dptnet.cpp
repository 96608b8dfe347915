#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "dcht/core/gradcheck.hpp"
#include "dcht/model/dptnet.hpp"

using namespace dcht;

namespace {

DptConfig tiny_config() {
    DptConfig cfg;
    cfg.enc_channels = 4;
    cfg.enc_kernel = 16;
    cfg.enc_stride = 8;
    cfg.chunk = 8;
    cfg.num_blocks = 2;
    cfg.heads = 2;
    cfg.gru_hidden = 8;
    cfg.compress_factor = 3;
    return cfg;
}

void jitter(ParamMap& pm, Rng& rng, double amp = 0.25) {
    for (auto& [name, t] : pm) {
        Tensor h = t;
        double* v = h.data();
        for (int64_t i = 0; i < h.size(); ++i) v[i] += rng.uniform(-amp, amp);
    }
}

bool all_finite(const Tensor& t) {
    for (double v : t.values())
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace

TEST_CASE("config validation rejects inconsistent settings") {
    DptConfig cfg = tiny_config();
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.hop() == 4);
    CHECK(cfg.hidden() == 8);

    DptConfig odd_chunk = cfg;
    odd_chunk.chunk = 7;
    CHECK_THROWS_AS(odd_chunk.validate(), std::invalid_argument);

    DptConfig bad_heads = cfg;
    bad_heads.heads = 3;
    CHECK_THROWS_AS(bad_heads.validate(), std::invalid_argument);

    DptConfig bad_stride = cfg;
    bad_stride.enc_stride = 20;
    CHECK_THROWS_AS(bad_stride.validate(), std::invalid_argument);

    DptConfig no_blocks = cfg;
    no_blocks.num_blocks = 0;
    CHECK_THROWS_AS(no_blocks.validate(), std::invalid_argument);

    DptConfig default_cfg;
    CHECK_NOTHROW(default_cfg.validate());
    CHECK(default_cfg.hidden() == 128);
}

TEST_CASE("segmentation chunk arithmetic matches the overlap layout") {
    Rng rng(1);
    Tensor x = Tensor::rand_normal({3, 128}, rng);
    ChunkedTensor c = segment(x, 64);
    CHECK(c.data.shape() == Shape{3, 3, 64});  // T=128, chunk 64 -> N=3
    CHECK(c.frames == 128);

    // First chunk is the first 64 frames verbatim; second starts at hop 32.
    const std::vector<double> xv = x.values();
    const std::vector<double> cv = c.data.values();
    for (int64_t ch = 0; ch < 3; ++ch)
        for (int64_t j = 0; j < 64; ++j) {
            CHECK(cv[(ch * 3 + 0) * 64 + j] == xv[ch * 128 + j]);
            CHECK(cv[(ch * 3 + 1) * 64 + j] == xv[ch * 128 + 32 + j]);
        }

    CHECK(segment(Tensor::zeros({2, 64}), 64).data.shape() == Shape{2, 1, 64});  // single chunk
    CHECK(segment(Tensor::zeros({2, 5}), 64).data.shape() == Shape{2, 1, 64});   // shorter than one chunk
    CHECK_THROWS_AS(segment(Tensor::zeros({2, 3, 4}), 4), std::invalid_argument);
}

TEST_CASE("desegment inverts segment bit-exactly for every frame count") {
    Rng rng(2);
    for (int64_t t = 1; t <= 80; ++t) {
        Tensor x = Tensor::rand_normal({2, t}, rng);
        ChunkedTensor c = segment(x, 8);
        Tensor back = desegment(c);
        REQUIRE(back.shape() == x.shape());
        CHECK(bit_equal(back, x));
    }
}

TEST_CASE("segmentation round trip is differentiable") {
    Rng rng(3);
    Tensor x = Tensor::rand_normal({2, 13}, rng);
    Tensor wgt = Tensor::rand_normal({2, 13}, rng);
    auto f = [&] { return mean(mul(desegment(segment(x, 8)), wgt)); };
    GradCheckResult r = gradcheck(f, {x}, 1e-5);
    CHECK(r.pass(1e-6));
}

TEST_CASE("encoder frame arithmetic and zero mapping") {
    Rng rng(4);
    Dptnet model(tiny_config(), rng);
    Tensor x = Tensor::rand_normal({64}, rng);
    Tensor e = model.encode(x);
    CHECK(e.shape() == Shape{4, 7});  // floor((64-16)/8)+1

    Tensor e100 = model.encode(Tensor::rand_normal({100}, rng));
    CHECK(e100.shape() == Shape{4, 12});  // padded to 104 samples

    Tensor ze = model.encode(Tensor::zeros({64}));
    for (double v : ze.values()) CHECK(v == 0.0);

    CHECK_THROWS_AS(model.encode(Tensor::zeros({15})), DataError);
    CHECK_THROWS_AS(model.encode(Tensor::zeros({2, 64})), std::invalid_argument);
}

TEST_CASE("improved transformer handles batches and length-1 sequences") {
    Rng rng(5);
    ImprovedTransformer it(4, 2, 8, 3, 0.0, rng);
    Rng fwd(0);
    Tensor x = Tensor::rand_normal({3, 5, 4}, rng);
    Tensor y = it.forward(x, false, fwd);
    CHECK(y.shape() == x.shape());
    CHECK(all_finite(y));

    Tensor one = Tensor::rand_normal({2, 1, 4}, rng);
    Tensor yo = it.forward(one, false, fwd);
    CHECK(yo.shape() == one.shape());
    CHECK(all_finite(yo));
}

TEST_CASE("transformer batch entries are independent (no positional coupling)") {
    Rng rng(6);
    ImprovedTransformer it(4, 2, 8, 0, 0.0, rng);
    Rng fwd(0);
    Tensor x = Tensor::rand_normal({4, 6, 4}, rng);
    Tensor y = it.forward(x, false, fwd);

    // Swap two batch rows on the way in; outputs swap identically.
    Tensor swapped = concat({slice(x, 0, 3, 4), slice(x, 0, 1, 3), slice(x, 0, 0, 1)}, 0);
    Tensor ys = it.forward(swapped, false, fwd);
    CHECK(bit_equal(slice(ys, 0, 0, 1), slice(y, 0, 3, 4)));
    CHECK(bit_equal(slice(ys, 0, 1, 3), slice(y, 0, 1, 3)));
    CHECK(bit_equal(slice(ys, 0, 3, 4), slice(y, 0, 0, 1)));
}

TEST_CASE("identity-kernel compression reproduces the uncompressed transformer in place") {
    Rng rng(7);
    ImprovedTransformer compressed(4, 2, 8, 1, 0.0, rng);  // factor 1, machinery on
    ImprovedTransformer plain(4, 2, 8, 0, 0.0, rng);

    // Same weights everywhere the two share structure.
    plain.attn.wq = compressed.attn.wq;
    plain.attn.wk = compressed.attn.wk;
    plain.attn.wv = compressed.attn.wv;
    plain.attn.wo = compressed.attn.wo;
    plain.norm1 = compressed.norm1;
    plain.norm2 = compressed.norm2;
    plain.gru = compressed.gru;
    plain.ffw = compressed.ffw;

    // Identity compression: delta kernel, zero bias.
    {
        Tensor w = compressed.attn.ck_w;
        double* v = w.data();
        std::fill(v, v + w.size(), 0.0);
        for (int64_t i = 0; i < 4; ++i) v[i * 4 + i] = 1.0;
        Tensor w2 = compressed.attn.cv_w;
        double* u = w2.data();
        std::fill(u, u + w2.size(), 0.0);
        for (int64_t i = 0; i < 4; ++i) u[i * 4 + i] = 1.0;
        for (Tensor b : {compressed.attn.ck_b, compressed.attn.cv_b}) {
            double* bv = b.data();
            std::fill(bv, bv + b.size(), 0.0);
        }
    }

    Rng fwd(0);
    Tensor x = Tensor::rand_normal({2, 6, 4}, rng);
    Tensor yc = compressed.forward(x, false, fwd);
    Tensor yp = plain.forward(x, false, fwd);
    CHECK(bit_equal(yc, yp));
}

TEST_CASE("dual-path block preserves chunk geometry") {
    Rng rng(8);
    DptBlock block(tiny_config(), rng);
    Rng fwd(0);
    ChunkedTensor x;
    x.data = Tensor::rand_normal({4, 3, 8}, rng);
    x.frames = 20;
    ChunkedTensor y = block.forward(x, false, fwd);
    CHECK(y.data.shape() == Shape{4, 3, 8});
    CHECK(y.frames == 20);
    CHECK(all_finite(y.data));

    ChunkedTensor single;
    single.data = Tensor::rand_normal({4, 1, 8}, rng);
    single.frames = 8;
    ChunkedTensor ys = block.forward(single, false, fwd);
    CHECK(ys.data.shape() == Shape{4, 1, 8});
    CHECK(all_finite(ys.data));
}

TEST_CASE("forward returns the input length exactly") {
    Rng rng(9);
    Dptnet model(tiny_config(), rng);
    Rng fwd(0);
    for (int64_t len : {64LL, 100LL, 16000LL}) {
        Tensor x = Tensor::rand_normal({len}, rng);
        Tensor y = model.forward(x, false, fwd);
        REQUIRE(y.shape() == Shape{len});
        CHECK(all_finite(y));
    }
    CHECK_THROWS_AS(model.forward(Tensor::zeros({10}), false, fwd), DataError);
}

TEST_CASE("zero mask weights silence the output entirely") {
    Rng rng(10);
    Dptnet model(tiny_config(), rng);
    {
        Tensor w = model.mask_w;
        double* v = w.data();
        std::fill(v, v + w.size(), 0.0);
    }
    Rng fwd(0);
    Tensor y = model.forward(Tensor::rand_normal({100}, rng), false, fwd);
    for (double v : y.values()) CHECK(v == 0.0);
}

TEST_CASE("construction is deterministic and parameter names are unique") {
    Rng r1(11), r2(11);
    Dptnet m1(tiny_config(), r1), m2(tiny_config(), r2);
    ParamMap p1, p2;
    m1.collect("wave", p1);
    m2.collect("wave", p2);
    REQUIRE(p1.size() == p2.size());
    std::set<std::string> names;
    for (size_t i = 0; i < p1.size(); ++i) {
        CHECK(p1[i].first == p2[i].first);
        CHECK(bit_equal(p1[i].second, p2[i].second));
        names.insert(p1[i].first);
    }
    CHECK(names.size() == p1.size());
    CHECK(names.count("wave.encoder.weight") == 1);
    CHECK(names.count("wave.block0.global.attn.compress_k.weight") == 1);
    CHECK(names.count("wave.block1.local.gru.w_hidden") == 1);
}

TEST_CASE("end-to-end temporal branch gradcheck at a tiny configuration") {
    DptConfig cfg = tiny_config();
    cfg.num_blocks = 1;
    Rng rng(12);
    Dptnet model(cfg, rng);
    ParamMap pm;
    model.collect("wave", pm);
    jitter(pm, rng);

    Tensor x = Tensor::rand_normal({40}, rng);
    Tensor wgt = Tensor::rand_normal({40}, rng);
    std::vector<Tensor> params = {x};
    for (auto& [name, t] : pm) params.push_back(t);

    Rng fwd(0);
    auto f = [&] { return mean(mul(model.forward(x, false, fwd), wgt)); };
    GradCheckResult r = gradcheck(f, params, 1e-4, 3);
    INFO("param ", r.worst_param, " (", r.worst_param >= 1 ? pm[r.worst_param - 1].first : "input",
         ") coord ", r.worst_coord, " analytic ", r.analytic, " numeric ", r.numeric);
    CHECK(r.pass(1e-4));
}
