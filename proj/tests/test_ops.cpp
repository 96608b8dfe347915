#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dcht/core/gradcheck.hpp"
#include "dcht/core/ops.hpp"
#include "dcht/core/tensor.hpp"

using namespace dcht;

namespace {
constexpr double kGradTol = 1e-6;
}

TEST_CASE("elementwise binary ops with trailing-singleton broadcast") {
    Tensor a = Tensor::from_vector({2, 3}, {1, 2, 3, 4, 5, 6});
    Tensor b = Tensor::from_vector({2, 1}, {10, 20});
    Tensor c = add(a, b);
    CHECK(c.shape() == Shape{2, 3});
    CHECK(c.values() == std::vector<double>{11, 12, 13, 24, 25, 26});

    Tensor d = mul(a, Tensor::from_vector({1, 1}, {2}));
    CHECK(d.values() == std::vector<double>{2, 4, 6, 8, 10, 12});

    Tensor e = divide(Tensor::from_vector({2}, {3, 8}), Tensor::from_vector({2}, {2, 4}));
    CHECK(e.values() == std::vector<double>{1.5, 2.0});

    // Non-trailing broadcast axes are rejected.
    CHECK_THROWS_AS(add(Tensor::zeros({2, 1, 3}), Tensor::zeros({2, 4, 1})), std::invalid_argument);
    CHECK_THROWS_AS(add(Tensor::zeros({2, 3}), Tensor::zeros({3})), std::invalid_argument);
    CHECK_THROWS_AS(add(Tensor::zeros({2, 3}), Tensor::zeros({2, 4})), std::invalid_argument);
}

TEST_CASE("binary op gradients") {
    Rng rng(1);
    Tensor a = Tensor::rand_uniform({3, 4}, rng, 0.5, 1.5);
    Tensor b = Tensor::rand_uniform({3, 1}, rng, 0.5, 1.5);
    using BinFn = Tensor (*)(const Tensor&, const Tensor&);
    for (BinFn op : {static_cast<BinFn>(add), static_cast<BinFn>(sub), static_cast<BinFn>(mul),
                     static_cast<BinFn>(divide)}) {
        auto res = gradcheck([&] { return sum(op(a, b)); }, {a, b});
        CHECK(res.max_rel_err < kGradTol);
    }
}

TEST_CASE("scalar affine ops and unaries: values") {
    Tensor x = Tensor::from_vector({4}, {-2, -0.5, 0.5, 3});
    CHECK(affine(x, 2.0, 1.0).values() == std::vector<double>{-3, 0, 2, 7});
    CHECK(neg(x).values() == std::vector<double>{2, 0.5, -0.5, -3});
    CHECK(absval(x).values() == std::vector<double>{2, 0.5, 0.5, 3});
    CHECK(relu(x).values() == std::vector<double>{0, 0, 0.5, 3});
    CHECK(maximum(x, -1.0).values() == std::vector<double>{-1, -0.5, 0.5, 3});

    CHECK(sqrt_op(Tensor::scalar(16.0)).item() == doctest::Approx(4.0));
    CHECK(exp_op(Tensor::scalar(1.0)).item() == doctest::Approx(std::exp(1.0)));
    CHECK(tanh_op(Tensor::scalar(0.5)).item() == doctest::Approx(std::tanh(0.5)));
    CHECK(sigmoid(Tensor::scalar(0.0)).item() == doctest::Approx(0.5));
    // gelu(3) = 3 * Phi(3)
    CHECK(gelu(Tensor::scalar(3.0)).item() == doctest::Approx(2.99595030590511).epsilon(1e-12));
    CHECK(gelu(Tensor::scalar(0.0)).item() == 0.0);
}

TEST_CASE("unary gradients") {
    Rng rng(2);
    // Stay away from the |x| kink.
    Tensor xa = Tensor::rand_uniform({8}, rng, 0.3, 1.0);
    Tensor xb = Tensor::rand_uniform({8}, rng, -1.0, -0.3);
    Tensor x = concat({xa, xb}, 0);
    auto check = [&](std::function<Tensor()> f) {
        auto res = gradcheck(std::move(f), {x});
        CHECK(res.max_rel_err < kGradTol);
    };
    check([&] { return sum(absval(x)); });
    check([&] { return sum(relu(x)); });
    check([&] { return sum(exp_op(x)); });
    check([&] { return sum(tanh_op(x)); });
    check([&] { return sum(sigmoid(x)); });
    check([&] { return sum(gelu(x)); });
    check([&] { return sum(affine(x, -1.5, 0.25)); });

    Tensor pos = Tensor::rand_uniform({8}, rng, 0.5, 2.0);
    auto res = gradcheck([&] { return sum(sqrt_op(pos)); }, {pos});
    CHECK(res.max_rel_err < kGradTol);
}

TEST_CASE("reductions") {
    Tensor x = Tensor::from_vector({2, 3}, {1, 2, 3, 4, 5, 6});
    CHECK(sum(x).item() == 21.0);
    CHECK(mean(x).item() == doctest::Approx(3.5));

    Tensor s0 = sum(x, 0, false);
    CHECK(s0.shape() == Shape{3});
    CHECK(s0.values() == std::vector<double>{5, 7, 9});
    Tensor s1 = sum(x, 1, true);
    CHECK(s1.shape() == Shape{2, 1});
    CHECK(s1.values() == std::vector<double>{6, 15});

    // Pairwise summation matches the exact result on a long ramp.
    std::vector<double> ramp(100);
    for (int i = 0; i < 100; ++i) ramp[i] = i + 1;
    CHECK(sum(Tensor::from_vector({100}, ramp)).item() == 5050.0);

    CHECK(mean_last(x, true).values() == std::vector<double>{2, 5});
    CHECK(variance_last(Tensor::from_vector({1, 4}, {1, 2, 3, 4}), false).item() == doctest::Approx(1.25));

    Rng rng(3);
    Tensor r = Tensor::rand_uniform({2, 5}, rng, -1, 1);
    for (auto keep : {true, false}) {
        auto res = gradcheck([&] { return sum(mul(sum(r, 1, keep), sum(r, 1, keep))); }, {r});
        CHECK(res.max_rel_err < kGradTol);
    }
    auto res = gradcheck([&] { return sum(mul(variance_last(r, true), variance_last(r, true))); }, {r});
    CHECK(res.max_rel_err < 1e-5);
}

TEST_CASE("softmax_last") {
    Tensor x = Tensor::from_vector({1, 2}, {0.0, std::log(2.0)});
    Tensor s = softmax_last(x);
    CHECK(s.values()[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(s.values()[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    // Invariant to constant shifts, stable for large logits.
    Tensor big = Tensor::from_vector({1, 3}, {1000.0, 1001.0, 999.0});
    Tensor sb = softmax_last(big);
    double total = 0.0;
    for (double v : sb.values()) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    Rng rng(4);
    Tensor r = Tensor::rand_uniform({2, 4}, rng, -2, 2);
    Tensor w = Tensor::rand_uniform({2, 4}, rng, -1, 1);
    auto res = gradcheck([&] { return sum(mul(softmax_last(r), w)); }, {r});
    CHECK(res.max_rel_err < kGradTol);
}

TEST_CASE("reshape, permute, slice, pad, concat, split, expand, roll, take_rows") {
    Tensor x = Tensor::from_vector({2, 3}, {1, 2, 3, 4, 5, 6});

    Tensor r = reshape(x, {3, -1});
    CHECK(r.shape() == Shape{3, 2});
    CHECK_THROWS_AS(reshape(x, {4, 2}), std::invalid_argument);
    CHECK_THROWS_AS(reshape(x, {-1, -1}), std::invalid_argument);

    Tensor p = permute(x, {1, 0});
    CHECK(p.shape() == Shape{3, 2});
    CHECK(p.values() == std::vector<double>{1, 4, 2, 5, 3, 6});
    CHECK(bit_equal(permute(p, {1, 0}), x));
    Tensor x3 = Tensor::from_vector({2, 2, 2}, {1, 2, 3, 4, 5, 6, 7, 8});
    Tensor p3 = permute(x3, {2, 0, 1});
    CHECK(p3.shape() == Shape{2, 2, 2});
    CHECK(p3.values() == std::vector<double>{1, 3, 5, 7, 2, 4, 6, 8});

    Tensor sl = slice(x, 1, 1, 3);
    CHECK(sl.values() == std::vector<double>{2, 3, 5, 6});
    CHECK_THROWS_AS(slice(x, 1, 2, 2), std::invalid_argument);
    CHECK_THROWS_AS(slice(x, 1, 0, 4), std::invalid_argument);

    Tensor pd = pad(x, 0, 1, 0);
    CHECK(pd.shape() == Shape{3, 3});
    CHECK(pd.values() == std::vector<double>{0, 0, 0, 1, 2, 3, 4, 5, 6});

    Tensor cc = concat({x, x}, 1);
    CHECK(cc.shape() == Shape{2, 6});
    CHECK(cc.values() == std::vector<double>{1, 2, 3, 1, 2, 3, 4, 5, 6, 4, 5, 6});
    auto parts = split(cc, 1, 2);
    CHECK(parts.size() == 2);
    CHECK(bit_equal(parts[0], x));
    CHECK(bit_equal(parts[1], x));
    CHECK_THROWS_AS(split(x, 1, 2), std::invalid_argument);

    Tensor ex = expand_to(Tensor::from_vector({3}, {1, 2, 3}), {2, 3});
    CHECK(ex.values() == std::vector<double>{1, 2, 3, 1, 2, 3});
    Tensor ex2 = expand_to(Tensor::from_vector({2, 1}, {7, 9}), {2, 2});
    CHECK(ex2.values() == std::vector<double>{7, 7, 9, 9});
    CHECK_THROWS_AS(expand_to(Tensor::zeros({3}), Shape{2, 4}), std::invalid_argument);

    Tensor ro = roll(Tensor::from_vector({4}, {1, 2, 3, 4}), 1, 0);
    CHECK(ro.values() == std::vector<double>{4, 1, 2, 3});
    CHECK(bit_equal(roll(roll(x, -1, 1), 1, 1), x));
    CHECK(bit_equal(roll(x, 3, 1), x));  // full cycle

    Tensor table = Tensor::from_vector({3, 2}, {1, 2, 3, 4, 5, 6});
    Tensor tk = take_rows(table, {2, 0, 2});
    CHECK(tk.values() == std::vector<double>{5, 6, 1, 2, 5, 6});
    CHECK_THROWS_AS(take_rows(table, {3}), std::invalid_argument);
}

TEST_CASE("shape op gradients") {
    Rng rng(5);
    Tensor x = Tensor::rand_uniform({2, 3, 4}, rng, -1, 1);
    Tensor w = Tensor::rand_uniform({4, 3, 2}, rng, -1, 1);
    auto check = [&](std::function<Tensor()> f, std::vector<Tensor> ps) {
        auto res = gradcheck(std::move(f), std::move(ps));
        CHECK(res.max_rel_err < kGradTol);
    };
    check([&] { return sum(mul(permute(x, {2, 1, 0}), w)); }, {x});
    check([&] { return sum(mul(slice(x, 2, 1, 3), slice(x, 2, 0, 2))); }, {x});
    check([&] { return sum(mul(pad(x, 1, 1, 2), pad(x, 1, 1, 2))); }, {x});
    check([&] { return sum(mul(concat({x, x}, 0), concat({x, x}, 0))); }, {x});
    Tensor small = Tensor::rand_uniform({3, 1}, rng, -1, 1);
    Tensor big = Tensor::rand_uniform({2, 3, 4}, rng, -1, 1);
    check([&] { return sum(mul(expand_to(small, {2, 3, 4}), big)); }, {small});
    check([&] { return sum(mul(roll(x, 2, 1), big)); }, {x});
    Tensor table = Tensor::rand_uniform({4, 3}, rng, -1, 1);
    check([&] { return sum(mul(take_rows(table, {1, 1, 3}), take_rows(table, {1, 1, 3}))); }, {table});
}

TEST_CASE("matmul values and gradients") {
    Tensor a = Tensor::from_vector({2, 2}, {1, 2, 3, 4});
    Tensor b = Tensor::from_vector({2, 2}, {5, 6, 7, 8});
    Tensor c = matmul(a, b);
    CHECK(c.values() == std::vector<double>{19, 22, 43, 50});

    // Batched result equals per-batch results.
    Tensor ab = Tensor::from_vector({2, 2, 2}, {1, 2, 3, 4, 1, 0, 0, 1});
    Tensor bb = Tensor::from_vector({2, 2, 2}, {5, 6, 7, 8, 5, 6, 7, 8});
    Tensor cb = matmul(ab, bb);
    CHECK(cb.shape() == Shape{2, 2, 2});
    CHECK(cb.values() == std::vector<double>{19, 22, 43, 50, 5, 6, 7, 8});

    CHECK_THROWS_AS(matmul(Tensor::zeros({2, 3}), Tensor::zeros({2, 3})), std::invalid_argument);
    CHECK_THROWS_AS(matmul(Tensor::zeros({2, 2, 3}), Tensor::zeros({3, 3, 2})), std::invalid_argument);

    Rng rng(6);
    Tensor ra = Tensor::rand_uniform({2, 3, 4}, rng, -1, 1);
    Tensor rb = Tensor::rand_uniform({2, 4, 2}, rng, -1, 1);
    auto res = gradcheck([&] { return sum(mul(matmul(ra, rb), matmul(ra, rb))); }, {ra, rb});
    CHECK(res.max_rel_err < kGradTol);
}

TEST_CASE("conv1d values") {
    Tensor x = Tensor::from_vector({1, 1, 3}, {1, 2, 3});
    Tensor w = Tensor::from_vector({1, 1, 2}, {1, 1});
    CHECK(conv1d(x, w, Tensor(), 1, 0).values() == std::vector<double>{3, 5});
    CHECK(conv1d(x, w, Tensor(), 1, 1).values() == std::vector<double>{1, 3, 5, 3});

    Tensor x4 = Tensor::from_vector({1, 1, 4}, {1, 2, 3, 4});
    CHECK(conv1d(x4, w, Tensor(), 2, 0).values() == std::vector<double>{3, 7});

    Tensor bias = Tensor::from_vector({1}, {10});
    CHECK(conv1d(x, w, bias, 1, 0).values() == std::vector<double>{13, 15});

    // Two input channels sum their contributions.
    Tensor x2 = Tensor::from_vector({1, 2, 2}, {1, 2, 10, 20});
    Tensor w2 = Tensor::from_vector({1, 2, 1}, {1, 3});
    CHECK(conv1d(x2, w2, Tensor(), 1, 0).values() == std::vector<double>{31, 62});

    CHECK_THROWS_AS(conv1d(x2, w, Tensor(), 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(conv1d(x, Tensor::zeros({1, 1, 9}), Tensor(), 1, 0), std::invalid_argument);
}

TEST_CASE("conv2d values") {
    Tensor x = Tensor::from_vector({1, 1, 2, 2}, {1, 2, 3, 4});
    Tensor w = Tensor::from_vector({1, 1, 2, 2}, {1, 0, 0, 1});
    CHECK(conv2d(x, w, Tensor(), 1, 0).values() == std::vector<double>{5});
    Tensor p = conv2d(x, w, Tensor(), 1, 1);
    CHECK(p.shape() == Shape{1, 1, 3, 3});
    CHECK(p.values() == std::vector<double>{1, 2, 0, 3, 5, 2, 0, 3, 4});
}

TEST_CASE("tconv1d values") {
    Tensor x = Tensor::from_vector({1, 1, 2}, {1, 2});
    Tensor w = Tensor::from_vector({1, 1, 2}, {1, 1});
    CHECK(tconv1d(x, w, Tensor(), 1).values() == std::vector<double>{1, 3, 2});
    CHECK(tconv1d(x, w, Tensor(), 2).values() == std::vector<double>{1, 1, 2, 2});
}

TEST_CASE("conv gradients") {
    Rng rng(7);
    Tensor x = Tensor::rand_uniform({2, 3, 8}, rng, -1, 1);
    Tensor w = Tensor::rand_uniform({4, 3, 3}, rng, -1, 1);
    Tensor b = Tensor::rand_uniform({4}, rng, -1, 1);
    auto r1 = gradcheck([&] {
        Tensor y = conv1d(x, w, b, 2, 1);
        return sum(mul(y, y));
    }, {x, w, b});
    CHECK(r1.max_rel_err < kGradTol);

    Tensor xi = Tensor::rand_uniform({1, 2, 4, 4}, rng, -1, 1);
    Tensor wi = Tensor::rand_uniform({3, 2, 2, 2}, rng, -1, 1);
    Tensor bi = Tensor::rand_uniform({3}, rng, -1, 1);
    auto r2 = gradcheck([&] {
        Tensor y = conv2d(xi, wi, bi, 2, 1);
        return sum(mul(y, y));
    }, {xi, wi, bi});
    CHECK(r2.max_rel_err < kGradTol);

    Tensor xt = Tensor::rand_uniform({2, 3, 5}, rng, -1, 1);
    Tensor wt = Tensor::rand_uniform({3, 2, 4}, rng, -1, 1);
    Tensor bt = Tensor::rand_uniform({2}, rng, -1, 1);
    auto r3 = gradcheck([&] {
        Tensor y = tconv1d(xt, wt, bt, 2);
        return sum(mul(y, y));
    }, {xt, wt, bt});
    CHECK(r3.max_rel_err < kGradTol);
}

TEST_CASE("frame_signal reflect padding and overlap_add") {
    Tensor x = Tensor::from_vector({8}, {0, 1, 2, 3, 4, 5, 6, 7});
    Tensor f = frame_signal(x, 4, 2, 2);
    CHECK(f.shape() == Shape{5, 4});
    const auto v = f.values();
    CHECK(std::vector<double>(v.begin(), v.begin() + 4) == std::vector<double>{2, 1, 0, 1});
    CHECK(std::vector<double>(v.end() - 4, v.end()) == std::vector<double>{6, 7, 6, 5});

    CHECK_THROWS_AS(frame_signal(Tensor::zeros({2}), 8, 4, 0), std::invalid_argument);

    Tensor fr = Tensor::from_vector({2, 4}, {1, 1, 1, 1, 2, 2, 2, 2});
    Tensor oa = overlap_add(fr, 2);
    CHECK(oa.values() == std::vector<double>{1, 1, 3, 3, 2, 2});

    Rng rng(8);
    Tensor sig = Tensor::rand_uniform({16}, rng, -1, 1);
    Tensor wgt = Tensor::rand_uniform({9, 4}, rng, -1, 1);
    auto r1 = gradcheck([&] { return sum(mul(frame_signal(sig, 4, 2, 2), wgt)); }, {sig});
    CHECK(r1.max_rel_err < kGradTol);
    Tensor frames = Tensor::rand_uniform({3, 4}, rng, -1, 1);
    auto r2 = gradcheck([&] {
        Tensor y = overlap_add(frames, 2);
        return sum(mul(y, y));
    }, {frames});
    CHECK(r2.max_rel_err < kGradTol);
}

namespace {

// Independent DFT oracle: plain cos/sin sums.
void naive_rdft(const std::vector<double>& x, std::vector<double>& re, std::vector<double>& im) {
    const int64_t n = static_cast<int64_t>(x.size());
    const int64_t nf = n / 2 + 1;
    re.assign(static_cast<size_t>(nf), 0.0);
    im.assign(static_cast<size_t>(nf), 0.0);
    for (int64_t f = 0; f < nf; ++f) {
        for (int64_t t = 0; t < n; ++t) {
            const double ang = -2.0 * M_PI * static_cast<double>(f * t) / static_cast<double>(n);
            re[static_cast<size_t>(f)] += x[static_cast<size_t>(t)] * std::cos(ang);
            im[static_cast<size_t>(f)] += x[static_cast<size_t>(t)] * std::sin(ang);
        }
    }
}

}  // namespace

TEST_CASE("rdft matches a naive DFT and irdft inverts it") {
    Rng rng(9);
    Tensor x = Tensor::rand_uniform({16}, rng, -1, 1);
    Tensor spec = rdft(x);
    CHECK(spec.shape() == Shape{2, 9});
    std::vector<double> re, im;
    naive_rdft(x.values(), re, im);
    for (int64_t f = 0; f < 9; ++f) {
        CHECK(spec.values()[static_cast<size_t>(f)] == doctest::Approx(re[static_cast<size_t>(f)]).epsilon(1e-12));
        CHECK(spec.values()[static_cast<size_t>(9 + f)] == doctest::Approx(im[static_cast<size_t>(f)]).epsilon(1e-12));
    }

    Tensor back = irdft(spec);
    CHECK(max_abs_diff(back, x) < 1e-12);

    // Batched: leading axes preserved.
    Tensor xb = Tensor::rand_uniform({3, 2, 8}, rng, -1, 1);
    Tensor sb = rdft(xb);
    CHECK(sb.shape() == Shape{3, 2, 2, 5});
    CHECK(max_abs_diff(irdft(sb), xb) < 1e-12);

    CHECK_THROWS_AS(rdft(Tensor::zeros({12})), std::invalid_argument);

    // Impulse: flat spectrum.
    Tensor imp = Tensor::from_vector({4}, {1, 0, 0, 0});
    CHECK(rdft(imp).values() == std::vector<double>{1, 1, 1, 0, 0, 0});
}

TEST_CASE("rdft/irdft gradients") {
    Rng rng(10);
    Tensor x = Tensor::rand_uniform({8}, rng, -1, 1);
    Tensor w = Tensor::rand_uniform({2, 5}, rng, -1, 1);
    auto r1 = gradcheck([&] { return sum(mul(rdft(x), w)); }, {x});
    CHECK(r1.max_rel_err < kGradTol);

    Tensor packed = Tensor::rand_uniform({2, 5}, rng, -1, 1);
    Tensor wt = Tensor::rand_uniform({8}, rng, -1, 1);
    auto r2 = gradcheck([&] { return sum(mul(irdft(packed), wt)); }, {packed});
    CHECK(r2.max_rel_err < kGradTol);

    // Composition: scaled round trip.
    auto r3 = gradcheck([&] {
        Tensor y = irdft(rdft(x));
        return sum(mul(y, y));
    }, {x});
    CHECK(r3.max_rel_err < kGradTol);
}
