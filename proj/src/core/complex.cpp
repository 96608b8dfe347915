#include "dcht/core/complex.hpp"

namespace dcht {

ComplexTensor::ComplexTensor(Tensor re_, Tensor im_) : re(std::move(re_)), im(std::move(im_)) {
    if (re.shape() != im.shape()) {
        throw std::invalid_argument("complex tensor parts differ in shape: " + shape_str(re.shape()) +
                                    " vs " + shape_str(im.shape()));
    }
}

ComplexTensor ComplexTensor::zeros(const Shape& shape) {
    return {Tensor::zeros(shape), Tensor::zeros(shape)};
}

ComplexTensor ComplexTensor::from_real(const Tensor& real) {
    return {real, Tensor::zeros(real.shape())};
}

ComplexTensor cadd(const ComplexTensor& a, const ComplexTensor& b) {
    return {add(a.re, b.re), add(a.im, b.im)};
}

ComplexTensor csub(const ComplexTensor& a, const ComplexTensor& b) {
    return {sub(a.re, b.re), sub(a.im, b.im)};
}

ComplexTensor cneg(const ComplexTensor& a) { return {neg(a.re), neg(a.im)}; }

ComplexTensor cmul(const ComplexTensor& a, const ComplexTensor& b) {
    return {sub(mul(a.re, b.re), mul(a.im, b.im)), add(mul(a.re, b.im), mul(a.im, b.re))};
}

ComplexTensor cscale(const ComplexTensor& a, double s) { return {mul(a.re, s), mul(a.im, s)}; }

ComplexTensor cscale(const ComplexTensor& a, const Tensor& s) { return {mul(a.re, s), mul(a.im, s)}; }

ComplexTensor conj(const ComplexTensor& a) { return {a.re, neg(a.im)}; }

ComplexTensor cmatmul(const ComplexTensor& a, const ComplexTensor& b) {
    return {sub(matmul(a.re, b.re), matmul(a.im, b.im)),
            add(matmul(a.re, b.im), matmul(a.im, b.re))};
}

namespace {
const Tensor kNoBias;
}

ComplexTensor cconv1d(const ComplexTensor& x, const ComplexTensor& w, const ComplexTensor& bias,
                      int64_t stride, int64_t padding) {
    const Tensor& br = bias.defined() ? bias.re : kNoBias;
    const Tensor& bi = bias.defined() ? bias.im : kNoBias;
    return {sub(conv1d(x.re, w.re, br, stride, padding), conv1d(x.im, w.im, kNoBias, stride, padding)),
            add(conv1d(x.re, w.im, bi, stride, padding), conv1d(x.im, w.re, kNoBias, stride, padding))};
}

ComplexTensor cconv2d(const ComplexTensor& x, const ComplexTensor& w, const ComplexTensor& bias,
                      int64_t stride, int64_t padding) {
    const Tensor& br = bias.defined() ? bias.re : kNoBias;
    const Tensor& bi = bias.defined() ? bias.im : kNoBias;
    return {sub(conv2d(x.re, w.re, br, stride, padding), conv2d(x.im, w.im, kNoBias, stride, padding)),
            add(conv2d(x.re, w.im, bi, stride, padding), conv2d(x.im, w.re, kNoBias, stride, padding))};
}

ComplexTensor ctconv1d(const ComplexTensor& x, const ComplexTensor& w, const ComplexTensor& bias,
                       int64_t stride) {
    const Tensor& br = bias.defined() ? bias.re : kNoBias;
    const Tensor& bi = bias.defined() ? bias.im : kNoBias;
    return {sub(tconv1d(x.re, w.re, br, stride), tconv1d(x.im, w.im, kNoBias, stride)),
            add(tconv1d(x.re, w.im, bi, stride), tconv1d(x.im, w.re, kNoBias, stride))};
}

ComplexTensor creshape(const ComplexTensor& x, const Shape& shape) {
    return {reshape(x.re, shape), reshape(x.im, shape)};
}

ComplexTensor cpermute(const ComplexTensor& x, const std::vector<int>& perm) {
    return {permute(x.re, perm), permute(x.im, perm)};
}

ComplexTensor cslice(const ComplexTensor& x, int axis, int64_t start, int64_t stop) {
    return {slice(x.re, axis, start, stop), slice(x.im, axis, start, stop)};
}

ComplexTensor cpad(const ComplexTensor& x, int axis, int64_t before, int64_t after) {
    return {pad(x.re, axis, before, after), pad(x.im, axis, before, after)};
}

ComplexTensor cconcat(const std::vector<ComplexTensor>& xs, int axis) {
    std::vector<Tensor> res, ims;
    res.reserve(xs.size());
    ims.reserve(xs.size());
    for (const ComplexTensor& x : xs) {
        res.push_back(x.re);
        ims.push_back(x.im);
    }
    return {concat(res, axis), concat(ims, axis)};
}

ComplexTensor croll(const ComplexTensor& x, int64_t shift, int axis) {
    return {roll(x.re, shift, axis), roll(x.im, shift, axis)};
}

Tensor magnitude(const ComplexTensor& x, double eps) {
    Tensor sq = add(mul(x.re, x.re), mul(x.im, x.im));
    if (eps != 0.0) sq = add(sq, eps);
    return sqrt_op(sq);
}

}  // namespace dcht
