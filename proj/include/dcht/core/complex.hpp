#pragma once

#include "dcht/core/ops.hpp"
#include "dcht/core/tensor.hpp"

namespace dcht {

// A complex tensor is a pair of equally-shaped real tensors. Every complex
// operation decomposes into real ops on the active tape, so gradients flow
// through real and imaginary parts independently (split-real differentiation).
struct ComplexTensor {
    Tensor re;
    Tensor im;

    ComplexTensor() = default;
    ComplexTensor(Tensor re_, Tensor im_);

    static ComplexTensor zeros(const Shape& shape);
    // Promotes a real tensor: imaginary part is a literal zero tensor, so any
    // cross terms later multiply exact zeros and real arithmetic is preserved
    // bit for bit.
    static ComplexTensor from_real(const Tensor& real);

    bool defined() const { return re.defined(); }
    Shape shape() const { return re.shape(); }
    int64_t dim() const { return re.dim(); }
    int64_t size() const { return re.size(); }
    int64_t extent(int axis) const { return re.extent(axis); }
};

ComplexTensor cadd(const ComplexTensor& a, const ComplexTensor& b);
ComplexTensor csub(const ComplexTensor& a, const ComplexTensor& b);
ComplexTensor cneg(const ComplexTensor& a);
// Elementwise (ar*br - ai*bi, ar*bi + ai*br); broadcasting as in mul().
ComplexTensor cmul(const ComplexTensor& a, const ComplexTensor& b);
ComplexTensor cscale(const ComplexTensor& a, double s);
// Multiply every element by a real tensor (broadcasting as in mul()).
ComplexTensor cscale(const ComplexTensor& a, const Tensor& s);
ComplexTensor conj(const ComplexTensor& a);

// Batched complex matrix product via four real products.
ComplexTensor cmatmul(const ComplexTensor& a, const ComplexTensor& b);

// Complex convolutions; weights/bias are complex, bias parts may be undefined.
ComplexTensor cconv1d(const ComplexTensor& x, const ComplexTensor& w, const ComplexTensor& bias,
                      int64_t stride, int64_t padding);
ComplexTensor cconv2d(const ComplexTensor& x, const ComplexTensor& w, const ComplexTensor& bias,
                      int64_t stride, int64_t padding);
ComplexTensor ctconv1d(const ComplexTensor& x, const ComplexTensor& w, const ComplexTensor& bias,
                       int64_t stride);

// Shape ops applied to both parts.
ComplexTensor creshape(const ComplexTensor& x, const Shape& shape);
ComplexTensor cpermute(const ComplexTensor& x, const std::vector<int>& perm);
ComplexTensor cslice(const ComplexTensor& x, int axis, int64_t start, int64_t stop);
ComplexTensor cpad(const ComplexTensor& x, int axis, int64_t before, int64_t after);
ComplexTensor cconcat(const std::vector<ComplexTensor>& xs, int axis);
ComplexTensor croll(const ComplexTensor& x, int64_t shift, int axis);

// sqrt(re^2 + im^2 + eps); pass a small eps when the argument can vanish.
Tensor magnitude(const ComplexTensor& x, double eps = 0.0);

}  // namespace dcht
