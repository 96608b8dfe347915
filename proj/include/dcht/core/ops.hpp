#pragma once

#include "dcht/core/tensor.hpp"

namespace dcht {

// Elementwise arithmetic. Shapes must match exactly, except that trailing
// extents of 1 broadcast against the other operand; anything fancier must go
// through reshape/expand_to explicitly.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor divide(const Tensor& a, const Tensor& b);

// y = scale * x + shift
Tensor affine(const Tensor& x, double scale, double shift);
Tensor add(const Tensor& x, double c);
Tensor mul(const Tensor& x, double c);
Tensor neg(const Tensor& x);

Tensor absval(const Tensor& x);   // subgradient 0 at the kink
Tensor maximum(const Tensor& x, double c);
Tensor relu(const Tensor& x);
Tensor sqrt_op(const Tensor& x);
Tensor exp_op(const Tensor& x);
Tensor tanh_op(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor gelu(const Tensor& x);     // exact erf form

// Reductions. sum() over all elements uses fixed-order pairwise summation.
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
Tensor sum(const Tensor& x, int axis, bool keepdim);
Tensor mean_last(const Tensor& x, bool keepdim = true);
Tensor variance_last(const Tensor& x, bool keepdim = true);  // biased
// Row-max along the last axis, detached from the tape (for stable softmax).
Tensor max_last_detached(const Tensor& x);
Tensor softmax_last(const Tensor& x);

// Shape ops.
Tensor reshape(const Tensor& x, Shape shape);  // one extent may be -1
Tensor permute(const Tensor& x, const std::vector<int>& perm);
Tensor slice(const Tensor& x, int axis, int64_t start, int64_t stop);
Tensor pad(const Tensor& x, int axis, int64_t before, int64_t after);
Tensor concat(const std::vector<Tensor>& xs, int axis);
std::vector<Tensor> split(const Tensor& x, int axis, int64_t parts);
// Materializing broadcast: right-aligned, source extents must be 1 or equal.
Tensor expand_to(const Tensor& x, const Shape& target);
Tensor roll(const Tensor& x, int64_t shift, int axis);  // cyclic
Tensor take_rows(const Tensor& table, const std::vector<int64_t>& idx);

// Batched matrix product: a [..., m, k] @ b [..., k, n] with identical
// leading extents.
Tensor matmul(const Tensor& a, const Tensor& b);

// Convolutions, NCL / NCHW layout. bias may be undefined.
Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& bias, int64_t stride, int64_t padding);
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& bias, int64_t stride, int64_t padding);
// Transposed 1-D convolution, weight [Cin, Cout, K]; adjoint of conv1d for
// matching geometry.
Tensor tconv1d(const Tensor& x, const Tensor& w, const Tensor& bias, int64_t stride);

// Signal framing: reflect-pads `pad` samples at both ends, then extracts
// hop-strided frames. K = floor((L + 2*pad - frame) / hop) + 1.
Tensor frame_signal(const Tensor& x, int64_t frame, int64_t hop, int64_t pad);
// Adjoint-style reconstruction over the trailing two axes:
// out[..., k*hop + j] += frames[..., k, j].
Tensor overlap_add(const Tensor& frames, int64_t hop);

// Real DFT of the last axis (power-of-two length N) packed as [..., 2, N/2+1]
// with plane 0 = real, plane 1 = imaginary. irdft inverts the packing back to
// [..., N]; imaginary parts at DC and Nyquist are ignored (zero gradient).
Tensor rdft(const Tensor& x);
Tensor irdft(const Tensor& packed);

}  // namespace dcht
