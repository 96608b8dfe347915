#pragma once

#include "dcht/core/complex.hpp"
#include "dcht/nn/layers.hpp"

namespace dcht {

// y = x @ (Wr + i Wi) + (br + i bi), applied to the last axis.
struct ComplexLinear {
    int64_t in = 0, out = 0;
    Tensor Wr, Wi;  // [in, out]
    Tensor br, bi;  // [out]; undefined when constructed without bias

    ComplexLinear() = default;
    ComplexLinear(int64_t in_, int64_t out_, Rng& rng, bool bias = true);

    ComplexTensor forward(const ComplexTensor& x) const;
    void collect(const std::string& prefix, ParamMap& pm) const;
};

// Centers by the complex mean of the last axis and scales by the pooled
// standard deviation sqrt(Var(re) + Var(im) + eps), then applies a complex
// affine (gamma, beta). Gamma starts at 1+0i, beta at 0.
struct ComplexLayerNorm {
    int64_t dim = 0;
    double eps = 1e-5;
    Tensor gr, gi;  // [dim]
    Tensor br, bi;  // [dim]

    ComplexLayerNorm() = default;
    explicit ComplexLayerNorm(int64_t dim_, double eps_ = 1e-5);

    ComplexTensor forward(const ComplexTensor& x) const;
    void collect(const std::string& prefix, ParamMap& pm) const;
};

// GELU applied to real and imaginary parts independently.
ComplexTensor cgelu(const ComplexTensor& x);

// Two-layer feed-forward with split GELU and shared-mask dropout.
struct ComplexMLP {
    ComplexLinear fc1, fc2;
    Dropout drop;

    ComplexMLP() = default;
    ComplexMLP(int64_t dim, int64_t hidden, double dropout, Rng& rng);

    ComplexTensor forward(const ComplexTensor& x, bool training, Rng& rng) const;
    void collect(const std::string& prefix, ParamMap& pm) const;
};

}  // namespace dcht
