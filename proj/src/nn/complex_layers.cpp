#include "dcht/nn/complex_layers.hpp"

#include <cmath>

namespace dcht {

ComplexLinear::ComplexLinear(int64_t in_, int64_t out_, Rng& rng, bool bias) : in(in_), out(out_) {
    // Halved variance per part keeps |Wx| comparable to a real layer.
    const double limit = 1.0 / std::sqrt(2.0 * static_cast<double>(in));
    Wr = Tensor::rand_uniform({in, out}, rng, -limit, limit).mark_parameter();
    Wi = Tensor::rand_uniform({in, out}, rng, -limit, limit).mark_parameter();
    if (bias) {
        br = Tensor::rand_uniform({out}, rng, -limit, limit).mark_parameter();
        bi = Tensor::rand_uniform({out}, rng, -limit, limit).mark_parameter();
    }
}

ComplexTensor ComplexLinear::forward(const ComplexTensor& x) const {
    if (x.extent(-1) != in)
        throw std::invalid_argument("complex linear expects last extent " + std::to_string(in) + ", got " +
                                    shape_str(x.shape()));
    Shape s = x.shape();
    ComplexTensor flat = creshape(x, {-1, in});
    ComplexTensor y = cmatmul(flat, {Wr, Wi});
    if (br.defined()) {
        y.re = add(y.re, expand_to(br, y.re.shape()));
        y.im = add(y.im, expand_to(bi, y.im.shape()));
    }
    s.back() = out;
    return creshape(y, s);
}

void ComplexLinear::collect(const std::string& prefix, ParamMap& pm) const {
    add_param(pm, prefix + ".weight_re", Wr);
    add_param(pm, prefix + ".weight_im", Wi);
    if (br.defined()) {
        add_param(pm, prefix + ".bias_re", br);
        add_param(pm, prefix + ".bias_im", bi);
    }
}

ComplexLayerNorm::ComplexLayerNorm(int64_t dim_, double eps_) : dim(dim_), eps(eps_) {
    gr = Tensor::full({dim}, 1.0).mark_parameter();
    gi = Tensor::zeros({dim}).mark_parameter();
    br = Tensor::zeros({dim}).mark_parameter();
    bi = Tensor::zeros({dim}).mark_parameter();
}

ComplexTensor ComplexLayerNorm::forward(const ComplexTensor& x) const {
    Tensor cre = sub(x.re, mean_last(x.re, true));
    Tensor cim = sub(x.im, mean_last(x.im, true));
    Tensor denom = sqrt_op(add(add(variance_last(x.re, true), variance_last(x.im, true)), eps));
    ComplexTensor normed{divide(cre, denom), divide(cim, denom)};
    ComplexTensor gamma{expand_to(gr, x.shape()), expand_to(gi, x.shape())};
    ComplexTensor beta{expand_to(br, x.shape()), expand_to(bi, x.shape())};
    return cadd(cmul(normed, gamma), beta);
}

void ComplexLayerNorm::collect(const std::string& prefix, ParamMap& pm) const {
    add_param(pm, prefix + ".gamma_re", gr);
    add_param(pm, prefix + ".gamma_im", gi);
    add_param(pm, prefix + ".beta_re", br);
    add_param(pm, prefix + ".beta_im", bi);
}

ComplexTensor cgelu(const ComplexTensor& x) { return {gelu(x.re), gelu(x.im)}; }

ComplexMLP::ComplexMLP(int64_t dim, int64_t hidden, double dropout, Rng& rng)
    : fc1(dim, hidden, rng), fc2(hidden, dim, rng), drop(dropout) {}

ComplexTensor ComplexMLP::forward(const ComplexTensor& x, bool training, Rng& rng) const {
    ComplexTensor h = cgelu(fc1.forward(x));
    auto [hr, hi] = drop.forward2(h.re, h.im, training, rng);
    ComplexTensor y = fc2.forward({hr, hi});
    auto [yr, yi] = drop.forward2(y.re, y.im, training, rng);
    return {yr, yi};
}

void ComplexMLP::collect(const std::string& prefix, ParamMap& pm) const {
    fc1.collect(prefix + ".fc1", pm);
    fc2.collect(prefix + ".fc2", pm);
}

}  // namespace dcht
