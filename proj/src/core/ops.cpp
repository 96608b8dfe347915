#include "dcht/core/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "dcht/core/fft.hpp"

namespace dcht {

namespace {

bool want_grad(std::initializer_list<const Tensor*> ins) {
    if (!active_tape()) return false;
    for (const Tensor* t : ins)
        if (t->requires_grad()) return true;
    return false;
}

std::vector<double>& gbuf(const std::shared_ptr<Storage>& s) {
    s->ensure_grad();
    return s->grad;
}

// Trailing-singleton broadcast: shapes must have equal rank; where extents
// differ, the smaller one must be 1 and those axes must form a suffix. The
// flat index of a broadcasting operand is then out_flat / div.
struct Bcast {
    Shape out;
    int64_t div_a = 1;
    int64_t div_b = 1;
};

Bcast broadcast2(const Shape& a, const Shape& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("elementwise op rank mismatch: " + shape_str(a) + " vs " + shape_str(b));
    }
    Bcast r;
    r.out.resize(a.size());
    int64_t first_a = -1, first_b = -1;  // first broadcast axis per operand
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] == b[i]) {
            r.out[i] = a[i];
        } else if (a[i] == 1) {
            r.out[i] = b[i];
            if (first_a < 0) first_a = static_cast<int64_t>(i);
        } else if (b[i] == 1) {
            r.out[i] = a[i];
            if (first_b < 0) first_b = static_cast<int64_t>(i);
        } else {
            throw std::invalid_argument("shapes not broadcast-compatible: " + shape_str(a) + " vs " + shape_str(b));
        }
    }
    auto suffix_check = [&](int64_t first, const Shape& s) {
        if (first < 0) return;
        for (size_t i = static_cast<size_t>(first); i < s.size(); ++i) {
            if (s[i] != 1) {
                throw std::invalid_argument("broadcast limited to trailing singleton extents: " +
                                            shape_str(a) + " vs " + shape_str(b));
            }
        }
    };
    suffix_check(first_a, a);
    suffix_check(first_b, b);
    if (first_a >= 0)
        for (size_t i = static_cast<size_t>(first_a); i < r.out.size(); ++i) r.div_a *= r.out[i];
    if (first_b >= 0)
        for (size_t i = static_cast<size_t>(first_b); i < r.out.size(); ++i) r.div_b *= r.out[i];
    return r;
}

enum class BinOp { Add, Sub, Mul, Div };

Tensor binary(const Tensor& a, const Tensor& b, BinOp op) {
    Bcast bc = broadcast2(a.shape(), b.shape());
    Tensor out = Tensor::zeros(bc.out);
    const double* av = a.data();
    const double* bv = b.data();
    double* ov = out.data();
    const int64_t n = out.size();
    const int64_t da = bc.div_a, db = bc.div_b;
    switch (op) {
        case BinOp::Add:
            for (int64_t i = 0; i < n; ++i) ov[i] = av[i / da] + bv[i / db];
            break;
        case BinOp::Sub:
            for (int64_t i = 0; i < n; ++i) ov[i] = av[i / da] - bv[i / db];
            break;
        case BinOp::Mul:
            for (int64_t i = 0; i < n; ++i) ov[i] = av[i / da] * bv[i / db];
            break;
        case BinOp::Div:
            for (int64_t i = 0; i < n; ++i) ov[i] = av[i / da] / bv[i / db];
            break;
    }
    if (want_grad({&a, &b})) {
        out.set_requires_grad(true);
        auto sa = a.store(), sb = b.store(), so = out.store();
        active_tape()->record({sa, sb}, so, [sa, sb, so, da, db, op] {
            const auto& g = gbuf(so);
            const int64_t n = static_cast<int64_t>(g.size());
            const double* av = sa->value.data();
            const double* bv = sb->value.data();
            if (sa->requires_grad) {
                auto& ga = gbuf(sa);
                switch (op) {
                    case BinOp::Add:
                    case BinOp::Sub:
                        for (int64_t i = 0; i < n; ++i) ga[i / da] += g[i];
                        break;
                    case BinOp::Mul:
                        for (int64_t i = 0; i < n; ++i) ga[i / da] += g[i] * bv[i / db];
                        break;
                    case BinOp::Div:
                        for (int64_t i = 0; i < n; ++i) ga[i / da] += g[i] / bv[i / db];
                        break;
                }
            }
            if (sb->requires_grad) {
                auto& gb = gbuf(sb);
                switch (op) {
                    case BinOp::Add:
                        for (int64_t i = 0; i < n; ++i) gb[i / db] += g[i];
                        break;
                    case BinOp::Sub:
                        for (int64_t i = 0; i < n; ++i) gb[i / db] -= g[i];
                        break;
                    case BinOp::Mul:
                        for (int64_t i = 0; i < n; ++i) gb[i / db] += g[i] * av[i / da];
                        break;
                    case BinOp::Div:
                        for (int64_t i = 0; i < n; ++i) {
                            const double bvv = bv[i / db];
                            gb[i / db] -= g[i] * av[i / da] / (bvv * bvv);
                        }
                        break;
                }
            }
        });
    }
    return out;
}

using UnaryFwd = double (*)(double);
using UnaryBwd = double (*)(double x, double y);  // dy/dx from input and output

Tensor unary(const Tensor& x, UnaryFwd f, UnaryBwd df) {
    Tensor out = Tensor::zeros(x.shape());
    const double* xv = x.data();
    double* ov = out.data();
    for (int64_t i = 0; i < x.size(); ++i) ov[i] = f(xv[i]);
    if (want_grad({&x})) {
        out.set_requires_grad(true);
        auto sx = x.store(), so = out.store();
        active_tape()->record({sx}, so, [sx, so, df] {
            const auto& g = gbuf(so);
            auto& gx = gbuf(sx);
            const double* xv = sx->value.data();
            const double* yv = so->value.data();
            for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * df(xv[i], yv[i]);
        });
    }
    return out;
}

double pairwise_sum(const double* p, int64_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (int64_t i = 0; i < n; ++i) s += p[i];
        return s;
    }
    const int64_t h = n / 2;
    return pairwise_sum(p, h) + pairwise_sum(p + h, n - h);
}

int normalize_axis(int axis, int64_t rank) {
    int a = axis;
    if (a < 0) a += static_cast<int>(rank);
    if (a < 0 || a >= rank) throw std::invalid_argument("axis out of range");
    return a;
}

void axis_blocks(const Shape& s, int axis, int64_t& outer, int64_t& len, int64_t& inner) {
    outer = 1;
    inner = 1;
    for (int i = 0; i < axis; ++i) outer *= s[static_cast<size_t>(i)];
    len = s[static_cast<size_t>(axis)];
    for (size_t i = static_cast<size_t>(axis) + 1; i < s.size(); ++i) inner *= s[i];
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return binary(a, b, BinOp::Add); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary(a, b, BinOp::Sub); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary(a, b, BinOp::Mul); }
Tensor divide(const Tensor& a, const Tensor& b) { return binary(a, b, BinOp::Div); }

Tensor affine(const Tensor& x, double scale, double shift) {
    Tensor out = Tensor::zeros(x.shape());
    const double* xv = x.data();
    double* ov = out.data();
    for (int64_t i = 0; i < x.size(); ++i) ov[i] = scale * xv[i] + shift;
    if (want_grad({&x})) {
        out.set_requires_grad(true);
        auto sx = x.store(), so = out.store();
        active_tape()->record({sx}, so, [sx, so, scale] {
            const auto& g = gbuf(so);
            auto& gx = gbuf(sx);
            for (size_t i = 0; i < g.size(); ++i) gx[i] += scale * g[i];
        });
    }
    return out;
}

Tensor add(const Tensor& x, double c) { return affine(x, 1.0, c); }
Tensor mul(const Tensor& x, double c) { return affine(x, c, 0.0); }
Tensor neg(const Tensor& x) { return affine(x, -1.0, 0.0); }

Tensor absval(const Tensor& x) {
    return unary(
        x, [](double v) { return std::fabs(v); },
        [](double v, double) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Tensor maximum(const Tensor& x, double c) {
    Tensor out = Tensor::zeros(x.shape());
    const double* xv = x.data();
    double* ov = out.data();
    for (int64_t i = 0; i < x.size(); ++i) ov[i] = xv[i] > c ? xv[i] : c;
    if (want_grad({&x})) {
        out.set_requires_grad(true);
        auto sx = x.store(), so = out.store();
        active_tape()->record({sx}, so, [sx, so, c] {
            const auto& g = gbuf(so);
            auto& gx = gbuf(sx);
            const double* xv = sx->value.data();
            for (size_t i = 0; i < g.size(); ++i)
                if (xv[i] > c) gx[i] += g[i];
        });
    }
    return out;
}

Tensor relu(const Tensor& x) { return maximum(x, 0.0); }

Tensor sqrt_op(const Tensor& x) {
    return unary(
        x, [](double v) { return std::sqrt(v); },
        [](double, double y) { return 0.5 / y; });
}

Tensor exp_op(const Tensor& x) {
    return unary(
        x, [](double v) { return std::exp(v); },
        [](double, double y) { return y; });
}

Tensor tanh_op(const Tensor& x) {
    return unary(
        x, [](double v) { return std::tanh(v); },
        [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& x) {
    return unary(
        x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
        [](double, double y) { return y * (1.0 - y); });
}

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
}  // namespace

Tensor gelu(const Tensor& x) {
    return unary(
        x, [](double v) { return 0.5 * v * (1.0 + std::erf(v * kInvSqrt2)); },
        [](double v, double) {
            const double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
            return cdf + v * kInvSqrt2Pi * std::exp(-0.5 * v * v);
        });
}

Tensor sum(const Tensor& x) {
    Tensor out = Tensor::scalar(pairwise_sum(x.data(), x.size()));
    if (want_grad({&x})) {
        out.set_requires_grad(true);
        auto sx = x.store(), so = out.store();
        active_tape()->record({sx}, so, [sx, so] {
            const double g = gbuf(so)[0];
            auto& gx = gbuf(sx);
            for (double& v : gx) v += g;
        });
    }
    return out;
}

Tensor mean(const Tensor& x) { return affine(sum(x), 1.0 / static_cast<double>(x.size()), 0.0); }

Tensor sum(const Tensor& x, int axis, bool keepdim) {
    const int a = normalize_axis(axis, x.dim());
    int64_t outer, len, inner;
    axis_blocks(x.shape(), a, outer, len, inner);
    Shape oshape = x.shape();
    if (keepdim)
        oshape[static_cast<size_t>(a)] = 1;
    else
        oshape.erase(oshape.begin() + a);
    if (oshape.empty()) oshape = {1};
    Tensor out = Tensor::zeros(oshape);
    const double* xv = x.data();
    double* ov = out.data();
    for (int64_t o = 0; o < outer; ++o)
        for (int64_t k = 0; k < len; ++k) {
            const double* src = xv + (o * len + k) * inner;
            double* dst = ov + o * inner;
            for (int64_t i = 0; i < inner; ++i) dst[i] += src[i];
        }
    if (want_grad({&x})) {
        out.set_requires_grad(true);
        auto sx = x.store(), so = out.store();
        active_tape()->record({sx}, so, [sx, so, outer, len, inner] {
            const auto& g = gbuf(so);
            auto& gx = gbuf(sx);
            for (int64_t o = 0; o < outer; ++o)
                for (int64_t k = 0; k < len; ++k) {
                    double* dst = gx.data() + (o * len + k) * inner;
                    const double* src = g.data() + o * inner;
                    for (int64_t i = 0; i < inner; ++i) dst[i] += src[i];
                }
        });
    }
    return out;
}

Tensor mean_last(const Tensor& x, bool keepdim) {
    const double n = static_cast<double>(x.extent(-1));
    return affine(sum(x, -1, keepdim), 1.0 / n, 0.0);
}

Tensor variance_last(const Tensor& x, bool keepdim) {
    Tensor m = mean_last(x, true);
    Tensor d = sub(x, m);
    return mean_last(mul(d, d), keepdim);
}

Tensor max_last_detached(const Tensor& x) {
    const int64_t len = x.extent(-1);
    const int64_t rows = x.size() / len;
    Shape oshape = x.shape();
    oshape.back() = 1;
    Tensor out = Tensor::zeros(oshape);
    const double* xv = x.data();
    double* ov = out.data();
    for (int64_t r = 0; r < rows; ++r) {
        double m = xv[r * len];
        for (int64_t i = 1; i < len; ++i) m = std::max(m, xv[r * len + i]);
        ov[r] = m;
    }
    return out;
}

Tensor softmax_last(const Tensor& x) {
    Tensor z = sub(x, max_last_detached(x));
    Tensor e = exp_op(z);
    Tensor s = sum(e, -1, true);
    return divide(e, s);
}

Tensor reshape(const Tensor& x, Shape shape) {
    int64_t known = 1;
    int infer = -1;
    for (size_t i = 0; i < shape.size(); ++i) {
        if (shape[i] == -1) {
            if (infer >= 0) throw std::invalid_argument("reshape: more than one -1 extent");
            infer = static_cast<int>(i);
        } else {
            known *= shape[i];
        }
    }
    if (infer >= 0) {
        if (known == 0 || x.size() % known != 0)
            throw std::invalid_argument("reshape: cannot infer extent for " + shape_str(x.shape()));
        shape[static_cast<size_t>(infer)] = x.size() / known;
    }
    if (numel(shape) != x.size()) {
        throw std::invalid_argument("reshape size mismatch: " + shape_str(x.shape()) + " -> " + shape_str(shape));
    }
    Tensor out = Tensor::from_vector(shape, x.values());
    if (want_grad({&x})) {
        out.set_requires_grad(true);
        auto sx = x.store(), so = out.store();
        active_tape()->record({sx}, so, [sx, so] {
            const auto& g = gbuf(so);
            auto& gx = gbuf(sx);
            for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
        });
    }
    return out;
}

namespace {

std::vector<int64_t> strides_of(const Shape& s) {
    std::vector<int64_t> st(s.size());
    int64_t acc = 1;
    for (size_t i = s.size(); i-- > 0;) {
        st[i] = acc;
        acc *= s[i];
    }
    return st;
}

// Maps every flat index of `oshape` to a source offset given per-axis source
// strides aligned with oshape's axes (stride 0 for broadcast axes).
template <class F>
void odometer_map(const Shape& oshape, const std::vector<int64_t>& src_strides, F&& body) {
    const int64_t n = numel(oshape);
    const size_t rank = oshape.size();
    std::vector<int64_t> idx(rank, 0);
    int64_t src = 0;
    for (int64_t o = 0; o < n; ++o) {
        body(o, src);
        for (size_t d = rank; d-- > 0;) {
            ++idx[d];
            src += src_strides[d];
            if (idx[d] < oshape[d]) break;
            src -= src_strides[d] * oshape[d];
            idx[d] = 0;
        }
    }
}

}  // namespace

Tensor permute(const Tensor& x, const std::vector<int>& perm) {
    const size_t rank = static_cast<size_t>(x.dim());
    if (perm.size() != rank) throw std::invalid_argument("permute rank mismatch");
    std::vector<bool> seen(rank, false);
    Shape oshape(rank);
    for (size_t i = 0; i < rank; ++i) {
        const int p = perm[i];
        if (p < 0 || static_cast<size_t>(p) >= rank || seen[static_cast<size_t>(p)])
            throw std::invalid_argument("permute: invalid permutation");
        seen[static_cast<size_t>(p)] = true;
        oshape[i] = x.shape()[static_cast<size_t>(p)];
    }
    const auto in_strides = strides_of(x.shape());
    std::vector<int64_t> src_strides(rank);
    for (size_t i = 0; i < rank; ++i) src_strides[i] = in_strides[static_cast<size_t>(perm[i])];

    Tensor out = Tensor::zeros(oshape);
    const double* xv = x.data();
    double* ov = out.data();
    odometer_map(oshape, src_strides, [&](int64_t o, int64_t s) { ov[o] = xv[s]; });
    if (want_grad({&x})) {
        out.set_requires_grad(true);
        auto sx = x.store(), so = out.store();
        active_tape()->record({sx, }, so, [sx, so, oshape, src_strides] {
            const auto& g = gbuf(so);
            auto& gx = gbuf(sx);
            odometer_map(oshape, src_strides, [&](int64_t o, int64_t s) { gx[s] += g[o]; });
        });
    }
    return out;
}

Tensor slice(const Tensor& x, int axis, int64_t start, int64_t stop) {
    const int a = normalize_axis(axis, x.dim());
    const int64_t e = x.shape()[static_cast<size_t>(a)];
    if (start < 0 || stop > e || start >= stop) {
        throw std::invalid_argument("slice [" + std::to_string(start) + "," + std::to_string(stop) +
                                    ") out of bounds on axis " + std::to_string(axis) + " of " + shape_str(x.shape()));
    }
    int64_t outer, len, inner;
    axis_blocks(x.shape(), a, outer, len, inner);
    const int64_t olen = stop - start;
    Shape oshape = x.shape();
    oshape[static_cast<size_t>(a)] = olen;
    Tensor out = Tensor::zeros(oshape);
    const double* xv = x.data();
    double* ov = out.data();
    for (int64_t o = 0; o < outer; ++o) {
        std::memcpy(ov + o * olen * inner, xv + (o * len + start) * inner,
                    sizeof(double) * static_cast<size_t>(olen * inner));
    }
    if (want_grad({&x})) {
        out.set_requires_grad(true);
        auto sx = x.store(), so = out.store();
        active_tape()->record({sx}, so, [sx, so, outer, len, inner, start, olen] {
            const auto& g = gbuf(so);
            auto& gx = gbuf(sx);
            for (int64_t o = 0; o < outer; ++o) {
                double* dst = gx.data() + (o * len + start) * inner;
                const double* src = g.data() + o * olen * inner;
                for (int64_t i = 0; i < olen * inner; ++i) dst[i] += src[i];
            }
        });
    }
    return out;
}

Tensor pad(const Tensor& x, int axis, int64_t before, int64_t after) {
    if (before < 0 || after < 0) throw std::invalid_argument("pad amounts must be nonnegative");
    const int a = normalize_axis(axis, x.dim());
    int64_t outer, len, inner;
    axis_blocks(x.shape(), a, outer, len, inner);
    const int64_t olen = len + before + after;
    Shape oshape = x.shape();
    oshape[static_cast<size_t>(a)] = olen;
    Tensor out = Tensor::zeros(oshape);
    const double* xv = x.data();
    double* ov = out.data();
    for (int64_t o = 0; o < outer; ++o) {
        std::memcpy(ov + (o * olen + before) * inner, xv + o * len * inner,
                    sizeof(double) * static_cast<size_t>(len * inner));
    }
    if (want_grad({&x})) {
        out.set_requires_grad(true);
        auto sx = x.store(), so = out.store();
        active_tape()->record({sx}, so, [sx, so, outer, len, inner, before, olen] {
            const auto& g = gbuf(so);
            auto& gx = gbuf(sx);
            for (int64_t o = 0; o < outer; ++o) {
                double* dst = gx.data() + o * len * inner;
                const double* src = g.data() + (o * olen + before) * inner;
                for (int64_t i = 0; i < len * inner; ++i) dst[i] += src[i];
            }
        });
    }
    return out;
}

Tensor concat(const std::vector<Tensor>& xs, int axis) {
    if (xs.empty()) throw std::invalid_argument("concat of zero tensors");
    const int a = normalize_axis(axis, xs[0].dim());
    Shape oshape = xs[0].shape();
    int64_t total = 0;
    for (const Tensor& t : xs) {
        Shape s = t.shape();
        if (s.size() != oshape.size()) throw std::invalid_argument("concat rank mismatch");
        for (size_t i = 0; i < s.size(); ++i) {
            if (static_cast<int>(i) != a && s[i] != oshape[i])
                throw std::invalid_argument("concat extent mismatch: " + shape_str(oshape) + " vs " + shape_str(s));
        }
        total += s[static_cast<size_t>(a)];
    }
    oshape[static_cast<size_t>(a)] = total;
    Tensor out = Tensor::zeros(oshape);
    int64_t outer, olen, inner;
    axis_blocks(oshape, a, outer, olen, inner);
    double* ov = out.data();
    int64_t offset = 0;
    bool any_grad = false;
    for (const Tensor& t : xs) any_grad = any_grad || t.requires_grad();
    std::vector<std::shared_ptr<Storage>> stores;
    std::vector<int64_t> offsets, lens;
    for (const Tensor& t : xs) {
        const int64_t tl = t.shape()[static_cast<size_t>(a)];
        const double* tv = t.data();
        for (int64_t o = 0; o < outer; ++o) {
            std::memcpy(ov + (o * olen + offset) * inner, tv + o * tl * inner,
                        sizeof(double) * static_cast<size_t>(tl * inner));
        }
        stores.push_back(t.store());
        offsets.push_back(offset);
        lens.push_back(tl);
        offset += tl;
    }
    if (active_tape() && any_grad) {
        out.set_requires_grad(true);
        auto so = out.store();
        active_tape()->record(stores, so, [stores, so, offsets, lens, outer, olen, inner] {
            const auto& g = gbuf(so);
            for (size_t p = 0; p < stores.size(); ++p) {
                if (!stores[p]->requires_grad) continue;
                auto& gx = gbuf(stores[p]);
                for (int64_t o = 0; o < outer; ++o) {
                    double* dst = gx.data() + o * lens[p] * inner;
                    const double* src = g.data() + (o * olen + offsets[p]) * inner;
                    for (int64_t i = 0; i < lens[p] * inner; ++i) dst[i] += src[i];
                }
            }
        });
    }
    return out;
}

std::vector<Tensor> split(const Tensor& x, int axis, int64_t parts) {
    const int a = normalize_axis(axis, x.dim());
    const int64_t e = x.shape()[static_cast<size_t>(a)];
    if (parts <= 0 || e % parts != 0)
        throw std::invalid_argument("split: " + std::to_string(parts) + " parts do not divide extent " + std::to_string(e));
    const int64_t step = e / parts;
    std::vector<Tensor> out;
    out.reserve(static_cast<size_t>(parts));
    for (int64_t p = 0; p < parts; ++p) out.push_back(slice(x, a, p * step, (p + 1) * step));
    return out;
}

Tensor expand_to(const Tensor& x, const Shape& target) {
    const size_t rt = target.size();
    const size_t rx = static_cast<size_t>(x.dim());
    if (rx > rt) throw std::invalid_argument("expand_to: source rank exceeds target");
    Shape padded(rt, 1);
    for (size_t i = 0; i < rx; ++i) padded[rt - rx + i] = x.shape()[i];
    const auto pst = strides_of(padded);
    std::vector<int64_t> src_strides(rt);
    for (size_t i = 0; i < rt; ++i) {
        if (padded[i] == target[i]) {
            src_strides[i] = pst[i];
        } else if (padded[i] == 1) {
            src_strides[i] = 0;
        } else {
            throw std::invalid_argument("expand_to: cannot expand " + shape_str(x.shape()) + " to " + shape_str(target));
        }
    }
    Tensor out = Tensor::zeros(target);
    const double* xv = x.data();
    double* ov = out.data();
    odometer_map(target, src_strides, [&](int64_t o, int64_t s) { ov[o] = xv[s]; });
    if (want_grad({&x})) {
        out.set_requires_grad(true);
        auto sx = x.store(), so = out.store();
        Shape tshape = target;
        active_tape()->record({sx}, so, [sx, so, tshape, src_strides] {
            const auto& g = gbuf(so);
            auto& gx = gbuf(sx);
            odometer_map(tshape, src_strides, [&](int64_t o, int64_t s) { gx[s] += g[o]; });
        });
    }
    return out;
}

Tensor roll(const Tensor& x, int64_t shift, int axis) {
    const int a = normalize_axis(axis, x.dim());
    int64_t outer, len, inner;
    axis_blocks(x.shape(), a, outer, len, inner);
    int64_t s = shift % len;
    if (s < 0) s += len;
    Tensor out = Tensor::zeros(x.shape());
    const double* xv = x.data();
    double* ov = out.data();
    for (int64_t o = 0; o < outer; ++o)
        for (int64_t k = 0; k < len; ++k) {
            const int64_t ksrc = (k - s + len) % len;
            std::memcpy(ov + (o * len + k) * inner, xv + (o * len + ksrc) * inner,
                        sizeof(double) * static_cast<size_t>(inner));
        }
    if (want_grad({&x})) {
        out.set_requires_grad(true);
        auto sx = x.store(), so = out.store();
        active_tape()->record({sx}, so, [sx, so, outer, len, inner, s] {
            const auto& g = gbuf(so);
            auto& gx = gbuf(sx);
            for (int64_t o = 0; o < outer; ++o)
                for (int64_t k = 0; k < len; ++k) {
                    const int64_t ksrc = (k - s + len) % len;
                    double* dst = gx.data() + (o * len + ksrc) * inner;
                    const double* src = g.data() + (o * len + k) * inner;
                    for (int64_t i = 0; i < inner; ++i) dst[i] += src[i];
                }
        });
    }
    return out;
}

Tensor take_rows(const Tensor& table, const std::vector<int64_t>& idx) {
    if (table.dim() != 2) throw std::invalid_argument("take_rows expects a rank-2 table");
    const int64_t rows = table.extent(0), cols = table.extent(1);
    for (int64_t i : idx)
        if (i < 0 || i >= rows) throw std::invalid_argument("take_rows index out of range");
    Tensor out = Tensor::zeros({static_cast<int64_t>(idx.size()), cols});
    const double* tv = table.data();
    double* ov = out.data();
    for (size_t r = 0; r < idx.size(); ++r)
        std::memcpy(ov + static_cast<int64_t>(r) * cols, tv + idx[r] * cols, sizeof(double) * static_cast<size_t>(cols));
    if (want_grad({&table})) {
        out.set_requires_grad(true);
        auto st = table.store(), so = out.store();
        active_tape()->record({st}, so, [st, so, idx, cols] {
            const auto& g = gbuf(so);
            auto& gt = gbuf(st);
            for (size_t r = 0; r < idx.size(); ++r) {
                double* dst = gt.data() + idx[r] * cols;
                const double* src = g.data() + static_cast<int64_t>(r) * cols;
                for (int64_t i = 0; i < cols; ++i) dst[i] += src[i];
            }
        });
    }
    return out;
}

namespace {

void mm_fwd(const double* A, const double* B, double* C, int64_t m, int64_t k, int64_t n) {
    for (int64_t i = 0; i < m; ++i) {
        double* crow = C + i * n;
        for (int64_t p = 0; p < k; ++p) {
            const double aip = A[i * k + p];
            const double* brow = B + p * n;
            for (int64_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
        }
    }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.dim() < 2 || b.dim() < 2 || a.dim() != b.dim())
        throw std::invalid_argument("matmul rank mismatch: " + shape_str(a.shape()) + " @ " + shape_str(b.shape()));
    const size_t r = static_cast<size_t>(a.dim());
    for (size_t i = 0; i + 2 < r; ++i) {
        if (a.shape()[i] != b.shape()[i])
            throw std::invalid_argument("matmul batch extent mismatch: " + shape_str(a.shape()) + " @ " + shape_str(b.shape()));
    }
    const int64_t m = a.shape()[r - 2], k = a.shape()[r - 1];
    const int64_t k2 = b.shape()[r - 2], n = b.shape()[r - 1];
    if (k != k2)
        throw std::invalid_argument("matmul inner extent mismatch: " + shape_str(a.shape()) + " @ " + shape_str(b.shape()));
    Shape oshape(a.shape());
    oshape[r - 2] = m;
    oshape[r - 1] = n;
    int64_t batch = 1;
    for (size_t i = 0; i + 2 < r; ++i) batch *= a.shape()[i];

    Tensor out = Tensor::zeros(oshape);
    const double* av = a.data();
    const double* bv = b.data();
    double* ov = out.data();
    for (int64_t bi = 0; bi < batch; ++bi)
        mm_fwd(av + bi * m * k, bv + bi * k * n, ov + bi * m * n, m, k, n);

    if (want_grad({&a, &b})) {
        out.set_requires_grad(true);
        auto sa = a.store(), sb = b.store(), so = out.store();
        active_tape()->record({sa, sb}, so, [sa, sb, so, batch, m, k, n] {
            const auto& g = gbuf(so);
            const double* av = sa->value.data();
            const double* bv = sb->value.data();
            if (sa->requires_grad) {
                auto& ga = gbuf(sa);
                for (int64_t bi = 0; bi < batch; ++bi) {
                    const double* G = g.data() + bi * m * n;
                    const double* B = bv + bi * k * n;
                    double* dA = ga.data() + bi * m * k;
                    for (int64_t i = 0; i < m; ++i)
                        for (int64_t p = 0; p < k; ++p) {
                            const double* grow = G + i * n;
                            const double* brow = B + p * n;
                            double acc = 0.0;
                            for (int64_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
                            dA[i * k + p] += acc;
                        }
                }
            }
            if (sb->requires_grad) {
                auto& gb = gbuf(sb);
                for (int64_t bi = 0; bi < batch; ++bi) {
                    const double* G = g.data() + bi * m * n;
                    const double* A = av + bi * m * k;
                    double* dB = gb.data() + bi * k * n;
                    for (int64_t i = 0; i < m; ++i)
                        for (int64_t p = 0; p < k; ++p) {
                            const double aip = A[i * k + p];
                            const double* grow = G + i * n;
                            double* dbrow = dB + p * n;
                            for (int64_t j = 0; j < n; ++j) dbrow[j] += aip * grow[j];
                        }
                }
            }
        });
    }
    return out;
}

Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& bias, int64_t stride, int64_t padding) {
    if (x.dim() != 3 || w.dim() != 3) throw std::invalid_argument("conv1d expects x [B,C,L] and w [Co,Ci,K]");
    const int64_t B = x.extent(0), Ci = x.extent(1), L = x.extent(2);
    const int64_t Co = w.extent(0), WCi = w.extent(1), K = w.extent(2);
    if (Ci != WCi)
        throw std::invalid_argument("conv1d channel mismatch: input has " + std::to_string(Ci) +
                                    " channels, kernel expects " + std::to_string(WCi));
    if (bias.defined() && (bias.dim() != 1 || bias.extent(0) != Co))
        throw std::invalid_argument("conv1d bias shape mismatch");
    if (L + 2 * padding < K) throw std::invalid_argument("conv1d kernel larger than padded input");
    if (stride < 1) throw std::invalid_argument("conv1d stride must be positive");
    const int64_t Lo = (L + 2 * padding - K) / stride + 1;

    Tensor out = Tensor::zeros({B, Co, Lo});
    const double* xv = x.data();
    const double* wv = w.data();
    double* ov = out.data();
    for (int64_t b = 0; b < B; ++b)
        for (int64_t co = 0; co < Co; ++co) {
            double* orow = ov + (b * Co + co) * Lo;
            if (bias.defined()) {
                const double bz = bias.data()[co];
                for (int64_t t = 0; t < Lo; ++t) orow[t] = bz;
            }
            for (int64_t ci = 0; ci < Ci; ++ci) {
                const double* xrow = xv + (b * Ci + ci) * L;
                const double* wrow = wv + (co * Ci + ci) * K;
                for (int64_t t = 0; t < Lo; ++t) {
                    const int64_t j0 = t * stride - padding;
                    double acc = 0.0;
                    for (int64_t kk = 0; kk < K; ++kk) {
                        const int64_t j = j0 + kk;
                        if (j >= 0 && j < L) acc += xrow[j] * wrow[kk];
                    }
                    orow[t] += acc;
                }
            }
        }

    const bool wg = bias.defined() ? want_grad({&x, &w, &bias}) : want_grad({&x, &w});
    if (wg) {
        out.set_requires_grad(true);
        auto sx = x.store(), sw = w.store(), so = out.store();
        auto sbias = bias.defined() ? bias.store() : nullptr;
        std::vector<std::shared_ptr<Storage>> ins = {sx, sw};
        if (sbias) ins.push_back(sbias);
        active_tape()->record(ins, so, [sx, sw, sbias, so, B, Ci, L, Co, K, Lo, stride, padding] {
            const auto& g = gbuf(so);
            const double* xv = sx->value.data();
            const double* wv = sw->value.data();
            if (sx->requires_grad) {
                auto& gx = gbuf(sx);
                for (int64_t b = 0; b < B; ++b)
                    for (int64_t co = 0; co < Co; ++co) {
                        const double* grow = g.data() + (b * Co + co) * Lo;
                        for (int64_t ci = 0; ci < Ci; ++ci) {
                            double* gxrow = gx.data() + (b * Ci + ci) * L;
                            const double* wrow = wv + (co * Ci + ci) * K;
                            for (int64_t t = 0; t < Lo; ++t) {
                                const int64_t j0 = t * stride - padding;
                                const double gv = grow[t];
                                for (int64_t kk = 0; kk < K; ++kk) {
                                    const int64_t j = j0 + kk;
                                    if (j >= 0 && j < L) gxrow[j] += gv * wrow[kk];
                                }
                            }
                        }
                    }
            }
            if (sw->requires_grad) {
                auto& gw = gbuf(sw);
                for (int64_t b = 0; b < B; ++b)
                    for (int64_t co = 0; co < Co; ++co) {
                        const double* grow = g.data() + (b * Co + co) * Lo;
                        for (int64_t ci = 0; ci < Ci; ++ci) {
                            const double* xrow = xv + (b * Ci + ci) * L;
                            double* gwrow = gw.data() + (co * Ci + ci) * K;
                            for (int64_t t = 0; t < Lo; ++t) {
                                const int64_t j0 = t * stride - padding;
                                const double gv = grow[t];
                                for (int64_t kk = 0; kk < K; ++kk) {
                                    const int64_t j = j0 + kk;
                                    if (j >= 0 && j < L) gwrow[kk] += gv * xrow[j];
                                }
                            }
                        }
                    }
            }
            if (sbias && sbias->requires_grad) {
                auto& gb = gbuf(sbias);
                for (int64_t b = 0; b < B; ++b)
                    for (int64_t co = 0; co < Co; ++co) {
                        const double* grow = g.data() + (b * Co + co) * Lo;
                        double acc = 0.0;
                        for (int64_t t = 0; t < Lo; ++t) acc += grow[t];
                        gb[co] += acc;
                    }
            }
        });
    }
    return out;
}

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& bias, int64_t stride, int64_t padding) {
    if (x.dim() != 4 || w.dim() != 4) throw std::invalid_argument("conv2d expects x [B,C,H,W] and w [Co,Ci,Kh,Kw]");
    const int64_t B = x.extent(0), Ci = x.extent(1), H = x.extent(2), W = x.extent(3);
    const int64_t Co = w.extent(0), WCi = w.extent(1), Kh = w.extent(2), Kw = w.extent(3);
    if (Ci != WCi)
        throw std::invalid_argument("conv2d channel mismatch: input has " + std::to_string(Ci) +
                                    " channels, kernel expects " + std::to_string(WCi));
    if (bias.defined() && (bias.dim() != 1 || bias.extent(0) != Co))
        throw std::invalid_argument("conv2d bias shape mismatch");
    if (H + 2 * padding < Kh || W + 2 * padding < Kw)
        throw std::invalid_argument("conv2d kernel larger than padded input");
    const int64_t Ho = (H + 2 * padding - Kh) / stride + 1;
    const int64_t Wo = (W + 2 * padding - Kw) / stride + 1;

    Tensor out = Tensor::zeros({B, Co, Ho, Wo});
    const double* xv = x.data();
    const double* wv = w.data();
    double* ov = out.data();
    for (int64_t b = 0; b < B; ++b)
        for (int64_t co = 0; co < Co; ++co) {
            double* oplane = ov + (b * Co + co) * Ho * Wo;
            if (bias.defined()) {
                const double bz = bias.data()[co];
                for (int64_t t = 0; t < Ho * Wo; ++t) oplane[t] = bz;
            }
            for (int64_t ci = 0; ci < Ci; ++ci) {
                const double* xplane = xv + (b * Ci + ci) * H * W;
                const double* wplane = wv + (co * Ci + ci) * Kh * Kw;
                for (int64_t oy = 0; oy < Ho; ++oy)
                    for (int64_t ox = 0; ox < Wo; ++ox) {
                        const int64_t y0 = oy * stride - padding;
                        const int64_t x0 = ox * stride - padding;
                        double acc = 0.0;
                        for (int64_t ky = 0; ky < Kh; ++ky) {
                            const int64_t yy = y0 + ky;
                            if (yy < 0 || yy >= H) continue;
                            for (int64_t kx = 0; kx < Kw; ++kx) {
                                const int64_t xx = x0 + kx;
                                if (xx < 0 || xx >= W) continue;
                                acc += xplane[yy * W + xx] * wplane[ky * Kw + kx];
                            }
                        }
                        oplane[oy * Wo + ox] += acc;
                    }
            }
        }

    const bool wg = bias.defined() ? want_grad({&x, &w, &bias}) : want_grad({&x, &w});
    if (wg) {
        out.set_requires_grad(true);
        auto sx = x.store(), sw = w.store(), so = out.store();
        auto sbias = bias.defined() ? bias.store() : nullptr;
        std::vector<std::shared_ptr<Storage>> ins = {sx, sw};
        if (sbias) ins.push_back(sbias);
        active_tape()->record(ins, so, [sx, sw, sbias, so, B, Ci, H, W, Co, Kh, Kw, Ho, Wo, stride, padding] {
            const auto& g = gbuf(so);
            const double* xv = sx->value.data();
            const double* wv = sw->value.data();
            for (int64_t b = 0; b < B; ++b)
                for (int64_t co = 0; co < Co; ++co) {
                    const double* gplane = g.data() + (b * Co + co) * Ho * Wo;
                    for (int64_t ci = 0; ci < Ci; ++ci) {
                        const double* xplane = xv + (b * Ci + ci) * H * W;
                        const double* wplane = wv + (co * Ci + ci) * Kh * Kw;
                        double* gxplane = sx->requires_grad ? gbuf(sx).data() + (b * Ci + ci) * H * W : nullptr;
                        double* gwplane = sw->requires_grad ? gbuf(sw).data() + (co * Ci + ci) * Kh * Kw : nullptr;
                        for (int64_t oy = 0; oy < Ho; ++oy)
                            for (int64_t ox = 0; ox < Wo; ++ox) {
                                const double gv = gplane[oy * Wo + ox];
                                const int64_t y0 = oy * stride - padding;
                                const int64_t x0 = ox * stride - padding;
                                for (int64_t ky = 0; ky < Kh; ++ky) {
                                    const int64_t yy = y0 + ky;
                                    if (yy < 0 || yy >= H) continue;
                                    for (int64_t kx = 0; kx < Kw; ++kx) {
                                        const int64_t xx = x0 + kx;
                                        if (xx < 0 || xx >= W) continue;
                                        if (gxplane) gxplane[yy * W + xx] += gv * wplane[ky * Kw + kx];
                                        if (gwplane) gwplane[ky * Kw + kx] += gv * xplane[yy * W + xx];
                                    }
                                }
                            }
                    }
                }
            if (sbias && sbias->requires_grad) {
                auto& gb = gbuf(sbias);
                for (int64_t b = 0; b < B; ++b)
                    for (int64_t co = 0; co < Co; ++co) {
                        const double* gplane = g.data() + (b * Co + co) * Ho * Wo;
                        double acc = 0.0;
                        for (int64_t t = 0; t < Ho * Wo; ++t) acc += gplane[t];
                        gb[co] += acc;
                    }
            }
        });
    }
    return out;
}

Tensor tconv1d(const Tensor& x, const Tensor& w, const Tensor& bias, int64_t stride) {
    if (x.dim() != 3 || w.dim() != 3) throw std::invalid_argument("tconv1d expects x [B,C,T] and w [Ci,Co,K]");
    const int64_t B = x.extent(0), Ci = x.extent(1), T = x.extent(2);
    const int64_t WCi = w.extent(0), Co = w.extent(1), K = w.extent(2);
    if (Ci != WCi)
        throw std::invalid_argument("tconv1d channel mismatch: input has " + std::to_string(Ci) +
                                    " channels, kernel expects " + std::to_string(WCi));
    if (bias.defined() && (bias.dim() != 1 || bias.extent(0) != Co))
        throw std::invalid_argument("tconv1d bias shape mismatch");
    if (stride < 1) throw std::invalid_argument("tconv1d stride must be positive");
    const int64_t Lo = (T - 1) * stride + K;

    Tensor out = Tensor::zeros({B, Co, Lo});
    const double* xv = x.data();
    const double* wv = w.data();
    double* ov = out.data();
    for (int64_t b = 0; b < B; ++b)
        for (int64_t co = 0; co < Co; ++co) {
            double* orow = ov + (b * Co + co) * Lo;
            if (bias.defined()) {
                const double bz = bias.data()[co];
                for (int64_t t = 0; t < Lo; ++t) orow[t] = bz;
            }
            for (int64_t ci = 0; ci < Ci; ++ci) {
                const double* xrow = xv + (b * Ci + ci) * T;
                const double* wrow = wv + (ci * Co + co) * K;
                for (int64_t t = 0; t < T; ++t) {
                    const double xval = xrow[t];
                    double* dst = orow + t * stride;
                    for (int64_t kk = 0; kk < K; ++kk) dst[kk] += xval * wrow[kk];
                }
            }
        }

    const bool wg = bias.defined() ? want_grad({&x, &w, &bias}) : want_grad({&x, &w});
    if (wg) {
        out.set_requires_grad(true);
        auto sx = x.store(), sw = w.store(), so = out.store();
        auto sbias = bias.defined() ? bias.store() : nullptr;
        std::vector<std::shared_ptr<Storage>> ins = {sx, sw};
        if (sbias) ins.push_back(sbias);
        active_tape()->record(ins, so, [sx, sw, sbias, so, B, Ci, T, Co, K, Lo, stride] {
            const auto& g = gbuf(so);
            const double* xv = sx->value.data();
            const double* wv = sw->value.data();
            if (sx->requires_grad) {
                auto& gx = gbuf(sx);
                for (int64_t b = 0; b < B; ++b)
                    for (int64_t co = 0; co < Co; ++co) {
                        const double* grow = g.data() + (b * Co + co) * Lo;
                        for (int64_t ci = 0; ci < Ci; ++ci) {
                            double* gxrow = gx.data() + (b * Ci + ci) * T;
                            const double* wrow = wv + (ci * Co + co) * K;
                            for (int64_t t = 0; t < T; ++t) {
                                const double* src = grow + t * stride;
                                double acc = 0.0;
                                for (int64_t kk = 0; kk < K; ++kk) acc += src[kk] * wrow[kk];
                                gxrow[t] += acc;
                            }
                        }
                    }
            }
            if (sw->requires_grad) {
                auto& gw = gbuf(sw);
                for (int64_t b = 0; b < B; ++b)
                    for (int64_t co = 0; co < Co; ++co) {
                        const double* grow = g.data() + (b * Co + co) * Lo;
                        for (int64_t ci = 0; ci < Ci; ++ci) {
                            const double* xrow = xv + (b * Ci + ci) * T;
                            double* gwrow = gw.data() + (ci * Co + co) * K;
                            for (int64_t t = 0; t < T; ++t) {
                                const double xval = xrow[t];
                                const double* src = grow + t * stride;
                                for (int64_t kk = 0; kk < K; ++kk) gwrow[kk] += xval * src[kk];
                            }
                        }
                    }
            }
            if (sbias && sbias->requires_grad) {
                auto& gb = gbuf(sbias);
                for (int64_t b = 0; b < B; ++b)
                    for (int64_t co = 0; co < Co; ++co) {
                        const double* grow = g.data() + (b * Co + co) * Lo;
                        double acc = 0.0;
                        for (int64_t t = 0; t < Lo; ++t) acc += grow[t];
                        gb[co] += acc;
                    }
            }
        });
    }
    return out;
}

Tensor frame_signal(const Tensor& x, int64_t frame, int64_t hop, int64_t padding) {
    if (x.dim() != 1) throw std::invalid_argument("frame_signal expects a rank-1 signal");
    const int64_t L = x.extent(0);
    if (padding > 0 && padding > L - 1)
        throw std::invalid_argument("frame_signal: reflect padding " + std::to_string(padding) +
                                    " too large for length " + std::to_string(L));
    if (L + 2 * padding < frame) throw std::invalid_argument("frame_signal: signal shorter than one frame");
    if (hop < 1) throw std::invalid_argument("frame_signal: hop must be positive");
    const int64_t K = (L + 2 * padding - frame) / hop + 1;

    std::vector<int64_t> table(static_cast<size_t>(K * frame));
    for (int64_t k = 0; k < K; ++k)
        for (int64_t j = 0; j < frame; ++j) {
            int64_t src = k * hop + j - padding;
            if (src < 0) src = -src;
            if (src >= L) src = 2 * L - 2 - src;
            table[static_cast<size_t>(k * frame + j)] = src;
        }
    Tensor out = Tensor::zeros({K, frame});
    const double* xv = x.data();
    double* ov = out.data();
    for (size_t i = 0; i < table.size(); ++i) ov[i] = xv[table[i]];
    if (want_grad({&x})) {
        out.set_requires_grad(true);
        auto sx = x.store(), so = out.store();
        active_tape()->record({sx}, so, [sx, so, table = std::move(table)] {
            const auto& g = gbuf(so);
            auto& gx = gbuf(sx);
            for (size_t i = 0; i < table.size(); ++i) gx[table[i]] += g[i];
        });
    }
    return out;
}

Tensor overlap_add(const Tensor& frames, int64_t hop) {
    if (frames.dim() < 2) throw std::invalid_argument("overlap_add expects [..., K, frame]");
    const int64_t K = frames.extent(-2), F = frames.extent(-1);
    if (hop < 1) throw std::invalid_argument("overlap_add: hop must be positive");
    const int64_t span = (K - 1) * hop + F;
    const int64_t batch = frames.size() / (K * F);
    Shape oshape = frames.shape();
    oshape.pop_back();
    oshape.back() = span;
    Tensor out = Tensor::zeros(oshape);
    const double* fv = frames.data();
    double* ov = out.data();
    for (int64_t b = 0; b < batch; ++b)
        for (int64_t k = 0; k < K; ++k) {
            const double* src = fv + (b * K + k) * F;
            double* dst = ov + b * span + k * hop;
            for (int64_t j = 0; j < F; ++j) dst[j] += src[j];
        }
    if (want_grad({&frames})) {
        out.set_requires_grad(true);
        auto sf = frames.store(), so = out.store();
        active_tape()->record({sf}, so, [sf, so, batch, K, F, span, hop] {
            const auto& g = gbuf(so);
            auto& gf = gbuf(sf);
            for (int64_t b = 0; b < batch; ++b)
                for (int64_t k = 0; k < K; ++k) {
                    double* dst = gf.data() + (b * K + k) * F;
                    const double* src = g.data() + b * span + k * hop;
                    for (int64_t j = 0; j < F; ++j) dst[j] += src[j];
                }
        });
    }
    return out;
}

Tensor rdft(const Tensor& x) {
    const int64_t N = x.extent(-1);
    if (!is_pow2(N)) throw std::invalid_argument("rdft: last extent must be a power of two");
    const int64_t Fb = N / 2 + 1;
    const int64_t rows = x.size() / N;
    Shape oshape = x.shape();
    oshape.back() = Fb;
    oshape.insert(oshape.end() - 1, 2);
    Tensor out = Tensor::zeros(oshape);
    const double* xv = x.data();
    double* ov = out.data();
    std::vector<double> re(static_cast<size_t>(N)), im(static_cast<size_t>(N));
    for (int64_t r = 0; r < rows; ++r) {
        std::memcpy(re.data(), xv + r * N, sizeof(double) * static_cast<size_t>(N));
        std::fill(im.begin(), im.end(), 0.0);
        fft_inplace(re, im, false);
        double* dst = ov + r * 2 * Fb;
        for (int64_t f = 0; f < Fb; ++f) {
            dst[f] = re[static_cast<size_t>(f)];
            dst[Fb + f] = im[static_cast<size_t>(f)];
        }
    }
    if (want_grad({&x})) {
        out.set_requires_grad(true);
        auto sx = x.store(), so = out.store();
        active_tape()->record({sx}, so, [sx, so, N, Fb, rows] {
            const auto& g = gbuf(so);
            auto& gx = gbuf(sx);
            std::vector<double> re(static_cast<size_t>(N)), im(static_cast<size_t>(N));
            for (int64_t r = 0; r < rows; ++r) {
                const double* src = g.data() + r * 2 * Fb;
                std::fill(re.begin(), re.end(), 0.0);
                std::fill(im.begin(), im.end(), 0.0);
                for (int64_t f = 0; f < Fb; ++f) {
                    re[static_cast<size_t>(f)] = src[f];
                    im[static_cast<size_t>(f)] = src[Fb + f];
                }
                fft_inplace(re, im, true);
                double* dst = gx.data() + r * N;
                const double scale = static_cast<double>(N);
                for (int64_t n = 0; n < N; ++n) dst[n] += scale * re[static_cast<size_t>(n)];
            }
        });
    }
    return out;
}

Tensor irdft(const Tensor& packed) {
    if (packed.dim() < 2 || packed.extent(-2) != 2)
        throw std::invalid_argument("irdft expects [..., 2, F] packed spectra");
    const int64_t Fb = packed.extent(-1);
    const int64_t N = 2 * (Fb - 1);
    if (!is_pow2(N)) throw std::invalid_argument("irdft: implied length must be a power of two");
    const int64_t rows = packed.size() / (2 * Fb);
    Shape oshape = packed.shape();
    oshape.pop_back();
    oshape.back() = N;
    Tensor out = Tensor::zeros(oshape);
    const double* pv = packed.data();
    double* ov = out.data();
    std::vector<double> re(static_cast<size_t>(N)), im(static_cast<size_t>(N));
    for (int64_t r = 0; r < rows; ++r) {
        const double* src = pv + r * 2 * Fb;
        for (int64_t f = 0; f < Fb; ++f) {
            re[static_cast<size_t>(f)] = src[f];
            im[static_cast<size_t>(f)] = src[Fb + f];
        }
        for (int64_t f = Fb; f < N; ++f) {
            re[static_cast<size_t>(f)] = src[N - f];
            im[static_cast<size_t>(f)] = -src[Fb + (N - f)];
        }
        fft_inplace(re, im, true);
        double* dst = ov + r * N;
        for (int64_t n = 0; n < N; ++n) dst[n] = re[static_cast<size_t>(n)];
    }
    if (want_grad({&packed})) {
        out.set_requires_grad(true);
        auto sp = packed.store(), so = out.store();
        active_tape()->record({sp}, so, [sp, so, N, Fb, rows] {
            const auto& g = gbuf(so);
            auto& gp = gbuf(sp);
            std::vector<double> re(static_cast<size_t>(N)), im(static_cast<size_t>(N));
            for (int64_t r = 0; r < rows; ++r) {
                std::memcpy(re.data(), g.data() + r * N, sizeof(double) * static_cast<size_t>(N));
                std::fill(im.begin(), im.end(), 0.0);
                fft_inplace(re, im, false);
                double* dst = gp.data() + r * 2 * Fb;
                const double invn = 1.0 / static_cast<double>(N);
                for (int64_t f = 0; f < Fb; ++f) {
                    const double af = (f == 0 || f == Fb - 1) ? 1.0 : 2.0;
                    dst[f] += af * invn * re[static_cast<size_t>(f)];
                    if (f != 0 && f != Fb - 1) dst[Fb + f] += af * invn * im[static_cast<size_t>(f)];
                }
            }
        });
    }
    return out;
}

}  // namespace dcht
