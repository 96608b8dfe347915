#include "dcht/core/tensor.hpp"

#include <cmath>
#include <cstring>
#include <sstream>
#include <unordered_set>

namespace dcht {

int64_t numel(const Shape& s) {
    int64_t n = 1;
    for (int64_t e : s) n *= e;
    return n;
}

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) os << ',';
        os << s[i];
    }
    os << ']';
    return os.str();
}

namespace {

std::shared_ptr<Storage> make_storage(const Shape& shape, std::vector<double> v) {
    for (int64_t e : shape) {
        if (e <= 0) throw std::invalid_argument("tensor extents must be positive, got " + shape_str(shape));
    }
    if (static_cast<int64_t>(v.size()) != numel(shape)) {
        throw std::invalid_argument("data length " + std::to_string(v.size()) +
                                    " does not match shape " + shape_str(shape));
    }
    auto s = std::make_shared<Storage>();
    s->shape = shape;
    s->value = std::move(v);
    return s;
}

}  // namespace

Tensor Tensor::zeros(const Shape& shape) {
    return from_vector(shape, std::vector<double>(static_cast<size_t>(numel(shape)), 0.0));
}

Tensor Tensor::full(const Shape& shape, double v) {
    return from_vector(shape, std::vector<double>(static_cast<size_t>(numel(shape)), v));
}

Tensor Tensor::from_vector(const Shape& shape, std::vector<double> v) {
    Tensor t;
    t.s_ = make_storage(shape, std::move(v));
    return t;
}

Tensor Tensor::rand_uniform(const Shape& shape, Rng& rng, double lo, double hi) {
    std::vector<double> v(static_cast<size_t>(numel(shape)));
    for (double& x : v) x = rng.uniform(lo, hi);
    return from_vector(shape, std::move(v));
}

Tensor Tensor::rand_normal(const Shape& shape, Rng& rng, double mean, double stddev) {
    std::vector<double> v(static_cast<size_t>(numel(shape)));
    for (double& x : v) x = mean + stddev * rng.normal();
    return from_vector(shape, std::move(v));
}

int64_t Tensor::extent(int axis) const {
    const int64_t r = dim();
    int64_t a = axis;
    if (a < 0) a += r;
    if (a < 0 || a >= r) throw std::invalid_argument("axis " + std::to_string(axis) + " out of range for " + shape_str(shape()));
    return s_->shape[static_cast<size_t>(a)];
}

double Tensor::item() const {
    if (size() != 1) throw std::invalid_argument("item() requires a scalar, got " + shape_str(shape()));
    return s_->value[0];
}

const std::vector<double>& Tensor::grad() const {
    if (!has_grad()) throw std::logic_error("tensor has no gradient (backward not run or not reachable)");
    return s_->grad;
}

Tensor Tensor::clone() const {
    return from_vector(shape(), values());
}

bool bit_equal(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) return false;
    return std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<size_t>(a.size())) == 0;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw std::invalid_argument("shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    }
    double m = 0.0;
    for (int64_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a.data()[i] - b.data()[i]));
    return m;
}

namespace {
thread_local Tape* g_active_tape = nullptr;
}

Tape* active_tape() { return g_active_tape; }

TapeScope::TapeScope(Tape& tape) : prev_(g_active_tape) { g_active_tape = &tape; }
TapeScope::~TapeScope() { g_active_tape = prev_; }

NoTapeScope::NoTapeScope() : prev_(g_active_tape) { g_active_tape = nullptr; }
NoTapeScope::~NoTapeScope() { g_active_tape = prev_; }

void Tape::backward(const Tensor& loss) {
    if (!loss.defined() || loss.size() != 1) {
        throw std::invalid_argument("backward requires a scalar loss, got " +
                                    (loss.defined() ? shape_str(loss.shape()) : std::string("<null>")));
    }
    Storage* root = loss.store().get();
    bool on_tape = false;
    for (const Entry& e : entries_) {
        if (e.output.get() == root) {
            on_tape = true;
            break;
        }
    }
    if (!on_tape && loss.requires_grad()) {
        // A loss that requires grad but was produced on another tape cannot
        // be driven from here.
        throw std::logic_error("loss is not an output of this tape");
    }
    // Intermediate (non-leaf) gradients are pass-local: reset every output so
    // repeated backward calls accumulate only into leaves.
    for (Entry& e : entries_) e.output->grad.assign(e.output->value.size(), 0.0);
    root->ensure_grad();
    root->grad[0] += 1.0;
    std::unordered_set<const Storage*> needed;
    needed.insert(root);
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
        if (needed.find(it->output.get()) == needed.end()) continue;
        it->pull();
        for (const auto& in : it->inputs) needed.insert(in.get());
    }
}

}  // namespace dcht
