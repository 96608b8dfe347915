#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace dcht {

using Shape = std::vector<int64_t>;

int64_t numel(const Shape& s);
std::string shape_str(const Shape& s);

// Error taxonomy used by the CLI exit-code mapping: DataError covers
// files/datasets/checkpoints, NumericError covers non-finite values and
// failed numerical checks. Shape and argument violations throw
// std::invalid_argument.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All randomness in the project flows through this generator so that a fixed
// seed reproduces runs bit-for-bit. The uniform/normal transforms are spelled
// out here instead of using std:: distributions, whose algorithms are
// implementation-defined.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t bits() { return gen_(); }

    // [0, 1)
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller, two uniforms per draw, no cached second value.
    double normal() {
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // [0, n)
    uint64_t integer(uint64_t n) { return n == 0 ? 0 : gen_() % n; }

private:
    std::mt19937_64 gen_;
};

struct Storage {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;  // allocated on first accumulation
    bool requires_grad = false;

    void ensure_grad() {
        if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    }
};

// Value-semantic handle onto a shared storage block. Copies alias the same
// data; clone() makes a deep copy.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(const Shape& shape);
    static Tensor full(const Shape& shape, double v);
    static Tensor from_vector(const Shape& shape, std::vector<double> v);
    static Tensor scalar(double v) { return from_vector({1}, {v}); }
    static Tensor rand_uniform(const Shape& shape, Rng& rng, double lo = 0.0, double hi = 1.0);
    static Tensor rand_normal(const Shape& shape, Rng& rng, double mean = 0.0, double stddev = 1.0);

    bool defined() const { return s_ != nullptr; }
    const Shape& shape() const { return s_->shape; }
    int64_t dim() const { return static_cast<int64_t>(s_->shape.size()); }
    int64_t size() const { return static_cast<int64_t>(s_->value.size()); }
    int64_t extent(int axis) const;

    double* data() { return s_->value.data(); }
    const double* data() const { return s_->value.data(); }
    // By value: the obvious `for (double v : f(x).values())` would otherwise
    // iterate freed storage once the temporary tensor dies.
    std::vector<double> values() const { return s_->value; }
    double item() const;

    bool requires_grad() const { return s_ && s_->requires_grad; }
    Tensor& set_requires_grad(bool b) {
        s_->requires_grad = b;
        return *this;
    }
    // Marks a leaf parameter that accumulates gradient during backward.
    Tensor& mark_parameter() { return set_requires_grad(true); }

    bool has_grad() const { return s_ && !s_->grad.empty(); }
    const std::vector<double>& grad() const;
    std::vector<double>& grad_mut() {
        s_->ensure_grad();
        return s_->grad;
    }
    void zero_grad() {
        if (s_) s_->grad.assign(s_->value.size(), 0.0);
    }

    Tensor clone() const;

    const std::shared_ptr<Storage>& store() const { return s_; }

private:
    std::shared_ptr<Storage> s_;
};

bool bit_equal(const Tensor& a, const Tensor& b);
double max_abs_diff(const Tensor& a, const Tensor& b);

// Append-only record of operations. Creation order is a topological order, so
// backward() replays entries in reverse, visiting only the ones whose output
// is reachable from the loss.
class Tape {
public:
    struct Entry {
        std::vector<std::shared_ptr<Storage>> inputs;
        std::shared_ptr<Storage> output;
        std::function<void()> pull;  // accumulates input grads from output grad
    };

    void record(std::vector<std::shared_ptr<Storage>> inputs,
                std::shared_ptr<Storage> output,
                std::function<void()> pull) {
        entries_.push_back({std::move(inputs), std::move(output), std::move(pull)});
    }

    // Seeds d(loss)/d(loss) = 1 and accumulates into .grad of every reachable
    // leaf. Gradients of tape outputs (intermediates) are reset at the start
    // of each call, so repeated calls accumulate only into leaves.
    void backward(const Tensor& loss);

    size_t size() const { return entries_.size(); }
    void clear() { entries_.clear(); }

private:
    std::vector<Entry> entries_;
};

Tape* active_tape();

// RAII scope making a tape current for the calling thread.
class TapeScope {
public:
    explicit TapeScope(Tape& tape);
    ~TapeScope();
    TapeScope(const TapeScope&) = delete;
    TapeScope& operator=(const TapeScope&) = delete;

private:
    Tape* prev_;
};

// Suppresses recording within a taped region (detached evaluation).
class NoTapeScope {
public:
    NoTapeScope();
    ~NoTapeScope();
    NoTapeScope(const NoTapeScope&) = delete;
    NoTapeScope& operator=(const NoTapeScope&) = delete;

private:
    Tape* prev_;
};

}  // namespace dcht
