#include "dcht/core/gradcheck.hpp"

#include <cmath>

namespace dcht {

GradCheckResult gradcheck(const std::function<Tensor()>& f, const std::vector<Tensor>& params,
                          double h, int64_t max_coords_per_param, double denom_floor) {
    if (!(denom_floor > 0.0)) throw std::invalid_argument("gradcheck: denom_floor must be positive");
    for (Tensor p : params) {  // handle copies share storage
        if (!p.defined()) throw std::invalid_argument("gradcheck: undefined parameter");
        p.set_requires_grad(true);
        p.zero_grad();
    }

    // Analytic pass on a private tape.
    Tape tape;
    std::vector<std::vector<double>> analytic;
    {
        TapeScope scope(tape);
        Tensor loss = f();
        if (loss.size() != 1) throw std::invalid_argument("gradcheck: f() must return a scalar");
        tape.backward(loss);
    }
    analytic.reserve(params.size());
    for (const Tensor& p : params) {
        if (p.has_grad()) {
            analytic.push_back(p.grad());
        } else {
            analytic.emplace_back(static_cast<size_t>(p.size()), 0.0);
        }
    }

    GradCheckResult res;
    NoTapeScope no_tape;
    for (size_t pi = 0; pi < params.size(); ++pi) {
        Tensor p = params[pi];
        double* v = p.data();
        const int64_t n = p.size();
        int64_t stride = 1;
        if (max_coords_per_param > 0 && n > max_coords_per_param) {
            stride = (n + max_coords_per_param - 1) / max_coords_per_param;
        }
        for (int64_t c = 0; c < n; c += stride) {
            const double saved = v[c];
            v[c] = saved + h;
            const double fp = f().item();
            v[c] = saved - h;
            const double fm = f().item();
            v[c] = saved;
            const double num = (fp - fm) / (2.0 * h);
            const double ana = analytic[pi][static_cast<size_t>(c)];
            if (!std::isfinite(num) || !std::isfinite(ana)) {
                throw NumericError("gradcheck: non-finite derivative at parameter " + std::to_string(pi) +
                                   " coordinate " + std::to_string(c));
            }
            const double rel =
                std::fabs(ana - num) / std::max(denom_floor, std::fabs(ana) + std::fabs(num));
            if (rel > res.max_rel_err) {
                res.max_rel_err = rel;
                res.worst_param = static_cast<int>(pi);
                res.worst_coord = c;
                res.analytic = ana;
                res.numeric = num;
            }
        }
    }
    return res;
}

}  // namespace dcht
