#pragma once

#include <functional>

#include "dcht/core/tensor.hpp"

namespace dcht {

struct GradCheckResult {
    double max_rel_err = 0.0;
    int worst_param = -1;       // index into the params vector
    int64_t worst_coord = -1;   // flat coordinate inside that parameter
    double analytic = 0.0;      // derivative pair at the worst coordinate
    double numeric = 0.0;

    bool pass(double tol) const { return max_rel_err < tol; }
};

// Compares tape gradients of the scalar `f()` against central differences.
// `f` must rebuild its computation from the current values of `params` on
// every call. Each parameter is perturbed coordinate-by-coordinate with step
// `h`; relative error is |a - n| / max(denom_floor, |a| + |n|). When
// `max_coords_per_param` > 0, coordinates are subsampled at an even stride
// (always including the first) to bound runtime; the choice is deterministic.
// Raise `denom_floor` toward the typical gradient scale when the loss is
// large: coordinates far below that scale are then compared absolutely,
// where central differences are pure cancellation noise.
// Throws NumericError if any probed value or gradient is non-finite.
GradCheckResult gradcheck(const std::function<Tensor()>& f, const std::vector<Tensor>& params,
                          double h = 1e-5, int64_t max_coords_per_param = -1,
                          double denom_floor = 1e-8);

}  // namespace dcht
