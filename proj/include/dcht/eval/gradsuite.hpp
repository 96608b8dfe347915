#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dcht {

struct GradSuiteItem {
    std::string name;
    double max_rel_err = 0.0;
    double tol = 0.0;
    bool pass = false;
};

// Finite-difference gradient checks over every differentiable stage: the
// complex primitives, the attention and transformer blocks, both full
// branches at a tiny configuration, the fused model, and the training loss.
// Deterministic for a fixed seed; total runtime is a few seconds.
std::vector<GradSuiteItem> run_gradient_suite(uint64_t seed = 1);

}  // namespace dcht
