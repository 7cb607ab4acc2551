#pragma once

#include <functional>
#include <vector>

#include "hrpose/rng.hpp"
#include "hrpose/tensor.hpp"

namespace hrpose {

struct GradCheckOptions {
    double eps = 1e-5;
    double abs_floor = 1e-8;     // denominators below this count as zero
    int max_coords_per_tensor = 0;  // 0 = check every coordinate
    uint64_t sample_seed = 0;
};

// Central-finite-difference check of a scalar-valued function against the
// analytic gradients produced by its own backward pass.
//
// `eval` must: evaluate the scalar at the current parameter values and, when
// with_grad is true, leave fresh gradients in each parameter's grad buffer
// (zeroed and recomputed, not accumulated across calls).
//
// Returns the max relative error |analytic - fd| / max(|analytic|, |fd|, floor).
double grad_check(const std::function<double(bool with_grad)>& eval,
                  const std::vector<Tensor<double>*>& params,
                  const GradCheckOptions& opt = {});

}  // namespace hrpose
