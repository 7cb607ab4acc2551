#include "hrpose/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "hrpose/errors.hpp"

namespace hrpose {

double grad_check(const std::function<double(bool)>& eval,
                  const std::vector<Tensor<double>*>& params,
                  const GradCheckOptions& opt) {
    for (Tensor<double>* p : params) p->zero_grad();
    const double f0 = eval(true);
    if (!std::isfinite(f0)) throw NumericsError("grad_check: non-finite function value");

    // snapshot analytic grads before FD evaluations disturb anything
    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (Tensor<double>* p : params) {
        if (p->g.size() != p->v.size())
            throw NumericsError("grad_check: eval left no gradient on a parameter");
        analytic.push_back(p->g);
    }

    Rng rng(opt.sample_seed);
    double max_rel = 0.0;
    for (size_t pi = 0; pi < params.size(); ++pi) {
        Tensor<double>* p = params[pi];
        const size_t n = p->v.size();
        std::vector<size_t> coords;
        if (opt.max_coords_per_tensor > 0 &&
            n > static_cast<size_t>(opt.max_coords_per_tensor)) {
            for (int k = 0; k < opt.max_coords_per_tensor; ++k)
                coords.push_back(static_cast<size_t>(rng.uniform_int(n)));
        } else {
            coords.resize(n);
            for (size_t k = 0; k < n; ++k) coords[k] = k;
        }
        for (size_t i : coords) {
            const double saved = p->v[i];
            p->v[i] = saved + opt.eps;
            const double fp = eval(false);
            p->v[i] = saved - opt.eps;
            const double fm = eval(false);
            p->v[i] = saved;
            if (!std::isfinite(fp) || !std::isfinite(fm))
                throw NumericsError("grad_check: non-finite perturbed value");
            const double fd = (fp - fm) / (2.0 * opt.eps);
            const double a = analytic[pi][i];
            const double denom = std::max({std::abs(a), std::abs(fd), opt.abs_floor});
            max_rel = std::max(max_rel, std::abs(a - fd) / denom);
        }
    }
    return max_rel;
}

}  // namespace hrpose
