#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "hrpose/errors.hpp"

namespace hrpose {

// Dense row-major tensor. Shape {N,C,H,W} for activations, {C} / {Co,Ci,Kh,Kw}
// for parameters, {1} for scalars. Gradient buffer is allocated on demand and
// always matches the value shape.
template <typename T>
struct Tensor {
    std::vector<int> shape;
    std::vector<T> v;
    std::vector<T> g;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
        v.assign(numel(), T(0));
    }
    Tensor(std::vector<int> s, T fill) : shape(std::move(s)) {
        v.assign(numel(), fill);
    }

    int64_t numel() const {
        int64_t n = 1;
        for (int d : shape) n *= d;
        return shape.empty() ? 0 : n;
    }

    int dim(int i) const { return shape[static_cast<size_t>(i)]; }

    void ensure_grad() {
        if (g.size() != v.size()) g.assign(v.size(), T(0));
    }
    void zero_grad() {
        g.assign(v.size(), T(0));
    }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    T* data() { return v.data(); }
    const T* data() const { return v.data(); }
};

inline int64_t shape_numel(const std::vector<int>& s) {
    int64_t n = 1;
    for (int d : s) n *= d;
    return s.empty() ? 0 : n;
}

template <typename T>
void require_shape(const Tensor<T>& t, const std::vector<int>& s, const char* what) {
    if (t.shape != s) throw ShapeError(std::string("shape mismatch: ") + what);
}

}  // namespace hrpose
