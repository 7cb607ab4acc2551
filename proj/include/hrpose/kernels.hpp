#pragma once

#include <cstdint>

namespace hrpose::ker {

// Geometry of one conv2d call. Output size must divide exactly:
// oh = (h + 2*pad - kh)/stride + 1 with zero remainder (checked by the graph).
struct ConvDims {
    int n, ci, h, w;
    int co, kh, kw;
    int stride, pad;
    int oh, ow;
    int64_t macs() const {
        return int64_t(n) * co * oh * ow * ci * kh * kw;
    }
};

// Serial reference kernels. Single thread, straightforward loops; these are
// the oracle the OpenMP versions are tested against.
namespace ref {

template <typename T>
void conv2d_fwd(const T* x, const T* w, T* y, const ConvDims& d);
template <typename T>
void conv2d_bwd_data(const T* w, const T* dy, T* dx, const ConvDims& d);
template <typename T>
void conv2d_bwd_weight(const T* x, const T* dy, T* dw, const ConvDims& d);

template <typename T>
void bias_add_fwd(const T* x, const T* b, T* y, int n, int c, int hw);
template <typename T>
void bias_add_bwd(const T* dy, T* db, int n, int c, int hw);

// mean/var are per-channel batch statistics over N*H*W elements (biased var).
template <typename T>
void bn_stats(const T* x, T* mean, T* var, int n, int c, int hw);
template <typename T>
void bn_fwd(const T* x, const T* mean, const T* invstd, const T* gamma,
            const T* beta, T* y, T* xhat, int n, int c, int hw);
template <typename T>
void bn_bwd(const T* dy, const T* xhat, const T* invstd, const T* gamma,
            T* dx, T* dgamma, T* dbeta, int n, int c, int hw);

template <typename T>
void relu_fwd(const T* x, T* y, int64_t count);
template <typename T>
void relu_bwd(const T* x, const T* dy, T* dx, int64_t count);

template <typename T>
void add_fwd(const T* a, const T* b, T* y, int64_t count);

template <typename T>
void upsample_nearest_fwd(const T* x, T* y, int n, int c, int h, int w, int f);
template <typename T>
void upsample_nearest_bwd(const T* dy, T* dx, int n, int c, int h, int w, int f);

}  // namespace ref

// OpenMP kernels. Each output element is owned by exactly one thread and its
// reduction runs in a fixed sequential order, so results are bitwise equal to
// the serial reference for any thread count.
namespace par {

template <typename T>
void conv2d_fwd(const T* x, const T* w, T* y, const ConvDims& d);
template <typename T>
void conv2d_bwd_data(const T* w, const T* dy, T* dx, const ConvDims& d);
template <typename T>
void conv2d_bwd_weight(const T* x, const T* dy, T* dw, const ConvDims& d);

template <typename T>
void bias_add_fwd(const T* x, const T* b, T* y, int n, int c, int hw);
template <typename T>
void bias_add_bwd(const T* dy, T* db, int n, int c, int hw);

template <typename T>
void bn_stats(const T* x, T* mean, T* var, int n, int c, int hw);
template <typename T>
void bn_fwd(const T* x, const T* mean, const T* invstd, const T* gamma,
            const T* beta, T* y, T* xhat, int n, int c, int hw);
template <typename T>
void bn_bwd(const T* dy, const T* xhat, const T* invstd, const T* gamma,
            T* dx, T* dgamma, T* dbeta, int n, int c, int hw);

template <typename T>
void relu_fwd(const T* x, T* y, int64_t count);
template <typename T>
void relu_bwd(const T* x, const T* dy, T* dx, int64_t count);

template <typename T>
void add_fwd(const T* a, const T* b, T* y, int64_t count);

template <typename T>
void upsample_nearest_fwd(const T* x, T* y, int n, int c, int h, int w, int f);
template <typename T>
void upsample_nearest_bwd(const T* dy, T* dx, int n, int c, int h, int w, int f);

}  // namespace par

// Backend switch used by the graph. Parallel by default; tests flip it to
// run whole forwards through the reference path.
bool parallel_enabled();
void set_parallel(bool on);

}  // namespace hrpose::ker
