#include "hrpose/kernels.hpp"

#include <atomic>
#include <cmath>

namespace hrpose::ker {

namespace {
std::atomic<bool> g_parallel{true};
}

bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }
void set_parallel(bool on) { g_parallel.store(on, std::memory_order_relaxed); }

namespace ref {

template <typename T>
void conv2d_fwd(const T* x, const T* w, T* y, const ConvDims& d) {
    for (int n = 0; n < d.n; ++n)
        for (int co = 0; co < d.co; ++co)
            for (int oh = 0; oh < d.oh; ++oh)
                for (int ow = 0; ow < d.ow; ++ow) {
                    T acc = 0;
                    for (int ci = 0; ci < d.ci; ++ci)
                        for (int kh = 0; kh < d.kh; ++kh) {
                            const int ih = oh * d.stride - d.pad + kh;
                            if (ih < 0 || ih >= d.h) continue;
                            const T* xrow = x + ((int64_t(n) * d.ci + ci) * d.h + ih) * d.w;
                            const T* wrow = w + ((int64_t(co) * d.ci + ci) * d.kh + kh) * d.kw;
                            for (int kw = 0; kw < d.kw; ++kw) {
                                const int iw = ow * d.stride - d.pad + kw;
                                if (iw < 0 || iw >= d.w) continue;
                                acc += xrow[iw] * wrow[kw];
                            }
                        }
                    y[((int64_t(n) * d.co + co) * d.oh + oh) * d.ow + ow] = acc;
                }
}

template <typename T>
void conv2d_bwd_data(const T* w, const T* dy, T* dx, const ConvDims& d) {
    for (int n = 0; n < d.n; ++n)
        for (int ci = 0; ci < d.ci; ++ci)
            for (int ih = 0; ih < d.h; ++ih)
                for (int iw = 0; iw < d.w; ++iw) {
                    T acc = 0;
                    for (int kh = 0; kh < d.kh; ++kh) {
                        const int t = ih + d.pad - kh;
                        if (t < 0 || t % d.stride) continue;
                        const int oh = t / d.stride;
                        if (oh >= d.oh) continue;
                        for (int kw = 0; kw < d.kw; ++kw) {
                            const int u = iw + d.pad - kw;
                            if (u < 0 || u % d.stride) continue;
                            const int ow = u / d.stride;
                            if (ow >= d.ow) continue;
                            for (int co = 0; co < d.co; ++co) {
                                acc += w[((int64_t(co) * d.ci + ci) * d.kh + kh) * d.kw + kw] *
                                       dy[((int64_t(n) * d.co + co) * d.oh + oh) * d.ow + ow];
                            }
                        }
                    }
                    dx[((int64_t(n) * d.ci + ci) * d.h + ih) * d.w + iw] = acc;
                }
}

template <typename T>
void conv2d_bwd_weight(const T* x, const T* dy, T* dw, const ConvDims& d) {
    for (int co = 0; co < d.co; ++co)
        for (int ci = 0; ci < d.ci; ++ci)
            for (int kh = 0; kh < d.kh; ++kh)
                for (int kw = 0; kw < d.kw; ++kw) {
                    T acc = 0;
                    for (int n = 0; n < d.n; ++n)
                        for (int oh = 0; oh < d.oh; ++oh) {
                            const int ih = oh * d.stride - d.pad + kh;
                            if (ih < 0 || ih >= d.h) continue;
                            const T* xrow = x + ((int64_t(n) * d.ci + ci) * d.h + ih) * d.w;
                            const T* dyrow = dy + ((int64_t(n) * d.co + co) * d.oh + oh) * d.ow;
                            for (int ow = 0; ow < d.ow; ++ow) {
                                const int iw = ow * d.stride - d.pad + kw;
                                if (iw < 0 || iw >= d.w) continue;
                                acc += xrow[iw] * dyrow[ow];
                            }
                        }
                    dw[((int64_t(co) * d.ci + ci) * d.kh + kh) * d.kw + kw] = acc;
                }
}

template <typename T>
void bias_add_fwd(const T* x, const T* b, T* y, int n, int c, int hw) {
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < c; ++j) {
            const int64_t base = (int64_t(i) * c + j) * hw;
            for (int k = 0; k < hw; ++k) y[base + k] = x[base + k] + b[j];
        }
}

template <typename T>
void bias_add_bwd(const T* dy, T* db, int n, int c, int hw) {
    for (int j = 0; j < c; ++j) {
        T acc = 0;
        for (int i = 0; i < n; ++i) {
            const int64_t base = (int64_t(i) * c + j) * hw;
            for (int k = 0; k < hw; ++k) acc += dy[base + k];
        }
        db[j] = acc;
    }
}

template <typename T>
void bn_stats(const T* x, T* mean, T* var, int n, int c, int hw) {
    const T inv = T(1) / (T(n) * T(hw));
    for (int j = 0; j < c; ++j) {
        T s = 0;
        for (int i = 0; i < n; ++i) {
            const int64_t base = (int64_t(i) * c + j) * hw;
            for (int k = 0; k < hw; ++k) s += x[base + k];
        }
        const T m = s * inv;
        T q = 0;
        for (int i = 0; i < n; ++i) {
            const int64_t base = (int64_t(i) * c + j) * hw;
            for (int k = 0; k < hw; ++k) {
                const T dx = x[base + k] - m;
                q += dx * dx;
            }
        }
        mean[j] = m;
        var[j] = q * inv;
    }
}

template <typename T>
void bn_fwd(const T* x, const T* mean, const T* invstd, const T* gamma,
            const T* beta, T* y, T* xhat, int n, int c, int hw) {
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < c; ++j) {
            const int64_t base = (int64_t(i) * c + j) * hw;
            const T m = mean[j], is = invstd[j], g = gamma[j], bb = beta[j];
            for (int k = 0; k < hw; ++k) {
                const T xh = (x[base + k] - m) * is;
                xhat[base + k] = xh;
                y[base + k] = g * xh + bb;
            }
        }
}

template <typename T>
void bn_bwd(const T* dy, const T* xhat, const T* invstd, const T* gamma,
            T* dx, T* dgamma, T* dbeta, int n, int c, int hw) {
    const T m = T(n) * T(hw);
    for (int j = 0; j < c; ++j) {
        T sum_dy = 0, sum_dy_xh = 0;
        for (int i = 0; i < n; ++i) {
            const int64_t base = (int64_t(i) * c + j) * hw;
            for (int k = 0; k < hw; ++k) {
                sum_dy += dy[base + k];
                sum_dy_xh += dy[base + k] * xhat[base + k];
            }
        }
        dgamma[j] = sum_dy_xh;
        dbeta[j] = sum_dy;
        const T scale = gamma[j] * invstd[j] / m;
        for (int i = 0; i < n; ++i) {
            const int64_t base = (int64_t(i) * c + j) * hw;
            for (int k = 0; k < hw; ++k) {
                dx[base + k] = scale * (m * dy[base + k] - sum_dy - xhat[base + k] * sum_dy_xh);
            }
        }
    }
}

template <typename T>
void relu_fwd(const T* x, T* y, int64_t count) {
    for (int64_t i = 0; i < count; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <typename T>
void relu_bwd(const T* x, const T* dy, T* dx, int64_t count) {
    for (int64_t i = 0; i < count; ++i) dx[i] = x[i] > T(0) ? dy[i] : T(0);
}

template <typename T>
void add_fwd(const T* a, const T* b, T* y, int64_t count) {
    for (int64_t i = 0; i < count; ++i) y[i] = a[i] + b[i];
}

template <typename T>
void upsample_nearest_fwd(const T* x, T* y, int n, int c, int h, int w, int f) {
    const int oh = h * f, ow = w * f;
    for (int i = 0; i < n * c; ++i)
        for (int r = 0; r < oh; ++r) {
            const T* xrow = x + (int64_t(i) * h + r / f) * w;
            T* yrow = y + (int64_t(i) * oh + r) * ow;
            for (int q = 0; q < ow; ++q) yrow[q] = xrow[q / f];
        }
}

template <typename T>
void upsample_nearest_bwd(const T* dy, T* dx, int n, int c, int h, int w, int f) {
    const int ow = w * f;
    for (int i = 0; i < n * c; ++i)
        for (int r = 0; r < h; ++r) {
            T* dxrow = dx + (int64_t(i) * h + r) * w;
            for (int q = 0; q < w; ++q) {
                T acc = 0;
                for (int fr = 0; fr < f; ++fr) {
                    const T* dyrow = dy + (int64_t(i) * h * f + r * f + fr) * ow;
                    for (int fq = 0; fq < f; ++fq) acc += dyrow[q * f + fq];
                }
                dxrow[q] = acc;
            }
        }
}

#define HRPOSE_INSTANTIATE_REF(T)                                                        \
    template void conv2d_fwd<T>(const T*, const T*, T*, const ConvDims&);                \
    template void conv2d_bwd_data<T>(const T*, const T*, T*, const ConvDims&);           \
    template void conv2d_bwd_weight<T>(const T*, const T*, T*, const ConvDims&);         \
    template void bias_add_fwd<T>(const T*, const T*, T*, int, int, int);                \
    template void bias_add_bwd<T>(const T*, T*, int, int, int);                          \
    template void bn_stats<T>(const T*, T*, T*, int, int, int);                          \
    template void bn_fwd<T>(const T*, const T*, const T*, const T*, const T*, T*, T*,    \
                            int, int, int);                                              \
    template void bn_bwd<T>(const T*, const T*, const T*, const T*, T*, T*, T*, int,     \
                            int, int);                                                   \
    template void relu_fwd<T>(const T*, T*, int64_t);                                    \
    template void relu_bwd<T>(const T*, const T*, T*, int64_t);                          \
    template void add_fwd<T>(const T*, const T*, T*, int64_t);                           \
    template void upsample_nearest_fwd<T>(const T*, T*, int, int, int, int, int);        \
    template void upsample_nearest_bwd<T>(const T*, T*, int, int, int, int, int);

HRPOSE_INSTANTIATE_REF(float)
HRPOSE_INSTANTIATE_REF(double)

}  // namespace ref
}  // namespace hrpose::ker
