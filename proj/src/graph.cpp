#include "hrpose/graph.hpp"

#include <cmath>
#include <string>

namespace hrpose {

namespace {

template <typename T, typename F, typename... A>
void dispatch(F ref_fn, F par_fn, A&&... args) {
    if (ker::parallel_enabled())
        par_fn(std::forward<A>(args)...);
    else
        ref_fn(std::forward<A>(args)...);
}

}  // namespace

template <typename T>
typename Graph<T>::Id Graph<T>::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<Id>(nodes_.size() - 1);
}

template <typename T>
const Tensor<T>& Graph<T>::val(Id id) const {
    const Node& n = nodes_[static_cast<size_t>(id)];
    return n.op == Op::kParam ? *n.ext : n.out;
}

template <typename T>
std::vector<T>& Graph<T>::gbuf(Id id) {
    auto& g = grads_[static_cast<size_t>(id)];
    if (g.empty()) g.assign(val(id).v.size(), T(0));
    return g;
}

template <typename T>
void Graph<T>::check_finite(Id id) const {
    for (T x : val(id).v) {
        if (!std::isfinite(static_cast<double>(x)))
            throw NumericsError("non-finite value in graph node " + std::to_string(id));
    }
}

template <typename T>
typename Graph<T>::Id Graph<T>::input(Tensor<T> t) {
    Node n;
    n.op = Op::kInput;
    n.out = std::move(t);
    return push(std::move(n));
}

template <typename T>
typename Graph<T>::Id Graph<T>::param(Tensor<T>* p) {
    Node n;
    n.op = Op::kParam;
    n.ext = p;
    return push(std::move(n));
}

template <typename T>
typename Graph<T>::Id Graph<T>::conv2d(Id x, Id w, int stride, int pad) {
    const Tensor<T>& xv = val(x);
    const Tensor<T>& wv = val(w);
    if (xv.shape.size() != 4 || wv.shape.size() != 4)
        throw ShapeError("conv2d expects NCHW input and OIHW weight");
    ker::ConvDims d;
    d.n = xv.dim(0); d.ci = xv.dim(1); d.h = xv.dim(2); d.w = xv.dim(3);
    d.co = wv.dim(0); d.kh = wv.dim(2); d.kw = wv.dim(3);
    d.stride = stride; d.pad = pad;
    if (wv.dim(1) != d.ci) throw ShapeError("conv2d channel mismatch");
    if (stride < 1 || pad < 0) throw ShapeError("conv2d bad stride/pad");
    const int th = d.h + 2 * pad - d.kh;
    const int tw = d.w + 2 * pad - d.kw;
    if (th < 0 || tw < 0 || th % stride || tw % stride)
        throw ShapeError("conv2d geometry does not divide exactly");
    d.oh = th / stride + 1;
    d.ow = tw / stride + 1;

    Node n;
    n.op = Op::kConv2d;
    n.in = {x, w, -1};
    n.conv = d;
    n.out = Tensor<T>({d.n, d.co, d.oh, d.ow});
    dispatch<T>(ker::ref::conv2d_fwd<T>, ker::par::conv2d_fwd<T>,
                xv.data(), wv.data(), n.out.data(), d);
    macs_ += d.macs();
    return push(std::move(n));
}

template <typename T>
typename Graph<T>::Id Graph<T>::bias_add(Id x, Id b) {
    const Tensor<T>& xv = val(x);
    const Tensor<T>& bv = val(b);
    if (xv.shape.size() != 4 || bv.shape.size() != 1 || bv.dim(0) != xv.dim(1))
        throw ShapeError("bias_add expects NCHW and per-channel bias");
    Node n;
    n.op = Op::kBiasAdd;
    n.in = {x, b, -1};
    n.out = Tensor<T>(xv.shape);
    dispatch<T>(ker::ref::bias_add_fwd<T>, ker::par::bias_add_fwd<T>,
                xv.data(), bv.data(), n.out.data(), xv.dim(0), xv.dim(1),
                xv.dim(2) * xv.dim(3));
    return push(std::move(n));
}

template <typename T>
typename Graph<T>::Id Graph<T>::batch_norm(Id x, Id gamma, Id beta, BnState<T>* state,
                                           bool training) {
    const Tensor<T>& xv = val(x);
    if (xv.shape.size() != 4) throw ShapeError("batch_norm expects NCHW");
    const int N = xv.dim(0), C = xv.dim(1), HW = xv.dim(2) * xv.dim(3);
    if (val(gamma).shape != std::vector<int>{C} || val(beta).shape != std::vector<int>{C})
        throw ShapeError("batch_norm per-channel params must be sized C");

    Node n;
    n.op = Op::kBatchNorm;
    n.in = {x, gamma, beta};
    n.bn = state;
    n.training = training;
    n.out = Tensor<T>(xv.shape);
    n.aux = Tensor<T>(xv.shape);  // xhat
    n.stats.assign(static_cast<size_t>(2 * C), T(0));
    T* mean = n.stats.data();
    T* invstd = n.stats.data() + C;

    if (training) {
        std::vector<T> var(static_cast<size_t>(C));
        dispatch<T>(ker::ref::bn_stats<T>, ker::par::bn_stats<T>,
                    xv.data(), mean, var.data(), N, C, HW);
        const T m = T(N) * T(HW);
        const T unbias = m > T(1) ? m / (m - T(1)) : T(1);
        for (int c = 0; c < C; ++c) {
            state->running_mean.v[c] =
                (T(1) - state->momentum) * state->running_mean.v[c] + state->momentum * mean[c];
            state->running_var.v[c] = (T(1) - state->momentum) * state->running_var.v[c] +
                                      state->momentum * var[c] * unbias;
            invstd[c] = T(1) / std::sqrt(var[c] + state->epsilon);
        }
    } else {
        for (int c = 0; c < C; ++c) {
            mean[c] = state->running_mean.v[c];
            invstd[c] = T(1) / std::sqrt(state->running_var.v[c] + state->epsilon);
        }
    }
    dispatch<T>(ker::ref::bn_fwd<T>, ker::par::bn_fwd<T>,
                xv.data(), mean, invstd, val(gamma).data(), val(beta).data(),
                n.out.data(), n.aux.data(), N, C, HW);
    return push(std::move(n));
}

template <typename T>
typename Graph<T>::Id Graph<T>::relu(Id x) {
    const Tensor<T>& xv = val(x);
    Node n;
    n.op = Op::kRelu;
    n.in = {x, -1, -1};
    n.out = Tensor<T>(xv.shape);
    dispatch<T>(ker::ref::relu_fwd<T>, ker::par::relu_fwd<T>,
                xv.data(), n.out.data(), xv.numel());
    return push(std::move(n));
}

template <typename T>
typename Graph<T>::Id Graph<T>::add(Id a, Id b) {
    const Tensor<T>& av = val(a);
    const Tensor<T>& bv = val(b);
    if (!av.same_shape(bv)) throw ShapeError("add shape mismatch");
    Node n;
    n.op = Op::kAdd;
    n.in = {a, b, -1};
    n.out = Tensor<T>(av.shape);
    dispatch<T>(ker::ref::add_fwd<T>, ker::par::add_fwd<T>,
                av.data(), bv.data(), n.out.data(), av.numel());
    return push(std::move(n));
}

template <typename T>
typename Graph<T>::Id Graph<T>::upsample_nearest(Id x, int factor) {
    const Tensor<T>& xv = val(x);
    if (xv.shape.size() != 4) throw ShapeError("upsample expects NCHW");
    if (factor < 1 || (factor & (factor - 1)))
        throw ShapeError("upsample factor must be a power of two");
    Node n;
    n.op = Op::kUpsample;
    n.in = {x, -1, -1};
    n.factor = factor;
    n.out = Tensor<T>({xv.dim(0), xv.dim(1), xv.dim(2) * factor, xv.dim(3) * factor});
    dispatch<T>(ker::ref::upsample_nearest_fwd<T>, ker::par::upsample_nearest_fwd<T>,
                xv.data(), n.out.data(), xv.dim(0), xv.dim(1), xv.dim(2), xv.dim(3), factor);
    return push(std::move(n));
}

template <typename T>
typename Graph<T>::Id Graph<T>::masked_mse(Id pred, Id target, Id mask) {
    const Tensor<T>& p = val(pred);
    if (!p.same_shape(val(target)) || !p.same_shape(val(mask)))
        throw ShapeError("masked_mse shape mismatch");
    check_finite(pred);
    Node n;
    n.op = Op::kMaskedMse;
    n.in = {pred, target, mask};
    n.out = Tensor<T>({1});
    T norm = 0;
    for (T m : val(mask).v) norm += m;
    if (norm < T(1)) norm = T(1);
    T acc = 0;
    const auto& tv = val(target).v;
    const auto& mv = val(mask).v;
    for (size_t i = 0; i < p.v.size(); ++i) {
        const T r = p.v[i] - tv[i];
        acc += mv[i] * r * r;
    }
    n.out.v[0] = acc / norm;
    n.stats = {norm};
    return push(std::move(n));
}

template <typename T>
typename Graph<T>::Id Graph<T>::masked_huber(Id pred, Id target, Id mask, T delta) {
    const Tensor<T>& p = val(pred);
    if (!p.same_shape(val(target)) || !p.same_shape(val(mask)))
        throw ShapeError("masked_huber shape mismatch");
    check_finite(pred);
    Node n;
    n.op = Op::kMaskedHuber;
    n.in = {pred, target, mask};
    n.delta = delta;
    n.out = Tensor<T>({1});
    T norm = 0;
    for (T m : val(mask).v) norm += m;
    if (norm < T(1)) norm = T(1);
    T acc = 0;
    const auto& tv = val(target).v;
    const auto& mv = val(mask).v;
    for (size_t i = 0; i < p.v.size(); ++i) {
        const T r = p.v[i] - tv[i];
        const T a = std::abs(r);
        acc += mv[i] * (a <= delta ? T(0.5) * r * r : delta * (a - T(0.5) * delta));
    }
    n.out.v[0] = acc / norm;
    n.stats = {norm};
    return push(std::move(n));
}

template <typename T>
typename Graph<T>::Id Graph<T>::reduce_sum(Id x) {
    Node n;
    n.op = Op::kReduceSum;
    n.in = {x, -1, -1};
    n.out = Tensor<T>({1});
    T acc = 0;
    for (T v : val(x).v) acc += v;
    n.out.v[0] = acc;
    return push(std::move(n));
}

template <typename T>
typename Graph<T>::Id Graph<T>::weighted_sum(const std::vector<Id>& scalars,
                                             const std::vector<T>& weights) {
    if (scalars.size() != weights.size() || scalars.empty())
        throw ShapeError("weighted_sum needs matching non-empty lists");
    Node n;
    n.op = Op::kWeightedSum;
    n.extra_in = scalars;
    n.weights = weights;
    n.out = Tensor<T>({1});
    T acc = 0;
    for (size_t i = 0; i < scalars.size(); ++i) {
        if (val(scalars[i]).numel() != 1) throw ShapeError("weighted_sum expects scalars");
        acc += weights[i] * val(scalars[i]).v[0];
    }
    n.out.v[0] = acc;
    return push(std::move(n));
}

template <typename T>
void Graph<T>::backward(Id root) {
    if (val(root).numel() != 1) throw ShapeError("backward root must be scalar");
    check_finite(root);
    grads_.assign(nodes_.size(), {});
    gbuf(root)[0] = T(1);

    for (Id id = root; id >= 0; --id) {
        Node& n = nodes_[static_cast<size_t>(id)];
        auto& g = grads_[static_cast<size_t>(id)];
        if (g.empty()) continue;

        switch (n.op) {
            case Op::kInput:
                break;
            case Op::kParam: {
                n.ext->ensure_grad();
                for (size_t i = 0; i < g.size(); ++i) n.ext->g[i] += g[i];
                break;
            }
            case Op::kConv2d: {
                const auto& d = n.conv;
                std::vector<T> dx(val(n.in[0]).v.size());
                std::vector<T> dw(val(n.in[1]).v.size());
                dispatch<T>(ker::ref::conv2d_bwd_data<T>, ker::par::conv2d_bwd_data<T>,
                            val(n.in[1]).data(), g.data(), dx.data(), d);
                dispatch<T>(ker::ref::conv2d_bwd_weight<T>, ker::par::conv2d_bwd_weight<T>,
                            val(n.in[0]).data(), g.data(), dw.data(), d);
                auto& gx = gbuf(n.in[0]);
                for (size_t i = 0; i < gx.size(); ++i) gx[i] += dx[i];
                auto& gw = gbuf(n.in[1]);
                for (size_t i = 0; i < gw.size(); ++i) gw[i] += dw[i];
                break;
            }
            case Op::kBiasAdd: {
                const Tensor<T>& xv = val(n.in[0]);
                const int N = xv.dim(0), C = xv.dim(1), HW = xv.dim(2) * xv.dim(3);
                auto& gx = gbuf(n.in[0]);
                for (size_t i = 0; i < gx.size(); ++i) gx[i] += g[i];
                std::vector<T> db(static_cast<size_t>(C));
                dispatch<T>(ker::ref::bias_add_bwd<T>, ker::par::bias_add_bwd<T>,
                            g.data(), db.data(), N, C, HW);
                auto& gb = gbuf(n.in[1]);
                for (int c = 0; c < C; ++c) gb[static_cast<size_t>(c)] += db[static_cast<size_t>(c)];
                break;
            }
            case Op::kBatchNorm: {
                const Tensor<T>& xv = val(n.in[0]);
                const int N = xv.dim(0), C = xv.dim(1), HW = xv.dim(2) * xv.dim(3);
                const T* invstd = n.stats.data() + C;
                std::vector<T> dx(xv.v.size()), dgamma(static_cast<size_t>(C)),
                    dbeta(static_cast<size_t>(C));
                if (n.training) {
                    dispatch<T>(ker::ref::bn_bwd<T>, ker::par::bn_bwd<T>,
                                g.data(), n.aux.data(), invstd, val(n.in[1]).data(),
                                dx.data(), dgamma.data(), dbeta.data(), N, C, HW);
                } else {
                    // inference mode: running stats are constants
                    const T* gamma = val(n.in[1]).data();
                    for (int i = 0; i < N; ++i)
                        for (int c = 0; c < C; ++c) {
                            const int64_t base = (int64_t(i) * C + c) * HW;
                            for (int k = 0; k < HW; ++k) {
                                dx[base + k] = g[base + k] * gamma[c] * invstd[c];
                                dgamma[static_cast<size_t>(c)] += g[base + k] * n.aux.v[base + k];
                                dbeta[static_cast<size_t>(c)] += g[base + k];
                            }
                        }
                }
                auto& gx = gbuf(n.in[0]);
                for (size_t i = 0; i < gx.size(); ++i) gx[i] += dx[i];
                auto& gg = gbuf(n.in[1]);
                auto& gb = gbuf(n.in[2]);
                for (int c = 0; c < C; ++c) {
                    gg[static_cast<size_t>(c)] += dgamma[static_cast<size_t>(c)];
                    gb[static_cast<size_t>(c)] += dbeta[static_cast<size_t>(c)];
                }
                break;
            }
            case Op::kRelu: {
                const Tensor<T>& xv = val(n.in[0]);
                std::vector<T> dx(xv.v.size());
                dispatch<T>(ker::ref::relu_bwd<T>, ker::par::relu_bwd<T>,
                            xv.data(), g.data(), dx.data(), xv.numel());
                auto& gx = gbuf(n.in[0]);
                for (size_t i = 0; i < gx.size(); ++i) gx[i] += dx[i];
                break;
            }
            case Op::kAdd: {
                auto& ga = gbuf(n.in[0]);
                for (size_t i = 0; i < ga.size(); ++i) ga[i] += g[i];
                auto& gb = gbuf(n.in[1]);
                for (size_t i = 0; i < gb.size(); ++i) gb[i] += g[i];
                break;
            }
            case Op::kUpsample: {
                const Tensor<T>& xv = val(n.in[0]);
                std::vector<T> dx(xv.v.size());
                dispatch<T>(ker::ref::upsample_nearest_bwd<T>, ker::par::upsample_nearest_bwd<T>,
                            g.data(), dx.data(), xv.dim(0), xv.dim(1), xv.dim(2), xv.dim(3),
                            n.factor);
                auto& gx = gbuf(n.in[0]);
                for (size_t i = 0; i < gx.size(); ++i) gx[i] += dx[i];
                break;
            }
            case Op::kMaskedMse: {
                const T norm = n.stats[0];
                const T gy = g[0];
                const auto& p = val(n.in[0]).v;
                const auto& t = val(n.in[1]).v;
                const auto& m = val(n.in[2]).v;
                auto& gx = gbuf(n.in[0]);
                for (size_t i = 0; i < gx.size(); ++i)
                    gx[i] += gy * T(2) * m[i] * (p[i] - t[i]) / norm;
                break;
            }
            case Op::kMaskedHuber: {
                const T norm = n.stats[0];
                const T gy = g[0];
                const T delta = n.delta;
                const auto& p = val(n.in[0]).v;
                const auto& t = val(n.in[1]).v;
                const auto& m = val(n.in[2]).v;
                auto& gx = gbuf(n.in[0]);
                for (size_t i = 0; i < gx.size(); ++i) {
                    T r = p[i] - t[i];
                    if (r > delta) r = delta;
                    if (r < -delta) r = -delta;
                    gx[i] += gy * m[i] * r / norm;
                }
                break;
            }
            case Op::kReduceSum: {
                const T gy = g[0];
                auto& gx = gbuf(n.in[0]);
                for (size_t i = 0; i < gx.size(); ++i) gx[i] += gy;
                break;
            }
            case Op::kWeightedSum: {
                const T gy = g[0];
                for (size_t i = 0; i < n.extra_in.size(); ++i)
                    gbuf(n.extra_in[i])[0] += gy * n.weights[i];
                break;
            }
        }
    }
}

template <typename T>
void Graph<T>::reset() {
    nodes_.clear();
    grads_.clear();
    macs_ = 0;
}

template class Graph<float>;
template class Graph<double>;

}  // namespace hrpose
