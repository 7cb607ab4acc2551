#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "hrpose/kernels.hpp"
#include "hrpose/tensor.hpp"

namespace hrpose {

// Running statistics of one batch-norm layer. Owned by the model, updated by
// the graph in training mode.
template <typename T>
struct BnState {
    Tensor<T> running_mean;
    Tensor<T> running_var;
    T momentum = T(0.1);
    T epsilon = T(1e-5);

    BnState() = default;
    explicit BnState(int channels)
        : running_mean({channels}, T(0)), running_var({channels}, T(1)) {}
};

// Dynamic tape. forward ops append nodes; backward walks the tape in reverse
// and accumulates gradients, routing parameter gradients into the external
// tensors registered via param(). One graph instance is single-threaded;
// kernels may parallelize internally (results are thread-count invariant).
template <typename T>
class Graph {
 public:
    using Id = int32_t;

    Id input(Tensor<T> t);
    Id param(Tensor<T>* p);

    Id conv2d(Id x, Id w, int stride, int pad);
    Id bias_add(Id x, Id b);
    Id batch_norm(Id x, Id gamma, Id beta, BnState<T>* state, bool training);
    Id relu(Id x);
    Id add(Id a, Id b);
    Id upsample_nearest(Id x, int factor);

    // scalar-valued reductions (shape {1})
    Id masked_mse(Id pred, Id target, Id mask);
    Id masked_huber(Id pred, Id target, Id mask, T delta);
    Id reduce_sum(Id x);
    Id weighted_sum(const std::vector<Id>& scalars, const std::vector<T>& weights);

    const Tensor<T>& val(Id id) const;
    // gradient buffer of a node (valid after backward); empty if untouched
    const std::vector<T>& grad(Id id) const { return grads_[static_cast<size_t>(id)]; }

    void backward(Id root);
    void reset();

    size_t size() const { return nodes_.size(); }
    int64_t macs() const { return macs_; }

 private:
    enum class Op : uint8_t {
        kInput, kParam, kConv2d, kBiasAdd, kBatchNorm, kRelu, kAdd,
        kUpsample, kMaskedMse, kMaskedHuber, kReduceSum, kWeightedSum,
    };

    struct Node {
        Op op;
        std::array<Id, 3> in{-1, -1, -1};
        Tensor<T> out;
        Tensor<T> aux;           // BN: xhat; caches for backward
        std::vector<T> stats;    // BN: mean/invstd; losses: normalizer
        std::vector<Id> extra_in;
        std::vector<T> weights;  // weighted_sum coefficients
        Tensor<T>* ext = nullptr;
        BnState<T>* bn = nullptr;
        ker::ConvDims conv{};
        int factor = 0;
        T delta{};
        bool training = false;
    };

    Id push(Node n);
    std::vector<T>& gbuf(Id id);
    void check_finite(Id id) const;

    std::vector<Node> nodes_;
    std::vector<std::vector<T>> grads_;
    int64_t macs_ = 0;
};

extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace hrpose
