#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stockcnn/nn/tensor.hpp"
#include "stockcnn/rng.hpp"

// Single-sample layer primitives. Backward functions *accumulate* parameter
// gradients into the tensors they are handed, so a batch is the sum of
// per-sample calls.
namespace stockcnn::nn {

enum class Mode { Train, Eval };

/// Same padding (k/2), stride 1, odd k. in (C,H,W), w (F,C,k,k), b (F) -> (F,H,W).
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& in, const Tensor<T>& w, const Tensor<T>& b);

/// Returns d(input); adds into dw and db.
template <typename T>
Tensor<T> conv2d_backward(const Tensor<T>& in, const Tensor<T>& w, const Tensor<T>& dout,
                          Tensor<T>& dw, Tensor<T>& db);

template <typename T>
struct PoolResult {
    Tensor<T> output;
    std::vector<std::uint32_t> argmax; // flat input index of each window's winner
};

/// 2x2 max pooling, stride 2. Ties go to the first element in row-major order.
/// Throws Error{OddDimension}.
template <typename T>
PoolResult<T> maxpool2d_forward(const Tensor<T>& in);

template <typename T>
Tensor<T> maxpool2d_backward(const Tensor<T>& dout, std::span<const std::uint32_t> argmax,
                             const Shape& input_shape);

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& in);

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& in, const Tensor<T>& dout);

/// in (n), w (m,n), b (m) -> (m).
template <typename T>
Tensor<T> dense_forward(const Tensor<T>& in, const Tensor<T>& w, const Tensor<T>& b);

template <typename T>
Tensor<T> dense_backward(const Tensor<T>& in, const Tensor<T>& w, const Tensor<T>& dout,
                         Tensor<T>& dw, Tensor<T>& db);

template <typename T>
struct DropoutResult {
    Tensor<T> output;
    std::vector<T> mask; // 0 or 1/(1-rate) per unit; empty means identity
};

/// Inverted dropout in Train mode, identity in Eval mode or at rate 0.
template <typename T>
DropoutResult<T> dropout_forward(const Tensor<T>& in, double rate, Mode mode, Rng& rng);

template <typename T>
Tensor<T> dropout_backward(const Tensor<T>& dout, std::span<const T> mask);

template <typename T>
struct SoftmaxLoss {
    double loss = 0.0;   // mean cross-entropy over rows
    Tensor<T> probs;     // (N, K), rows sum to 1
    Tensor<T> grad;      // d(loss)/d(logits) = (probs - onehot) / N
};

/// logits (N, K), labels in [0, K). Max-subtracted for stability.
template <typename T>
SoftmaxLoss<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const int> labels);

} // namespace stockcnn::nn
