#pragma once

#include <cstdint>

#include "stockcnn/nn/model.hpp"

namespace stockcnn::nn {

/// p <- p - rate * g. Throws Error{ShapeMismatch}.
template <typename T>
void sgd_step(Params<T>& params, const Grads<T>& grads, double rate);

struct AdamHyper {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

template <typename T>
struct AdamState {
    std::vector<Tensor<T>> m;
    std::vector<Tensor<T>> v;
    std::uint64_t t = 0;
};

/// Bias-corrected Adam. State is lazily sized on the first step.
template <typename T>
void adam_step(Params<T>& params, const Grads<T>& grads, AdamState<T>& state, double rate,
               const AdamHyper& hyper = {});

} // namespace stockcnn::nn
