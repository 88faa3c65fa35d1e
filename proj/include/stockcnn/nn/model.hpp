#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stockcnn/nn/layers.hpp"
#include "stockcnn/nn/tensor.hpp"

namespace stockcnn::nn {

enum class LayerKind : std::uint8_t { Conv = 1, Relu, MaxPool, Dropout, Flatten, Dense };

struct LayerSpec {
    LayerKind kind;
    std::size_t units = 0;  // filters (Conv) or outputs (Dense)
    std::size_t kernel = 0; // Conv only
    double rate = 0.0;      // Dropout only

    static LayerSpec conv(std::size_t filters, std::size_t kernel = 3) { return {LayerKind::Conv, filters, kernel, 0.0}; }
    static LayerSpec relu() { return {LayerKind::Relu}; }
    static LayerSpec maxpool() { return {LayerKind::MaxPool}; }
    static LayerSpec dropout(double rate) { return {LayerKind::Dropout, 0, 0, rate}; }
    static LayerSpec flatten() { return {LayerKind::Flatten}; }
    static LayerSpec dense(std::size_t units) { return {LayerKind::Dense, units, 0, 0.0}; }

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct ModelSpec {
    Shape input;
    std::vector<LayerSpec> layers;

    /// The trend classifier: four conv(3x3)+ReLU+pool blocks of 32/48/64/96
    /// filters, dropout 0.25 after the second and fourth block, then
    /// Dense-256 + ReLU, dropout 0.5, Dense-2.
    static ModelSpec trend_cnn(std::size_t height = 96, std::size_t width = 96);

    /// Output shape after every layer; validates the whole stack.
    /// Throws Error{ShapeMismatch | OddDimension}.
    std::vector<Shape> layer_output_shapes() const;

    /// Weight then bias shape for every Conv and Dense layer, in order.
    std::vector<Shape> param_shapes() const;
    std::size_t param_count() const;

    /// True when the layer sequence is the trend_cnn stack (any input size).
    bool is_trend_cnn() const;

    std::string describe() const;

    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Flat list of learnable tensors, ordered as ModelSpec::param_shapes().
/// Grads use the same type.
template <typename T>
struct Params {
    std::vector<Tensor<T>> tensors;

    static Params zeros_like(const ModelSpec& spec);
    void set_zero();
    void add(const Params& other);
    void scale(T factor);
    double squared_norm() const;

    friend bool operator==(const Params&, const Params&) = default;
};

template <typename T>
using Grads = Params<T>;

/// He-uniform weights (limit sqrt(6 / fan_in)), zero biases.
template <typename T>
Params<T> init_params(const ModelSpec& spec, std::uint64_t seed);

/// Per-sample activations kept by a training-mode forward pass.
template <typename T>
struct ForwardCache {
    std::vector<Tensor<T>> layer_inputs;
    std::vector<std::vector<std::uint32_t>> argmax; // by layer; empty unless MaxPool
    std::vector<std::vector<T>> masks;              // by layer; empty unless Dropout
    Tensor<T> logits;

    bool complete(std::size_t layer_count) const noexcept
    {
        return layer_inputs.size() == layer_count && argmax.size() == layer_count &&
               masks.size() == layer_count && !logits.data.empty();
    }
};

template <typename T>
struct BatchCache {
    std::vector<ForwardCache<T>> samples;
    Tensor<T> logits; // (N, K)
};

struct Prediction {
    int label = 0;
    double probability[2] = {0.0, 0.0};
};

/// Table-driven feed-forward network over ModelSpec.
template <typename T>
class Network {
public:
    Network(ModelSpec spec, Params<T> params);
    Network(ModelSpec spec, std::uint64_t seed);

    const ModelSpec& spec() const noexcept { return spec_; }
    const Params<T>& params() const noexcept { return params_; }
    Params<T>& params() noexcept { return params_; }

    /// Logits for one (C,H,W) input. `cache` may be null (no backward possible).
    Tensor<T> forward(const Tensor<T>& input, Mode mode, Rng& rng, ForwardCache<T>* cache) const;

    /// Eval-mode logits; pure.
    Tensor<T> logits(const Tensor<T>& input) const;

    /// Backpropagates d(loss)/d(logits) through one cached sample, adding
    /// into `grads`. Throws Error{MissingCache}.
    void backward(const ForwardCache<T>& cache, const Tensor<T>& dlogits, Grads<T>& grads) const;

    /// Batch forward; dropout masks for sample n are drawn from Rng(mix_seed(seed, n)).
    BatchCache<T> forward_batch(std::span<const Tensor<T>> inputs, Mode mode, std::uint64_t seed) const;

    /// Exact gradient of the mean cross-entropy over the cached batch.
    Grads<T> backward(const BatchCache<T>& cache, std::span<const int> labels) const;

    /// argmax of softmax(logits); ties resolve to class 0.
    Prediction predict(const Tensor<T>& input) const;

private:
    ModelSpec spec_;
    Params<T> params_;
    std::vector<Shape> shapes_;
    std::vector<std::size_t> param_index_; // per layer: first tensor index, or npos
};

extern template class Network<float>;
extern template class Network<double>;

} // namespace stockcnn::nn
