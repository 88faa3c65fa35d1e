#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "stockcnn/nn/model.hpp"
#include "stockcnn/nn/optim.hpp"

namespace stockcnn::nn {

enum class Optimizer { Sgd, Adam };

std::string_view to_string(Optimizer o) noexcept;
std::optional<Optimizer> parse_optimizer(std::string_view name) noexcept;

struct TrainConfig {
    std::size_t batch_size = 32;
    std::size_t epochs = 20;
    double learning_rate = 1e-3;
    Optimizer optimizer = Optimizer::Adam;
    std::uint64_t seed = 42;
    bool dropout = true;
    /// Worker threads per mini-batch. Results are reproducible for a fixed
    /// thread count; 1 is the reference mode.
    std::size_t threads = 1;
    /// Stop after the first epoch whose training accuracy reaches this value.
    std::optional<double> target_accuracy;
};

/// Throws std::invalid_argument unless batch >= 1, epochs >= 1, rate >= 0.
void check_config(const TrainConfig& config);

/// Random-access labelled inputs; lets callers keep images compact and
/// convert to tensors on demand.
template <typename T>
class SampleSource {
public:
    virtual ~SampleSource() = default;
    virtual std::size_t size() const = 0;
    virtual int label(std::size_t i) const = 0;
    virtual Tensor<T> input(std::size_t i) const = 0;
};

template <typename T>
class TensorSource final : public SampleSource<T> {
public:
    TensorSource(std::vector<Tensor<T>> inputs, std::vector<int> labels);
    std::size_t size() const override { return inputs_.size(); }
    int label(std::size_t i) const override { return labels_[i]; }
    Tensor<T> input(std::size_t i) const override { return inputs_[i]; }

private:
    std::vector<Tensor<T>> inputs_;
    std::vector<int> labels_;
};

struct EpochStats {
    std::size_t epoch = 0; // 1-based
    double loss = 0.0;     // mean cross-entropy over the epoch's samples
    double accuracy = 0.0; // training-mode accuracy over the epoch's samples

    friend bool operator==(const EpochStats&, const EpochStats&) = default;
};

template <typename T>
struct TrainResult {
    Params<T> params;
    std::vector<EpochStats> history;
};

using EpochCallback = std::function<void(const EpochStats&)>;

/// Seeded init, per-epoch seeded shuffle, mini-batch mean-loss gradients.
/// Throws Error{EmptyDataset | NonFiniteLoss (detail = epoch)}.
template <typename T>
TrainResult<T> train(const ModelSpec& spec, const SampleSource<T>& data, const TrainConfig& config,
                     const EpochCallback& on_epoch = {});

/// Same, continuing from existing parameters.
template <typename T>
TrainResult<T> train(const ModelSpec& spec, Params<T> initial, const SampleSource<T>& data,
                     const TrainConfig& config, const EpochCallback& on_epoch = {});

} // namespace stockcnn::nn
