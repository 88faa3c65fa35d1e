#include "stockcnn/nn/train.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace stockcnn::nn {

std::string_view to_string(Optimizer o) noexcept
{
    return o == Optimizer::Sgd ? "sgd" : "adam";
}

std::optional<Optimizer> parse_optimizer(std::string_view name) noexcept
{
    if (name == "sgd") return Optimizer::Sgd;
    if (name == "adam") return Optimizer::Adam;
    return std::nullopt;
}

void check_config(const TrainConfig& config)
{
    if (config.batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
    if (config.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (!(config.learning_rate >= 0.0) || !std::isfinite(config.learning_rate)) {
        throw std::invalid_argument("learning rate must be finite and >= 0");
    }
    if (config.threads < 1) throw std::invalid_argument("threads must be >= 1");
}

template <typename T>
TensorSource<T>::TensorSource(std::vector<Tensor<T>> inputs, std::vector<int> labels)
    : inputs_(std::move(inputs))
    , labels_(std::move(labels))
{
    if (inputs_.size() != labels_.size()) {
        throw Error(ErrorKind::LengthMismatch, "inputs and labels differ in length");
    }
}

namespace {

struct ChunkStats {
    std::size_t correct = 0;
    bool finite = true;
};

// Forward + backward for samples [begin, end) of the batch, accumulating
// gradients of (sum of per-sample loss) / batch_size into `grads`.
template <typename T>
ChunkStats run_chunk(const Network<T>& net, const SampleSource<T>& data,
                     std::span<const std::size_t> batch, std::size_t begin, std::size_t end,
                     Mode mode, std::uint64_t batch_seed, Grads<T>& grads,
                     std::vector<double>& sample_loss)
{
    ChunkStats stats;
    ForwardCache<T> cache;
    for (std::size_t n = begin; n < end; ++n) {
        const std::size_t idx = batch[n];
        Rng rng(mix_seed(batch_seed, n));
        const Tensor<T> z = net.forward(data.input(idx), mode, rng, &cache);
        const int y = data.label(idx);
        const int labels[1] = {y};
        const auto sm = softmax_cross_entropy(Tensor<T>({1, z.size()}, z.data), labels);
        if (!std::isfinite(sm.loss)) {
            stats.finite = false;
            return stats;
        }
        sample_loss[idx] = sm.loss;
        const int predicted = z.data[1] > z.data[0] ? 1 : 0;
        if (predicted == y) ++stats.correct;

        // softmax_cross_entropy over one row gives d/dz of that row's loss;
        // the batch mean divides by the batch size.
        Tensor<T> d({z.size()});
        const T inv = T{1} / static_cast<T>(batch.size());
        for (std::size_t c = 0; c < z.size(); ++c) d.data[c] = sm.grad.data[c] * inv;
        net.backward(cache, d, grads);
    }
    return stats;
}

} // namespace

template <typename T>
TrainResult<T> train(const ModelSpec& spec, Params<T> initial, const SampleSource<T>& data,
                     const TrainConfig& config, const EpochCallback& on_epoch)
{
    check_config(config);
    if (data.size() == 0) throw Error(ErrorKind::EmptyDataset, "no training samples");

    Network<T> net(spec, std::move(initial));
    AdamState<T> adam;
    const Mode mode = config.dropout ? Mode::Train : Mode::Eval;
    const std::size_t threads = std::min(config.threads, config.batch_size);

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    std::vector<Grads<T>> partial(threads, Grads<T>::zeros_like(spec));
    Grads<T> grads = Grads<T>::zeros_like(spec);

    TrainResult<T> result;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        Rng shuffle_rng(mix_seed(config.seed, 0x5348u, epoch));
        shuffle_rng.shuffle(std::span<std::size_t>(order));

        std::vector<double> sample_loss(order.size(), 0.0);
        std::size_t correct = 0;
        std::size_t batch_no = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_no) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            const std::span<const std::size_t> batch(order.data() + start, stop - start);
            const std::uint64_t batch_seed = mix_seed(config.seed, epoch, batch_no);

            std::vector<ChunkStats> stats(threads);
            const std::size_t per = (batch.size() + threads - 1) / threads;
            for (auto& g : partial) g.set_zero();
            if (threads == 1) {
                stats[0] = run_chunk(net, data, batch, 0, batch.size(), mode, batch_seed, partial[0], sample_loss);
            } else {
                std::vector<std::jthread> workers;
                for (std::size_t t = 0; t < threads; ++t) {
                    const std::size_t b = std::min(batch.size(), t * per);
                    const std::size_t e = std::min(batch.size(), b + per);
                    workers.emplace_back([&, t, b, e] {
                        stats[t] = run_chunk(net, data, batch, b, e, mode, batch_seed, partial[t], sample_loss);
                    });
                }
            }

            grads.set_zero();
            for (std::size_t t = 0; t < threads; ++t) {
                if (!stats[t].finite) {
                    throw Error(ErrorKind::NonFiniteLoss,
                                "loss diverged at epoch " + std::to_string(epoch) + ", batch " +
                                    std::to_string(batch_no),
                                static_cast<std::int64_t>(epoch));
                }
                correct += stats[t].correct;
                grads.add(partial[t]);
            }

            if (config.optimizer == Optimizer::Sgd) {
                sgd_step(net.params(), grads, config.learning_rate);
            } else {
                adam_step(net.params(), grads, adam, config.learning_rate);
            }
        }

        double loss_sum = 0.0;
        for (const double l : sample_loss) loss_sum += l;
        const EpochStats s{epoch, loss_sum / static_cast<double>(order.size()),
                           static_cast<double>(correct) / static_cast<double>(order.size())};
        result.history.push_back(s);
        if (on_epoch) on_epoch(s);
        if (config.target_accuracy && s.accuracy >= *config.target_accuracy) break;
    }
    result.params = net.params();
    return result;
}

template <typename T>
TrainResult<T> train(const ModelSpec& spec, const SampleSource<T>& data, const TrainConfig& config,
                     const EpochCallback& on_epoch)
{
    return train(spec, init_params<T>(spec, mix_seed(config.seed, 0x494eu)), data, config, on_epoch);
}

template class TensorSource<float>;
template class TensorSource<double>;
template TrainResult<float> train<float>(const ModelSpec&, Params<float>, const SampleSource<float>&,
                                         const TrainConfig&, const EpochCallback&);
template TrainResult<double> train<double>(const ModelSpec&, Params<double>, const SampleSource<double>&,
                                           const TrainConfig&, const EpochCallback&);
template TrainResult<float> train<float>(const ModelSpec&, const SampleSource<float>&, const TrainConfig&,
                                         const EpochCallback&);
template TrainResult<double> train<double>(const ModelSpec&, const SampleSource<double>&,
                                           const TrainConfig&, const EpochCallback&);

} // namespace stockcnn::nn
