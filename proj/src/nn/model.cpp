#include "stockcnn/nn/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace stockcnn::nn {

namespace {

constexpr std::size_t kNoParams = std::numeric_limits<std::size_t>::max();

const char* kind_name(LayerKind k)
{
    switch (k) {
    case LayerKind::Conv: return "conv";
    case LayerKind::Relu: return "relu";
    case LayerKind::MaxPool: return "maxpool";
    case LayerKind::Dropout: return "dropout";
    case LayerKind::Flatten: return "flatten";
    case LayerKind::Dense: return "dense";
    }
    return "?";
}

} // namespace

ModelSpec ModelSpec::trend_cnn(std::size_t height, std::size_t width)
{
    using L = LayerSpec;
    return ModelSpec{{3, height, width},
                     {L::conv(32), L::relu(), L::maxpool(),
                      L::conv(48), L::relu(), L::maxpool(), L::dropout(0.25),
                      L::conv(64), L::relu(), L::maxpool(),
                      L::conv(96), L::relu(), L::maxpool(), L::dropout(0.25),
                      L::flatten(), L::dense(256), L::relu(), L::dropout(0.5), L::dense(2)}};
}

bool ModelSpec::is_trend_cnn() const
{
    return input.size() == 3 && layers == trend_cnn(input[1], input[2]).layers;
}

std::vector<Shape> ModelSpec::layer_output_shapes() const
{
    std::vector<Shape> out;
    Shape s = input;
    for (const LayerSpec& l : layers) {
        switch (l.kind) {
        case LayerKind::Conv:
            if (s.size() != 3 || l.units == 0 || l.kernel % 2 == 0) {
                throw Error(ErrorKind::ShapeMismatch, "conv layer needs a (C,H,W) input and odd kernel");
            }
            s = {l.units, s[1], s[2]};
            break;
        case LayerKind::MaxPool:
            if (s.size() != 3) throw Error(ErrorKind::ShapeMismatch, "maxpool needs (C,H,W)");
            if (s[1] % 2 != 0 || s[2] % 2 != 0) {
                throw Error(ErrorKind::OddDimension, "maxpool input " + shape_string(s));
            }
            s = {s[0], s[1] / 2, s[2] / 2};
            break;
        case LayerKind::Flatten: s = {element_count(s)}; break;
        case LayerKind::Dense:
            if (s.size() != 1 || l.units == 0) {
                throw Error(ErrorKind::ShapeMismatch, "dense layer needs a flat input");
            }
            s = {l.units};
            break;
        case LayerKind::Dropout:
            if (!(l.rate >= 0.0 && l.rate < 1.0)) {
                throw Error(ErrorKind::ShapeMismatch, "dropout rate outside [0,1)");
            }
            break;
        case LayerKind::Relu: break;
        }
        out.push_back(s);
    }
    if (out.empty() || out.back().size() != 1) {
        throw Error(ErrorKind::ShapeMismatch, "model must end in a flat logit vector");
    }
    return out;
}

std::vector<Shape> ModelSpec::param_shapes() const
{
    const auto outputs = layer_output_shapes();
    std::vector<Shape> shapes;
    Shape in = input;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const LayerSpec& l = layers[i];
        if (l.kind == LayerKind::Conv) {
            shapes.push_back({l.units, in[0], l.kernel, l.kernel});
            shapes.push_back({l.units});
        } else if (l.kind == LayerKind::Dense) {
            shapes.push_back({l.units, in[0]});
            shapes.push_back({l.units});
        }
        in = outputs[i];
    }
    return shapes;
}

std::size_t ModelSpec::param_count() const
{
    std::size_t total = 0;
    for (const Shape& s : param_shapes()) total += element_count(s);
    return total;
}

std::string ModelSpec::describe() const
{
    std::ostringstream out;
    out << "input" << shape_string(input);
    for (const LayerSpec& l : layers) {
        out << ' ' << kind_name(l.kind);
        if (l.kind == LayerKind::Conv) out << l.units << 'k' << l.kernel;
        if (l.kind == LayerKind::Dense) out << l.units;
        if (l.kind == LayerKind::Dropout) out << l.rate;
    }
    return out.str();
}

template <typename T>
Params<T> Params<T>::zeros_like(const ModelSpec& spec)
{
    Params<T> p;
    for (const Shape& s : spec.param_shapes()) p.tensors.emplace_back(s);
    return p;
}

template <typename T>
void Params<T>::set_zero()
{
    for (auto& t : tensors) std::fill(t.data.begin(), t.data.end(), T{0});
}

template <typename T>
void Params<T>::add(const Params& other)
{
    if (other.tensors.size() != tensors.size()) throw Error(ErrorKind::ShapeMismatch, "params add");
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        require_shape(other.tensors[i].shape, tensors[i].shape, "params add");
        for (std::size_t j = 0; j < tensors[i].size(); ++j) tensors[i].data[j] += other.tensors[i].data[j];
    }
}

template <typename T>
void Params<T>::scale(T factor)
{
    for (auto& t : tensors) {
        for (T& v : t.data) v *= factor;
    }
}

template <typename T>
double Params<T>::squared_norm() const
{
    double s = 0.0;
    for (const auto& t : tensors) {
        for (T v : t.data) s += static_cast<double>(v) * static_cast<double>(v);
    }
    return s;
}

template <typename T>
Params<T> init_params(const ModelSpec& spec, std::uint64_t seed)
{
    Params<T> p = Params<T>::zeros_like(spec);
    Rng rng(seed);
    for (std::size_t i = 0; i < p.tensors.size(); i += 2) {
        Tensor<T>& w = p.tensors[i];
        const std::size_t fan_in = w.size() / w.shape[0];
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
        for (T& v : w.data) v = static_cast<T>(rng.uniform(-limit, limit));
    }
    return p;
}

template <typename T>
Network<T>::Network(ModelSpec spec, Params<T> params)
    : spec_(std::move(spec))
    , params_(std::move(params))
    , shapes_(spec_.layer_output_shapes())
{
    const auto expected = spec_.param_shapes();
    if (expected.size() != params_.tensors.size()) {
        throw Error(ErrorKind::SpecMismatch, "parameter count does not match " + spec_.describe());
    }
    for (std::size_t i = 0; i < expected.size(); ++i) {
        require_shape(params_.tensors[i].shape, expected[i], "model parameter");
    }
    std::size_t next = 0;
    for (const LayerSpec& l : spec_.layers) {
        if (l.kind == LayerKind::Conv || l.kind == LayerKind::Dense) {
            param_index_.push_back(next);
            next += 2;
        } else {
            param_index_.push_back(kNoParams);
        }
    }
}

template <typename T>
Network<T>::Network(ModelSpec spec, std::uint64_t seed)
    : Network(spec, init_params<T>(spec, seed))
{
}

template <typename T>
Tensor<T> Network<T>::forward(const Tensor<T>& input, Mode mode, Rng& rng, ForwardCache<T>* cache) const
{
    require_shape(input.shape, spec_.input, "network input");
    if (cache) {
        *cache = ForwardCache<T>{};
        cache->layer_inputs.reserve(spec_.layers.size());
    }
    Tensor<T> x = input;
    for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
        const LayerSpec& l = spec_.layers[i];
        std::vector<std::uint32_t> argmax;
        std::vector<T> mask;
        Tensor<T> y;
        switch (l.kind) {
        case LayerKind::Conv: {
            const std::size_t p = param_index_[i];
            y = conv2d_forward(x, params_.tensors[p], params_.tensors[p + 1]);
            break;
        }
        case LayerKind::Dense: {
            const std::size_t p = param_index_[i];
            y = dense_forward(x, params_.tensors[p], params_.tensors[p + 1]);
            break;
        }
        case LayerKind::Relu: y = relu_forward(x); break;
        case LayerKind::MaxPool: {
            auto r = maxpool2d_forward(x);
            y = std::move(r.output);
            argmax = std::move(r.argmax);
            break;
        }
        case LayerKind::Dropout: {
            auto r = dropout_forward(x, l.rate, mode, rng);
            y = std::move(r.output);
            mask = std::move(r.mask);
            break;
        }
        case LayerKind::Flatten: y = Tensor<T>(shapes_[i], std::move(x.data)); break;
        }
        if (cache) {
            if (l.kind == LayerKind::Flatten) {
                cache->layer_inputs.emplace_back(i == 0 ? spec_.input : shapes_[i - 1]);
            } else {
                cache->layer_inputs.push_back(std::move(x));
            }
            cache->argmax.push_back(std::move(argmax));
            cache->masks.push_back(std::move(mask));
        }
        x = std::move(y);
    }
    if (cache) cache->logits = x;
    return x;
}

template <typename T>
Tensor<T> Network<T>::logits(const Tensor<T>& input) const
{
    Rng unused(0);
    return forward(input, Mode::Eval, unused, nullptr);
}

template <typename T>
void Network<T>::backward(const ForwardCache<T>& cache, const Tensor<T>& dlogits, Grads<T>& grads) const
{
    if (!cache.complete(spec_.layers.size())) {
        throw Error(ErrorKind::MissingCache, "backward needs a cached training forward pass");
    }
    require_shape(dlogits.shape, shapes_.back(), "dlogits");
    if (grads.tensors.size() != params_.tensors.size()) {
        throw Error(ErrorKind::ShapeMismatch, "gradient buffer does not match parameters");
    }
    Tensor<T> g = dlogits;
    for (std::size_t i = spec_.layers.size(); i-- > 0;) {
        const LayerSpec& l = spec_.layers[i];
        const Tensor<T>& in = cache.layer_inputs[i];
        switch (l.kind) {
        case LayerKind::Conv: {
            const std::size_t p = param_index_[i];
            g = conv2d_backward(in, params_.tensors[p], g, grads.tensors[p], grads.tensors[p + 1]);
            break;
        }
        case LayerKind::Dense: {
            const std::size_t p = param_index_[i];
            g = dense_backward(in, params_.tensors[p], g, grads.tensors[p], grads.tensors[p + 1]);
            break;
        }
        case LayerKind::Relu: g = relu_backward(in, g); break;
        case LayerKind::MaxPool: g = maxpool2d_backward(g, cache.argmax[i], in.shape); break;
        case LayerKind::Dropout: g = dropout_backward(g, std::span<const T>(cache.masks[i])); break;
        case LayerKind::Flatten: g = Tensor<T>(in.shape, std::move(g.data)); break;
        }
    }
}

template <typename T>
BatchCache<T> Network<T>::forward_batch(std::span<const Tensor<T>> inputs, Mode mode, std::uint64_t seed) const
{
    BatchCache<T> batch;
    const std::size_t k = shapes_.back()[0];
    batch.logits = Tensor<T>({inputs.size(), k});
    batch.samples.resize(inputs.size());
    for (std::size_t n = 0; n < inputs.size(); ++n) {
        Rng rng(mix_seed(seed, n));
        const Tensor<T> z = forward(inputs[n], mode, rng, &batch.samples[n]);
        std::copy(z.data.begin(), z.data.end(), batch.logits.data.begin() + static_cast<std::ptrdiff_t>(n * k));
    }
    return batch;
}

template <typename T>
Grads<T> Network<T>::backward(const BatchCache<T>& cache, std::span<const int> labels) const
{
    if (cache.samples.empty()) throw Error(ErrorKind::MissingCache, "empty batch cache");
    const auto loss = softmax_cross_entropy(cache.logits, labels);
    const std::size_t k = cache.logits.shape[1];
    Grads<T> grads = Grads<T>::zeros_like(spec_);
    for (std::size_t n = 0; n < cache.samples.size(); ++n) {
        Tensor<T> d({k});
        std::copy_n(loss.grad.data.begin() + static_cast<std::ptrdiff_t>(n * k), k, d.data.begin());
        backward(cache.samples[n], d, grads);
    }
    return grads;
}

template <typename T>
Prediction Network<T>::predict(const Tensor<T>& input) const
{
    const Tensor<T> z = logits(input);
    if (z.size() != 2) throw Error(ErrorKind::ShapeMismatch, "predict expects two logits");
    const int labels[1] = {0};
    const auto sm = softmax_cross_entropy(Tensor<T>({1, 2}, z.data), labels);
    Prediction p;
    p.probability[0] = static_cast<double>(sm.probs.data[0]);
    p.probability[1] = static_cast<double>(sm.probs.data[1]);
    p.label = z.data[1] > z.data[0] ? 1 : 0;
    return p;
}

template struct Params<float>;
template struct Params<double>;
template Params<float> init_params<float>(const ModelSpec&, std::uint64_t);
template Params<double> init_params<double>(const ModelSpec&, std::uint64_t);
template class Network<float>;
template class Network<double>;

} // namespace stockcnn::nn
