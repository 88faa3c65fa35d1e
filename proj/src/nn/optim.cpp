#include "stockcnn/nn/optim.hpp"

#include <cmath>

namespace stockcnn::nn {

namespace {

template <typename T>
void check_match(const Params<T>& params, const Grads<T>& grads)
{
    if (params.tensors.size() != grads.tensors.size()) {
        throw Error(ErrorKind::ShapeMismatch, "gradient list does not match parameter list");
    }
    for (std::size_t i = 0; i < params.tensors.size(); ++i) {
        require_shape(grads.tensors[i].shape, params.tensors[i].shape, "gradient");
    }
}

} // namespace

template <typename T>
void sgd_step(Params<T>& params, const Grads<T>& grads, double rate)
{
    check_match(params, grads);
    const auto r = static_cast<T>(rate);
    for (std::size_t i = 0; i < params.tensors.size(); ++i) {
        auto& p = params.tensors[i].data;
        const auto& g = grads.tensors[i].data;
        for (std::size_t j = 0; j < p.size(); ++j) p[j] -= r * g[j];
    }
}

template <typename T>
void adam_step(Params<T>& params, const Grads<T>& grads, AdamState<T>& state, double rate,
               const AdamHyper& hyper)
{
    check_match(params, grads);
    if (state.m.empty()) {
        for (const auto& p : params.tensors) {
            state.m.emplace_back(p.shape);
            state.v.emplace_back(p.shape);
        }
    }
    if (state.m.size() != params.tensors.size()) {
        throw Error(ErrorKind::ShapeMismatch, "Adam state does not match parameters");
    }
    ++state.t;
    const double t = static_cast<double>(state.t);
    const double c1 = 1.0 - std::pow(hyper.beta1, t);
    const double c2 = 1.0 - std::pow(hyper.beta2, t);
    const auto b1 = static_cast<T>(hyper.beta1);
    const auto b2 = static_cast<T>(hyper.beta2);
    for (std::size_t i = 0; i < params.tensors.size(); ++i) {
        auto& p = params.tensors[i].data;
        auto& m = state.m[i].data;
        auto& v = state.v[i].data;
        const auto& g = grads.tensors[i].data;
        for (std::size_t j = 0; j < p.size(); ++j) {
            m[j] = b1 * m[j] + (T{1} - b1) * g[j];
            v[j] = b2 * v[j] + (T{1} - b2) * g[j] * g[j];
            const double m_hat = static_cast<double>(m[j]) / c1;
            const double v_hat = static_cast<double>(v[j]) / c2;
            p[j] = static_cast<T>(static_cast<double>(p[j]) - rate * m_hat / (std::sqrt(v_hat) + hyper.epsilon));
        }
    }
}

template void sgd_step<float>(Params<float>&, const Grads<float>&, double);
template void sgd_step<double>(Params<double>&, const Grads<double>&, double);
template void adam_step<float>(Params<float>&, const Grads<float>&, AdamState<float>&, double, const AdamHyper&);
template void adam_step<double>(Params<double>&, const Grads<double>&, AdamState<double>&, double, const AdamHyper&);

} // namespace stockcnn::nn
