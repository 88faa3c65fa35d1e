#include "stockcnn/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Core>

namespace stockcnn::nn {

namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;

// Fixed lane order keeps the sum independent of buffer alignment.
template <typename T>
T dot(const T* a, const T* b, std::size_t n)
{
    T lane[8] = {};
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
        for (std::size_t k = 0; k < 8; ++k) lane[k] += a[j + k] * b[j + k];
    }
    for (; j < n; ++j) lane[j % 8] += a[j] * b[j];
    return ((lane[0] + lane[1]) + (lane[2] + lane[3])) + ((lane[4] + lane[5]) + (lane[6] + lane[7]));
}

struct ConvDims {
    std::size_t channels, height, width, filters, kernel, pad;
};

template <typename T>
ConvDims conv_dims(const Tensor<T>& in, const Tensor<T>& w)
{
    if (in.shape.size() != 3 || w.shape.size() != 4) {
        throw Error(ErrorKind::ShapeMismatch, "conv2d: input " + shape_string(in.shape) +
                                                  ", weights " + shape_string(w.shape));
    }
    const std::size_t k = w.shape[2];
    if (w.shape[1] != in.shape[0] || w.shape[3] != k || k % 2 == 0) {
        throw Error(ErrorKind::ShapeMismatch, "conv2d: weights " + shape_string(w.shape) +
                                                  " incompatible with input " +
                                                  shape_string(in.shape));
    }
    return {in.shape[0], in.shape[1], in.shape[2], w.shape[0], k, k / 2};
}

// Row (c, i, j) of the column matrix holds input[c, y+i-pad, x+j-pad] for
// every output position y*W + x, zero outside the image.
template <typename T>
RowMatrix<T> im2col(const Tensor<T>& in, const ConvDims& d)
{
    const std::size_t hw = d.height * d.width;
    RowMatrix<T> cols(d.channels * d.kernel * d.kernel, hw);
    for (std::size_t c = 0; c < d.channels; ++c) {
        const T* plane = in.data.data() + c * hw;
        for (std::size_t i = 0; i < d.kernel; ++i) {
            for (std::size_t j = 0; j < d.kernel; ++j) {
                T* row = cols.data() + ((c * d.kernel + i) * d.kernel + j) * hw;
                for (std::size_t y = 0; y < d.height; ++y) {
                    const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y + i) -
                                              static_cast<std::ptrdiff_t>(d.pad);
                    T* out = row + y * d.width;
                    if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(d.height)) {
                        std::fill(out, out + d.width, T{0});
                        continue;
                    }
                    const T* src = plane + static_cast<std::size_t>(sy) * d.width;
                    for (std::size_t x = 0; x < d.width; ++x) {
                        const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(x + j) -
                                                  static_cast<std::ptrdiff_t>(d.pad);
                        out[x] = (sx < 0 || sx >= static_cast<std::ptrdiff_t>(d.width))
                                     ? T{0}
                                     : src[static_cast<std::size_t>(sx)];
                    }
                }
            }
        }
    }
    return cols;
}

template <typename T>
void col2im_add(const RowMatrix<T>& cols, const ConvDims& d, Tensor<T>& din)
{
    const std::size_t hw = d.height * d.width;
    for (std::size_t c = 0; c < d.channels; ++c) {
        T* plane = din.data.data() + c * hw;
        for (std::size_t i = 0; i < d.kernel; ++i) {
            for (std::size_t j = 0; j < d.kernel; ++j) {
                const T* row = cols.data() + ((c * d.kernel + i) * d.kernel + j) * hw;
                for (std::size_t y = 0; y < d.height; ++y) {
                    const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y + i) -
                                              static_cast<std::ptrdiff_t>(d.pad);
                    if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(d.height)) continue;
                    T* dst = plane + static_cast<std::size_t>(sy) * d.width;
                    const T* src = row + y * d.width;
                    for (std::size_t x = 0; x < d.width; ++x) {
                        const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(x + j) -
                                                  static_cast<std::ptrdiff_t>(d.pad);
                        if (sx >= 0 && sx < static_cast<std::ptrdiff_t>(d.width)) {
                            dst[static_cast<std::size_t>(sx)] += src[x];
                        }
                    }
                }
            }
        }
    }
}

} // namespace

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& in, const Tensor<T>& w, const Tensor<T>& b)
{
    const ConvDims d = conv_dims(in, w);
    require_shape(b.shape, {d.filters}, "conv2d bias");
    const std::size_t hw = d.height * d.width;
    const std::size_t patch = d.channels * d.kernel * d.kernel;

    const RowMatrix<T> cols = im2col(in, d);
    Tensor<T> out({d.filters, d.height, d.width});
    MatrixMap<T> o(out.data.data(), static_cast<Eigen::Index>(d.filters), static_cast<Eigen::Index>(hw));
    ConstMatrixMap<T> wm(w.data.data(), static_cast<Eigen::Index>(d.filters), static_cast<Eigen::Index>(patch));
    o.noalias() = wm * cols;
    for (std::size_t f = 0; f < d.filters; ++f) o.row(static_cast<Eigen::Index>(f)).array() += b[f];
    return out;
}

template <typename T>
Tensor<T> conv2d_backward(const Tensor<T>& in, const Tensor<T>& w, const Tensor<T>& dout,
                          Tensor<T>& dw, Tensor<T>& db)
{
    const ConvDims d = conv_dims(in, w);
    require_shape(dout.shape, {d.filters, d.height, d.width}, "conv2d dout");
    require_shape(dw.shape, w.shape, "conv2d dw");
    require_shape(db.shape, {d.filters}, "conv2d db");
    const auto hw = static_cast<Eigen::Index>(d.height * d.width);
    const auto patch = static_cast<Eigen::Index>(d.channels * d.kernel * d.kernel);
    const auto filters = static_cast<Eigen::Index>(d.filters);

    const RowMatrix<T> cols = im2col(in, d);
    ConstMatrixMap<T> g(dout.data.data(), filters, hw);
    ConstMatrixMap<T> wm(w.data.data(), filters, patch);
    MatrixMap<T> dwm(dw.data.data(), filters, patch);
    dwm.noalias() += g * cols.transpose();
    for (Eigen::Index f = 0; f < filters; ++f) {
        const T* row = dout.data.data() + f * hw;
        T acc = T(0);
        for (Eigen::Index i = 0; i < hw; ++i) acc += row[i];
        db[static_cast<std::size_t>(f)] += acc;
    }

    const RowMatrix<T> dcols = wm.transpose() * g;
    Tensor<T> din(in.shape);
    col2im_add(dcols, d, din);
    return din;
}

template <typename T>
PoolResult<T> maxpool2d_forward(const Tensor<T>& in)
{
    if (in.shape.size() != 3) {
        throw Error(ErrorKind::ShapeMismatch, "maxpool2d: input " + shape_string(in.shape));
    }
    const std::size_t c = in.shape[0];
    const std::size_t h = in.shape[1];
    const std::size_t w = in.shape[2];
    if (h % 2 != 0 || w % 2 != 0) {
        throw Error(ErrorKind::OddDimension, "maxpool2d: input " + shape_string(in.shape));
    }
    PoolResult<T> r{Tensor<T>({c, h / 2, w / 2}), {}};
    r.argmax.resize(r.output.size());
    std::size_t o = 0;
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t y = 0; y < h; y += 2) {
            for (std::size_t x = 0; x < w; x += 2) {
                std::size_t best = (ch * h + y) * w + x;
                for (const std::size_t idx : {best + 1, best + w, best + w + 1}) {
                    if (in.data[idx] > in.data[best]) best = idx;
                }
                r.output.data[o] = in.data[best];
                r.argmax[o] = static_cast<std::uint32_t>(best);
                ++o;
            }
        }
    }
    return r;
}

template <typename T>
Tensor<T> maxpool2d_backward(const Tensor<T>& dout, std::span<const std::uint32_t> argmax,
                             const Shape& input_shape)
{
    if (argmax.size() != dout.size()) {
        throw Error(ErrorKind::ShapeMismatch, "maxpool2d backward: argmax/gradient size mismatch");
    }
    Tensor<T> din(input_shape);
    for (std::size_t i = 0; i < dout.size(); ++i) din.data[argmax[i]] += dout.data[i];
    return din;
}

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& in)
{
    Tensor<T> out = in;
    for (T& v : out.data) v = std::max(v, T{0});
    return out;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& in, const Tensor<T>& dout)
{
    require_shape(dout.shape, in.shape, "relu dout");
    Tensor<T> din(in.shape);
    for (std::size_t i = 0; i < in.size(); ++i) din.data[i] = in.data[i] > T{0} ? dout.data[i] : T{0};
    return din;
}

template <typename T>
Tensor<T> dense_forward(const Tensor<T>& in, const Tensor<T>& w, const Tensor<T>& b)
{
    if (in.shape.size() != 1 || w.shape.size() != 2 || w.shape[1] != in.shape[0]) {
        throw Error(ErrorKind::ShapeMismatch, "dense: input " + shape_string(in.shape) +
                                                  ", weights " + shape_string(w.shape));
    }
    const std::size_t m = w.shape[0];
    require_shape(b.shape, {m}, "dense bias");
    const std::size_t n = in.size();
    Tensor<T> out({m});
    for (std::size_t i = 0; i < m; ++i) out.data[i] = b.data[i] + dot(w.data.data() + i * n, in.data.data(), n);
    return out;
}

template <typename T>
Tensor<T> dense_backward(const Tensor<T>& in, const Tensor<T>& w, const Tensor<T>& dout,
                         Tensor<T>& dw, Tensor<T>& db)
{
    const std::size_t m = w.shape.at(0);
    const std::size_t n = in.size();
    require_shape(dout.shape, {m}, "dense dout");
    require_shape(dw.shape, w.shape, "dense dw");
    require_shape(db.shape, {m}, "dense db");
    MatrixMap<T> dwm(dw.data.data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    Eigen::Map<const Eigen::Vector<T, Eigen::Dynamic>> x(in.data.data(), static_cast<Eigen::Index>(n));
    Eigen::Map<const Eigen::Vector<T, Eigen::Dynamic>> g(dout.data.data(), static_cast<Eigen::Index>(m));
    dwm.noalias() += g * x.transpose();
    for (std::size_t i = 0; i < m; ++i) db.data[i] += dout.data[i];

    Tensor<T> din(in.shape);
    T* dx = din.data.data();
    for (std::size_t i = 0; i < m; ++i) {
        const T gi = dout.data[i];
        const T* row = w.data.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) dx[j] += gi * row[j];
    }
    return din;
}

template <typename T>
DropoutResult<T> dropout_forward(const Tensor<T>& in, double rate, Mode mode, Rng& rng)
{
    if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("dropout rate must lie in [0, 1)");
    DropoutResult<T> r{in, {}};
    if (mode == Mode::Eval || rate == 0.0) return r;
    const T scale = static_cast<T>(1.0 / (1.0 - rate));
    r.mask.resize(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
        r.mask[i] = rng.uniform() < rate ? T{0} : scale;
        r.output.data[i] *= r.mask[i];
    }
    return r;
}

template <typename T>
Tensor<T> dropout_backward(const Tensor<T>& dout, std::span<const T> mask)
{
    Tensor<T> din = dout;
    if (mask.empty()) return din;
    if (mask.size() != dout.size()) {
        throw Error(ErrorKind::ShapeMismatch, "dropout backward: mask size mismatch");
    }
    for (std::size_t i = 0; i < din.size(); ++i) din.data[i] *= mask[i];
    return din;
}

template <typename T>
SoftmaxLoss<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const int> labels)
{
    if (logits.shape.size() != 2 || logits.shape[0] != labels.size() || labels.empty()) {
        throw Error(ErrorKind::ShapeMismatch, "softmax_cross_entropy: logits " +
                                                  shape_string(logits.shape) + " vs " +
                                                  std::to_string(labels.size()) + " labels");
    }
    const std::size_t n = logits.shape[0];
    const std::size_t k = logits.shape[1];
    SoftmaxLoss<T> r{0.0, Tensor<T>(logits.shape), Tensor<T>(logits.shape)};
    double total = 0.0;
    for (std::size_t row = 0; row < n; ++row) {
        const int y = labels[row];
        if (y < 0 || static_cast<std::size_t>(y) >= k) throw std::invalid_argument("label out of range");
        const T* z = logits.data.data() + row * k;
        const double zmax = *std::max_element(z, z + k);
        double sum = 0.0;
        for (std::size_t c = 0; c < k; ++c) sum += std::exp(static_cast<double>(z[c]) - zmax);
        const double log_sum = std::log(sum);
        for (std::size_t c = 0; c < k; ++c) {
            const double log_p = static_cast<double>(z[c]) - zmax - log_sum;
            const double p = std::exp(log_p);
            r.probs.data[row * k + c] = static_cast<T>(p);
            r.grad.data[row * k + c] =
                static_cast<T>((p - (static_cast<std::size_t>(y) == c ? 1.0 : 0.0)) / static_cast<double>(n));
            if (static_cast<std::size_t>(y) == c) total -= log_p;
        }
    }
    r.loss = total / static_cast<double>(n);
    return r;
}

#define STOCKCNN_INSTANTIATE_LAYERS(T)                                                             \
    template Tensor<T> conv2d_forward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);    \
    template Tensor<T> conv2d_backward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,    \
                                          Tensor<T>&, Tensor<T>&);                                 \
    template PoolResult<T> maxpool2d_forward<T>(const Tensor<T>&);                                 \
    template Tensor<T> maxpool2d_backward<T>(const Tensor<T>&, std::span<const std::uint32_t>,     \
                                             const Shape&);                                        \
    template Tensor<T> relu_forward<T>(const Tensor<T>&);                                          \
    template Tensor<T> relu_backward<T>(const Tensor<T>&, const Tensor<T>&);                       \
    template Tensor<T> dense_forward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);     \
    template Tensor<T> dense_backward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,     \
                                         Tensor<T>&, Tensor<T>&);                                  \
    template DropoutResult<T> dropout_forward<T>(const Tensor<T>&, double, Mode, Rng&);            \
    template Tensor<T> dropout_backward<T>(const Tensor<T>&, std::span<const T>);                  \
    template SoftmaxLoss<T> softmax_cross_entropy<T>(const Tensor<T>&, std::span<const int>);

STOCKCNN_INSTANTIATE_LAYERS(float)
STOCKCNN_INSTANTIATE_LAYERS(double)

} // namespace stockcnn::nn
