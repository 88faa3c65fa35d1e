#include <gtest/gtest.h>

#include <cmath>

#include "../common/nn_checks.hpp"
#include "stockcnn/error.hpp"
#include "stockcnn/nn/model.hpp"
#include "stockcnn/nn/optim.hpp"
#include "stockcnn/nn/train.hpp"

using namespace stockcnn;
using namespace stockcnn::nn;
using nn_checks::random_tensor;

TEST(ModelSpec, TrendCnnShapesAndParameterCount)
{
    const ModelSpec spec = ModelSpec::trend_cnn();
    EXPECT_EQ(spec.input, (Shape{3, 96, 96}));
    ASSERT_EQ(spec.layers.size(), 19u);
    const auto shapes = spec.layer_output_shapes();
    EXPECT_EQ(shapes.back(), (Shape{2}));
    // conv 3->32: 896, 32->48: 13872, 48->64: 27712, 64->96: 55392,
    // dense 864->256: 221440, 256->2: 514... at 96x96 the flatten holds 6*6*96 = 3456.
    const std::size_t expected = (3 * 9 * 32 + 32) + (32 * 9 * 48 + 48) + (48 * 9 * 64 + 64) + (64 * 9 * 96 + 96) +
                                 (3456 * 256 + 256) + (256 * 2 + 2);
    EXPECT_EQ(expected, 983378u);
    EXPECT_EQ(spec.param_count(), 983378u);
    EXPECT_TRUE(spec.is_trend_cnn());

    std::vector<std::size_t> conv_widths, dense_widths;
    std::vector<double> rates;
    for (const auto& l : spec.layers) {
        if (l.kind == LayerKind::Conv) conv_widths.push_back(l.units);
        if (l.kind == LayerKind::Dense) dense_widths.push_back(l.units);
        if (l.kind == LayerKind::Dropout) rates.push_back(l.rate);
    }
    EXPECT_EQ(conv_widths, (std::vector<std::size_t>{32, 48, 64, 96}));
    EXPECT_EQ(dense_widths, (std::vector<std::size_t>{256, 2}));
    EXPECT_EQ(rates, (std::vector<double>{0.25, 0.25, 0.5}));
}

TEST(ModelSpec, InvalidStacks)
{
    EXPECT_THROW(ModelSpec::trend_cnn(88, 96).layer_output_shapes(), Error);
    ModelSpec bad{{3, 8, 8}, {LayerSpec::dense(2)}};
    EXPECT_THROW(bad.layer_output_shapes(), Error);
}

TEST(Params, InitIsSeededAndShaped)
{
    const ModelSpec spec = nn_checks::tiny_full_spec();
    const auto a = init_params<float>(spec, 1);
    const auto b = init_params<float>(spec, 1);
    const auto c = init_params<float>(spec, 2);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    const auto shapes = spec.param_shapes();
    ASSERT_EQ(a.tensors.size(), shapes.size());
    for (std::size_t i = 0; i < shapes.size(); ++i) EXPECT_EQ(a.tensors[i].shape, shapes[i]);
    // He-uniform bound for the first conv: sqrt(6 / (3 * 9)).
    const float limit = std::sqrt(6.0f / 27.0f);
    for (float v : a.tensors[0].data) EXPECT_LE(std::abs(v), limit);
    for (float v : a.tensors[1].data) EXPECT_EQ(v, 0.0f);
}

TEST(Network, EvalForwardIsPure)
{
    Network<float> net(ModelSpec::trend_cnn(32, 32), 3);
    Rng rng(1);
    Tensor<float> in({3, 32, 32});
    for (float& v : in.data) v = static_cast<float>(rng.uniform());
    const auto a = net.logits(in);
    const auto b = net.logits(in);
    EXPECT_EQ(a.data, b.data);
    EXPECT_TRUE(a.all_finite());
}

TEST(Network, PredictTieAndArgmax)
{
    // A model whose only layer is Dense-2 on a (1,1,2) input, with identity weights.
    ModelSpec spec{{1, 1, 2}, {LayerSpec::flatten(), LayerSpec::dense(2)}};
    Params<double> p = Params<double>::zeros_like(spec);
    p.tensors[0].data = {1, 0, 0, 1};
    Network<double> net(spec, p);
    const Prediction first = net.predict(Tensor<double>({1, 1, 2}, std::vector<double>{2, -1}));
    EXPECT_EQ(first.label, 0);
    const Prediction second = net.predict(Tensor<double>({1, 1, 2}, std::vector<double>{-1, 2}));
    EXPECT_EQ(second.label, 1);
    EXPECT_NEAR(second.probability[0] + second.probability[1], 1.0, 1e-15);
    const Prediction tie = net.predict(Tensor<double>({1, 1, 2}, std::vector<double>{0.3, 0.3}));
    EXPECT_EQ(tie.label, 0);
    EXPECT_EQ(tie.probability[0], 0.5);
}

TEST(Network, PredictionIgnoresDropoutRate)
{
    ModelSpec a = nn_checks::tiny_full_spec();
    ModelSpec b = a;
    for (auto& l : b.layers) {
        if (l.kind == LayerKind::Dropout) l.rate = 0.9;
    }
    const auto params = init_params<double>(a, 4);
    Rng rng(2);
    const auto in = random_tensor(a.input, rng, 0, 1);
    EXPECT_EQ(Network<double>(a, params).logits(in).data, Network<double>(b, params).logits(in).data);
}

TEST(Network, BackwardWithoutCacheThrows)
{
    Network<double> net(nn_checks::tiny_spec(), 1);
    Grads<double> g = Grads<double>::zeros_like(net.spec());
    try {
        net.backward(ForwardCache<double>{}, Tensor<double>({2}), g);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::MissingCache);
    }
}

TEST(Network, DuplicatedBatchHasSameMeanGradient)
{
    Network<double> net(nn_checks::tiny_spec(), 5);
    Rng rng(5);
    std::vector<Tensor<double>> inputs;
    std::vector<int> labels;
    for (int i = 0; i < 3; ++i) {
        inputs.push_back(random_tensor(net.spec().input, rng, 0, 1));
        labels.push_back(i % 2);
    }
    auto doubled_inputs = inputs;
    doubled_inputs.insert(doubled_inputs.end(), inputs.begin(), inputs.end());
    auto doubled_labels = labels;
    doubled_labels.insert(doubled_labels.end(), labels.begin(), labels.end());
    const auto g1 = net.backward(net.forward_batch(inputs, Mode::Eval, 0), labels);
    const auto g2 = net.backward(net.forward_batch(doubled_inputs, Mode::Eval, 0), doubled_labels);
    for (std::size_t k = 0; k < g1.tensors.size(); ++k)
        for (std::size_t i = 0; i < g1.tensors[k].size(); ++i)
            EXPECT_NEAR(g1.tensors[k][i], g2.tensors[k][i], 1e-12);
}

TEST(Network, ConfidentCorrectLogitsHaveVanishingGradient)
{
    ModelSpec spec{{1, 1, 2}, {LayerSpec::flatten(), LayerSpec::dense(2)}};
    Params<double> p = Params<double>::zeros_like(spec);
    double previous = 1e300;
    for (double scale : {1.0, 5.0, 20.0, 60.0}) {
        p.tensors[0].data = {scale, -scale, -scale, scale};
        Network<double> net(spec, p);
        const std::vector<Tensor<double>> in{Tensor<double>({1, 1, 2}, std::vector<double>{1, 0})};
        const std::vector<int> labels{0};
        const double norm = net.backward(net.forward_batch(in, Mode::Eval, 0), labels).squared_norm();
        EXPECT_LT(norm, previous);
        previous = norm;
    }
    EXPECT_LT(previous, 1e-40);
}

TEST(Optim, SgdArithmeticAndZeroGradient)
{
    ModelSpec spec{{1, 1, 1}, {LayerSpec::flatten(), LayerSpec::dense(1)}};
    Params<double> p = Params<double>::zeros_like(spec);
    p.tensors[0].data = {1.0};
    Grads<double> g = Grads<double>::zeros_like(spec);
    g.tensors[0].data = {0.5};
    sgd_step(p, g, 0.1);
    EXPECT_NEAR(p.tensors[0][0], 0.95, 1e-15);

    const auto before = p;
    sgd_step(p, Grads<double>::zeros_like(spec), 0.1);
    EXPECT_EQ(p, before);
    AdamState<double> state;
    adam_step(p, Grads<double>::zeros_like(spec), state, 0.1);
    EXPECT_EQ(p, before);
    EXPECT_THROW(sgd_step(p, Grads<double>{}, 0.1), Error);
}

TEST(Optim, AdamFirstStepMagnitudeIsRate)
{
    ModelSpec spec{{1, 1, 4}, {LayerSpec::flatten(), LayerSpec::dense(1)}};
    for (double g : {1e-3, 0.5, 40.0}) {
        Params<double> p = Params<double>::zeros_like(spec);
        Grads<double> grads = Grads<double>::zeros_like(spec);
        for (double& v : grads.tensors[0].data) v = g;
        AdamState<double> state;
        adam_step(p, grads, state, 0.01);
        EXPECT_EQ(state.t, 1u);
        // m_hat = g, v_hat = g^2 -> step = rate * g / (|g| + eps).
        for (double v : p.tensors[0].data) EXPECT_NEAR(v, -0.01 * g / (g + 1e-8), 1e-15);
    }
}

namespace {

TensorSource<float> toy_source(std::size_t n, std::size_t side, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<Tensor<float>> inputs;
    std::vector<int> labels;
    for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % 2);
        Tensor<float> t({3, side, side});
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t y = 0; y < side; ++y)
                for (std::size_t x = 0; x < side; ++x) {
                    // Class 1 is brighter on the top half, class 0 on the bottom half.
                    const bool top = y < side / 2;
                    t.at(c, y, x) = static_cast<float>(0.6 * rng.uniform() + ((top == (label == 1)) ? 0.4 : 0.0));
                }
        inputs.push_back(std::move(t));
        labels.push_back(label);
    }
    return {std::move(inputs), std::move(labels)};
}

} // namespace

TEST(Train, ZeroLearningRateLeavesParamsUnchanged)
{
    const ModelSpec spec = ModelSpec::trend_cnn(16, 16);
    const auto data = toy_source(8, 16, 1);
    TrainConfig config;
    config.epochs = 3;
    config.batch_size = 4;
    config.learning_rate = 0.0;
    config.dropout = false;
    const auto initial = init_params<float>(spec, 9);
    const auto r = train(spec, initial, data, config);
    EXPECT_EQ(r.params, initial);
    ASSERT_EQ(r.history.size(), 3u);
    EXPECT_EQ(r.history[0].loss, r.history[1].loss);
    EXPECT_EQ(r.history[1].loss, r.history[2].loss);

    config.optimizer = Optimizer::Sgd;
    EXPECT_EQ(train(spec, initial, data, config).params, initial);
}

TEST(Train, SameSeedGivesIdenticalHistory)
{
    const ModelSpec spec = ModelSpec::trend_cnn(16, 16);
    const auto data = toy_source(12, 16, 2);
    TrainConfig config;
    config.epochs = 3;
    config.batch_size = 5;
    const auto a = train(spec, data, config);
    const auto b = train(spec, data, config);
    EXPECT_EQ(a.history, b.history);
    EXPECT_EQ(a.params, b.params);

    config.threads = 3;
    const auto c = train(spec, data, config);
    const auto d = train(spec, data, config);
    EXPECT_EQ(c.history, d.history);
    EXPECT_EQ(c.params, d.params);
    EXPECT_NEAR(c.history.back().loss, a.history.back().loss, 1e-3);
}

TEST(Train, LearnsSeparableToySet)
{
    const ModelSpec spec = ModelSpec::trend_cnn(16, 16);
    const auto data = toy_source(40, 16, 3);
    TrainConfig config;
    config.epochs = 60;
    config.batch_size = 8;
    config.target_accuracy = 1.0;
    const auto r = train(spec, data, config);
    EXPECT_GE(r.history.back().accuracy, 0.99);
    EXPECT_LT(r.history.size(), 60u);
}

TEST(Train, EmptyAndInvalidInputs)
{
    const ModelSpec spec = ModelSpec::trend_cnn(16, 16);
    const TensorSource<float> empty({}, {});
    try {
        train(spec, empty, TrainConfig{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::EmptyDataset);
    }
    TrainConfig bad;
    bad.batch_size = 0;
    EXPECT_THROW(check_config(bad), std::invalid_argument);
    bad = TrainConfig{};
    bad.epochs = 0;
    EXPECT_THROW(check_config(bad), std::invalid_argument);
}

TEST(Train, DivergenceIsReportedWithEpoch)
{
    const ModelSpec spec = ModelSpec::trend_cnn(16, 16);
    const auto data = toy_source(8, 16, 4);
    TrainConfig config;
    config.epochs = 5;
    config.batch_size = 4;
    config.optimizer = Optimizer::Sgd;
    config.learning_rate = 1e30;
    try {
        train(spec, data, config);
        FAIL() << "expected divergence";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NonFiniteLoss);
        EXPECT_GE(e.detail(), 1);
    }
}
