#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "probpnn/diff/grad_check.hpp"
#include "probpnn/diff/ops.hpp"
#include "probpnn/diff/param_store.hpp"
#include "probpnn/model.hpp"
#include "probpnn/random.hpp"

using namespace probpnn;
using namespace probpnn::diff;

namespace {

Tensor random_tensor(Shape shape, Rng& rng, bool grad = true, double margin = 0.0) {
    std::vector<double> v(shape_size(shape));
    for (auto& x : v) {
        x = rng.uniform(-1.0, 1.0);
        // keep away from kinks by at least `margin`
        if (std::fabs(x) < margin) x = x < 0 ? x - margin : x + margin;
    }
    return Tensor(std::move(shape), std::move(v), grad);
}

Tensor contract(const Tensor& out, const Tensor& coefficients) {
    return mean(square(add(out, coefficients)));
}

}  // namespace

TEST(Tensor, ShapeInvariants) {
    EXPECT_THROW(Tensor({2, 3}, std::vector<double>(5)), ConfigError);
    Tensor t({2, 3}, std::vector<double>(6, 1.0), true);
    EXPECT_EQ(t.size(), 6u);
    EXPECT_EQ(t.grad().size(), t.size());
}

TEST(Conv1d, IdentityKernel) {
    Tensor x({1, 5}, {1, -2, 3, 4, 5});
    Tensor k({1, 1, 3}, {0, 1, 0});
    Tensor b({1}, {0});
    auto y = conv1d(x, k, b);
    EXPECT_EQ(std::vector<double>(y.data().begin(), y.data().end()), (std::vector<double>{1, -2, 3, 4, 5}));
}

TEST(Conv1d, ZeroPaddedBoxKernel) {
    Tensor x({1, 5}, std::vector<double>(5, 1.0));
    Tensor k({1, 1, 3}, {1, 1, 1});
    Tensor b({1}, {0});
    auto y = conv1d(x, k, b);
    EXPECT_EQ(std::vector<double>(y.data().begin(), y.data().end()), (std::vector<double>{2, 3, 3, 3, 2}));
}

TEST(Conv1d, GradientsMatchFiniteDifferences) {
    Rng rng(1);
    auto x = random_tensor({2, 8}, rng);
    auto k = random_tensor({3, 2, 3}, rng);
    auto b = random_tensor({3}, rng);
    auto c = random_tensor({3, 8}, rng, false);
    auto f = [&] { return contract(conv1d(x, k, b), c); };
    EXPECT_LE(grad_check(f, {x, k, b}, 1e-4), 1e-4);
}

TEST(Conv1d, Linearity) {
    Rng rng(2);
    auto k = random_tensor({4, 2, 3}, rng, false);
    auto b = Tensor::zeros({4});
    auto x = random_tensor({2, 10}, rng, false);
    auto y = random_tensor({2, 10}, rng, false);
    const double alpha = 1.7, beta = -0.4;
    std::vector<double> mix(x.size());
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = alpha * x.data()[i] + beta * y.data()[i];
    auto lhs = conv1d(Tensor({2, 10}, mix), k, b);
    auto cx = conv1d(x, k, b), cy = conv1d(y, k, b);
    for (std::size_t i = 0; i < lhs.size(); ++i)
        EXPECT_NEAR(lhs.data()[i], alpha * cx.data()[i] + beta * cy.data()[i], 1e-10);
}

TEST(Conv1d, ShapeMismatch) {
    EXPECT_THROW(conv1d(Tensor::zeros({2, 5}), Tensor::zeros({1, 3, 3}), Tensor::zeros({1})), ConfigError);
    EXPECT_THROW(conv1d(Tensor::zeros({1, 5}), Tensor::zeros({1, 1, 5}), Tensor::zeros({1})), ConfigError);
}

TEST(Dense, IdentityAndBias) {
    Tensor x = Tensor::vector({1, 2, 3});
    Tensor eye({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    auto y = dense(x, eye, Tensor::zeros({3}));
    EXPECT_EQ(std::vector<double>(y.data().begin(), y.data().end()), (std::vector<double>{1, 2, 3}));
    auto z = dense(x, Tensor::zeros({2, 3}), Tensor::vector({4, 5}));
    EXPECT_EQ(std::vector<double>(z.data().begin(), z.data().end()), (std::vector<double>{4, 5}));
    EXPECT_THROW(dense(x, Tensor::zeros({2, 4}), Tensor::zeros({2})), ConfigError);
}

TEST(Dense, GradientsMatchFiniteDifferences) {
    Rng rng(3);
    auto x = random_tensor({4}, rng);
    auto w = random_tensor({3, 4}, rng);
    auto b = random_tensor({3}, rng);
    auto c = random_tensor({3}, rng, false);
    EXPECT_LE(grad_check([&] { return contract(dense(x, w, b), c); }, {x, w, b}, 1e-4), 1e-4);
}

TEST(GradCheck, LinearMapIsExactUpToRounding) {
    Rng rng(4);
    auto x = random_tensor({5}, rng);
    auto w = random_tensor({2, 5}, rng);
    auto b = random_tensor({2}, rng);
    auto f = [&] { return mean(dense(x, w, b)); };
    EXPECT_LE(grad_check(f, {x, w, b}, 1e-4), 1e-7);
}

TEST(Elu, Values) {
    auto y = elu(Tensor::vector({0.0, 2.0, -1.0}));
    EXPECT_EQ(y.data()[0], 0.0);
    EXPECT_EQ(y.data()[1], 2.0);
    EXPECT_NEAR(y.data()[2], std::exp(-1.0) - 1.0, 1e-15);
    EXPECT_NEAR(y.data()[2], -0.6321, 1e-4);
}

TEST(Elu, GradientAwayFromKink) {
    Rng rng(5);
    const double h = 1e-4;
    auto x = random_tensor({12}, rng, true, 10 * h);
    auto c = random_tensor({12}, rng, false);
    EXPECT_LE(grad_check([&] { return contract(elu(x), c); }, {x}, h), 1e-4);
}

TEST(ConcatNewAxis, ShapeAndGradient) {
    Rng rng(6);
    auto a = random_tensor({8}, rng);
    auto b = random_tensor({8}, rng);
    auto y = concat_new_axis(a, b);
    EXPECT_EQ(y.shape(), (Shape{2, 8}));
    a.zero_grad();
    scale(mean(y), 16.0).backward();  // sum of the output
    for (double g : a.grad()) EXPECT_DOUBLE_EQ(g, 1.0);
    auto c = random_tensor({2, 8}, rng, false);
    EXPECT_LE(grad_check([&] { return contract(concat_new_axis(a, b), c); }, {a, b}, 1e-4), 1e-4);
    EXPECT_THROW(concat_new_axis(a, Tensor::zeros({7})), ConfigError);
}

TEST(Flatten, PreservesOrder) {
    Tensor x({2, 3}, {1, 2, 3, 4, 5, 6}, true);
    auto y = flatten(x);
    EXPECT_EQ(y.shape(), (Shape{6}));
    EXPECT_EQ(std::vector<double>(y.data().begin(), y.data().end()), (std::vector<double>{1, 2, 3, 4, 5, 6}));
}

TEST(WeightedSum, SelectorAndConvexity) {
    auto x = Tensor::vector({1, 2, 3});
    auto y = Tensor::vector({-4, 5, 6});
    auto z = Tensor::vector({7, 8, -9});
    auto pick = weighted_sum({x, y, z}, Tensor::vector({1, 0, 0}));
    EXPECT_EQ(std::vector<double>(pick.data().begin(), pick.data().end()), (std::vector<double>{1, 2, 3}));
    auto half = weighted_sum({x, x}, Tensor::vector({0.5, 0.5}));
    EXPECT_EQ(std::vector<double>(half.data().begin(), half.data().end()), (std::vector<double>{1, 2, 3}));
    EXPECT_THROW(weighted_sum({x, Tensor::zeros({2})}, Tensor::vector({1, 1})), ConfigError);
    EXPECT_THROW(weighted_sum({x, y}, Tensor::vector({1, 1, 1})), ConfigError);
}

TEST(WeightedSum, GradientsForWeightsAndInputs) {
    Rng rng(7);
    auto a = random_tensor({6}, rng), b = random_tensor({6}, rng), c = random_tensor({6}, rng);
    auto w = random_tensor({3}, rng);
    auto coef = random_tensor({6}, rng, false);
    EXPECT_LE(grad_check([&] { return contract(weighted_sum({a, b, c}, w), coef); }, {a, b, c, w}, 1e-4), 1e-4);
}

TEST(WeightedSum, ScalesLinearly) {
    auto w = Tensor::vector({0.2, 0.3, 0.5});
    auto a = Tensor::vector({1, 2}), b = Tensor::vector({3, -1}), c = Tensor::vector({0.5, 4});
    const double alpha = -2.5;
    auto base = weighted_sum({a, b, c}, w);
    auto scaled = weighted_sum({scale(a, alpha), scale(b, alpha), scale(c, alpha)}, w);
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(scaled.data()[i], alpha * base.data()[i], 1e-12);
}

TEST(LossOps, AbsSquareSubMeanGradients) {
    Rng rng(8);
    const double h = 1e-5;
    auto a = random_tensor({10}, rng, true, 10 * h);
    auto b = random_tensor({10}, rng);
    EXPECT_LE(grad_check([&] { return mean(abs(a)); }, {a}, h), 1e-4);
    EXPECT_LE(grad_check([&] { return mean(square(sub(a, b))); }, {a, b}, h), 1e-4);
    // subgradient of |x| at 0 is 0
    auto z = Tensor::vector({0.0}, true);
    mean(abs(z)).backward();
    EXPECT_EQ(z.grad()[0], 0.0);
}

TEST(ForwardDeterminism, BitIdenticalRepeats) {
    Rng rng(9);
    auto x = random_tensor({3, 16}, rng, false);
    auto k = random_tensor({4, 3, 3}, rng, false);
    auto b = random_tensor({4}, rng, false);
    auto y1 = elu(conv1d(x, k, b));
    auto y2 = elu(conv1d(x, k, b));
    EXPECT_TRUE(std::equal(y1.data().begin(), y1.data().end(), y2.data().begin()));
}

TEST(Adam, ZeroGradientIsFixedPoint) {
    ParamStore store;
    auto& w = store.add("w", {3}, {1.0, -2.0, 0.5});
    w.grad();  // allocate zeros
    adam_step(store, {});
    EXPECT_EQ(std::vector<double>(w.data().begin(), w.data().end()), (std::vector<double>{1.0, -2.0, 0.5}));
}

TEST(Adam, FirstStepMagnitudeIsLearningRate) {
    ParamStore store;
    auto& w = store.add("w", {1}, {0.0});
    w.grad()[0] = 1.0;
    adam_step(store, {0.1, 0.9, 0.999, 1e-8});
    // m_hat = v_hat = 1 after bias correction
    EXPECT_NEAR(w.data()[0], -0.1, 1e-8);
}

TEST(Adam, MinimisesQuadratic) {
    ParamStore store;
    auto& w = store.add("w", {1}, {1.0});
    for (int i = 0; i < 100; ++i) {
        store.zero_grad();
        mean(square(w)).backward();
        adam_step(store, {0.1, 0.9, 0.999, 1e-8});
    }
    EXPECT_LT(std::fabs(w.data()[0]), 0.1);
}

TEST(Adam, NonFiniteGradientNamesParameter) {
    ParamStore store;
    auto& w = store.add("encoder.bias", {2}, {0.0, 0.0});
    w.grad()[1] = std::nan("");
    try {
        adam_step(store, {});
        FAIL();
    } catch (const InvariantError& e) {
        EXPECT_NE(std::string(e.what()).find("encoder.bias"), std::string::npos);
    }
}

TEST(ParamStore, UniqueNamesAndStateShapes) {
    ParamStore store;
    Rng rng(1);
    store.add_glorot("a", {4, 3}, 3, 4, rng);
    EXPECT_THROW(store.add("a", {1}, {0.0}), ConfigError);
    for (const auto& p : store.parameters()) {
        EXPECT_EQ(p.first_moment.size(), p.value.size());
        EXPECT_EQ(p.second_moment.size(), p.value.size());
    }
    const double limit = std::sqrt(6.0 / 7.0);
    for (double x : store.get("a").data()) EXPECT_LE(std::fabs(x), limit);
}

TEST(Checkpoint, RoundTripsBitExactly) {
    ProbPNNConfig cfg;
    cfg.seed = 3;
    ProbPNNModel a(cfg);
    cfg.seed = 4;
    ProbPNNModel b(cfg);
    const auto path = (std::filesystem::temp_directory_path() / "probpnn_ckpt.json").string();
    save_checkpoint(path, a.params());
    load_checkpoint(path, b.params());
    for (std::size_t i = 0; i < a.params().size(); ++i) {
        const auto& pa = a.params().parameters()[i].value;
        const auto& pb = b.params().parameters()[i].value;
        ASSERT_EQ(pa.shape(), pb.shape());
        EXPECT_TRUE(std::equal(pa.data().begin(), pa.data().end(), pb.data().begin()));
    }
    auto doc = checkpoint_json(a.params());
    EXPECT_EQ(doc["format_version"], kCheckpointFormatVersion);
    doc["parameters"][0]["shape"] = {1};
    EXPECT_THROW(load_checkpoint_json(doc, b.params()), DataError);
}
