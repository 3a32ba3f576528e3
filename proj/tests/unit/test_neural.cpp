#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "repboot/errors.hpp"
#include "repboot/neural.hpp"

using namespace repboot;

namespace {

std::vector<double*> parameter_pointers(NetworkParams& params) {
    std::vector<double*> pointers;
    params.for_each_parameter([&](double& value) { pointers.push_back(&value); });
    return pointers;
}

std::vector<double> flatten(const NetworkGradients& grads) {
    std::vector<double> flat;
    for (const auto& layer : grads.layers) {
        flat.insert(flat.end(), layer.weights.begin(), layer.weights.end());
        flat.insert(flat.end(), layer.bias.begin(), layer.bias.end());
    }
    return flat;
}

// Straight-line re-evaluation of the layer equations, kept deliberately
// separate from the library's forward pass.
std::vector<double> oracle_forward(const NetworkParams& params, std::vector<double> x) {
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const DenseLayer& layer = params.layers[l];
        std::vector<double> z(layer.out, 0.0);
        for (int j = 0; j < layer.out; ++j) {
            for (int i = 0; i < layer.in; ++i) z[j] += x[i] * layer.weights[i * layer.out + j];
            z[j] += layer.bias[j];
        }
        if (l + 1 < params.layers.size()) {
            for (double& v : z) v = 1.0 / (1.0 + std::exp(-v));
        }
        x = std::move(z);
    }
    double top = x[0];
    for (double v : x) top = std::max(top, v);
    double total = 0.0;
    for (double& v : x) {
        v = std::exp(v - top);
        total += v;
    }
    for (double& v : x) v /= total;
    return x;
}

}  // namespace

TEST_CASE("sigmoid and softmax fixed points") {
    CHECK(sigmoid(0.0) == doctest::Approx(0.5));
    std::vector<double> probs = softmax({0.0, 0.0, 0.0});
    for (double p : probs) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("forward with zero parameters is uniform") {
    NetworkSpec spec{4, {3}, 3};
    Rng rng(1);
    NetworkParams params = init_network(spec, rng);
    for (auto& layer : params.layers) {
        std::fill(layer.weights.begin(), layer.weights.end(), 0.0);
        std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
    }
    std::vector<double> probs = forward(params, {0.3, -2.0, 5.0, 0.0});
    for (double p : probs) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("forward matches a straight-line oracle to 1e-12") {
    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        int input = 2 + static_cast<int>(rng.below(6));
        int hidden = 2 + static_cast<int>(rng.below(5));
        int output = 2 + static_cast<int>(rng.below(4));
        NetworkSpec spec{input, {hidden, hidden}, output};
        Rng init_rng(100 + trial);
        NetworkParams params = init_network(spec, init_rng);
        std::vector<double> x(input);
        for (double& v : x) v = 2.0 * rng.next_double() - 1.0;

        std::vector<double> got = forward(params, x);
        std::vector<double> expected = oracle_forward(params, x);
        double total = 0.0;
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(std::abs(got[i] - expected[i]) < 1e-12);
            CHECK(got[i] >= 0.0);
            total += got[i];
        }
        CHECK(std::abs(total - 1.0) < 1e-9);
    }
}

TEST_CASE("forward is bitwise deterministic") {
    NetworkSpec spec{5, {4}, 3};
    Rng rng(9);
    NetworkParams params = init_network(spec, rng);
    std::vector<double> x = {0.1, 0.2, 0.3, 0.4, 0.5};
    std::vector<double> a = forward(params, x);
    std::vector<double> b = forward(params, x);
    CHECK(a == b);
}

TEST_CASE("loss on exact and uniform predictions") {
    NetworkSpec spec{2, {2}, 4};
    Rng rng(3);
    NetworkParams params = init_network(spec, rng);
    for (auto& layer : params.layers) {
        std::fill(layer.weights.begin(), layer.weights.end(), 0.0);
        std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
    }
    Batch batch;
    batch.inputs = {{0.0, 0.0}};
    batch.labels = {2};
    // Uniform over 4 classes.
    CHECK(loss(params, batch) == doctest::Approx(std::log(4.0)).epsilon(1e-12));

    // Saturate the output toward class 1 via a large bias.
    params.layers.back().bias = {60.0, 0.0, 0.0, 0.0};
    Batch hit;
    hit.inputs = {{0.0, 0.0}};
    hit.labels = {1};
    CHECK(loss(params, hit) <= 1e-11);
}

TEST_CASE("loss matches direct evaluation on random batches") {
    Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        NetworkSpec spec{3, {4}, 3};
        Rng init_rng(500 + trial);
        NetworkParams params = init_network(spec, init_rng);
        Batch batch;
        for (int s = 0; s < 6; ++s) {
            std::vector<double> x(3);
            for (double& v : x) v = rng.next_double();
            batch.inputs.push_back(x);
            batch.labels.push_back(1 + static_cast<int>(rng.below(3)));
        }
        double expected = 0.0;
        for (std::size_t s = 0; s < batch.inputs.size(); ++s) {
            std::vector<double> probs = oracle_forward(params, batch.inputs[s]);
            expected -= std::log(probs[batch.labels[s] - 1]);
        }
        expected /= batch.inputs.size();
        CHECK(loss(params, batch) == doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("duplicating a sample does not change the mean gradient") {
    NetworkSpec spec{3, {3}, 2};
    Rng rng(23);
    NetworkParams params = init_network(spec, rng);
    Batch once;
    once.inputs = {{0.1, 0.4, 0.9}};
    once.labels = {2};
    Batch twice;
    twice.inputs = {{0.1, 0.4, 0.9}, {0.1, 0.4, 0.9}};
    twice.labels = {2, 2};
    std::vector<double> a = flatten(gradients(params, once));
    std::vector<double> b = flatten(gradients(params, twice));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
    }
}

TEST_CASE("analytic gradients match central finite differences") {
    Rng rng(31);
    for (int trial = 0; trial < 25; ++trial) {
        int input = 2 + static_cast<int>(rng.below(5));
        int hidden = 2 + static_cast<int>(rng.below(6));
        int output = 2 + static_cast<int>(rng.below(4));
        NetworkSpec spec{input, {hidden}, output};
        Rng init_rng(900 + trial);
        NetworkParams params = init_network(spec, init_rng);
        REQUIRE(params.parameter_count() <= 500);

        Batch batch;
        int n = 1 + static_cast<int>(rng.below(5));
        for (int s = 0; s < n; ++s) {
            std::vector<double> x(input);
            for (double& v : x) v = 2.0 * rng.next_double() - 1.0;
            batch.inputs.push_back(x);
            batch.labels.push_back(1 + static_cast<int>(rng.below(output)));
        }

        std::vector<double> analytic = flatten(gradients(params, batch));
        std::vector<double*> pointers = parameter_pointers(params);
        double err = oracle::max_gradient_error(
            pointers, [&] { return loss(params, batch); }, analytic);
        CHECK(err <= 1e-4);
    }
}

TEST_CASE("gradient of hidden biases at a zero-input zero-weight point") {
    // With zero weights and zero inputs every sigmoid sits at 1/2 and the
    // output is uniform; only the output bias should carry gradient.
    NetworkSpec spec{2, {3}, 2};
    Rng rng(77);
    NetworkParams params = init_network(spec, rng);
    for (auto& layer : params.layers) {
        std::fill(layer.weights.begin(), layer.weights.end(), 0.0);
        std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
    }
    Batch batch;
    batch.inputs = {{0.0, 0.0}};
    batch.labels = {1};
    NetworkGradients grads = gradients(params, batch);
    for (double g : grads.layers[0].bias) CHECK(g == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(grads.layers[1].bias[0] == doctest::Approx(0.5 - 1.0));
    CHECK(grads.layers[1].bias[1] == doctest::Approx(0.5));

    std::vector<double> analytic = flatten(grads);
    std::vector<double*> pointers = parameter_pointers(params);
    double err = oracle::max_gradient_error(
        pointers, [&] { return loss(params, batch); }, analytic);
    CHECK(err <= 1e-4);
}

TEST_CASE("adam leaves parameters alone on a zero gradient") {
    NetworkSpec spec{2, {2}, 2};
    Rng rng(5);
    NetworkParams params = init_network(spec, rng);
    NetworkParams before = params;
    NetworkGradients zero = zero_gradients(params);
    AdamState state;
    TrainConfig config;
    adam_step(params, zero, config, state);
    std::size_t index = 0;
    std::vector<double> before_values;
    before.for_each_parameter([&](double& v) { before_values.push_back(v); });
    params.for_each_parameter([&](double& v) { CHECK(v == before_values[index++]); });
}

TEST_CASE("the first adam step moves by about rate times sign") {
    NetworkSpec spec{1, {}, 2};
    Rng rng(6);
    NetworkParams params = init_network(spec, rng);
    NetworkParams before = params;
    NetworkGradients grads = zero_gradients(params);
    grads.layers[0].weights = {3.7, -0.002};
    grads.layers[0].bias = {0.5, -42.0};
    AdamState state;
    TrainConfig config;
    config.rate = 1e-3;
    adam_step(params, grads, config, state);
    CHECK(params.layers[0].weights[0] ==
          doctest::Approx(before.layers[0].weights[0] - config.rate).epsilon(1e-6));
    CHECK(params.layers[0].weights[1] ==
          doctest::Approx(before.layers[0].weights[1] + config.rate).epsilon(1e-6));
    CHECK(params.layers[0].bias[1] ==
          doctest::Approx(before.layers[0].bias[1] + config.rate).epsilon(1e-6));
}

TEST_CASE("three adam steps on a scalar quadratic match a hand-rolled trace") {
    // Minimize p^2 from p=1: the parameter is the single output bias of a
    // degenerate network, stepped manually against the update equations.
    double p = 1.0, m = 0.0, v = 0.0;
    const double rate = 1e-3, b1 = 0.9, b2 = 0.999, eps = 1e-8;

    NetworkSpec spec{1, {}, 1};
    Rng rng(2);
    NetworkParams params = init_network(spec, rng);
    params.layers[0].weights = {0.0};
    params.layers[0].bias = {1.0};
    AdamState state;
    TrainConfig config;

    for (int t = 1; t <= 3; ++t) {
        double g = 2.0 * params.layers[0].bias[0];
        NetworkGradients grads = zero_gradients(params);
        grads.layers[0].bias = {g};
        adam_step(params, grads, config, state);

        double go = 2.0 * p;
        m = b1 * m + (1 - b1) * go;
        v = b2 * v + (1 - b2) * go * go;
        double mh = m / (1 - std::pow(b1, t));
        double vh = v / (1 - std::pow(b2, t));
        p -= rate * mh / (std::sqrt(vh) + eps);
        CHECK(params.layers[0].bias[0] == doctest::Approx(p).epsilon(1e-12));
    }
    CHECK(p == doctest::Approx(0.9970000960651408).epsilon(1e-12));
}

TEST_CASE("training drives the loss down on a separable toy problem") {
    NetworkSpec spec{2, {4}, 2};
    Rng rng(11);
    NetworkParams params = init_network(spec, rng);
    Batch data;
    Rng sample_rng(13);
    for (int s = 0; s < 40; ++s) {
        double x = 2.0 * sample_rng.next_double() - 1.0;
        double y = 2.0 * sample_rng.next_double() - 1.0;
        data.inputs.push_back({x, y});
        data.labels.push_back(x + y > 0 ? 1 : 2);
    }
    TrainConfig config;
    config.epochs = 200;
    config.rate = 0.05;
    config.batch_size = 40;
    config.seed = 7;
    std::vector<double> trace = train_network(params, data, config);
    REQUIRE(trace.size() == 200);
    CHECK(trace.back() < 0.1);
    CHECK(trace.back() < trace.front());
}

TEST_CASE("softmax confidence extracts the winning class and its probability") {
    auto [level, bp] = softmax_confidence({0.9, 0.05, 0.05});
    CHECK(level == 1);
    CHECK(bp == doctest::Approx(0.5391330059236561).epsilon(1e-12));

    auto [level_a, bp_a] = softmax_confidence({0.4, 0.3, 0.3});
    CHECK(level_a == 1);
    CHECK(bp_a == doctest::Approx(0.3559130712072203).epsilon(1e-12));
    CHECK(bp_a < bp);  // same winner, flatter activations, lower confidence

    auto [level_u, bp_u] = softmax_confidence({0.7, 0.7, 0.7, 0.7});
    CHECK(level_u == 1);
    CHECK(bp_u == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("shape violations are rejected") {
    NetworkSpec spec{3, {2}, 2};
    Rng rng(1);
    NetworkParams params = init_network(spec, rng);
    CHECK_THROWS_AS(forward(params, {0.1, 0.2}), ConfigError);
    CHECK_THROWS_AS(loss(params, Batch{}), ConfigError);
    CHECK_THROWS_AS(init_network(NetworkSpec{0, {}, 2}, rng), ConfigError);
}
