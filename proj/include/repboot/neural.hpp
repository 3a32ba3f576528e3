#pragma once

#include <cstdint>
#include <vector>

#include "repboot/rng.hpp"

namespace repboot {

// Feedforward classifier: sigmoid hidden layers, affine output, softmax.
struct NetworkSpec {
    int input_width = 0;
    std::vector<int> hidden_widths;
    int output_width = 0;
};

// Geometric taper from the input width down to 2 * lvl_count.
std::vector<int> default_hidden_widths(int input_width, int lvl_count);

// Row-major in x out weight matrix plus bias.
struct DenseLayer {
    int in = 0;
    int out = 0;
    std::vector<double> weights;  // weights[i*out + j]
    std::vector<double> bias;     // size out
};

struct NetworkParams {
    NetworkSpec spec;
    std::vector<DenseLayer> layers;  // hidden layers then the output layer

    std::size_t parameter_count() const;
    // Visits every parameter in a fixed order (used by the optimizer state,
    // serialization and the finite-difference tests).
    template <typename Fn>
    void for_each_parameter(Fn&& fn) {
        for (auto& layer : layers) {
            for (auto& w : layer.weights) fn(w);
            for (auto& b : layer.bias) fn(b);
        }
    }
};

// Same shapes as the parameters; produced by backprop.
struct NetworkGradients {
    std::vector<DenseLayer> layers;

    void scale(double factor);
    void accumulate(const NetworkGradients& other);
};

struct TrainConfig {
    double rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int batch_size = 32;
    int epochs = 200;
    std::uint64_t seed = 0;
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::int64_t step = 0;
};

struct Batch {
    std::vector<std::vector<double>> inputs;
    std::vector<int> labels;  // 1-based levels
};

// Glorot-uniform weights, zero biases.
NetworkParams init_network(const NetworkSpec& spec, Rng& rng);

// Intermediate activations kept for backprop.
struct ForwardTrace {
    std::vector<std::vector<double>> hidden;  // post-sigmoid per hidden layer
    std::vector<double> logits;               // pre-softmax activations
    std::vector<double> probabilities;
};

ForwardTrace forward_trace(const NetworkParams& params, const std::vector<double>& input);
std::vector<double> forward(const NetworkParams& params, const std::vector<double>& input);

// Mean cross-entropy of the batch; probabilities clamped to
// [1e-12, 1 - 1e-12] before the logarithm.
double loss(const NetworkParams& params, const Batch& batch);

// Analytic gradients of the mean cross-entropy.
NetworkGradients gradients(const NetworkParams& params, const Batch& batch);

// Backprop for one sample given dLoss/dProbabilities, accumulating into
// grads (which must be zero-initialized or hold other samples' sums).
// Returns dLoss/dInput. Used directly by the chained model.
std::vector<double> backprop_sample(const NetworkParams& params, const ForwardTrace& trace,
                                    const std::vector<double>& input,
                                    const std::vector<double>& dprob,
                                    NetworkGradients& grads);

NetworkGradients zero_gradients(const NetworkParams& params);

// One bias-corrected Adam update. The state's moment vectors are laid out in
// for_each_parameter order and are created lazily on the first call.
void adam_step(NetworkParams& params, const NetworkGradients& grads, const TrainConfig& config,
               AdamState& state);

// Mini-batch Adam training of one network on a fixed dataset; sample order
// is reshuffled per epoch from the config seed. Returns mean loss per epoch.
std::vector<double> train_network(NetworkParams& params, const Batch& data,
                                  const TrainConfig& config);

// dLoss/dLogits given dLoss/dProbabilities through a softmax.
std::vector<double> softmax_backward(const std::vector<double>& probabilities,
                                     const std::vector<double>& dprob);

std::vector<double> softmax(const std::vector<double>& logits);

// Winning class (1-based, first maximum) and its softmax probability.
std::pair<int, double> softmax_confidence(const std::vector<double>& logits);

double sigmoid(double x);

}  // namespace repboot
