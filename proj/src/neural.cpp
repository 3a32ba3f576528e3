#include "repboot/neural.hpp"

#include <algorithm>
#include <cmath>

#include "repboot/errors.hpp"
#include "repboot/kernels.hpp"

namespace repboot {

namespace {

constexpr double kProbFloor = 1e-12;

void affine(const DenseLayer& layer, const std::vector<double>& input,
            std::vector<double>& output) {
    output.assign(layer.out, 0.0);
    for (int i = 0; i < layer.in; ++i) {
        kernels::axpy(input[i], layer.weights.data() + static_cast<std::size_t>(i) * layer.out,
                      output.data(), layer.out);
    }
    for (int j = 0; j < layer.out; ++j) output[j] += layer.bias[j];
}

void check_input(const NetworkParams& params, const std::vector<double>& input) {
    if (static_cast<int>(input.size()) != params.spec.input_width) {
        throw ConfigError("input width " + std::to_string(input.size()) +
                          " does not match the network (" +
                          std::to_string(params.spec.input_width) + ")");
    }
}

}  // namespace

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<int> default_hidden_widths(int input_width, int lvl_count) {
    int floor_width = std::max(2, 2 * lvl_count);
    if (input_width <= floor_width) return {floor_width};
    std::vector<int> widths;
    double w = input_width;
    // Halve until the floor is reached; at least one hidden layer.
    while (true) {
        w /= 2.0;
        int width = std::max(floor_width, static_cast<int>(std::lround(w)));
        widths.push_back(width);
        if (width <= floor_width || widths.size() >= 4) break;
    }
    return widths;
}

std::size_t NetworkParams::parameter_count() const {
    std::size_t count = 0;
    for (const auto& layer : layers) count += layer.weights.size() + layer.bias.size();
    return count;
}

void NetworkGradients::scale(double factor) {
    for (auto& layer : layers) {
        kernels::scale(factor, layer.weights.data(), layer.weights.size());
        kernels::scale(factor, layer.bias.data(), layer.bias.size());
    }
}

void NetworkGradients::accumulate(const NetworkGradients& other) {
    for (std::size_t l = 0; l < layers.size(); ++l) {
        kernels::axpy(1.0, other.layers[l].weights.data(), layers[l].weights.data(),
                      layers[l].weights.size());
        kernels::axpy(1.0, other.layers[l].bias.data(), layers[l].bias.data(),
                      layers[l].bias.size());
    }
}

NetworkParams init_network(const NetworkSpec& spec, Rng& rng) {
    if (spec.input_width < 1 || spec.output_width < 1) {
        throw ConfigError("network widths must be at least 1");
    }
    for (int h : spec.hidden_widths) {
        if (h < 1) throw ConfigError("hidden widths must be at least 1");
    }
    NetworkParams params;
    params.spec = spec;
    int fan_in = spec.input_width;
    auto add_layer = [&](int out) {
        DenseLayer layer;
        layer.in = fan_in;
        layer.out = out;
        layer.weights.resize(static_cast<std::size_t>(fan_in) * out);
        layer.bias.assign(out, 0.0);
        double limit = std::sqrt(6.0 / (fan_in + out));
        for (auto& w : layer.weights) w = (2.0 * rng.next_double() - 1.0) * limit;
        params.layers.push_back(std::move(layer));
        fan_in = out;
    };
    for (int h : spec.hidden_widths) add_layer(h);
    add_layer(spec.output_width);
    return params;
}

std::vector<double> softmax(const std::vector<double>& logits) {
    double top = kernels::max_value(logits.data(), logits.size());
    std::vector<double> probs(logits.size());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        probs[i] = std::exp(logits[i] - top);
        total += probs[i];
    }
    for (auto& p : probs) p /= total;
    return probs;
}

std::pair<int, double> softmax_confidence(const std::vector<double>& logits) {
    std::vector<double> probs = softmax(logits);
    int best = 0;
    for (std::size_t i = 1; i < probs.size(); ++i) {
        if (probs[i] > probs[best]) best = static_cast<int>(i);
    }
    return {best + 1, probs[best]};
}

ForwardTrace forward_trace(const NetworkParams& params, const std::vector<double>& input) {
    check_input(params, input);
    ForwardTrace trace;
    const std::vector<double>* current = &input;
    for (std::size_t l = 0; l + 1 < params.layers.size(); ++l) {
        std::vector<double> z;
        affine(params.layers[l], *current, z);
        for (auto& x : z) x = sigmoid(x);
        trace.hidden.push_back(std::move(z));
        current = &trace.hidden.back();
    }
    affine(params.layers.back(), *current, trace.logits);
    trace.probabilities = softmax(trace.logits);
    return trace;
}

std::vector<double> forward(const NetworkParams& params, const std::vector<double>& input) {
    return forward_trace(params, input).probabilities;
}

double loss(const NetworkParams& params, const Batch& batch) {
    if (batch.inputs.empty()) throw ConfigError("loss over an empty batch");
    double total = 0.0;
    for (std::size_t s = 0; s < batch.inputs.size(); ++s) {
        std::vector<double> probs = forward(params, batch.inputs[s]);
        int label = batch.labels[s];
        if (label < 1 || label > static_cast<int>(probs.size())) {
            throw DomainError("label out of range in batch");
        }
        double p = std::clamp(probs[label - 1], kProbFloor, 1.0 - kProbFloor);
        total -= std::log(p);
    }
    return total / batch.inputs.size();
}

std::vector<double> softmax_backward(const std::vector<double>& probabilities,
                                     const std::vector<double>& dprob) {
    double weighted = 0.0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        weighted += dprob[i] * probabilities[i];
    }
    std::vector<double> dlogits(probabilities.size());
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        dlogits[i] = probabilities[i] * (dprob[i] - weighted);
    }
    return dlogits;
}

NetworkGradients zero_gradients(const NetworkParams& params) {
    NetworkGradients grads;
    for (const auto& layer : params.layers) {
        DenseLayer g;
        g.in = layer.in;
        g.out = layer.out;
        g.weights.assign(layer.weights.size(), 0.0);
        g.bias.assign(layer.bias.size(), 0.0);
        grads.layers.push_back(std::move(g));
    }
    return grads;
}

std::vector<double> backprop_sample(const NetworkParams& params, const ForwardTrace& trace,
                                    const std::vector<double>& input,
                                    const std::vector<double>& dprob,
                                    NetworkGradients& grads) {
    std::vector<double> delta = softmax_backward(trace.probabilities, dprob);

    // Walk layers backwards; delta holds dLoss/dPreactivation of layer l.
    for (int l = static_cast<int>(params.layers.size()) - 1; l >= 0; --l) {
        const DenseLayer& layer = params.layers[l];
        DenseLayer& grad = grads.layers[l];
        const std::vector<double>& layer_input =
            l == 0 ? input : trace.hidden[static_cast<std::size_t>(l) - 1];

        for (int i = 0; i < layer.in; ++i) {
            kernels::axpy(layer_input[i], delta.data(),
                          grad.weights.data() + static_cast<std::size_t>(i) * layer.out,
                          layer.out);
        }
        kernels::axpy(1.0, delta.data(), grad.bias.data(), layer.out);

        std::vector<double> dinput(layer.in);
        for (int i = 0; i < layer.in; ++i) {
            dinput[i] = kernels::dot(
                layer.weights.data() + static_cast<std::size_t>(i) * layer.out, delta.data(),
                layer.out);
        }
        if (l == 0) return dinput;

        const std::vector<double>& activation = trace.hidden[static_cast<std::size_t>(l) - 1];
        for (int i = 0; i < layer.in; ++i) {
            dinput[i] *= activation[i] * (1.0 - activation[i]);
        }
        delta = std::move(dinput);
    }
    return {};
}

NetworkGradients gradients(const NetworkParams& params, const Batch& batch) {
    if (batch.inputs.empty()) throw ConfigError("gradients over an empty batch");
    NetworkGradients grads = zero_gradients(params);
    const double inv_n = 1.0 / batch.inputs.size();
    std::vector<double> dprob(params.spec.output_width);
    for (std::size_t s = 0; s < batch.inputs.size(); ++s) {
        ForwardTrace trace = forward_trace(params, batch.inputs[s]);
        int label = batch.labels[s];
        std::fill(dprob.begin(), dprob.end(), 0.0);
        double p = trace.probabilities[label - 1];
        if (p > kProbFloor && p < 1.0 - kProbFloor) {
            dprob[label - 1] = -inv_n / p;
        }
        backprop_sample(params, trace, batch.inputs[s], dprob, grads);
    }
    return grads;
}

std::vector<double> train_network(NetworkParams& params, const Batch& data,
                                  const TrainConfig& config) {
    if (data.inputs.empty()) throw ConfigError("cannot train on an empty dataset");
    AdamState state;
    Rng shuffle_rng(config.seed, 0x6e6574);
    std::vector<int> order(data.inputs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    const int batch_size = std::max(1, config.batch_size);

    std::vector<double> trace;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double epoch_loss = 0.0;
        int batches = 0;
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            Batch batch;
            for (std::size_t i = start; i < std::min(order.size(), start + batch_size); ++i) {
                batch.inputs.push_back(data.inputs[order[i]]);
                batch.labels.push_back(data.labels[order[i]]);
            }
            NetworkGradients grads = gradients(params, batch);
            adam_step(params, grads, config, state);
            epoch_loss += loss(params, batch);
            ++batches;
        }
        trace.push_back(batches > 0 ? epoch_loss / batches : 0.0);
    }
    return trace;
}

void adam_step(NetworkParams& params, const NetworkGradients& grads, const TrainConfig& config,
               AdamState& state) {
    std::size_t count = params.parameter_count();
    if (state.m.empty()) {
        state.m.assign(count, 0.0);
        state.v.assign(count, 0.0);
    }
    if (state.m.size() != count) throw ConfigError("optimizer state size mismatch");

    state.step += 1;
    double bias1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
    double bias2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));

    std::size_t offset = 0;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        auto update = [&](std::vector<double>& values, const std::vector<double>& grad) {
            kernels::adam_update(values.data(), state.m.data() + offset,
                                 state.v.data() + offset, grad.data(), values.size(),
                                 config.rate, config.beta1, config.beta2, config.eps, bias1,
                                 bias2);
            offset += values.size();
        };
        update(params.layers[l].weights, grads.layers[l].weights);
        update(params.layers[l].bias, grads.layers[l].bias);
    }
}

}  // namespace repboot
