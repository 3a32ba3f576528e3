#include "repboot/fdnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "repboot/errors.hpp"

namespace repboot {

namespace {

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(h));
    return buffer;
}

}  // namespace

std::vector<int> role_assignment(const CompositionTopology& topology) {
    const int n = static_cast<int>(topology.services.size());
    std::vector<int> depths = dependency_depths(topology);
    std::vector<int> out_deg(n, 0);
    std::vector<int> in_deg(n, 0);
    for (const auto& [from, to] : topology.edges) {
        out_deg[topology.index_of_service(from)]++;
        in_deg[topology.index_of_service(to)]++;
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (depths[a] != depths[b]) return depths[a] > depths[b];
        if (out_deg[a] != out_deg[b]) return out_deg[a] > out_deg[b];
        if (in_deg[a] != in_deg[b]) return in_deg[a] > in_deg[b];
        return topology.services[a].service_id < topology.services[b].service_id;
    });
    std::vector<int> role(n);
    for (int rank = 0; rank < n; ++rank) role[order[rank]] = rank;
    return role;
}

CanonicalTopology canonicalize_topology(const CompositionTopology& topology) {
    CanonicalTopology canon;
    canon.pattern = topology.pattern;
    canon.m = static_cast<int>(topology.services.size());

    std::vector<int> role = role_assignment(topology);
    std::vector<int> depths = dependency_depths(topology);
    canon.depths.resize(canon.m);
    for (int i = 0; i < canon.m; ++i) canon.depths[role[i]] = depths[i];

    for (const auto& [from, to] : topology.edges) {
        canon.edges.emplace_back(role[topology.index_of_service(from)],
                                 role[topology.index_of_service(to)]);
    }
    std::sort(canon.edges.begin(), canon.edges.end());

    std::string text = std::string(pattern_name(canon.pattern)) + "|" +
                       std::to_string(canon.m) + "|";
    for (const auto& [a, b] : canon.edges) {
        text += std::to_string(a) + ">" + std::to_string(b) + ",";
    }
    canon.hash = fnv1a_hex(text);
    return canon;
}

int ChainBlock::input_width() const {
    int width = 0;
    for (const auto& slot : slots) width += slot.width;
    return width;
}

std::size_t ChainedFdnn::parameter_count() const {
    std::size_t count = 0;
    for (const auto& block : blocks) count += block.net.parameter_count();
    return count;
}

std::vector<int> select_top_k_trees(const OobReport& report, int k) {
    std::vector<int> eligible;
    for (std::size_t t = 0; t < report.per_tree.size(); ++t) {
        if (report.per_tree[t] >= 0.0) eligible.push_back(static_cast<int>(t));
    }
    if (eligible.empty()) {
        // No tree has an out-of-bag set; fall back to index order.
        eligible.resize(report.per_tree.size());
        std::iota(eligible.begin(), eligible.end(), 0);
    }
    std::stable_sort(eligible.begin(), eligible.end(), [&](int a, int b) {
        double ea = report.per_tree[a] < 0 ? 1.0 : report.per_tree[a];
        double eb = report.per_tree[b] < 0 ? 1.0 : report.per_tree[b];
        if (ea != eb) return ea < eb;
        return a < b;
    });
    if (k < 1) throw ConfigError("top-k tree count must be >= 1");
    if (static_cast<int>(eligible.size()) > k) eligible.resize(k);
    std::sort(eligible.begin(), eligible.end());
    return eligible;
}

std::vector<double> forest_matrix(const RoleForest& role_forest, ForestEncoding encoding,
                                  int lvl_count, const ServiceRecord& record) {
    std::vector<FeatureCell> row = encode_service_row(role_forest.forest.space, record);
    std::vector<double> values;
    if (encoding == ForestEncoding::ScalarLevel) {
        values.reserve(role_forest.selected_trees.size());
        for (int t : role_forest.selected_trees) {
            int level = role_forest.forest.trees[t].predict(row.data());
            values.push_back(static_cast<double>(level - 1) / (lvl_count - 1));
        }
    } else {
        values.assign(role_forest.selected_trees.size() * lvl_count, 0.0);
        for (std::size_t i = 0; i < role_forest.selected_trees.size(); ++i) {
            int level = role_forest.forest.trees[role_forest.selected_trees[i]].predict(row.data());
            values[i * lvl_count + (level - 1)] = 1.0;
        }
    }
    return values;
}

std::vector<double> raw_feature_vector(const IndicatorSchema& schema,
                                       const ServiceRecord& record) {
    std::vector<double> values(schema.size() * 2, 0.0);
    for (std::size_t i = 0; i < schema.indicators().size(); ++i) {
        auto it = record.indicators.find(schema.indicators()[i]);
        if (it != record.indicators.end()) {
            values[2 * i] = 1.0;
            values[2 * i + 1] = it->second.rating;
        }
    }
    return values;
}

ChainedFdnn build_chain(const CompositionTopology& topology,
                        std::vector<RoleForest> role_forests, const IndicatorSchema& schema,
                        int lvl_count, const ChainConfig& config) {
    validate_topology(topology);

    ChainedFdnn chain;
    chain.canon = canonicalize_topology(topology);
    chain.lvl_count = lvl_count;
    chain.top_k = config.top_k;
    chain.encoding = config.encoding;
    chain.input_kind = config.input_kind;
    chain.schema = schema;
    chain.forests = std::move(role_forests);

    if (chain.input_kind == ServiceInputKind::ForestMatrix &&
        static_cast<int>(chain.forests.size()) != chain.canon.m) {
        throw ConfigError("expected one trained forest per service role");
    }

    auto service_width = [&](int role) {
        if (chain.input_kind == ServiceInputKind::RawFeatures) {
            return static_cast<int>(schema.size()) * 2;
        }
        int k = static_cast<int>(chain.forests[role].selected_trees.size());
        return chain.encoding == ForestEncoding::ScalarLevel ? k : k * lvl_count;
    };

    // Edges in descending invoker depth; canonical edges are sorted by role
    // and roles are ranked by depth, so the sorted order already works.
    std::vector<int> block_for_role(chain.canon.m, -1);
    auto signal_slot = [&](int role) {
        InputSlot slot;
        if (block_for_role[role] >= 0) {
            slot.source = InputSlot::Source::Block;
            slot.block = block_for_role[role];
            slot.width = lvl_count;
        } else {
            slot.source = InputSlot::Source::Service;
            slot.role = role;
            slot.width = service_width(role);
        }
        return slot;
    };

    std::vector<int> block_role;  // invoked role each block was opened for
    for (const auto& [invoker, invoked] : chain.canon.edges) {
        if (block_for_role[invoked] < 0) {
            ChainBlock block;
            block.slots.push_back(signal_slot(invoker));
            InputSlot own;
            own.source = InputSlot::Source::Service;
            own.role = invoked;
            own.width = service_width(invoked);
            block.slots.push_back(own);
            chain.blocks.push_back(std::move(block));
            block_role.push_back(invoked);
            block_for_role[invoked] = static_cast<int>(chain.blocks.size()) - 1;
        } else {
            chain.blocks[block_for_role[invoked]].slots.push_back(signal_slot(invoker));
        }
    }

    // A block for role j only consumes blocks of strictly deeper roles, so
    // ordering by depth (descending) topologically sorts the graph. Creation
    // order is not enough: a shallow invoker can wire a late-created block
    // into an early one.
    if (!chain.blocks.empty()) {
        std::vector<int> order(chain.blocks.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            int da = chain.canon.depths[block_role[a]];
            int db = chain.canon.depths[block_role[b]];
            if (da != db) return da > db;
            return block_role[a] < block_role[b];
        });
        std::vector<int> new_index(chain.blocks.size());
        std::vector<ChainBlock> reordered;
        reordered.reserve(chain.blocks.size());
        for (std::size_t pos = 0; pos < order.size(); ++pos) {
            new_index[order[pos]] = static_cast<int>(pos);
        }
        for (int old : order) reordered.push_back(std::move(chain.blocks[old]));
        for (auto& block : reordered) {
            for (auto& slot : block.slots) {
                if (slot.source == InputSlot::Source::Block) {
                    slot.block = new_index[slot.block];
                }
            }
        }
        chain.blocks = std::move(reordered);
    }

    if (chain.blocks.empty()) {
        // Single service, no edges: one degenerate block over its own input.
        ChainBlock block;
        InputSlot own;
        own.source = InputSlot::Source::Service;
        own.role = 0;
        own.width = service_width(0);
        block.slots.push_back(own);
        chain.blocks.push_back(std::move(block));
    }

    // Merge multiple terminal blocks under one sink.
    std::vector<bool> consumed(chain.blocks.size(), false);
    for (const auto& block : chain.blocks) {
        for (const auto& slot : block.slots) {
            if (slot.source == InputSlot::Source::Block) consumed[slot.block] = true;
        }
    }
    std::vector<int> terminals;
    for (std::size_t b = 0; b < chain.blocks.size(); ++b) {
        if (!consumed[b]) terminals.push_back(static_cast<int>(b));
    }
    if (terminals.size() > 1) {
        ChainBlock merge;
        for (int t : terminals) {
            InputSlot slot;
            slot.source = InputSlot::Source::Block;
            slot.block = t;
            slot.width = lvl_count;
            merge.slots.push_back(slot);
        }
        chain.blocks.push_back(std::move(merge));
    }
    chain.sink = static_cast<int>(chain.blocks.size()) - 1;

    Rng rng(config.net_seed, 0x666e6e);
    for (std::size_t b = 0; b < chain.blocks.size(); ++b) {
        ChainBlock& block = chain.blocks[b];
        NetworkSpec spec;
        spec.input_width = block.input_width();
        spec.hidden_widths = config.hidden_widths.empty()
                                 ? default_hidden_widths(spec.input_width, lvl_count)
                                 : config.hidden_widths;
        spec.output_width = lvl_count;
        Rng block_rng = rng.substream(b);
        block.net = init_network(spec, block_rng);
    }
    return chain;
}

std::vector<std::vector<double>> ChainedFdnn::encode_roles(
    const CompositionTopology& topology) const {
    CanonicalTopology sample_canon = canonicalize_topology(topology);
    if (sample_canon.hash != canon.hash) {
        throw ConfigError("sample topology (hash " + sample_canon.hash +
                          ") does not match the trained chain (hash " + canon.hash + ")");
    }
    std::vector<int> role = role_assignment(topology);
    std::vector<std::vector<double>> inputs(canon.m);
    for (int i = 0; i < canon.m; ++i) {
        const ServiceRecord& record = topology.services[i];
        if (input_kind == ServiceInputKind::RawFeatures) {
            inputs[role[i]] = raw_feature_vector(schema, record);
        } else {
            inputs[role[i]] = forest_matrix(forests[role[i]], encoding, lvl_count, record);
        }
    }
    return inputs;
}

ChainSample make_chain_sample(const ChainedFdnn& chain, const CompositionSample& sample) {
    if (!sample.observed_level) throw ConfigError("training sample without observed_level");
    ChainSample out;
    out.role_inputs = chain.encode_roles(sample.topology);
    out.label = *sample.observed_level;
    return out;
}

namespace {

std::vector<double> assemble_input(const ChainBlock& block,
                                   const std::vector<std::vector<double>>& role_inputs,
                                   const std::vector<ForwardTrace>& done_blocks) {
    std::vector<double> input;
    input.reserve(block.input_width());
    for (const auto& slot : block.slots) {
        const std::vector<double>& values = slot.source == InputSlot::Source::Service
                                                ? role_inputs[slot.role]
                                                : done_blocks[slot.block].probabilities;
        if (static_cast<int>(values.size()) != slot.width) {
            throw ConfigError("slot width mismatch while assembling a block input");
        }
        input.insert(input.end(), values.begin(), values.end());
    }
    return input;
}

}  // namespace

ChainForwardTrace chain_forward(const ChainedFdnn& chain,
                                const std::vector<std::vector<double>>& role_inputs) {
    ChainForwardTrace trace;
    trace.blocks.reserve(chain.blocks.size());
    trace.inputs.reserve(chain.blocks.size());
    for (const auto& block : chain.blocks) {
        trace.inputs.push_back(assemble_input(block, role_inputs, trace.blocks));
        trace.blocks.push_back(forward_trace(block.net, trace.inputs.back()));
    }
    return trace;
}

double chain_loss(const ChainedFdnn& chain, const std::vector<ChainSample>& samples) {
    if (samples.empty()) throw ConfigError("loss over an empty sample set");
    constexpr double kFloor = 1e-12;
    double total = 0.0;
    for (const auto& sample : samples) {
        ChainForwardTrace trace = chain_forward(chain, sample.role_inputs);
        double p = trace.blocks[chain.sink].probabilities[sample.label - 1];
        total -= std::log(std::clamp(p, kFloor, 1.0 - kFloor));
    }
    return total / samples.size();
}

namespace {

void accumulate_chain_gradients(const ChainedFdnn& chain, const ChainSample& sample,
                                double inv_n, std::vector<NetworkGradients>& grads) {
    ChainForwardTrace trace = chain_forward(chain, sample.role_inputs);

    std::vector<std::vector<double>> dprob(chain.blocks.size());
    for (std::size_t b = 0; b < chain.blocks.size(); ++b) {
        dprob[b].assign(chain.lvl_count, 0.0);
    }
    {
        constexpr double kFloor = 1e-12;
        double p = trace.blocks[chain.sink].probabilities[sample.label - 1];
        if (p > kFloor && p < 1.0 - kFloor) {
            dprob[chain.sink][sample.label - 1] = -inv_n / p;
        }
    }

    for (int b = static_cast<int>(chain.blocks.size()) - 1; b >= 0; --b) {
        const ChainBlock& block = chain.blocks[b];
        std::vector<double> dinput = backprop_sample(block.net, trace.blocks[b],
                                                     trace.inputs[b], dprob[b], grads[b]);
        std::size_t offset = 0;
        for (const auto& slot : block.slots) {
            if (slot.source == InputSlot::Source::Block) {
                for (int i = 0; i < slot.width; ++i) {
                    dprob[slot.block][i] += dinput[offset + i];
                }
            }
            offset += slot.width;
        }
    }
}

}  // namespace

std::vector<NetworkGradients> chain_gradients(const ChainedFdnn& chain,
                                              const std::vector<ChainSample>& samples) {
    if (samples.empty()) throw ConfigError("gradients over an empty sample set");
    std::vector<NetworkGradients> grads;
    grads.reserve(chain.blocks.size());
    for (const auto& block : chain.blocks) grads.push_back(zero_gradients(block.net));
    const double inv_n = 1.0 / samples.size();
    for (const auto& sample : samples) {
        accumulate_chain_gradients(chain, sample, inv_n, grads);
    }
    return grads;
}

namespace {

std::vector<double> train_chain_end_to_end(ChainedFdnn& chain,
                                           const std::vector<ChainSample>& samples,
                                           const TrainConfig& config) {
    std::vector<AdamState> states(chain.blocks.size());
    std::vector<double> trace;
    Rng shuffle_rng(config.seed, 0x657065);

    std::vector<int> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    const int batch_size = std::max(1, config.batch_size);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double epoch_loss = 0.0;
        int batches = 0;
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            std::vector<ChainSample> batch;
            for (std::size_t i = start; i < std::min(order.size(), start + batch_size); ++i) {
                batch.push_back(samples[order[i]]);
            }
            std::vector<NetworkGradients> grads = chain_gradients(chain, batch);
            for (std::size_t b = 0; b < chain.blocks.size(); ++b) {
                adam_step(chain.blocks[b].net, grads[b], config, states[b]);
            }
            epoch_loss += chain_loss(chain, batch);
            ++batches;
        }
        trace.push_back(batches > 0 ? epoch_loss / batches : 0.0);
    }
    return trace;
}

std::vector<double> train_chain_stage_wise(ChainedFdnn& chain,
                                           const std::vector<ChainSample>& samples,
                                           const TrainConfig& config) {
    // Outputs of already-trained blocks, per sample.
    std::vector<std::vector<ForwardTrace>> done(samples.size());
    for (auto& d : done) d.reserve(chain.blocks.size());

    std::vector<double> trace;
    for (std::size_t b = 0; b < chain.blocks.size(); ++b) {
        Batch batch;
        for (std::size_t s = 0; s < samples.size(); ++s) {
            batch.inputs.push_back(
                assemble_input(chain.blocks[b], samples[s].role_inputs, done[s]));
            batch.labels.push_back(samples[s].label);
        }
        TrainConfig block_config = config;
        block_config.seed = config.seed + b;
        std::vector<double> block_trace =
            train_network(chain.blocks[b].net, batch, block_config);
        if (b + 1 == chain.blocks.size()) trace = std::move(block_trace);
        for (std::size_t s = 0; s < samples.size(); ++s) {
            done[s].push_back(forward_trace(chain.blocks[b].net, batch.inputs[s]));
        }
    }
    return trace;
}

}  // namespace

std::vector<double> train_chain(ChainedFdnn& chain, const std::vector<ChainSample>& samples,
                                const TrainConfig& config, TrainMode mode) {
    if (samples.empty()) throw ConfigError("cannot train a chain without samples");
    for (const auto& sample : samples) {
        if (static_cast<int>(sample.role_inputs.size()) != chain.canon.m) {
            throw ConfigError("chain sample does not match the chain's role count");
        }
        if (sample.label < 1 || sample.label > chain.lvl_count) {
            throw ConfigError("chain sample label out of range");
        }
    }
    std::vector<double> trace = mode == TrainMode::EndToEnd
                                    ? train_chain_end_to_end(chain, samples, config)
                                    : train_chain_stage_wise(chain, samples, config);
    chain.train_info.seed = config.seed;
    chain.train_info.epochs = config.epochs;
    chain.train_info.final_loss = trace.empty() ? chain_loss(chain, samples) : trace.back();
    chain.train_info.training_accuracy = chain_accuracy(chain, samples);
    return trace;
}

ChainPrediction chain_predict(const ChainedFdnn& chain,
                              const std::vector<std::vector<double>>& role_inputs) {
    ChainForwardTrace trace = chain_forward(chain, role_inputs);
    auto [level, bp] = softmax_confidence(trace.blocks[chain.sink].logits);
    return {level, bp};
}

ChainPrediction chain_predict_sample(const ChainedFdnn& chain,
                                     const CompositionSample& sample) {
    return chain_predict(chain, chain.encode_roles(sample.topology));
}

double chain_accuracy(const ChainedFdnn& chain, const std::vector<ChainSample>& samples) {
    if (samples.empty()) throw DomainError("accuracy over an empty sample set");
    int correct = 0;
    for (const auto& sample : samples) {
        if (chain_predict(chain, sample.role_inputs).level == sample.label) ++correct;
    }
    return static_cast<double>(correct) / samples.size();
}

}  // namespace repboot
