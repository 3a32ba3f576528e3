#include "repboot/methods.hpp"

#include <algorithm>

#include "repboot/errors.hpp"

namespace repboot {

const char* method_name(MethodKind kind) {
    switch (kind) {
        case MethodKind::Fdnn: return "fdnn";
        case MethodKind::ChainForest: return "forest";
        case MethodKind::ChainDnn: return "dnn";
        case MethodKind::Tfrb: return "tfrb";
        case MethodKind::MinBaseline: return "min";
    }
    return "?";
}

MethodKind method_from_name(const std::string& name) {
    if (name == "fdnn") return MethodKind::Fdnn;
    if (name == "forest") return MethodKind::ChainForest;
    if (name == "dnn") return MethodKind::ChainDnn;
    if (name == "tfrb") return MethodKind::Tfrb;
    if (name == "min") return MethodKind::MinBaseline;
    throw ConfigError("unknown method: " + name +
                      " (expected fdnn, forest, dnn, tfrb or min)");
}

int ForestChainBlock::input_width() const {
    int width = 0;
    for (const auto& slot : slots) width += slot.width;
    return width;
}

std::vector<std::pair<std::string, std::vector<int>>> bucket_by_topology(
    const CorpusFile& corpus, const std::vector<int>& indices) {
    std::vector<std::pair<std::string, std::vector<int>>> buckets;
    for (int i : indices) {
        std::string hash = canonicalize_topology(corpus.samples[i].topology).hash;
        auto it = std::find_if(buckets.begin(), buckets.end(),
                               [&](const auto& b) { return b.first == hash; });
        if (it == buckets.end()) {
            buckets.push_back({hash, {i}});
        } else {
            it->second.push_back(i);
        }
    }
    return buckets;
}

int majority_observed_level(const CorpusFile& corpus, const std::vector<int>& indices) {
    std::vector<int> counts(corpus.lvl_count, 0);
    for (int i : indices) {
        if (corpus.samples[i].observed_level) counts[*corpus.samples[i].observed_level - 1]++;
    }
    int best = 0;
    for (int l = 1; l < corpus.lvl_count; ++l) {
        if (counts[l] > counts[best]) best = l;
    }
    return best + 1;
}

std::vector<RoleForest> train_role_forests(const IndicatorSchema& schema,
                                           const std::vector<const CompositionSample*>& bucket,
                                           int lvl_count, const ForestParams& params,
                                           int top_k) {
    if (bucket.empty()) throw ConfigError("empty topology bucket");
    const int m = static_cast<int>(bucket[0]->topology.services.size());

    std::vector<std::vector<const ServiceRecord*>> rows_per_role(m);
    for (const auto* sample : bucket) {
        std::vector<int> role = role_assignment(sample->topology);
        for (std::size_t i = 0; i < sample->topology.services.size(); ++i) {
            rows_per_role[role[i]].push_back(&sample->topology.services[i]);
        }
    }

    std::vector<RoleForest> forests;
    forests.reserve(m);
    for (int r = 0; r < m; ++r) {
        FeatureMatrix matrix = build_atomic_matrix(schema, rows_per_role[r], lvl_count);
        ForestParams role_params = params;
        role_params.seed = params.seed + 7919ULL * static_cast<std::uint64_t>(r + 1);
        RoleForest role_forest;
        role_forest.forest =
            build_forest(matrix, layer_column_subsets(matrix.space()), role_params);
        OobReport report = oob_error(role_forest.forest, matrix);
        int k = std::min<int>(top_k, static_cast<int>(role_forest.forest.trees.size()));
        role_forest.selected_trees = select_top_k_trees(report, k);
        forests.push_back(std::move(role_forest));
    }
    return forests;
}

namespace {

std::vector<const CompositionSample*> collect(const CorpusFile& corpus,
                                              const std::vector<int>& indices) {
    std::vector<const CompositionSample*> samples;
    samples.reserve(indices.size());
    for (int i : indices) samples.push_back(&corpus.samples[i]);
    return samples;
}

std::unique_ptr<Model> train_chain_model(MethodKind kind, const CorpusFile& corpus,
                                         const std::vector<int>& train_indices,
                                         const MethodOptions& options) {
    auto model = std::make_unique<FdnnModel>();
    model->kind_ = kind;
    model->lvl_count_ = corpus.lvl_count;
    model->schema_ = corpus.schema;
    model->fallback_level_ = majority_observed_level(corpus, train_indices);

    ChainConfig chain_config;
    chain_config.top_k = options.top_k;
    chain_config.encoding = options.encoding;
    chain_config.input_kind = kind == MethodKind::Fdnn ? ServiceInputKind::ForestMatrix
                                                       : ServiceInputKind::RawFeatures;
    chain_config.hidden_widths = options.hidden_widths;

    for (const auto& [hash, bucket_indices] : bucket_by_topology(corpus, train_indices)) {
        std::vector<const CompositionSample*> bucket = collect(corpus, bucket_indices);
        std::vector<RoleForest> role_forests;
        if (chain_config.input_kind == ServiceInputKind::ForestMatrix) {
            role_forests = train_role_forests(corpus.schema, bucket, corpus.lvl_count,
                                              options.forest, options.top_k);
        }
        chain_config.net_seed = options.net.seed + 13ULL * model->buckets_.size();
        ChainedFdnn chain = build_chain(bucket[0]->topology, std::move(role_forests),
                                        corpus.schema, corpus.lvl_count, chain_config);
        std::vector<ChainSample> chain_samples;
        chain_samples.reserve(bucket.size());
        for (const auto* sample : bucket) {
            chain_samples.push_back(make_chain_sample(chain, *sample));
        }
        train_chain(chain, chain_samples, options.net, options.train_mode);
        model->buckets_.emplace(hash, std::move(chain));
    }
    return model;
}

// Numeric column names for a forest-chain block's assembled input.
std::vector<std::string> block_column_names(const std::vector<InputSlot>& slots) {
    std::vector<std::string> names;
    for (std::size_t s = 0; s < slots.size(); ++s) {
        for (int i = 0; i < slots[s].width; ++i) {
            names.push_back("slot" + std::to_string(s) + "_" + std::to_string(i));
        }
    }
    return names;
}

std::vector<double> forest_chain_block_input(
    const ForestChainBlock& block, const std::vector<std::vector<double>>& role_inputs,
    const std::vector<std::vector<double>>& block_outputs) {
    std::vector<double> input;
    input.reserve(block.input_width());
    for (const auto& slot : block.slots) {
        const auto& values = slot.source == InputSlot::Source::Service
                                 ? role_inputs[slot.role]
                                 : block_outputs[slot.block];
        input.insert(input.end(), values.begin(), values.end());
    }
    return input;
}

std::vector<std::vector<double>> forest_chain_role_inputs(const ForestChain& chain,
                                                          int lvl_count,
                                                          ForestEncoding encoding,
                                                          const CompositionTopology& topology) {
    std::vector<int> role = role_assignment(topology);
    std::vector<std::vector<double>> inputs(chain.canon.m);
    for (std::size_t i = 0; i < topology.services.size(); ++i) {
        inputs[role[i]] =
            forest_matrix(chain.forests[role[i]], encoding, lvl_count, topology.services[i]);
    }
    return inputs;
}

std::unique_ptr<Model> train_forest_chain_model(const CorpusFile& corpus,
                                                const std::vector<int>& train_indices,
                                                const MethodOptions& options) {
    auto model = std::make_unique<ForestChainModel>();
    model->lvl_count_ = corpus.lvl_count;
    model->top_k_ = options.top_k;
    model->encoding_ = options.encoding;
    model->schema_ = corpus.schema;
    model->fallback_level_ = majority_observed_level(corpus, train_indices);

    for (const auto& [hash, bucket_indices] : bucket_by_topology(corpus, train_indices)) {
        std::vector<const CompositionSample*> bucket = collect(corpus, bucket_indices);

        ForestChain chain;
        chain.forests = train_role_forests(corpus.schema, bucket, corpus.lvl_count,
                                           options.forest, options.top_k);

        // Reuse the block wiring of the network chain.
        ChainConfig chain_config;
        chain_config.top_k = options.top_k;
        chain_config.encoding = options.encoding;
        ChainedFdnn skeleton = build_chain(bucket[0]->topology, chain.forests, corpus.schema,
                                           corpus.lvl_count, chain_config);
        chain.canon = skeleton.canon;
        chain.sink = skeleton.sink;
        for (const auto& block : skeleton.blocks) {
            ForestChainBlock fb;
            fb.slots = block.slots;
            chain.blocks.push_back(std::move(fb));
        }

        std::vector<std::vector<std::vector<double>>> role_inputs;
        std::vector<int> labels;
        for (const auto* sample : bucket) {
            role_inputs.push_back(forest_chain_role_inputs(chain, corpus.lvl_count,
                                                           options.encoding,
                                                           sample->topology));
            labels.push_back(*sample->observed_level);
        }

        // Topological order: train each block forest, then freeze its vote
        // fractions as inputs for downstream blocks.
        std::vector<std::vector<std::vector<double>>> block_outputs(
            bucket.size(), std::vector<std::vector<double>>(chain.blocks.size()));
        for (std::size_t b = 0; b < chain.blocks.size(); ++b) {
            std::vector<std::vector<double>> rows;
            rows.reserve(bucket.size());
            for (std::size_t s = 0; s < bucket.size(); ++s) {
                std::vector<std::vector<double>> outputs_so_far;
                for (std::size_t p = 0; p < b; ++p) {
                    outputs_so_far.push_back(block_outputs[s][p]);
                }
                rows.push_back(forest_chain_block_input(chain.blocks[b], role_inputs[s],
                                                        outputs_so_far));
            }
            FeatureMatrix matrix = build_numeric_matrix(block_column_names(chain.blocks[b].slots),
                                                        rows, labels, corpus.lvl_count);
            ForestParams block_params = options.forest;
            block_params.seed = options.forest.seed + 104729ULL * (b + 1);
            chain.blocks[b].forest =
                build_forest(matrix, layer_column_subsets(matrix.space()), block_params);
            for (std::size_t s = 0; s < bucket.size(); ++s) {
                std::vector<FeatureCell> cells =
                    encode_numeric_row(chain.blocks[b].forest.space, rows[s]);
                block_outputs[s][b] = vote_fractions(chain.blocks[b].forest.votes(cells.data()),
                                                     corpus.lvl_count);
            }
        }
        model->buckets_.emplace(hash, std::move(chain));
    }
    return model;
}

}  // namespace

Prediction FdnnModel::predict(const CompositionTopology& topology) const {
    std::string hash = canonicalize_topology(topology).hash;
    auto it = buckets_.find(hash);
    if (it == buckets_.end()) {
        Prediction fallback;
        fallback.level = fallback_level_;
        fallback.bp = 1.0 / lvl_count_;
        fallback.fallback = true;
        return fallback;
    }
    ChainPrediction p = chain_predict_sample(it->second, CompositionSample{topology, {}});
    Prediction result;
    result.level = p.level;
    result.bp = p.bp;
    result.ac = it->second.train_info.training_accuracy;
    return result;
}

Prediction ForestChainModel::predict(const CompositionTopology& topology) const {
    std::string hash = canonicalize_topology(topology).hash;
    auto it = buckets_.find(hash);
    if (it == buckets_.end()) {
        Prediction fallback;
        fallback.level = fallback_level_;
        fallback.bp = 1.0 / lvl_count_;
        fallback.fallback = true;
        return fallback;
    }
    const ForestChain& chain = it->second;
    std::vector<std::vector<double>> role_inputs =
        forest_chain_role_inputs(chain, lvl_count_, encoding_, topology);
    std::vector<std::vector<double>> outputs(chain.blocks.size());
    int level = fallback_level_;
    double bp = 0.0;
    for (std::size_t b = 0; b < chain.blocks.size(); ++b) {
        std::vector<std::vector<double>> outputs_so_far(outputs.begin(),
                                                        outputs.begin() + b);
        std::vector<double> input =
            forest_chain_block_input(chain.blocks[b], role_inputs, outputs_so_far);
        std::vector<FeatureCell> cells = encode_numeric_row(chain.blocks[b].forest.space, input);
        std::vector<int> votes = chain.blocks[b].forest.votes(cells.data());
        outputs[b] = vote_fractions(votes, lvl_count_);
        if (static_cast<int>(b) == chain.sink) {
            level = majority_level(votes, lvl_count_);
            bp = outputs[b][level - 1];
        }
    }
    Prediction result;
    result.level = level;
    result.bp = bp;
    return result;
}

Prediction TfrbWrappedModel::predict(const CompositionTopology& topology) const {
    std::vector<int> votes = tfrb_votes(model_, topology);
    int level = majority_level(votes, lvl_count_);
    Prediction result;
    result.level = level;
    result.bp = vote_fractions(votes, lvl_count_)[level - 1];
    return result;
}

Prediction MinBaselineModel::predict(const CompositionTopology& topology) const {
    double bp = 1.0;
    int level = min_baseline(topology, [&](const ServiceRecord& record) {
        std::vector<FeatureCell> row = encode_service_row(atomic_forest_.space, record);
        return atomic_forest_.predict(row.data());
    });
    // Confidence of the weakest component's vote.
    for (const auto& service : topology.services) {
        std::vector<FeatureCell> row = encode_service_row(atomic_forest_.space, service);
        std::vector<int> votes = atomic_forest_.votes(row.data());
        if (majority_level(votes, lvl_count_) == level) {
            bp = vote_fractions(votes, lvl_count_)[level - 1];
            break;
        }
    }
    Prediction result;
    result.level = level;
    result.bp = bp;
    return result;
}

std::unique_ptr<Model> train_model(MethodKind kind, const CorpusFile& corpus,
                                   const std::vector<int>& train_indices,
                                   const MethodOptions& options) {
    if (train_indices.empty()) throw ConfigError("cannot train on an empty sample set");
    for (int i : train_indices) {
        if (i < 0 || i >= static_cast<int>(corpus.samples.size())) {
            throw ConfigError("training index out of range");
        }
        if (!corpus.samples[i].observed_level) {
            throw ConfigError("training sample without observed_level");
        }
    }

    switch (kind) {
        case MethodKind::Fdnn:
        case MethodKind::ChainDnn:
            return train_chain_model(kind, corpus, train_indices, options);
        case MethodKind::ChainForest:
            return train_forest_chain_model(corpus, train_indices, options);
        case MethodKind::Tfrb: {
            auto model = std::make_unique<TfrbWrappedModel>();
            model->lvl_count_ = corpus.lvl_count;
            model->model_ = tfrb_train(corpus.schema, collect(corpus, train_indices),
                                       corpus.lvl_count, options.forest);
            return model;
        }
        case MethodKind::MinBaseline: {
            auto model = std::make_unique<MinBaselineModel>();
            model->lvl_count_ = corpus.lvl_count;
            std::vector<const ServiceRecord*> rows;
            for (int i : train_indices) {
                for (const auto& service : corpus.samples[i].topology.services) {
                    rows.push_back(&service);
                }
            }
            FeatureMatrix matrix = build_atomic_matrix(corpus.schema, rows, corpus.lvl_count);
            model->atomic_forest_ =
                build_forest(matrix, layer_column_subsets(matrix.space()), options.forest);
            return model;
        }
    }
    throw ConfigError("unknown method kind");
}

}  // namespace repboot
