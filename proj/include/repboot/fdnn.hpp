#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "repboot/core.hpp"
#include "repboot/forest.hpp"
#include "repboot/neural.hpp"

namespace repboot {

// How per-tree predictions are encoded into the forest matrix fed to a
// block: one scalar (level-1)/(lvl-1) per tree, or a one-hot row per tree.
enum class ForestEncoding { ScalarLevel, OneHot };

// What a service contributes to its block: the forest matrix of its trained
// forest, or its raw indicator features (the forest-free comparator).
enum class ServiceInputKind { ForestMatrix, RawFeatures };

enum class TrainMode { EndToEnd, StageWise };

// Topology reduced to structural roles. Services are ranked by
// (dependency depth desc, out-degree desc, in-degree desc, id) and renamed to
// their rank, so isomorphic samples share one chain and one model key.
struct CanonicalTopology {
    PatternKind pattern = PatternKind::Sequential;
    int m = 0;
    std::vector<std::pair<int, int>> edges;  // (invoker role, invoked role), sorted
    std::vector<int> depths;                 // per role, nonincreasing
    std::string hash;
};

CanonicalTopology canonicalize_topology(const CompositionTopology& topology);

// role_of[i] = role of services[i] under the canonical ranking.
std::vector<int> role_assignment(const CompositionTopology& topology);

struct InputSlot {
    enum class Source { Service, Block };
    Source source = Source::Service;
    int role = -1;   // Source::Service
    int block = -1;  // Source::Block
    int width = 0;
};

struct ChainBlock {
    std::vector<InputSlot> slots;
    NetworkParams net;

    int input_width() const;
};

// A forest trained for one structural role plus the trees selected for the
// forest matrix (lowest out-of-bag error first, ties by tree index).
struct RoleForest {
    DecisionForest forest;
    std::vector<int> selected_trees;
};

std::vector<int> select_top_k_trees(const OobReport& report, int k);

// Forest matrix for one service: entry i is the encoded prediction of the
// i-th selected tree.
std::vector<double> forest_matrix(const RoleForest& role_forest, ForestEncoding encoding,
                                  int lvl_count, const ServiceRecord& record);

// Raw per-service features: a (present, rating) pair per schema indicator.
std::vector<double> raw_feature_vector(const IndicatorSchema& schema,
                                       const ServiceRecord& record);

struct ChainTrainInfo {
    std::uint64_t seed = 0;
    int epochs = 0;
    double final_loss = 0.0;
    double training_accuracy = -1.0;
};

// Blocks wired to mirror the composition DAG. Blocks are stored in
// topological order; the last one is the sink whose softmax output is the
// composite prediction.
struct ChainedFdnn {
    CanonicalTopology canon;
    int lvl_count = 0;
    int top_k = 0;
    ForestEncoding encoding = ForestEncoding::ScalarLevel;
    ServiceInputKind input_kind = ServiceInputKind::ForestMatrix;
    IndicatorSchema schema;
    std::vector<RoleForest> forests;  // per role; empty for RawFeatures
    std::vector<ChainBlock> blocks;
    int sink = -1;
    ChainTrainInfo train_info;

    std::size_t parameter_count() const;
    // Per-role input vectors for one sample, aligned by canonical role.
    std::vector<std::vector<double>> encode_roles(const CompositionTopology& topology) const;
};

struct ChainConfig {
    int top_k = 32;
    ForestEncoding encoding = ForestEncoding::ScalarLevel;
    ServiceInputKind input_kind = ServiceInputKind::ForestMatrix;
    std::uint64_t net_seed = 0;
    // Hidden widths for every block network; empty = geometric taper from
    // the block's input width.
    std::vector<int> hidden_widths;
};

// Builds the untrained block graph for a topology. Edges are visited once in
// descending invoker depth; the first edge into a service opens its block
// with the invoker's signal and the service's own input, later edges into
// the same service attach additional signals. A service's signal is its
// block's output once it has one, its forest matrix otherwise. Multiple
// terminal blocks are merged by one extra sink block.
ChainedFdnn build_chain(const CompositionTopology& topology,
                        std::vector<RoleForest> role_forests, const IndicatorSchema& schema,
                        int lvl_count, const ChainConfig& config);

// One training sample, already aligned to canonical roles.
struct ChainSample {
    std::vector<std::vector<double>> role_inputs;
    int label = 0;
};

ChainSample make_chain_sample(const ChainedFdnn& chain, const CompositionSample& sample);

struct ChainForwardTrace {
    std::vector<std::vector<double>> inputs;  // assembled per block
    std::vector<ForwardTrace> blocks;
};

ChainForwardTrace chain_forward(const ChainedFdnn& chain,
                                const std::vector<std::vector<double>>& role_inputs);

double chain_loss(const ChainedFdnn& chain, const std::vector<ChainSample>& samples);

// Mean cross-entropy gradients for all block networks, backpropagated from
// the sink through inter-block connections.
std::vector<NetworkGradients> chain_gradients(const ChainedFdnn& chain,
                                              const std::vector<ChainSample>& samples);

// Trains the block networks with Adam (forests stay frozen). Returns the
// mean loss per epoch. EndToEnd backpropagates one sink loss through the
// whole graph; StageWise trains blocks in topological order against the
// composite label with upstream outputs frozen.
std::vector<double> train_chain(ChainedFdnn& chain, const std::vector<ChainSample>& samples,
                                const TrainConfig& config,
                                TrainMode mode = TrainMode::EndToEnd);

struct ChainPrediction {
    int level = 0;
    double bp = 0.0;  // softmax probability of the winning output neuron
};

ChainPrediction chain_predict(const ChainedFdnn& chain,
                              const std::vector<std::vector<double>>& role_inputs);
ChainPrediction chain_predict_sample(const ChainedFdnn& chain, const CompositionSample& sample);

// Fraction of samples whose predicted level equals the label.
double chain_accuracy(const ChainedFdnn& chain, const std::vector<ChainSample>& samples);

}  // namespace repboot
