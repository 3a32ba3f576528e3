#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "repboot/baselines.hpp"
#include "repboot/data.hpp"
#include "repboot/fdnn.hpp"

namespace repboot {

// The compared predictors: the chained forest-fed network, a chained forest
// without the network part, a chained network on raw features, the
// topology-free concatenated forest, and the minimum-component baseline.
enum class MethodKind { Fdnn, ChainForest, ChainDnn, Tfrb, MinBaseline };

const char* method_name(MethodKind kind);
MethodKind method_from_name(const std::string& name);

struct MethodOptions {
    ForestParams forest;
    TrainConfig net;
    int top_k = 16;
    ForestEncoding encoding = ForestEncoding::ScalarLevel;
    TrainMode train_mode = TrainMode::EndToEnd;
    std::vector<int> hidden_widths;  // empty = per-block taper

    MethodOptions() {
        net.epochs = 300;
        net.batch_size = 32;
    }
};

struct Prediction {
    int level = 0;
    double bp = 0.0;     // softmax/vote confidence of the predicted level
    double ac = -1.0;    // accuracy recorded by the serving model, if any
    bool fallback = false;  // sample's topology bucket unseen during training
};

class Model {
public:
    virtual ~Model() = default;
    virtual MethodKind kind() const = 0;
    virtual int lvl_count() const = 0;
    virtual Prediction predict(const CompositionTopology& topology) const = 0;
};

// Chain of forests: same block wiring as the forest-fed network chain, but
// each block is a decision forest over its slot values and emits its vote
// fractions; trained in topological order against the composite label.
struct ForestChainBlock {
    std::vector<InputSlot> slots;
    DecisionForest forest;

    int input_width() const;
};

struct ForestChain {
    CanonicalTopology canon;
    std::vector<RoleForest> forests;
    std::vector<ForestChainBlock> blocks;
    int sink = -1;
};

class FdnnModel : public Model {
public:
    MethodKind kind() const override { return kind_; }
    int lvl_count() const override { return lvl_count_; }
    Prediction predict(const CompositionTopology& topology) const override;

    MethodKind kind_ = MethodKind::Fdnn;  // Fdnn or ChainDnn
    int lvl_count_ = 0;
    IndicatorSchema schema_;
    std::map<std::string, ChainedFdnn> buckets_;  // canonical hash -> chain
    int fallback_level_ = 1;
};

class ForestChainModel : public Model {
public:
    MethodKind kind() const override { return MethodKind::ChainForest; }
    int lvl_count() const override { return lvl_count_; }
    Prediction predict(const CompositionTopology& topology) const override;

    int lvl_count_ = 0;
    int top_k_ = 0;
    ForestEncoding encoding_ = ForestEncoding::ScalarLevel;
    IndicatorSchema schema_;
    std::map<std::string, ForestChain> buckets_;
    int fallback_level_ = 1;
};

class TfrbWrappedModel : public Model {
public:
    MethodKind kind() const override { return MethodKind::Tfrb; }
    int lvl_count() const override { return lvl_count_; }
    Prediction predict(const CompositionTopology& topology) const override;

    int lvl_count_ = 0;
    TfrbModel model_;
};

class MinBaselineModel : public Model {
public:
    MethodKind kind() const override { return MethodKind::MinBaseline; }
    int lvl_count() const override { return lvl_count_; }
    Prediction predict(const CompositionTopology& topology) const override;

    int lvl_count_ = 0;
    DecisionForest atomic_forest_;
};

// Trains one method on the given sample subset of the corpus. Seeds are
// taken from the options; identical inputs give identical models.
std::unique_ptr<Model> train_model(MethodKind kind, const CorpusFile& corpus,
                                   const std::vector<int>& train_indices,
                                   const MethodOptions& options);

// Per-role forests for one topology bucket: role r's forest is trained on
// the records of the services occupying role r across the bucket's samples,
// labelled with their own observed levels.
std::vector<RoleForest> train_role_forests(const IndicatorSchema& schema,
                                           const std::vector<const CompositionSample*>& bucket,
                                           int lvl_count, const ForestParams& params,
                                           int top_k);

// Majority observed level of a sample set (prediction of last resort for
// topology buckets absent from training).
int majority_observed_level(const CorpusFile& corpus, const std::vector<int>& indices);

// Groups sample indices by canonical topology hash, insertion-ordered.
std::vector<std::pair<std::string, std::vector<int>>> bucket_by_topology(
    const CorpusFile& corpus, const std::vector<int>& indices);

}  // namespace repboot
