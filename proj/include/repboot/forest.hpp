#pragma once

#include <cstdint>
#include <vector>

#include "repboot/features.hpp"

namespace repboot {

enum class Impurity { Entropy, Gini };

struct TreeParams {
    int min_node_size = 2;
    int max_depth = 0;  // 0 = unlimited
    Impurity impurity = Impurity::Entropy;
};

struct ForestParams {
    // Outer bootstrap-bagged trees; each spawns m_vertical additional trees
    // grown on a random column subset of a fresh bag. Total trees =
    // n_outer * (m_vertical + 1).
    int n_outer = 8;
    int m_vertical = 2;
    double bag_fraction = 1.0;  // bag size = ceil(fraction * rows), <= rows
    TreeParams tree;
    std::uint64_t seed = 0;
    int n_threads = 1;
};

// Binary decision node. Internal nodes (feature >= 0) route present cells by
// a numeric threshold or a tag-equality test; absent cells follow the child
// that held the majority of the node's training rows.
struct TreeNode {
    int feature = -1;
    bool numeric_split = true;
    double threshold = 0.0;
    int tag = -1;
    bool absent_left = true;
    int left = -1;
    int right = -1;
    double impurity = 0.0;  // of this node's training rows
    int n_samples = 0;
    int leaf_level = 0;              // majority class, leaves only
    std::vector<int> class_counts;   // leaves only, size lvl_count

    bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
    std::vector<TreeNode> nodes;          // nodes[0] is the root
    std::vector<int> bag;                 // sampled row ids, with repetition
    std::vector<int> oob;                 // ascending rows absent from the bag
    std::vector<int> feature_subset;      // ascending column ids searched for splits

    int predict(const FeatureCell* row) const;
};

class DecisionForest {
public:
    FeatureSpace space;
    int lvl_count = 0;
    Impurity impurity = Impurity::Entropy;
    std::vector<DecisionTree> trees;

    // Per-tree predicted levels.
    std::vector<int> votes(const FeatureCell* row) const;
    // Plurality vote over the trees, ties resolved toward the lower level.
    int predict(const FeatureCell* row) const;
    int predict_service(const ServiceRecord& record) const;
};

// Resolves a list of vote counts into the winning level (lowest index wins
// ties). Exposed so callers can tally votes themselves.
int majority_level(const std::vector<int>& votes, int lvl_count);
std::vector<double> vote_fractions(const std::vector<int>& votes, int lvl_count);

// Grows one unpruned CART tree on the given bag. Splits maximize impurity
// decrease; candidates are scanned feature-ascending, numeric thresholds
// ascending then tags ascending, and a candidate must beat the incumbent by
// more than 1e-12 to replace it, which pins tie-breaking to the lowest
// feature index / threshold.
DecisionTree grow_tree(const FeatureMatrix& matrix, std::vector<int> bag,
                       std::vector<int> feature_subset, const TreeParams& params);

// Dual-bagged forest: n_outer full-feature trees plus n_outer * m_vertical
// trees on random column subsets, every tree on a fresh bootstrap bag. Each
// tree consumes its own random substream (stream id = tree index), so the
// result is identical for any n_threads.
DecisionForest build_forest(const FeatureMatrix& matrix,
                            const std::vector<std::vector<int>>& column_subsets,
                            const ForestParams& params);

struct OobReport {
    double aggregate_error = 0.0;     // misclassified / predictions over all trees
    int total_predictions = 0;
    std::vector<double> per_tree;     // error rate per tree; -1 for excluded trees
    std::vector<int> excluded_trees;  // trees with an empty out-of-bag set
};

OobReport oob_error(const DecisionForest& forest, const FeatureMatrix& matrix);

struct MdaParams {
    int n_repeats = 3;
    std::uint64_t seed = 0;
};

struct ImportanceReport {
    std::vector<std::string> feature_names;
    std::vector<Layer> feature_layers;
    std::vector<double> mda_mean;        // raw out-of-bag accuracy drop
    std::vector<double> mda_std;         // across trees
    std::vector<double> mda_normalized;  // negatives clamped, sums to 1
    std::vector<double> mdcd;            // normalized, sums to 1
};

// Permutation importance: per tree, out-of-bag accuracy minus accuracy with
// the feature's column shuffled across the out-of-bag rows (averaged over
// n_repeats draws), then averaged over trees.
void mda_importance(const DecisionForest& forest, const FeatureMatrix& matrix,
                    const MdaParams& params, std::vector<double>& mean_out,
                    std::vector<double>& std_out);

// Impurity-decrease importance: at every internal node,
// impurity*n - impurity_left*n_left - impurity_right*n_right is credited to
// the split feature; per-tree sums are averaged over trees and normalized to
// sum to one.
std::vector<double> mdcd_importance(const DecisionForest& forest);

// Importance of one split considered in isolation; shared with the report
// and exercised directly by the formula tests.
double node_importance(double node_impurity, int node_n, double left_impurity, int left_n,
                       double right_impurity, int right_n);

ImportanceReport compute_importance(const DecisionForest& forest, const FeatureMatrix& matrix,
                                    const MdaParams& params = {});

struct LayerImportanceRow {
    Layer layer;
    double mda = 0.0;
    double mdcd = 0.0;
    double average = 0.0;
};

// Aggregates normalized feature scores per layer, sorted descending by the
// (mda + mdcd) / 2 average.
std::vector<LayerImportanceRow> layer_importance(const ImportanceReport& report);

}  // namespace repboot
