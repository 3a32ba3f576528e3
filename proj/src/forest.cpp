#include "repboot/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "repboot/errors.hpp"
#include "repboot/rng.hpp"

namespace repboot {

namespace {

constexpr double kGainTolerance = 1e-12;

double impurity_of(const std::vector<int>& counts, int total, Impurity kind) {
    if (total == 0) return 0.0;
    double result = 0.0;
    if (kind == Impurity::Entropy) {
        for (int c : counts) {
            if (c == 0) continue;
            double p = static_cast<double>(c) / total;
            result -= p * std::log2(p);
        }
    } else {
        double sum_sq = 0.0;
        for (int c : counts) {
            double p = static_cast<double>(c) / total;
            sum_sq += p * p;
        }
        result = 1.0 - sum_sq;
    }
    return result;
}

int majority_class(const std::vector<int>& counts) {
    int best = 0;
    for (std::size_t i = 1; i < counts.size(); ++i) {
        if (counts[i] > counts[best]) best = static_cast<int>(i);
    }
    return best + 1;  // counts are indexed by level - 1
}

struct SplitChoice {
    bool found = false;
    int feature = -1;
    bool numeric = true;
    double threshold = 0.0;
    int tag = -1;
    bool absent_left = true;
    double gain = 0.0;
};

class TreeGrower {
public:
    TreeGrower(const FeatureMatrix& matrix, std::vector<int> feature_subset,
               const TreeParams& params)
        : matrix_(matrix), features_(std::move(feature_subset)), params_(params) {}

    std::vector<TreeNode> grow(const std::vector<int>& bag) {
        nodes_.clear();
        build(bag, 0);
        return std::move(nodes_);
    }

private:
    std::vector<int> count_labels(const std::vector<int>& rows) const {
        std::vector<int> counts(matrix_.lvl_count(), 0);
        for (int r : rows) counts[matrix_.label(r) - 1]++;
        return counts;
    }

    // Entropy/Gini of a candidate child assembled from present-partition
    // counts plus (optionally) the absent block.
    double child_impurity(const std::vector<int>& counts, int n) const {
        return impurity_of(counts, n, params_.impurity);
    }

    SplitChoice best_split(const std::vector<int>& rows, double parent_impurity) const {
        SplitChoice best;
        const int n_total = static_cast<int>(rows.size());
        const int lvl = matrix_.lvl_count();

        std::vector<std::pair<double, int>> numeric_rows;  // (rating, label)
        std::vector<int> absent_counts(lvl, 0);

        for (int f : features_) {
            numeric_rows.clear();
            std::fill(absent_counts.begin(), absent_counts.end(), 0);
            int n_absent = 0;
            for (int r : rows) {
                const FeatureCell& cell = matrix_.row(r)[f];
                if (cell.present) {
                    numeric_rows.emplace_back(cell.rating, matrix_.label(r));
                } else {
                    absent_counts[matrix_.label(r) - 1]++;
                    ++n_absent;
                }
            }
            const int n_present = static_cast<int>(numeric_rows.size());
            if (n_present < 2) continue;

            auto evaluate = [&](std::vector<int>& left_counts, int n_left,
                                std::vector<int>& right_counts, int n_right, bool numeric,
                                double threshold, int tag) {
                // Absent rows follow the larger present side (left on ties).
                bool absent_left = n_left >= n_right;
                std::vector<int>& absorbing = absent_left ? left_counts : right_counts;
                int nl = n_left, nr = n_right;
                if (n_absent > 0) {
                    for (int i = 0; i < lvl; ++i) absorbing[i] += absent_counts[i];
                    (absent_left ? nl : nr) += n_absent;
                }
                double gain = parent_impurity -
                              (nl * child_impurity(left_counts, nl) +
                               nr * child_impurity(right_counts, nr)) /
                                  n_total;
                if (n_absent > 0) {
                    for (int i = 0; i < lvl; ++i) absorbing[i] -= absent_counts[i];
                }
                if (gain > best.gain + kGainTolerance) {
                    best.found = true;
                    best.feature = f;
                    best.numeric = numeric;
                    best.threshold = threshold;
                    best.tag = tag;
                    best.absent_left = absent_left;
                    best.gain = gain;
                }
            };

            // Numeric thresholds: midpoints between consecutive distinct
            // ratings, swept with running class counts.
            std::sort(numeric_rows.begin(), numeric_rows.end());
            std::vector<int> left_counts(lvl, 0);
            std::vector<int> right_counts(lvl, 0);
            for (const auto& [rating, label] : numeric_rows) right_counts[label - 1]++;
            for (int i = 0; i < n_present - 1; ++i) {
                left_counts[numeric_rows[i].second - 1]++;
                right_counts[numeric_rows[i].second - 1]--;
                if (numeric_rows[i].first == numeric_rows[i + 1].first) continue;
                double threshold =
                    numeric_rows[i].first +
                    (numeric_rows[i + 1].first - numeric_rows[i].first) / 2.0;
                evaluate(left_counts, i + 1, right_counts, n_present - i - 1, true,
                         threshold, -1);
            }

            // Tag equality splits, tags in vocabulary order.
            const auto& column = matrix_.space().columns[f];
            if (!column.tags.empty()) {
                std::vector<std::vector<int>> tag_counts(
                    column.tags.size(), std::vector<int>(lvl, 0));
                std::vector<int> tag_sizes(column.tags.size(), 0);
                std::vector<int> present_counts(lvl, 0);
                for (int r : rows) {
                    const FeatureCell& cell = matrix_.row(r)[f];
                    if (!cell.present) continue;
                    present_counts[matrix_.label(r) - 1]++;
                    if (cell.tag >= 0) {
                        tag_counts[cell.tag][matrix_.label(r) - 1]++;
                        tag_sizes[cell.tag]++;
                    }
                }
                for (std::size_t t = 0; t < column.tags.size(); ++t) {
                    int n_left = tag_sizes[t];
                    int n_right = n_present - n_left;
                    if (n_left == 0 || n_right == 0) continue;
                    std::vector<int> lc = tag_counts[t];
                    std::vector<int> rc(lvl);
                    for (int i = 0; i < lvl; ++i) rc[i] = present_counts[i] - lc[i];
                    evaluate(lc, n_left, rc, n_right, false, 0.0, static_cast<int>(t));
                }
            }
        }
        return best;
    }

    int build(const std::vector<int>& rows, int depth) {
        std::vector<int> counts = count_labels(rows);
        const int n = static_cast<int>(rows.size());
        double impurity = impurity_of(counts, n, params_.impurity);

        int node_index = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        {
            TreeNode& node = nodes_.back();
            node.impurity = impurity;
            node.n_samples = n;
        }

        bool stop = impurity == 0.0 || n < params_.min_node_size ||
                    (params_.max_depth > 0 && depth >= params_.max_depth);
        SplitChoice split;
        if (!stop) {
            split = best_split(rows, impurity);
            stop = !split.found;
        }
        if (stop) {
            TreeNode& node = nodes_[node_index];
            node.leaf_level = majority_class(counts);
            node.class_counts = std::move(counts);
            return node_index;
        }

        std::vector<int> left_rows;
        std::vector<int> right_rows;
        for (int r : rows) {
            const FeatureCell& cell = matrix_.row(r)[split.feature];
            bool go_left;
            if (!cell.present) {
                go_left = split.absent_left;
            } else if (split.numeric) {
                go_left = cell.rating <= split.threshold;
            } else {
                go_left = cell.tag == split.tag;
            }
            (go_left ? left_rows : right_rows).push_back(r);
        }

        {
            TreeNode& node = nodes_[node_index];
            node.feature = split.feature;
            node.numeric_split = split.numeric;
            node.threshold = split.threshold;
            node.tag = split.tag;
            node.absent_left = split.absent_left;
        }
        int left = build(left_rows, depth + 1);
        nodes_[node_index].left = left;
        int right = build(right_rows, depth + 1);
        nodes_[node_index].right = right;
        return node_index;
    }

    const FeatureMatrix& matrix_;
    std::vector<int> features_;
    const TreeParams& params_;
    std::vector<TreeNode> nodes_;
};

}  // namespace

int DecisionTree::predict(const FeatureCell* row) const {
    int at = 0;
    while (!nodes[at].is_leaf()) {
        const TreeNode& node = nodes[at];
        const FeatureCell& cell = row[node.feature];
        bool go_left;
        if (!cell.present) {
            go_left = node.absent_left;
        } else if (node.numeric_split) {
            go_left = cell.rating <= node.threshold;
        } else {
            go_left = cell.tag == node.tag;
        }
        at = go_left ? node.left : node.right;
    }
    return nodes[at].leaf_level;
}

std::vector<int> DecisionForest::votes(const FeatureCell* row) const {
    std::vector<int> result;
    result.reserve(trees.size());
    for (const auto& tree : trees) result.push_back(tree.predict(row));
    return result;
}

int majority_level(const std::vector<int>& votes, int lvl_count) {
    std::vector<int> tally(lvl_count, 0);
    for (int v : votes) tally[v - 1]++;
    int best = 0;
    for (int i = 1; i < lvl_count; ++i) {
        if (tally[i] > tally[best]) best = i;
    }
    return best + 1;
}

std::vector<double> vote_fractions(const std::vector<int>& votes, int lvl_count) {
    std::vector<double> fractions(lvl_count, 0.0);
    if (votes.empty()) return fractions;
    for (int v : votes) fractions[v - 1] += 1.0;
    for (double& f : fractions) f /= static_cast<double>(votes.size());
    return fractions;
}

int DecisionForest::predict(const FeatureCell* row) const {
    return majority_level(votes(row), lvl_count);
}

int DecisionForest::predict_service(const ServiceRecord& record) const {
    std::vector<FeatureCell> cells = encode_service_row(space, record);
    return predict(cells.data());
}

DecisionTree grow_tree(const FeatureMatrix& matrix, std::vector<int> bag,
                       std::vector<int> feature_subset, const TreeParams& params) {
    if (bag.empty()) throw ConfigError("cannot grow a tree on an empty bag");
    DecisionTree tree;
    std::sort(feature_subset.begin(), feature_subset.end());
    TreeGrower grower(matrix, feature_subset, params);
    tree.nodes = grower.grow(bag);
    std::vector<bool> in_bag(matrix.row_count(), false);
    for (int r : bag) in_bag[r] = true;
    for (std::size_t r = 0; r < matrix.row_count(); ++r) {
        if (!in_bag[r]) tree.oob.push_back(static_cast<int>(r));
    }
    tree.bag = std::move(bag);
    tree.feature_subset = std::move(feature_subset);
    return tree;
}

DecisionForest build_forest(const FeatureMatrix& matrix,
                            const std::vector<std::vector<int>>& column_subsets,
                            const ForestParams& params) {
    if (params.n_outer < 1 || params.m_vertical < 0) {
        throw ConfigError("n_outer must be >= 1 and m_vertical >= 0");
    }
    if (params.m_vertical > 0 && column_subsets.empty()) {
        throw ConfigError("vertical bagging requires at least one column subset");
    }
    for (const auto& subset : column_subsets) {
        if (subset.empty()) throw ConfigError("empty column subset");
    }
    if (!(params.bag_fraction > 0.0 && params.bag_fraction <= 1.0)) {
        throw ConfigError("bag_fraction must lie in (0, 1]");
    }

    const std::size_t rows = matrix.row_count();
    const std::size_t bag_size = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(params.bag_fraction * rows)));

    DecisionForest forest;
    forest.space = matrix.space();
    forest.lvl_count = matrix.lvl_count();
    forest.impurity = params.tree.impurity;

    const int per_outer = params.m_vertical + 1;
    const int total = params.n_outer * per_outer;
    forest.trees.resize(total);

    std::vector<int> all_columns(matrix.col_count());
    std::iota(all_columns.begin(), all_columns.end(), 0);

    auto grow_one = [&](int t) {
        Rng rng(params.seed, static_cast<std::uint64_t>(t));
        std::vector<int> columns;
        if (t % per_outer == 0) {
            columns = all_columns;
        } else {
            columns = column_subsets[rng.below(column_subsets.size())];
        }
        std::vector<int> bag(bag_size);
        for (auto& r : bag) r = static_cast<int>(rng.below(rows));
        forest.trees[t] = grow_tree(matrix, std::move(bag), std::move(columns), params.tree);
    };

    int n_threads = std::max(1, params.n_threads);
    if (n_threads == 1 || total == 1) {
        for (int t = 0; t < total; ++t) grow_one(t);
    } else {
        std::vector<std::thread> workers;
        std::atomic<int> next{0};
        for (int w = 0; w < n_threads; ++w) {
            workers.emplace_back([&] {
                for (int t = next.fetch_add(1); t < total; t = next.fetch_add(1)) grow_one(t);
            });
        }
        for (auto& worker : workers) worker.join();
    }
    return forest;
}

OobReport oob_error(const DecisionForest& forest, const FeatureMatrix& matrix) {
    OobReport report;
    report.per_tree.assign(forest.trees.size(), -1.0);
    int wrong_total = 0;
    for (std::size_t t = 0; t < forest.trees.size(); ++t) {
        const auto& tree = forest.trees[t];
        if (tree.oob.empty()) {
            report.excluded_trees.push_back(static_cast<int>(t));
            continue;
        }
        int wrong = 0;
        for (int r : tree.oob) {
            if (tree.predict(matrix.row(r)) != matrix.label(r)) ++wrong;
        }
        report.per_tree[t] = static_cast<double>(wrong) / tree.oob.size();
        wrong_total += wrong;
        report.total_predictions += static_cast<int>(tree.oob.size());
    }
    report.aggregate_error = report.total_predictions == 0
                                 ? 0.0
                                 : static_cast<double>(wrong_total) / report.total_predictions;
    return report;
}

void mda_importance(const DecisionForest& forest, const FeatureMatrix& matrix,
                    const MdaParams& params, std::vector<double>& mean_out,
                    std::vector<double>& std_out) {
    const std::size_t n_features = matrix.col_count();
    mean_out.assign(n_features, 0.0);
    std_out.assign(n_features, 0.0);

    std::vector<std::vector<double>> per_tree_drop(n_features);
    std::vector<FeatureCell> scratch(matrix.col_count());

    for (std::size_t t = 0; t < forest.trees.size(); ++t) {
        const auto& tree = forest.trees[t];
        if (tree.oob.empty()) continue;
        const std::size_t n_oob = tree.oob.size();

        int correct = 0;
        for (int r : tree.oob) {
            if (tree.predict(matrix.row(r)) == matrix.label(r)) ++correct;
        }
        double base_accuracy = static_cast<double>(correct) / n_oob;

        for (std::size_t f = 0; f < n_features; ++f) {
            double drop_sum = 0.0;
            for (int rep = 0; rep < params.n_repeats; ++rep) {
                Rng rng(params.seed,
                        (static_cast<std::uint64_t>(t) * n_features + f) * 1000 + rep + 1);
                std::vector<int> donors = tree.oob;
                rng.shuffle(donors);
                int perm_correct = 0;
                for (std::size_t i = 0; i < n_oob; ++i) {
                    const FeatureCell* original = matrix.row(tree.oob[i]);
                    std::copy(original, original + matrix.col_count(), scratch.begin());
                    scratch[f] = matrix.row(donors[i])[f];
                    if (tree.predict(scratch.data()) == matrix.label(tree.oob[i])) {
                        ++perm_correct;
                    }
                }
                drop_sum += base_accuracy - static_cast<double>(perm_correct) / n_oob;
            }
            per_tree_drop[f].push_back(drop_sum / params.n_repeats);
        }
    }

    for (std::size_t f = 0; f < n_features; ++f) {
        const auto& drops = per_tree_drop[f];
        if (drops.empty()) continue;
        double mean = std::accumulate(drops.begin(), drops.end(), 0.0) / drops.size();
        mean_out[f] = mean;
        if (drops.size() > 1) {
            double sq = 0.0;
            for (double d : drops) sq += (d - mean) * (d - mean);
            std_out[f] = std::sqrt(sq / (drops.size() - 1));
        }
    }
}

double node_importance(double node_impurity, int node_n, double left_impurity, int left_n,
                       double right_impurity, int right_n) {
    return node_impurity * node_n - left_impurity * left_n - right_impurity * right_n;
}

std::vector<double> mdcd_importance(const DecisionForest& forest) {
    const std::size_t n_features = forest.space.width();
    std::vector<double> total(n_features, 0.0);
    std::vector<double> per_tree(n_features, 0.0);
    for (const auto& tree : forest.trees) {
        std::fill(per_tree.begin(), per_tree.end(), 0.0);
        for (const auto& node : tree.nodes) {
            if (node.is_leaf()) continue;
            const TreeNode& left = tree.nodes[node.left];
            const TreeNode& right = tree.nodes[node.right];
            per_tree[node.feature] +=
                node_importance(node.impurity, node.n_samples, left.impurity, left.n_samples,
                                right.impurity, right.n_samples);
        }
        for (std::size_t f = 0; f < n_features; ++f) total[f] += per_tree[f];
    }
    if (!forest.trees.empty()) {
        for (double& v : total) v /= static_cast<double>(forest.trees.size());
    }
    double sum = std::accumulate(total.begin(), total.end(), 0.0);
    if (sum > 0.0) {
        for (double& v : total) v /= sum;
    }
    return total;
}

ImportanceReport compute_importance(const DecisionForest& forest, const FeatureMatrix& matrix,
                                    const MdaParams& params) {
    ImportanceReport report;
    for (const auto& column : matrix.space().columns) {
        report.feature_names.push_back(column.name);
        report.feature_layers.push_back(column.layer);
    }
    mda_importance(forest, matrix, params, report.mda_mean, report.mda_std);
    report.mdcd = mdcd_importance(forest);

    report.mda_normalized.assign(report.mda_mean.size(), 0.0);
    double positive_sum = 0.0;
    for (double v : report.mda_mean) positive_sum += std::max(v, 0.0);
    if (positive_sum > 0.0) {
        for (std::size_t f = 0; f < report.mda_mean.size(); ++f) {
            report.mda_normalized[f] = std::max(report.mda_mean[f], 0.0) / positive_sum;
        }
    }
    return report;
}

std::vector<LayerImportanceRow> layer_importance(const ImportanceReport& report) {
    std::vector<LayerImportanceRow> rows;
    for (Layer layer : {Layer::Provider, Layer::Community, Layer::SimilarService,
                        Layer::Insight}) {
        LayerImportanceRow row;
        row.layer = layer;
        bool any = false;
        for (std::size_t f = 0; f < report.feature_layers.size(); ++f) {
            if (report.feature_layers[f] != layer) continue;
            any = true;
            row.mda += report.mda_normalized[f];
            row.mdcd += report.mdcd[f];
        }
        if (!any) continue;
        row.average = (row.mda + row.mdcd) / 2.0;
        rows.push_back(row);
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.average != b.average) return a.average > b.average;
        return static_cast<int>(a.layer) < static_cast<int>(b.layer);
    });
    return rows;
}

}  // namespace repboot
