#pragma once

#include <string>
#include <vector>

#include "repboot/core.hpp"

namespace repboot {

// One observed feature value. `present == false` means the indicator does
// not apply to the sample; tag == -1 at prediction time marks a categorical
// value never seen during training.
struct FeatureCell {
    bool present = false;
    int tag = -1;
    double rating = 0.0;
};

// Column metadata: display name, owning layer and the categorical vocabulary
// interned while the training matrix was built.
struct FeatureColumn {
    std::string name;
    Layer layer = Layer::Insight;
    std::vector<std::string> tags;

    int tag_code(const std::string& tag) const;
};

// How rows map onto columns. Atomic: one column per schema indicator.
// Concatenated: per (service, indicator) blocks, services in id order.
// Numeric: plain dense numeric vectors (used by chained forest blocks).
enum class FeatureLayout { Atomic, Concatenated, Numeric };

// Immutable description of the feature columns a forest was trained on.
struct FeatureSpace {
    FeatureLayout layout = FeatureLayout::Atomic;
    std::vector<FeatureColumn> columns;
    std::vector<std::string> indicator_keys;  // per column, Atomic/Concatenated only
    std::vector<std::string> service_ids;     // Concatenated only, sorted

    std::size_t width() const { return columns.size(); }
};

// Row-major matrix of feature cells plus integer class labels in [1, lvl].
class FeatureMatrix {
public:
    FeatureMatrix(FeatureSpace space, int lvl_count);

    const FeatureSpace& space() const { return space_; }
    int lvl_count() const { return lvl_count_; }
    std::size_t row_count() const { return labels_.size(); }
    std::size_t col_count() const { return space_.width(); }

    const FeatureCell* row(std::size_t r) const { return cells_.data() + r * col_count(); }
    int label(std::size_t r) const { return labels_[r]; }

    // Appends a row, interning unseen tags into the column vocabularies.
    void add_row(const std::vector<FeatureCell>& cells,
                 const std::vector<std::string>& cell_tags, int label);

private:
    FeatureSpace space_;
    std::vector<FeatureCell> cells_;
    std::vector<int> labels_;
    int lvl_count_;
};

// Training-matrix builders. Rows must carry observed levels.
FeatureMatrix build_atomic_matrix(const IndicatorSchema& schema,
                                  const std::vector<const ServiceRecord*>& rows,
                                  int lvl_count);
FeatureMatrix build_concat_matrix(const IndicatorSchema& schema,
                                  const std::vector<const CompositionSample*>& samples,
                                  int lvl_count);
FeatureMatrix build_numeric_matrix(const std::vector<std::string>& names,
                                   const std::vector<std::vector<double>>& rows,
                                   const std::vector<int>& labels, int lvl_count);

// Prediction-time encoders against a trained space.
std::vector<FeatureCell> encode_service_row(const FeatureSpace& space,
                                            const ServiceRecord& record);
std::vector<FeatureCell> encode_concat_row(const FeatureSpace& space,
                                           const CompositionTopology& topology);
std::vector<FeatureCell> encode_numeric_row(const FeatureSpace& space,
                                            const std::vector<double>& values);

// Column subsets grouped by layer, in layer order; empty groups dropped.
std::vector<std::vector<int>> layer_column_subsets(const FeatureSpace& space);

}  // namespace repboot
