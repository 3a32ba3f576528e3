#include "repboot/baselines.hpp"

#include "repboot/errors.hpp"

namespace repboot {

TfrbModel tfrb_train(const IndicatorSchema& schema,
                     const std::vector<const CompositionSample*>& samples, int lvl_count,
                     const ForestParams& params) {
    if (samples.empty()) throw ConfigError("tfrb_train requires at least one sample");
    const std::size_t arity = samples[0]->topology.services.size();
    for (const auto* sample : samples) {
        if (sample->topology.services.size() != arity) {
            throw ConfigError("tfrb_train requires a fixed component arity");
        }
    }
    FeatureMatrix matrix = build_concat_matrix(schema, samples, lvl_count);
    TfrbModel model;
    model.forest = build_forest(matrix, layer_column_subsets(matrix.space()), params);
    model.arity = static_cast<int>(arity);
    return model;
}

int tfrb_predict(const TfrbModel& model, const CompositionTopology& topology) {
    std::vector<FeatureCell> row = encode_concat_row(model.forest.space, topology);
    return model.forest.predict(row.data());
}

std::vector<int> tfrb_votes(const TfrbModel& model, const CompositionTopology& topology) {
    std::vector<FeatureCell> row = encode_concat_row(model.forest.space, topology);
    return model.forest.votes(row.data());
}

}  // namespace repboot
