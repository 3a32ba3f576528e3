#pragma once

#include <vector>

#include "repboot/core.hpp"
#include "repboot/forest.hpp"

namespace repboot {

// Topology-free comparator: one forest over the horizontally concatenated
// feature blocks of all component services. Edges never enter the features.
struct TfrbModel {
    DecisionForest forest;
    int arity = 0;
};

// Trains on samples that all share the same component arity; per-service
// feature blocks are ordered by service id so train and test columns align.
TfrbModel tfrb_train(const IndicatorSchema& schema,
                     const std::vector<const CompositionSample*>& samples, int lvl_count,
                     const ForestParams& params);

int tfrb_predict(const TfrbModel& model, const CompositionTopology& topology);

// Per-tree votes on the concatenated row, for vote-fraction confidence.
std::vector<int> tfrb_votes(const TfrbModel& model, const CompositionTopology& topology);

// Composite level as the minimum of the components' bootstrapped levels,
// using any per-service predictor.
template <typename PredictFn>
int min_baseline(const CompositionTopology& topology, PredictFn&& predict_service) {
    int best = 0;
    bool first = true;
    for (const auto& service : topology.services) {
        int level = predict_service(service);
        if (first || level < best) {
            best = level;
            first = false;
        }
    }
    return best;
}

}  // namespace repboot
