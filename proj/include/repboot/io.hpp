#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "repboot/data.hpp"
#include "repboot/eval.hpp"
#include "repboot/methods.hpp"

namespace repboot::io {

// Insertion-ordered documents keep every emitted file deterministic and
// human-diffable; field order is fixed by the writer code.
using Json = nlohmann::ordered_json;

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);
Json parse_json(const std::string& text, const std::string& origin);
Json load_json(const std::string& path);

Json corpus_to_json(const CorpusFile& corpus);
CorpusFile corpus_from_json(const Json& doc, const std::string& origin);

Json rater_graph_to_json(const RaterGraph& graph);
RaterGraph rater_graph_from_json(const Json& doc);
RaterGraph load_rater_graph(const std::string& path);

Json forest_to_json(const DecisionForest& forest);
DecisionForest forest_from_json(const Json& doc);

Json network_to_json(const NetworkParams& params);
NetworkParams network_from_json(const Json& doc);

Json chain_to_json(const ChainedFdnn& chain);
ChainedFdnn chain_from_json(const Json& doc);

// Versioned model files; the method is recorded so `predict` can dispatch.
Json model_to_json(const Model& model, const IndicatorSchema& schema);
std::unique_ptr<Model> model_from_json(const Json& doc);
void save_model(const Model& model, const IndicatorSchema& schema, const std::string& path);
std::unique_ptr<Model> load_model(const std::string& path);

// One composition sample file: {"topology": {...}, "observed_level": n?}.
CompositionSample sample_from_json(const Json& doc);
CompositionSample load_sample(const std::string& path);

GeneratorConfig generator_config_from_json(const Json& doc);
Json generator_config_to_json(const GeneratorConfig& config);

MethodOptions method_options_from_json(const Json& doc);

Json compare_report_to_json(const CompareReport& report);
Json sweep_report_to_json(const SweepReport& report);

Json importance_to_json(const ImportanceReport& report);
// Aligned table: one row per layer (sorted by average importance) followed
// by its member features.
std::string importance_table(const ImportanceReport& report);

Json histogram_to_json(const ConfidenceHistogram& hist);

}  // namespace repboot::io
