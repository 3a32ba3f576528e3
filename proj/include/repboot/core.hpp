#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace repboot {

// Indicator group. Importance reports aggregate per layer.
enum class Layer { Provider, Community, SimilarService, Insight };

const char* layer_name(Layer layer);
Layer layer_from_name(const std::string& name);

// Identity of one reputation indicator within a schema.
struct IndicatorId {
    Layer layer = Layer::Provider;
    std::string name;

    auto operator<=>(const IndicatorId&) const = default;
    std::string key() const;  // "Layer/name", used as JSON map key
    static IndicatorId from_key(const std::string& key);
};

// The universe of indicators a corpus may reference. Order is significant:
// it defines feature column order everywhere downstream.
class IndicatorSchema {
public:
    IndicatorSchema() = default;
    explicit IndicatorSchema(std::vector<IndicatorId> indicators);

    const std::vector<IndicatorId>& indicators() const { return indicators_; }
    std::size_t size() const { return indicators_.size(); }
    // Index of an indicator, or -1 when not part of the schema.
    int index_of(const IndicatorId& id) const;
    bool contains(const IndicatorId& id) const { return index_of(id) >= 0; }

private:
    std::vector<IndicatorId> indicators_;
    std::map<IndicatorId, int> index_;
};

// Observed value of one indicator: a categorical tag plus a rating in [0,1].
// The tag value "U" is reserved for an unknown type.
struct IndicatorValue {
    std::string type_tag = "U";
    double rating = 0.0;
};

constexpr const char* kUnknownTypeTag = "U";

// One component service. Indicators are sparse: an absent entry means the
// indicator does not apply to this service, which is distinct from a present
// entry with tag "U".
struct ServiceRecord {
    std::string service_id;
    std::map<IndicatorId, IndicatorValue> indicators;
    std::optional<int> observed_level;
};

void validate_service_record(const ServiceRecord& record, const IndicatorSchema& schema,
                             int lvl_count);

enum class PatternKind { Sequential, Parallel, Hybrid };

const char* pattern_name(PatternKind pattern);
PatternKind pattern_from_name(const std::string& name);

// Directed acyclic invocation graph over component services. Edges point
// from the invoking service to the invoked one.
struct CompositionTopology {
    std::vector<ServiceRecord> services;
    std::vector<std::pair<std::string, std::string>> edges;  // (invoker, invoked)
    PatternKind pattern = PatternKind::Sequential;

    int index_of_service(const std::string& service_id) const;
};

// A labelled composition: the unit of training data.
struct CompositionSample {
    CompositionTopology topology;
    std::optional<int> observed_level;
};

// Maps a normalized rating onto one of lvl_count levels. Levels tile [0,1]
// as half-open intervals [(i-1)/L, i/L), the top level closed at 1.
int quantize_level(double rating, int lvl_count);

// Checks acyclicity (three-color depth-first search), edge endpoint validity
// and weak connectivity. Throws TopologyError with codes "cycle" (message
// lists the offending vertex loop), "dangling_edge" or "disconnected".
void validate_topology(const CompositionTopology& topology);

// True when the topology passes validation.
bool topology_is_valid(const CompositionTopology& topology);

// Dependency depth per service: 1 + length of the longest directed path from
// the service to a sink. Requires a valid topology.
std::vector<int> dependency_depths(const CompositionTopology& topology);

}  // namespace repboot
