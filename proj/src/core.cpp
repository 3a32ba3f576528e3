#include "repboot/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "repboot/errors.hpp"

namespace repboot {

const char* layer_name(Layer layer) {
    switch (layer) {
        case Layer::Provider: return "Provider";
        case Layer::Community: return "Community";
        case Layer::SimilarService: return "SimilarService";
        case Layer::Insight: return "Insight";
    }
    return "?";
}

Layer layer_from_name(const std::string& name) {
    if (name == "Provider") return Layer::Provider;
    if (name == "Community") return Layer::Community;
    if (name == "SimilarService") return Layer::SimilarService;
    if (name == "Insight") return Layer::Insight;
    throw ParseError("unknown layer: " + name);
}

std::string IndicatorId::key() const { return std::string(layer_name(layer)) + "/" + name; }

IndicatorId IndicatorId::from_key(const std::string& key) {
    auto slash = key.find('/');
    if (slash == std::string::npos || slash + 1 == key.size()) {
        throw ParseError("indicator key must look like Layer/name, got: " + key);
    }
    return IndicatorId{layer_from_name(key.substr(0, slash)), key.substr(slash + 1)};
}

IndicatorSchema::IndicatorSchema(std::vector<IndicatorId> indicators)
    : indicators_(std::move(indicators)) {
    for (std::size_t i = 0; i < indicators_.size(); ++i) {
        if (indicators_[i].name.empty()) throw ParseError("indicator name must be nonempty");
        auto [it, inserted] = index_.emplace(indicators_[i], static_cast<int>(i));
        if (!inserted) throw ParseError("duplicate indicator in schema: " + indicators_[i].key());
    }
}

int IndicatorSchema::index_of(const IndicatorId& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? -1 : it->second;
}

void validate_service_record(const ServiceRecord& record, const IndicatorSchema& schema,
                             int lvl_count) {
    for (const auto& [id, value] : record.indicators) {
        if (!schema.contains(id)) {
            throw ParseError("service " + record.service_id + " references indicator " +
                             id.key() + " not present in the schema");
        }
        if (value.type_tag.empty()) {
            throw ParseError("service " + record.service_id + " indicator " + id.key() +
                             " has an empty type_tag");
        }
        if (!(value.rating >= 0.0 && value.rating <= 1.0)) {
            throw ParseError("service " + record.service_id + " indicator " + id.key() +
                             " rating out of [0,1]");
        }
    }
    if (record.observed_level &&
        (*record.observed_level < 1 || *record.observed_level > lvl_count)) {
        throw ParseError("service " + record.service_id + " observed_level out of range");
    }
}

const char* pattern_name(PatternKind pattern) {
    switch (pattern) {
        case PatternKind::Sequential: return "Sequential";
        case PatternKind::Parallel: return "Parallel";
        case PatternKind::Hybrid: return "Hybrid";
    }
    return "?";
}

PatternKind pattern_from_name(const std::string& name) {
    if (name == "Sequential") return PatternKind::Sequential;
    if (name == "Parallel") return PatternKind::Parallel;
    if (name == "Hybrid") return PatternKind::Hybrid;
    throw ParseError("unknown pattern: " + name);
}

int CompositionTopology::index_of_service(const std::string& service_id) const {
    for (std::size_t i = 0; i < services.size(); ++i) {
        if (services[i].service_id == service_id) return static_cast<int>(i);
    }
    return -1;
}

int quantize_level(double rating, int lvl_count) {
    if (lvl_count < 2) throw DomainError("lvl_count must be at least 2");
    if (!(rating >= 0.0 && rating <= 1.0)) {
        throw DomainError("rating must lie in [0,1]");
    }
    if (rating >= 1.0) return lvl_count;
    int level = static_cast<int>(std::floor(rating * lvl_count)) + 1;
    return std::clamp(level, 1, lvl_count);
}

namespace {

struct AdjacencyView {
    std::vector<std::vector<int>> out;
    std::vector<std::vector<int>> undirected;
};

AdjacencyView build_adjacency(const CompositionTopology& topology) {
    const int n = static_cast<int>(topology.services.size());
    AdjacencyView adj;
    adj.out.resize(n);
    adj.undirected.resize(n);
    for (const auto& [from, to] : topology.edges) {
        int a = topology.index_of_service(from);
        int b = topology.index_of_service(to);
        if (a < 0 || b < 0) {
            throw TopologyError("dangling_edge",
                                "edge " + from + " -> " + to + " references unknown service");
        }
        adj.out[a].push_back(b);
        adj.undirected[a].push_back(b);
        adj.undirected[b].push_back(a);
    }
    return adj;
}

}  // namespace

void validate_topology(const CompositionTopology& topology) {
    const int n = static_cast<int>(topology.services.size());
    if (n == 0) throw TopologyError("disconnected", "topology has no services");

    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (topology.services[i].service_id == topology.services[j].service_id) {
                throw TopologyError("dangling_edge", "duplicate service id: " +
                                                         topology.services[i].service_id);
            }
        }
    }

    AdjacencyView adj = build_adjacency(topology);

    // Cycle detection with white/gray/black marking; on a back edge the gray
    // stack segment is the cycle.
    enum class Color { White, Gray, Black };
    std::vector<Color> color(n, Color::White);
    std::vector<int> stack;
    // Iterative DFS keeping (vertex, next-child) frames.
    for (int start = 0; start < n; ++start) {
        if (color[start] != Color::White) continue;
        std::vector<std::pair<int, std::size_t>> frames{{start, 0}};
        color[start] = Color::Gray;
        stack.push_back(start);
        while (!frames.empty()) {
            auto& [v, next] = frames.back();
            if (next < adj.out[v].size()) {
                int child = adj.out[v][next++];
                if (color[child] == Color::Gray) {
                    std::ostringstream oss;
                    oss << "cycle detected: ";
                    auto it = std::find(stack.begin(), stack.end(), child);
                    for (; it != stack.end(); ++it) {
                        oss << topology.services[*it].service_id << " -> ";
                    }
                    oss << topology.services[child].service_id;
                    throw TopologyError("cycle", oss.str());
                }
                if (color[child] == Color::White) {
                    color[child] = Color::Gray;
                    stack.push_back(child);
                    frames.emplace_back(child, 0);
                }
            } else {
                color[v] = Color::Black;
                stack.pop_back();
                frames.pop_back();
            }
        }
    }

    // Weak connectivity over the undirected view.
    std::vector<bool> seen(n, false);
    std::vector<int> queue{0};
    seen[0] = true;
    while (!queue.empty()) {
        int v = queue.back();
        queue.pop_back();
        for (int u : adj.undirected[v]) {
            if (!seen[u]) {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        if (!seen[i]) {
            throw TopologyError("disconnected", "service " + topology.services[i].service_id +
                                                    " is not connected to the rest");
        }
    }
}

bool topology_is_valid(const CompositionTopology& topology) {
    try {
        validate_topology(topology);
        return true;
    } catch (const TopologyError&) {
        return false;
    }
}

std::vector<int> dependency_depths(const CompositionTopology& topology) {
    validate_topology(topology);
    const int n = static_cast<int>(topology.services.size());
    AdjacencyView adj = build_adjacency(topology);

    // Longest path to a sink via memoized DFS; acyclicity already checked.
    std::vector<int> depth(n, 0);
    std::vector<bool> done(n, false);
    auto compute = [&](auto&& self, int v) -> int {
        if (done[v]) return depth[v];
        int best = 0;
        for (int child : adj.out[v]) best = std::max(best, self(self, child));
        depth[v] = best + 1;
        done[v] = true;
        return depth[v];
    };
    for (int v = 0; v < n; ++v) compute(compute, v);
    return depth;
}

}  // namespace repboot
