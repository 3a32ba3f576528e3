#include "repboot/data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "repboot/errors.hpp"
#include "repboot/rng.hpp"

namespace repboot {

IndicatorSchema default_schema() {
    return IndicatorSchema({
        {Layer::Provider, "contributor_reputation"},
        {Layer::Community, "owner_reputation"},
        {Layer::Community, "owner_repo_reputation"},
        {Layer::Community, "owner_type"},
        {Layer::SimilarService, "similar_repo_reputation"},
        {Layer::SimilarService, "similar_owner_reputation"},
        {Layer::Insight, "watchers"},
        {Layer::Insight, "dependents"},
        {Layer::Insight, "dependencies"},
        {Layer::Insight, "commit_rate"},
        {Layer::Insight, "forks"},
    });
}

std::map<std::string, double> default_weights() {
    return {
        {"Provider/contributor_reputation", 0.10},
        {"Community/owner_reputation", 0.20},
        {"Community/owner_repo_reputation", 0.22},
        {"Community/owner_type", 0.03},
        {"SimilarService/similar_repo_reputation", 0.02},
        {"SimilarService/similar_owner_reputation", 0.03},
        {"Insight/watchers", 0.12},
        {"Insight/dependents", 0.10},
        {"Insight/dependencies", 0.08},
        {"Insight/commit_rate", 0.06},
        {"Insight/forks", 0.04},
    };
}

double planted_quality(const std::map<std::string, double>& weights,
                       const IndicatorSchema& schema, const ServiceRecord& record) {
    double quality = 0.0;
    for (const auto& id : schema.indicators()) {
        auto it = record.indicators.find(id);
        if (it == record.indicators.end()) continue;
        auto w = weights.find(id.key());
        if (w == weights.end()) continue;
        quality += w->second * it->second.rating;
    }
    return quality;
}

double composite_score(const CompositionTopology& topology,
                       const std::vector<double>& qualities, double rho) {
    std::vector<int> depths = dependency_depths(topology);
    double mean = 0.0;
    double weighted = 0.0;
    double depth_total = 0.0;
    for (std::size_t i = 0; i < qualities.size(); ++i) {
        mean += qualities[i];
        weighted += depths[i] * qualities[i];
        depth_total += depths[i];
    }
    mean /= static_cast<double>(qualities.size());
    weighted /= depth_total;
    return (1.0 - rho) * mean + rho * weighted;
}

namespace {

struct Shape {
    PatternKind pattern;
    std::vector<std::pair<int, int>> edges;  // indices into the service list
};

Shape sequential_shape(int m, Rng& rng) {
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    Shape shape;
    shape.pattern = PatternKind::Sequential;
    for (int i = 0; i + 1 < m; ++i) shape.edges.emplace_back(order[i], order[i + 1]);
    return shape;
}

Shape parallel_shape(int m, Rng& rng) {
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    Shape shape;
    shape.pattern = PatternKind::Parallel;
    for (int i = 1; i < m; ++i) shape.edges.emplace_back(order[0], order[i]);
    return shape;
}

Shape hybrid_shape(int m, Rng& rng) {
    // Random connected DAG: every service after the root is invoked by an
    // earlier one; extra forward edges mix chain and fan-out structure.
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    Shape shape;
    shape.pattern = PatternKind::Hybrid;
    for (int i = 1; i < m; ++i) {
        int parent = static_cast<int>(rng.below(static_cast<std::uint64_t>(i)));
        shape.edges.emplace_back(order[parent], order[i]);
    }
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            bool already = false;
            for (const auto& [a, b] : shape.edges) {
                if (a == order[i] && b == order[j]) already = true;
            }
            if (!already && rng.next_double() < 0.15) {
                shape.edges.emplace_back(order[i], order[j]);
            }
        }
    }
    return shape;
}

double clip01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

CorpusFile generate(const GeneratorConfig& config) {
    if (config.n_compositions < 1) throw ConfigError("n_compositions must be >= 1");
    if (config.lvl_count < 2) throw ConfigError("lvl_count must be >= 2");
    if (config.services_min < 1 || config.services_max < config.services_min) {
        throw ConfigError("invalid services range");
    }
    if (!(config.rho >= 0.0 && config.rho <= 1.0)) throw ConfigError("rho must lie in [0,1]");
    if (!(config.sigma >= 0.0)) throw ConfigError("sigma must be >= 0");
    if (!(config.absent_rate >= 0.0 && config.absent_rate < 1.0)) {
        throw ConfigError("absent_rate must lie in [0,1)");
    }
    if (config.shapes_per_pattern < 1) throw ConfigError("shapes_per_pattern must be >= 1");

    CorpusFile corpus;
    corpus.schema = default_schema();
    corpus.lvl_count = config.lvl_count;

    std::map<std::string, double> weights =
        config.weights.empty() ? default_weights() : config.weights;
    double weight_sum = 0.0;
    for (const auto& [key, w] : weights) {
        if (w < 0.0) throw ConfigError("planted weights must be nonnegative");
        if (!corpus.schema.contains(IndicatorId::from_key(key))) {
            throw ConfigError("planted weight references unknown indicator " + key);
        }
        weight_sum += w;
    }
    if (weight_sum <= 0.0) throw ConfigError("planted weights must not all vanish");
    for (auto& [key, w] : weights) w /= weight_sum;

    double pattern_total =
        config.sequential_weight + config.parallel_weight + config.hybrid_weight;
    if (pattern_total <= 0.0) throw ConfigError("pattern mix must not all vanish");

    Rng root(config.seed, 0x636f7270);

    // Pre-draw the reusable shape pool per (pattern, size). Sequential
    // shapes come in reversed pairs: across the pool every service spends as
    // much time deep as shallow, so edge direction is informative per sample
    // yet washes out for any model that cannot see the edges.
    Rng shape_rng = root.substream(1);
    std::map<std::pair<int, int>, std::vector<Shape>> shapes;  // (pattern, m)
    for (int m = config.services_min; m <= config.services_max; ++m) {
        for (int p = 0; p < 3; ++p) {
            auto& pool = shapes[{p, m}];
            for (int s = 0; s < config.shapes_per_pattern; ++s) {
                if (p == 0) {
                    if (s % 2 == 1 && m > 1) {
                        Shape reversed = pool.back();
                        for (auto& [a, b] : reversed.edges) std::swap(a, b);
                        std::reverse(reversed.edges.begin(), reversed.edges.end());
                        pool.push_back(std::move(reversed));
                    } else {
                        pool.push_back(sequential_shape(m, shape_rng));
                    }
                }
                if (p == 1) pool.push_back(parallel_shape(m, shape_rng));
                if (p == 2) pool.push_back(hybrid_shape(m, shape_rng));
            }
        }
    }

    for (int c = 0; c < config.n_compositions; ++c) {
        Rng rng = root.substream(1000 + static_cast<std::uint64_t>(c));

        int m = config.services_min +
                static_cast<int>(rng.below(
                    static_cast<std::uint64_t>(config.services_max - config.services_min + 1)));
        double pick = rng.next_double() * pattern_total;
        int pattern = pick < config.sequential_weight                           ? 0
                      : pick < config.sequential_weight + config.parallel_weight ? 1
                                                                                 : 2;
        if (m == 1) pattern = 0;
        const auto& pool = shapes[{pattern, m}];
        const Shape& shape = pool[rng.below(pool.size())];

        CompositionSample sample;
        sample.topology.pattern = shape.pattern;

        std::vector<double> qualities;
        for (int s = 0; s < m; ++s) {
            ServiceRecord record;
            record.service_id = "s" + std::to_string(s + 1);
            bool any_present = false;
            for (const auto& id : corpus.schema.indicators()) {
                if (config.absent_rate > 0.0 && rng.next_double() < config.absent_rate) {
                    continue;
                }
                IndicatorValue value;
                value.rating = rng.beta(config.beta_a, config.beta_b);
                if (id.name == "owner_type") {
                    value.type_tag = rng.next_double() < 0.5 ? "User" : "Organization";
                } else {
                    value.type_tag = kUnknownTypeTag;
                }
                record.indicators[id] = value;
                any_present = true;
            }
            if (!any_present) {
                IndicatorId first = corpus.schema.indicators().front();
                IndicatorValue value;
                value.rating = rng.beta(config.beta_a, config.beta_b);
                record.indicators[first] = value;
            }
            double quality = clip01(planted_quality(weights, corpus.schema, record));
            record.observed_level = quantize_level(quality, config.lvl_count);
            qualities.push_back(quality);
            sample.topology.services.push_back(std::move(record));
        }

        for (const auto& [a, b] : shape.edges) {
            sample.topology.edges.emplace_back(sample.topology.services[a].service_id,
                                               sample.topology.services[b].service_id);
        }

        double score = composite_score(sample.topology, qualities, config.rho);
        if (config.sigma > 0.0) score += config.sigma * rng.normal();
        sample.observed_level = quantize_level(clip01(score), config.lvl_count);
        corpus.samples.push_back(std::move(sample));
    }

    GeneratorRecord record;
    record.weights = weights;
    record.rho = config.rho;
    record.sigma = config.sigma;
    record.seed = config.seed;
    corpus.generator = record;
    return corpus;
}

std::vector<FoldSplit> kfold_split(std::size_t n_samples, int k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("k must be at least 2");
    if (static_cast<std::size_t>(k) > n_samples) {
        throw ConfigError("k exceeds the number of samples");
    }
    std::vector<int> order(n_samples);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed, 0x666f6c64);
    rng.shuffle(order);

    std::vector<FoldSplit> folds(k);
    for (std::size_t i = 0; i < n_samples; ++i) {
        folds[i % k].test.push_back(order[i]);
    }
    for (int f = 0; f < k; ++f) {
        std::sort(folds[f].test.begin(), folds[f].test.end());
        for (std::size_t i = 0; i < n_samples; ++i) {
            if (!std::binary_search(folds[f].test.begin(), folds[f].test.end(),
                                    static_cast<int>(i))) {
                folds[f].train.push_back(static_cast<int>(i));
            }
        }
    }
    return folds;
}

}  // namespace repboot
