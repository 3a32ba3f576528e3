#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "repboot/core.hpp"
#include "repboot/credibility.hpp"

namespace repboot {

// Synthetic market generator. Each component service draws independent
// indicator ratings; its latent quality is the planted weighted sum of the
// present ratings. The composite score blends the plain mean of component
// qualities with a dependency-depth weighted mean (deeper invokers weigh
// more), so edge direction carries signal exactly when rho > 0.
struct GeneratorConfig {
    std::uint64_t seed = 0;
    int n_compositions = 100;
    int lvl_count = 5;
    int services_min = 5;
    int services_max = 5;
    // Relative frequency of each topology pattern.
    double sequential_weight = 1.0;
    double parallel_weight = 1.0;
    double hybrid_weight = 1.0;
    // Distinct reusable shapes drawn per (pattern, size); keeps the number
    // of model buckets bounded.
    int shapes_per_pattern = 2;
    // Planted indicator weights, summing to 1. Empty = default schema weights.
    std::map<std::string, double> weights;  // key = "Layer/name"
    double rho = 0.0;          // strength of the depth-weighted term
    double sigma = 0.0;        // stddev of the additive composite noise
    double absent_rate = 0.08; // chance an indicator is missing on a service
    // Beta parameters of the rating distribution, per layer.
    double beta_a = 0.6;
    double beta_b = 0.6;
};

struct GeneratorRecord {
    std::map<std::string, double> weights;
    double rho = 0.0;
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

// One corpus document: schema, samples and optional rater graphs, plus the
// generator settings when the corpus is synthetic.
struct CorpusFile {
    int format_version = 1;
    IndicatorSchema schema;
    int lvl_count = 5;
    std::vector<CompositionSample> samples;
    std::vector<RaterGraph> rater_graphs;
    std::optional<GeneratorRecord> generator;
};

// The indicator universe used by the synthetic generator: four layers that
// mirror a code-hosting market (provider, community, similar services,
// insight metadata).
IndicatorSchema default_schema();
std::map<std::string, double> default_weights();

CorpusFile generate(const GeneratorConfig& config);

// Latent quality of one service under planted weights: sum of
// weight * rating over the present indicators.
double planted_quality(const std::map<std::string, double>& weights,
                       const IndicatorSchema& schema, const ServiceRecord& record);

// Composite score before noise: (1-rho) * mean + rho * depth-weighted mean.
double composite_score(const CompositionTopology& topology,
                       const std::vector<double>& qualities, double rho);

CorpusFile ingest(const std::string& path);
void write_corpus(const CorpusFile& corpus, const std::string& path);
std::string corpus_to_json_text(const CorpusFile& corpus);
CorpusFile corpus_from_json_text(const std::string& text, const std::string& origin = "");

struct FoldSplit {
    std::vector<int> train;
    std::vector<int> test;
};

// Seed-deterministic K-fold partition; fold sizes differ by at most one and
// the test folds partition the index set.
std::vector<FoldSplit> kfold_split(std::size_t n_samples, int k, std::uint64_t seed);

}  // namespace repboot
