#pragma once

#include <map>
#include <string>
#include <vector>

namespace repboot {

// Who-rates-whom network among raters. An endorsement from A to B means A
// rates B; accumulated endorsements let PageRank surface credible raters.
struct RaterGraph {
    std::vector<std::string> raters;
    struct Endorsement {
        std::string from;
        std::string to;
        double weight = 1.0;
    };
    std::vector<Endorsement> endorsements;
};

struct PageRankParams {
    double damping = 0.85;
    double tolerance = 1e-8;
    int max_iters = 200;
};

// One consumer rating together with the rater's credibility.
struct RatingEvent {
    std::string rater;
    double rating = 0.0;       // [0,1]
    double credibility = 0.0;  // [0,1]
};

enum class AggregateRule {
    RatingWeighted,      // sum(r*c) / sum(r)
    CredibilityWeighted  // sum(r*c) / sum(c), the conventional weighted mean
};

// Rater credibility in [0,1]: PageRank over the endorsement graph (power
// iteration, dangling mass spread uniformly), max-normalized so the top
// rater scores exactly 1.
std::map<std::string, double> pagerank_credibility(const RaterGraph& graph,
                                                   const PageRankParams& params = {});

// Raw PageRank scores (summing to 1) in rater order; exposed for tests.
std::vector<double> pagerank_raw(const RaterGraph& graph, const PageRankParams& params = {});

// Aggregates rating events into one normalized rating.
// Throws DomainError("undefined_aggregate") on an empty list or when the
// denominator vanishes.
double aggregate_rating(const std::vector<RatingEvent>& events,
                        AggregateRule rule = AggregateRule::RatingWeighted);

}  // namespace repboot
