#include "repboot/credibility.hpp"

#include <cmath>
#include <unordered_map>

#include "repboot/errors.hpp"
#include "repboot/kernels.hpp"

namespace repboot {

namespace {

struct CompiledGraph {
    int n = 0;
    // Outgoing edges grouped per source, weights normalized by out-weight sum.
    std::vector<std::vector<std::pair<int, double>>> out;
    std::vector<bool> dangling;
};

CompiledGraph compile(const RaterGraph& graph) {
    CompiledGraph cg;
    cg.n = static_cast<int>(graph.raters.size());
    if (cg.n == 0) throw DomainError("rater graph is empty");

    std::unordered_map<std::string, int> index;
    index.reserve(graph.raters.size());
    for (int i = 0; i < cg.n; ++i) {
        auto [it, inserted] = index.emplace(graph.raters[i], i);
        if (!inserted) throw ParseError("duplicate rater id: " + graph.raters[i]);
    }

    cg.out.resize(cg.n);
    std::vector<double> out_weight(cg.n, 0.0);
    for (const auto& e : graph.endorsements) {
        auto from = index.find(e.from);
        auto to = index.find(e.to);
        if (from == index.end() || to == index.end()) {
            throw ParseError("endorsement references unknown rater: " + e.from + " -> " + e.to);
        }
        if (e.from == e.to) throw ParseError("self-endorsement is not allowed: " + e.from);
        if (!(e.weight >= 0.0)) throw ParseError("endorsement weight must be >= 0");
        if (e.weight == 0.0) continue;
        cg.out[from->second].emplace_back(to->second, e.weight);
        out_weight[from->second] += e.weight;
    }
    cg.dangling.resize(cg.n, false);
    for (int i = 0; i < cg.n; ++i) {
        if (out_weight[i] == 0.0) {
            cg.dangling[i] = true;
        } else {
            for (auto& [to, w] : cg.out[i]) w /= out_weight[i];
        }
    }
    return cg;
}

}  // namespace

std::vector<double> pagerank_raw(const RaterGraph& graph, const PageRankParams& params) {
    if (!(params.damping > 0.0 && params.damping < 1.0)) {
        throw ConfigError("damping must lie strictly between 0 and 1");
    }
    if (!(params.tolerance > 0.0)) throw ConfigError("tolerance must be positive");

    CompiledGraph cg = compile(graph);
    const int n = cg.n;
    const double d = params.damping;
    std::vector<double> score(n, 1.0 / n);
    std::vector<double> next(n, 0.0);

    double residual = 0.0;
    for (int iter = 0; iter < params.max_iters; ++iter) {
        double dangling_mass = 0.0;
        for (int v = 0; v < n; ++v) {
            if (cg.dangling[v]) dangling_mass += score[v];
        }
        const double base = (1.0 - d) / n + d * dangling_mass / n;
        std::fill(next.begin(), next.end(), base);
        for (int v = 0; v < n; ++v) {
            const double sv = d * score[v];
            for (const auto& [to, w] : cg.out[v]) next[to] += sv * w;
        }
        residual = 0.0;
        for (int v = 0; v < n; ++v) residual += std::abs(next[v] - score[v]);
        score.swap(next);
        if (residual < params.tolerance) return score;
    }
    throw ConvergenceError("pagerank did not converge after " +
                               std::to_string(params.max_iters) +
                               " iterations (residual " + std::to_string(residual) + ")",
                           residual);
}

std::map<std::string, double> pagerank_credibility(const RaterGraph& graph,
                                                   const PageRankParams& params) {
    std::vector<double> score = pagerank_raw(graph, params);
    double top = kernels::max_value(score.data(), score.size());
    if (top > 0.0) kernels::scale(1.0 / top, score.data(), score.size());
    std::map<std::string, double> result;
    for (std::size_t i = 0; i < graph.raters.size(); ++i) {
        result[graph.raters[i]] = score[i];
    }
    return result;
}

double aggregate_rating(const std::vector<RatingEvent>& events, AggregateRule rule) {
    if (events.empty()) {
        throw DomainError("undefined_aggregate: no rating events");
    }
    double numerator = 0.0;
    double rating_sum = 0.0;
    double credibility_sum = 0.0;
    for (const auto& e : events) {
        if (!(e.rating >= 0.0 && e.rating <= 1.0)) {
            throw DomainError("rating out of [0,1] for rater " + e.rater);
        }
        if (!(e.credibility >= 0.0 && e.credibility <= 1.0)) {
            throw DomainError("credibility out of [0,1] for rater " + e.rater);
        }
        numerator += e.rating * e.credibility;
        rating_sum += e.rating;
        credibility_sum += e.credibility;
    }
    double denominator =
        rule == AggregateRule::RatingWeighted ? rating_sum : credibility_sum;
    if (denominator == 0.0) {
        throw DomainError("undefined_aggregate: denominator is zero");
    }
    return numerator / denominator;
}

}  // namespace repboot
