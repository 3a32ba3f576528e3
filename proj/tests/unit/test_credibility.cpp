#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "repboot/credibility.hpp"
#include "repboot/errors.hpp"
#include "repboot/rng.hpp"

using namespace repboot;

namespace {

RaterGraph graph_of(int n, std::vector<oracle::Edge> edges) {
    RaterGraph graph;
    for (int i = 0; i < n; ++i) graph.raters.push_back("r" + std::to_string(i));
    for (const auto& e : edges) {
        graph.endorsements.push_back({graph.raters[e.from], graph.raters[e.to], e.weight});
    }
    return graph;
}

}  // namespace

TEST_CASE("mutual endorsement gives both raters credibility 1") {
    auto scores = pagerank_credibility(graph_of(2, {{0, 1, 1.0}, {1, 0, 1.0}}));
    CHECK(scores["r0"] == 1.0);
    CHECK(scores["r1"] == 1.0);
}

TEST_CASE("a three-cycle is fully symmetric") {
    auto scores = pagerank_credibility(graph_of(3, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}}));
    CHECK(scores["r0"] == 1.0);
    CHECK(scores["r1"] == 1.0);
    CHECK(scores["r2"] == 1.0);
}

TEST_CASE("star graph matches the power-iteration oracle") {
    // Three raters endorse one hub; the hub is dangling.
    std::vector<oracle::Edge> edges = {{1, 0, 1.0}, {2, 0, 1.0}, {3, 0, 1.0}};
    std::vector<double> expected = oracle::pagerank(4, edges, 0.85);

    PageRankParams params;
    params.tolerance = 1e-12;
    params.max_iters = 10000;
    std::vector<double> raw = pagerank_raw(graph_of(4, edges), params);
    for (int i = 0; i < 4; ++i) CHECK(raw[i] == doctest::Approx(expected[i]).epsilon(1e-10));

    auto scores = pagerank_credibility(graph_of(4, edges), params);
    CHECK(scores["r0"] == 1.0);
    CHECK(scores["r1"] == doctest::Approx(0.28169014084507044).epsilon(1e-9));
    CHECK(scores["r1"] == scores["r2"]);
    CHECK(scores["r2"] == scores["r3"]);
}

TEST_CASE("raw scores sum to one and survive relabeling and weight doubling") {
    Rng rng(77);
    for (int trial = 0; trial < 10; ++trial) {
        int n = 3 + static_cast<int>(rng.below(8));
        std::vector<oracle::Edge> edges;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i != j && rng.next_double() < 0.4) {
                    edges.push_back({i, j, 0.5 + rng.next_double()});
                }
            }
        }
        if (edges.empty()) continue;
        PageRankParams params;
        params.tolerance = 1e-10;
        params.max_iters = 5000;

        std::vector<double> raw = pagerank_raw(graph_of(n, edges), params);
        double total = 0.0;
        for (double s : raw) total += s;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-8));

        auto base = pagerank_credibility(graph_of(n, edges), params);

        RaterGraph relabeled = graph_of(n, edges);
        for (auto& rater : relabeled.raters) rater = "x" + rater;
        for (auto& e : relabeled.endorsements) {
            e.from = "x" + e.from;
            e.to = "x" + e.to;
        }
        auto renamed = pagerank_credibility(relabeled, params);
        for (int i = 0; i < n; ++i) {
            CHECK(renamed["xr" + std::to_string(i)] ==
                  doctest::Approx(base["r" + std::to_string(i)]).epsilon(1e-12));
        }

        std::vector<oracle::Edge> doubled = edges;
        for (auto& e : doubled) e.weight *= 2.0;
        auto scaled = pagerank_credibility(graph_of(n, doubled), params);
        for (int i = 0; i < n; ++i) {
            CHECK(scaled["r" + std::to_string(i)] ==
                  doctest::Approx(base["r" + std::to_string(i)]).epsilon(1e-12));
        }
    }
}

TEST_CASE("pagerank rejects bad graphs and non-convergence") {
    CHECK_THROWS_AS(pagerank_credibility(RaterGraph{}), DomainError);
    CHECK_THROWS_AS(pagerank_credibility(graph_of(2, {{0, 0, 1.0}})), ParseError);

    PageRankParams tight;
    tight.tolerance = 1e-15;
    tight.max_iters = 2;
    try {
        // The star starts far from its fixed point, so two iterations at a
        // sub-ulp tolerance cannot settle.
        pagerank_credibility(graph_of(4, {{1, 0, 1.0}, {2, 0, 1.0}, {3, 0, 1.0}}), tight);
        FAIL("expected non-convergence");
    } catch (const ConvergenceError& e) {
        CHECK(e.residual() > 0.0);
    }
}

TEST_CASE("aggregate_rating follows the stated formula") {
    CHECK(aggregate_rating({{"a", 1.0, 1.0}, {"b", 1.0, 1.0}}) == doctest::Approx(1.0));
    CHECK(aggregate_rating({{"a", 0.5, 0.8}, {"b", 0.5, 0.4}}) == doctest::Approx(0.6));
    CHECK(aggregate_rating({{"a", 0.9, 0.0}}) == doctest::Approx(0.0));
}

TEST_CASE("aggregate_rating error paths") {
    CHECK_THROWS_AS(aggregate_rating({}), DomainError);
    CHECK_THROWS_AS(aggregate_rating({{"a", 0.0, 0.5}}), DomainError);
    CHECK_THROWS_AS(aggregate_rating({{"a", 1.5, 0.5}}), DomainError);
}

TEST_CASE("aggregate_rating stays in range and ignores event order") {
    Rng rng(123);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 1 + static_cast<int>(rng.below(6));
        std::vector<RatingEvent> events;
        for (int i = 0; i < n; ++i) {
            events.push_back({"r", 0.05 + 0.95 * rng.next_double(), rng.next_double()});
        }
        double value = aggregate_rating(events);
        CHECK(value >= 0.0);
        CHECK(value <= 1.0);
        std::vector<RatingEvent> reversed(events.rbegin(), events.rend());
        CHECK(aggregate_rating(reversed) == doctest::Approx(value).epsilon(1e-12));
    }
}

TEST_CASE("the conventional weighted mean stays available behind the rule switch") {
    std::vector<RatingEvent> events = {{"a", 0.5, 0.8}, {"b", 0.5, 0.4}};
    CHECK(aggregate_rating(events, AggregateRule::CredibilityWeighted) ==
          doctest::Approx((0.4 + 0.2) / 1.2));
}
