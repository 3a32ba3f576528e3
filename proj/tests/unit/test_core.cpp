#include <doctest.h>

#include "repboot/core.hpp"
#include "repboot/errors.hpp"
#include "repboot/rng.hpp"

using namespace repboot;

namespace {

CompositionTopology make_topology(int n, std::vector<std::pair<int, int>> edges) {
    CompositionTopology topology;
    for (int i = 0; i < n; ++i) {
        ServiceRecord record;
        record.service_id = "s" + std::to_string(i + 1);
        topology.services.push_back(std::move(record));
    }
    for (const auto& [a, b] : edges) {
        topology.edges.emplace_back(topology.services[a].service_id,
                                    topology.services[b].service_id);
    }
    return topology;
}

}  // namespace

TEST_CASE("quantize_level pins the interval convention") {
    CHECK(quantize_level(0.5, 3) == 2);
    CHECK(quantize_level(1.0, 5) == 5);
    // 0.2 opens the second interval: intervals are half-open below the top.
    CHECK(quantize_level(0.2, 5) == 2);
    CHECK(quantize_level(0.0, 2) == 1);
    CHECK(quantize_level(0.999999, 5) == 5);
}

TEST_CASE("quantize_level rejects out-of-domain input") {
    CHECK_THROWS_AS(quantize_level(-0.1, 3), DomainError);
    CHECK_THROWS_AS(quantize_level(1.1, 3), DomainError);
    CHECK_THROWS_AS(quantize_level(0.5, 1), DomainError);
}

TEST_CASE("quantize_level midpoint round-trip and monotonicity") {
    for (int lvl : {2, 3, 5, 10, 45}) {
        for (int i = 1; i <= lvl; ++i) {
            CHECK(quantize_level((i - 0.5) / lvl, lvl) == i);
        }
        int previous = 1;
        for (int step = 0; step <= 1000; ++step) {
            int level = quantize_level(step / 1000.0, lvl);
            CHECK(level >= previous);
            previous = level;
        }
    }
}

TEST_CASE("validate_topology accepts a chain") {
    CHECK_NOTHROW(validate_topology(make_topology(3, {{0, 1}, {1, 2}})));
}

TEST_CASE("validate_topology reports a two-cycle with its vertices") {
    try {
        validate_topology(make_topology(2, {{0, 1}, {1, 0}}));
        FAIL("expected a cycle error");
    } catch (const TopologyError& e) {
        CHECK(e.code() == "cycle");
        CHECK(std::string(e.what()).find("s1") != std::string::npos);
        CHECK(std::string(e.what()).find("s2") != std::string::npos);
    }
}

TEST_CASE("validate_topology rejects dangling edges and disconnected graphs") {
    CompositionTopology dangling = make_topology(2, {});
    dangling.edges.emplace_back("s1", "nope");
    CHECK_THROWS_AS(validate_topology(dangling), TopologyError);

    CompositionTopology split = make_topology(4, {{0, 1}, {2, 3}});
    try {
        validate_topology(split);
        FAIL("expected a disconnected error");
    } catch (const TopologyError& e) {
        CHECK(e.code() == "disconnected");
    }
}

TEST_CASE("the ten-service composition graph validates") {
    // Music-system shaped topology: a root composite invoking controller,
    // web client and an integration hub that fans out to three platform
    // APIs, all on top of a server with two foundation services.
    CompositionTopology topology = make_topology(
        10, {{0, 1}, {0, 2}, {0, 3}, {3, 4}, {3, 5}, {3, 6}, {0, 7}, {7, 8}, {7, 9}});
    CHECK_NOTHROW(validate_topology(topology));
    std::vector<int> depths = dependency_depths(topology);
    CHECK(depths[0] == 3);
    CHECK(depths[3] == 2);
    CHECK(depths[4] == 1);
}

TEST_CASE("random DAGs validate and any back edge flips to a cycle") {
    Rng rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
        int n = 3 + static_cast<int>(rng.below(10));
        std::vector<std::pair<int, int>> edges;
        for (int i = 1; i < n; ++i) {
            edges.emplace_back(static_cast<int>(rng.below(i)), i);
        }
        for (int extra = 0; extra < n; ++extra) {
            int a = static_cast<int>(rng.below(n - 1));
            int b = a + 1 + static_cast<int>(rng.below(n - a - 1));
            edges.emplace_back(a, b);
        }
        CompositionTopology topology = make_topology(n, edges);
        CHECK_NOTHROW(validate_topology(topology));

        // Reversing any edge that closes a path makes a cycle.
        auto [a, b] = edges[rng.below(edges.size())];
        CompositionTopology cyclic = topology;
        cyclic.edges.emplace_back(cyclic.services[b].service_id,
                                  cyclic.services[a].service_id);
        CHECK_THROWS_AS(validate_topology(cyclic), TopologyError);
    }
}

TEST_CASE("service record validation names the offending key") {
    IndicatorSchema schema({{Layer::Provider, "p"}});
    ServiceRecord record;
    record.service_id = "svc";
    record.indicators[{Layer::Community, "owner"}] = IndicatorValue{"U", 0.5};
    try {
        validate_service_record(record, schema, 5);
        FAIL("expected a schema violation");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("Community/owner") != std::string::npos);
    }
}

TEST_CASE("indicator keys round-trip") {
    IndicatorId id{Layer::SimilarService, "similar_repo_reputation"};
    CHECK(IndicatorId::from_key(id.key()) == id);
    CHECK_THROWS_AS(IndicatorId::from_key("nolayer"), ParseError);
}
