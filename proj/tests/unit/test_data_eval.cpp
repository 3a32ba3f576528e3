#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "repboot/data.hpp"
#include "repboot/errors.hpp"
#include "repboot/eval.hpp"
#include "repboot/rng.hpp"

using namespace repboot;

namespace {

GeneratorConfig small_config() {
    GeneratorConfig config;
    config.seed = 11;
    config.n_compositions = 25;
    config.lvl_count = 5;
    config.services_min = 3;
    config.services_max = 4;
    config.rho = 0.5;
    config.sigma = 0.0;
    return config;
}

// Longest path to a sink, recomputed from scratch.
int oracle_depth(const CompositionTopology& topology, int index) {
    int best = 0;
    for (const auto& [from, to] : topology.edges) {
        if (topology.index_of_service(from) == index) {
            best = std::max(best, oracle_depth(topology, topology.index_of_service(to)));
        }
    }
    return best + 1;
}

}  // namespace

TEST_CASE("generation is deterministic under a seed") {
    CorpusFile a = generate(small_config());
    CorpusFile b = generate(small_config());
    CHECK(corpus_to_json_text(a) == corpus_to_json_text(b));

    GeneratorConfig other = small_config();
    other.seed = 12;
    CHECK(corpus_to_json_text(generate(other)) != corpus_to_json_text(a));
}

TEST_CASE("a degenerate generator is fully determined by one indicator") {
    GeneratorConfig config = small_config();
    config.sigma = 0.0;
    config.rho = 0.0;
    config.absent_rate = 0.0;
    config.services_min = config.services_max = 1;
    config.weights = {{"Provider/contributor_reputation", 1.0}};
    CorpusFile corpus = generate(config);
    for (const auto& sample : corpus.samples) {
        const ServiceRecord& only = sample.topology.services[0];
        double rating =
            only.indicators.at({Layer::Provider, "contributor_reputation"}).rating;
        CHECK(*sample.observed_level == quantize_level(rating, corpus.lvl_count));
        CHECK(*sample.observed_level == *only.observed_level);
    }
}

TEST_CASE("noise-free labels recompute from the recorded generator settings") {
    GeneratorConfig config = small_config();
    config.sigma = 0.0;
    CorpusFile corpus = generate(config);
    REQUIRE(corpus.generator.has_value());
    for (const auto& sample : corpus.samples) {
        // Re-derive every component quality and the depth blend by hand.
        std::vector<double> qualities;
        double mean = 0.0;
        double weighted = 0.0;
        double depth_total = 0.0;
        for (std::size_t i = 0; i < sample.topology.services.size(); ++i) {
            const auto& service = sample.topology.services[i];
            double q = 0.0;
            for (const auto& [id, value] : service.indicators) {
                auto w = corpus.generator->weights.find(id.key());
                if (w != corpus.generator->weights.end()) q += w->second * value.rating;
            }
            q = std::clamp(q, 0.0, 1.0);
            CHECK(*service.observed_level == quantize_level(q, corpus.lvl_count));
            int depth = oracle_depth(sample.topology, static_cast<int>(i));
            mean += q;
            weighted += depth * q;
            depth_total += depth;
        }
        mean /= sample.topology.services.size();
        weighted /= depth_total;
        double score = (1.0 - corpus.generator->rho) * mean + corpus.generator->rho * weighted;
        score = std::clamp(score, 0.0, 1.0);
        CHECK(*sample.observed_level == quantize_level(score, corpus.lvl_count));
    }
}

TEST_CASE("depth weighting reads edge direction, the plain mean does not") {
    CompositionTopology chain;
    for (int i = 0; i < 3; ++i) {
        ServiceRecord r;
        r.service_id = "s" + std::to_string(i + 1);
        chain.services.push_back(r);
    }
    chain.edges = {{"s1", "s2"}, {"s2", "s3"}};
    CompositionTopology reversed = chain;
    reversed.edges = {{"s3", "s2"}, {"s2", "s1"}};

    std::vector<double> qualities = {0.9, 0.5, 0.1};
    CHECK(composite_score(chain, qualities, 0.0) ==
          doctest::Approx(composite_score(reversed, qualities, 0.0)));
    CHECK(composite_score(chain, qualities, 0.6) == doctest::Approx(0.58));
    CHECK(composite_score(reversed, qualities, 0.6) == doctest::Approx(0.42));
}

TEST_CASE("corpus files round-trip byte-identically") {
    CorpusFile corpus = generate(small_config());
    std::string text = corpus_to_json_text(corpus);
    CorpusFile parsed = corpus_from_json_text(text, "roundtrip");
    CHECK(corpus_to_json_text(parsed) == text);
    CHECK(parsed.samples.size() == corpus.samples.size());
}

TEST_CASE("ingest rejects unknown indicators naming the key") {
    CorpusFile corpus = generate(small_config());
    std::string text = corpus_to_json_text(corpus);
    std::string needle = "\"Provider/contributor_reputation\"";
    // Rename one indicator reference inside a sample only, leaving the
    // schema untouched.
    std::size_t in_samples = text.find("\"samples\"");
    std::size_t at = text.find(needle, in_samples);
    REQUIRE(at != std::string::npos);
    text.replace(at, needle.size(), "\"Provider/made_up_indicator\"");
    try {
        corpus_from_json_text(text, "bad");
        FAIL("expected a schema violation");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("made_up_indicator") != std::string::npos);
        CHECK(std::string(e.what()).find("sample") != std::string::npos);
    }
}

TEST_CASE("ingest rejects cyclic topologies") {
    CorpusFile corpus = generate(small_config());
    CompositionSample& sample = corpus.samples[0];
    sample.topology.edges.emplace_back(sample.topology.edges[0].second,
                                       sample.topology.edges[0].first);
    CHECK_THROWS_AS(corpus_from_json_text(corpus_to_json_text(corpus), "cyclic"), ParseError);
}

TEST_CASE("an empty sample list is a valid corpus") {
    CorpusFile corpus;
    corpus.schema = default_schema();
    CorpusFile parsed = corpus_from_json_text(corpus_to_json_text(corpus), "empty");
    CHECK(parsed.samples.empty());
}

TEST_CASE("k-fold splitting partitions the index set evenly") {
    SUBCASE("ten samples, five folds of two") {
        std::vector<FoldSplit> folds = kfold_split(10, 5, 3);
        REQUIRE(folds.size() == 5);
        std::set<int> seen;
        for (const auto& fold : folds) {
            CHECK(fold.test.size() == 2);
            CHECK(fold.train.size() == 8);
            for (int i : fold.test) {
                CHECK(seen.insert(i).second);  // each index tested exactly once
            }
        }
        CHECK(seen.size() == 10);
    }
    SUBCASE("uneven split differs by at most one") {
        std::vector<FoldSplit> folds = kfold_split(11, 4, 9);
        std::size_t smallest = 11, largest = 0;
        for (const auto& fold : folds) {
            smallest = std::min(smallest, fold.test.size());
            largest = std::max(largest, fold.test.size());
        }
        CHECK(largest - smallest <= 1);
    }
    SUBCASE("seeded splits are stable") {
        std::vector<FoldSplit> a = kfold_split(20, 5, 42);
        std::vector<FoldSplit> b = kfold_split(20, 5, 42);
        for (int f = 0; f < 5; ++f) {
            CHECK(a[f].test == b[f].test);
            CHECK(a[f].train == b[f].train);
        }
        CHECK(kfold_split(20, 5, 43)[0].test != a[0].test);
    }
    SUBCASE("bad fold counts are rejected") {
        CHECK_THROWS_AS(kfold_split(10, 1, 0), ConfigError);
        CHECK_THROWS_AS(kfold_split(3, 4, 0), ConfigError);
    }
}

TEST_CASE("metrics on simple prediction patterns") {
    CHECK(prf_metrics({1, 2, 3}, {1, 2, 3}, 3).accuracy == doctest::Approx(1.0));
    CHECK(prf_metrics({1, 2, 3}, {1, 2, 3}, 3).macro_precision == doctest::Approx(1.0));
    CHECK(prf_metrics({1, 2, 3}, {1, 2, 3}, 3).macro_recall == doctest::Approx(1.0));

    // Predicting one class on two balanced classes halves everything but
    // precision is averaged over the two present classes.
    PrfMetrics one_sided = prf_metrics({1, 1, 1, 1}, {1, 1, 2, 2}, 2);
    CHECK(one_sided.accuracy == doctest::Approx(0.5));
    CHECK(one_sided.macro_recall == doctest::Approx(0.5));
    CHECK(one_sided.macro_precision == doctest::Approx(0.25));
}

TEST_CASE("metrics match a hand-tallied confusion matrix on random data") {
    Rng rng(404);
    for (int trial = 0; trial < 5; ++trial) {
        const int lvl = 4;
        std::vector<int> predictions, labels;
        for (int i = 0; i < 50; ++i) {
            predictions.push_back(1 + static_cast<int>(rng.below(lvl)));
            labels.push_back(1 + static_cast<int>(rng.below(lvl)));
        }
        int confusion[lvl + 1][lvl + 1] = {};
        for (int i = 0; i < 50; ++i) confusion[labels[i]][predictions[i]]++;

        double trace = 0.0;
        for (int c = 1; c <= lvl; ++c) trace += confusion[c][c];
        double precision = 0.0, recall = 0.0;
        int present = 0;
        for (int c = 1; c <= lvl; ++c) {
            int support = 0, predicted = 0;
            for (int o = 1; o <= lvl; ++o) {
                support += confusion[c][o];
                predicted += confusion[o][c];
            }
            if (support == 0) continue;
            ++present;
            precision += predicted == 0 ? 0.0 : static_cast<double>(confusion[c][c]) / predicted;
            recall += static_cast<double>(confusion[c][c]) / support;
        }
        PrfMetrics metrics = prf_metrics(predictions, labels, lvl);
        CHECK(metrics.accuracy == doctest::Approx(trace / 50.0));
        CHECK(metrics.macro_precision == doctest::Approx(precision / present));
        CHECK(metrics.macro_recall == doctest::Approx(recall / present));
    }
    CHECK_THROWS_AS(prf_metrics({}, {}, 3), DomainError);
}

TEST_CASE("confidence histogram splits by match and normalizes per side") {
    std::vector<Prediction> predictions = {
        {1, 0.95, false}, {1, 0.62, false}, {2, 0.41, false}, {1, 0.05, false}};
    std::vector<int> labels = {1, 1, 1, 2};
    ConfidenceHistogram hist = confidence_histogram(predictions, labels);
    CHECK(hist.positives == 2);
    CHECK(hist.negatives == 2);
    CHECK(hist.positive_counts[9] == 1);
    CHECK(hist.positive_counts[6] == 1);
    CHECK(hist.negative_counts[4] == 1);
    CHECK(hist.negative_counts[0] == 1);
    double pos_total = 0.0, neg_total = 0.0;
    for (int b = 0; b < 10; ++b) {
        pos_total += hist.positive_fractions[b];
        neg_total += hist.negative_fractions[b];
    }
    CHECK(pos_total == doctest::Approx(1.0));
    CHECK(neg_total == doctest::Approx(1.0));
    CHECK(hist.positive_mean_bp == doctest::Approx((0.95 + 0.62) / 2));
    CHECK(hist.negative_mean_bp == doctest::Approx((0.41 + 0.05) / 2));

    SUBCASE("all-correct predictions leave the negative side empty") {
        ConfidenceHistogram all = confidence_histogram({{2, 0.8, false}}, {2});
        CHECK(all.negatives == 0);
        for (int b = 0; b < 10; ++b) CHECK(all.negative_counts[b] == 0);
    }
}

TEST_CASE("compare_methods is reproducible and reports every requested method") {
    GeneratorConfig config = small_config();
    config.services_min = config.services_max = 3;
    config.n_compositions = 30;
    CorpusFile corpus = generate(config);

    MethodOptions options;
    options.net.epochs = 40;
    options.forest.n_outer = 4;
    options.forest.m_vertical = 1;

    std::vector<MethodKind> methods = {MethodKind::Tfrb, MethodKind::MinBaseline};
    CompareReport a = compare_methods(corpus, methods, 3, 5, options);
    CompareReport b = compare_methods(corpus, methods, 3, 5, options);
    REQUIRE(a.methods.size() == 2);
    CHECK(a.methods[0].method == MethodKind::Tfrb);
    for (std::size_t m = 0; m < a.methods.size(); ++m) {
        CHECK(a.methods[m].fold_accuracy == b.methods[m].fold_accuracy);
        CHECK(a.methods[m].mean_accuracy >= 0.0);
        CHECK(a.methods[m].mean_accuracy <= 1.0);
        // Every held-out sample shows up once with its confidence.
        CHECK(a.methods[m].predictions.size() == corpus.samples.size());
        ConfidenceHistogram hist =
            confidence_histogram(a.methods[m].predictions, a.methods[m].labels);
        CHECK(hist.positives + hist.negatives == static_cast<int>(corpus.samples.size()));
    }
}

TEST_CASE("topology-free accuracy degrades as compositions grow under depth influence") {
    GeneratorConfig config;
    config.seed = 77;
    config.n_compositions = 100;
    config.lvl_count = 5;
    config.rho = 0.6;
    config.sigma = 0.01;
    config.beta_a = config.beta_b = 0.3;
    config.parallel_weight = 0.0;
    config.hybrid_weight = 0.0;
    config.shapes_per_pattern = 4;
    config.weights = {{"Community/owner_reputation", 1.0}};

    MethodOptions options;
    options.forest.n_outer = 8;
    options.forest.m_vertical = 0;

    SweepReport report = sweep(config, SweepAxis::TopologySize, {3, 10}, {MethodKind::Tfrb},
                               3, 5, options);
    REQUIRE(report.points.size() == 2);
    double small = report.points[0].report.methods[0].mean_accuracy;
    double large = report.points[1].report.methods[0].mean_accuracy;
    CHECK(small > large);

    SweepReport again = sweep(config, SweepAxis::TopologySize, {3, 10}, {MethodKind::Tfrb},
                              3, 5, options);
    CHECK(sweep_csv(report) == sweep_csv(again));
}

TEST_CASE("sweep emits one row per axis value") {
    GeneratorConfig config = small_config();
    config.n_compositions = 20;
    config.services_min = config.services_max = 3;
    MethodOptions options;
    options.forest.n_outer = 3;
    options.forest.m_vertical = 0;

    SweepReport report = sweep(config, SweepAxis::LvlCount, {3}, {MethodKind::MinBaseline},
                               3, 2, options);
    REQUIRE(report.points.size() == 1);
    CHECK(report.points[0].axis_value == 3);
    std::string csv = sweep_csv(report);
    CHECK(csv.find("lvl_count,min") == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}
