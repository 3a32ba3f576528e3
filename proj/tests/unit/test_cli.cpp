#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "repboot/data.hpp"
#include "repboot/io.hpp"
#include "repboot/rng.hpp"

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
};

std::string cli_path() {
    const char* path = std::getenv("REPBOOT_CLI");
    return path ? path : "";
}

std::string temp_dir() {
    static std::string dir = [] {
        std::string name = "/tmp/repboot_cli_test_XXXXXX";
        char buffer[64];
        std::snprintf(buffer, sizeof(buffer), "%s", name.c_str());
        REQUIRE(mkdtemp(buffer) != nullptr);
        return std::string(buffer);
    }();
    return dir;
}

CliResult run_cli(const std::string& args) {
    CliResult result;
    std::string command = cli_path() + " " + args + " 2>" + temp_dir() + "/stderr.txt";
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buffer[4096];
    while (std::size_t n = fread(buffer, 1, sizeof(buffer), pipe)) {
        result.out.append(buffer, n);
    }
    int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
}

}  // namespace

TEST_CASE("command line front end") {
    if (cli_path().empty()) {
        MESSAGE("REPBOOT_CLI not set; cli tests skipped");
        return;
    }
    const std::string dir = temp_dir();

    SUBCASE("help exits zero, bad usage exits two") {
        CHECK(run_cli("--help").exit_code == 0);
        CHECK(run_cli("generate --help").exit_code == 0);
        CHECK(run_cli("definitely-not-a-subcommand").exit_code == 2);
        CHECK(run_cli("generate --no-such-flag").exit_code == 2);
        CHECK(run_cli("").exit_code == 2);
    }

    SUBCASE("generate is byte-identical under a fixed seed") {
        spit(dir + "/gen.json",
             R"({"n_compositions": 12, "lvl_count": 4, "services_min": 3, "services_max": 3,
                 "rho": 0.5, "sigma": 0.02})");
        CHECK(run_cli("--config " + dir + "/gen.json --seed 41 generate --out " + dir +
                      "/c1.json")
                  .exit_code == 0);
        CHECK(run_cli("--config " + dir + "/gen.json --seed 41 generate --out " + dir +
                      "/c2.json")
                  .exit_code == 0);
        std::string first = slurp(dir + "/c1.json");
        CHECK(first == slurp(dir + "/c2.json"));
        CHECK(!first.empty());

        CHECK(run_cli("--config " + dir + "/gen.json --seed 42 generate --out " + dir +
                      "/c3.json")
                  .exit_code == 0);
        CHECK(first != slurp(dir + "/c3.json"));
    }

    SUBCASE("credibility scores a star graph") {
        spit(dir + "/graph.json",
             R"({"raters": ["a", "b", "c"],
                 "endorsements": [{"from": "b", "to": "a"}, {"from": "c", "to": "a"}]})");
        CliResult result = run_cli("--json credibility --graph " + dir + "/graph.json");
        CHECK(result.exit_code == 0);
        auto doc = repboot::io::parse_json(result.out, "cli");
        CHECK(doc.at("a").get<double>() == 1.0);
        CHECK(doc.at("b").get<double>() == doc.at("c").get<double>());
        CHECK(doc.at("b").get<double>() < 1.0);
    }

    SUBCASE("domain errors exit one with a single-line diagnostic") {
        spit(dir + "/bad.json", "{\"format_version\": 1}");
        CliResult result = run_cli("train --corpus " + dir + "/bad.json --out " + dir +
                                   "/m.json");
        CHECK(result.exit_code == 1);
        std::string err = slurp(dir + "/stderr.txt");
        CHECK(err.find("error:") == 0);
        CHECK(std::count(err.begin(), err.end(), '\n') == 1);
    }

    SUBCASE("train, predict and evaluate run the full pipeline deterministically") {
        spit(dir + "/gen.json",
             R"({"n_compositions": 24, "lvl_count": 4, "services_min": 3, "services_max": 3,
                 "rho": 0.5, "sigma": 0.02})");
        spit(dir + "/opts.json",
             R"({"forest": {"n_outer": 4, "m_vertical": 1}, "net": {"epochs": 40}})");
        REQUIRE(run_cli("--config " + dir + "/gen.json --seed 4 generate --out " + dir +
                        "/corpus.json")
                    .exit_code == 0);
        REQUIRE(run_cli("--config " + dir + "/opts.json --seed 4 train --corpus " + dir +
                        "/corpus.json --method fdnn --out " + dir + "/model1.json")
                    .exit_code == 0);
        REQUIRE(run_cli("--config " + dir + "/opts.json --seed 4 train --corpus " + dir +
                        "/corpus.json --method fdnn --out " + dir + "/model2.json")
                    .exit_code == 0);
        CHECK(slurp(dir + "/model1.json") == slurp(dir + "/model2.json"));

        // One sample pulled out of the corpus for prediction.
        auto corpus_doc = repboot::io::load_json(dir + "/corpus.json");
        repboot::io::Json sample_doc;
        sample_doc["topology"] = corpus_doc.at("samples").at(0).at("topology");
        spit(dir + "/sample.json", sample_doc.dump(2));

        CliResult human = run_cli("predict --model " + dir + "/model1.json --sample " + dir +
                                  "/sample.json");
        CHECK(human.exit_code == 0);
        CHECK(human.out.rfind("level ", 0) == 0);
        CHECK(human.out.find("bp ") != std::string::npos);
        // Four decimals on the confidence.
        std::size_t bp_at = human.out.find("bp ") + 3;
        CHECK(human.out.substr(bp_at).size() >= 6);
        CHECK(human.out[bp_at + 1] == '.');

        CliResult json1 = run_cli("--json predict --model " + dir + "/model1.json --sample " +
                                  dir + "/sample.json");
        CliResult json2 = run_cli("--json predict --model " + dir + "/model1.json --sample " +
                                  dir + "/sample.json");
        CHECK(json1.exit_code == 0);
        CHECK(json1.out == json2.out);
        auto prediction = repboot::io::parse_json(json1.out, "cli");
        CHECK(prediction.at("level").get<int>() >= 1);
        CHECK(prediction.at("level").get<int>() <= 4);

        CliResult eval1 = run_cli("--json --seed 6 --k-folds 3 --config " + dir +
                                  "/opts.json evaluate --corpus " + dir +
                                  "/corpus.json --methods tfrb,min");
        CliResult eval2 = run_cli("--json --seed 6 --k-folds 3 --config " + dir +
                                  "/opts.json evaluate --corpus " + dir +
                                  "/corpus.json --methods tfrb,min");
        CHECK(eval1.exit_code == 0);
        CHECK(eval1.out == eval2.out);

        // Inputs were never mutated by any subcommand.
        REQUIRE(run_cli("--config " + dir + "/gen.json --seed 4 generate --out " + dir +
                        "/corpus_again.json")
                    .exit_code == 0);
        CHECK(slurp(dir + "/corpus.json") == slurp(dir + "/corpus_again.json"));
    }

    SUBCASE("predict output is frozen for the diamond model") {
        // Hand-rolled diamond corpus: one invoker fanning out to two
        // branches that rejoin at a shared dependency.
        repboot::CorpusFile corpus;
        corpus.schema = repboot::default_schema();
        corpus.lvl_count = 5;
        repboot::IndicatorId key{repboot::Layer::Community, "owner_reputation"};
        repboot::Rng rng(31);
        for (int n = 0; n < 24; ++n) {
            repboot::CompositionSample sample;
            sample.topology.pattern = repboot::PatternKind::Hybrid;
            std::vector<double> qualities;
            for (int s = 0; s < 4; ++s) {
                repboot::ServiceRecord record;
                record.service_id = "s" + std::to_string(s + 1);
                double rating = rng.next_double();
                record.indicators[key] = {"U", rating};
                record.observed_level = repboot::quantize_level(rating, 5);
                qualities.push_back(rating);
                sample.topology.services.push_back(std::move(record));
            }
            sample.topology.edges = {{"s1", "s2"}, {"s1", "s3"}, {"s2", "s4"}, {"s3", "s4"}};
            double score = repboot::composite_score(sample.topology, qualities, 0.6);
            sample.observed_level = repboot::quantize_level(std::clamp(score, 0.0, 1.0), 5);
            corpus.samples.push_back(std::move(sample));
        }
        repboot::write_corpus(corpus, dir + "/diamond.json");

        spit(dir + "/diamond_opts.json",
             R"({"forest": {"n_outer": 6, "m_vertical": 1}, "net": {"epochs": 250, "rate": 0.01},
                 "top_k": 4, "hidden_widths": [6]})");
        REQUIRE(run_cli("--config " + dir + "/diamond_opts.json --seed 21 train --corpus " +
                        dir + "/diamond.json --method fdnn --out " + dir + "/diamond_model.json")
                    .exit_code == 0);

        repboot::io::Json sample_doc;
        sample_doc["topology"] =
            repboot::io::corpus_to_json(corpus).at("samples").at(0).at("topology");
        spit(dir + "/diamond_sample.json", sample_doc.dump(2));

        CliResult out = run_cli("predict --model " + dir + "/diamond_model.json --sample " +
                                dir + "/diamond_sample.json");
        CHECK(out.exit_code == 0);
        CHECK(out.out == "level 4  bp 0.7427  ac 0.9583\n");
    }

    SUBCASE("importance prints the layer table") {
        spit(dir + "/gen2.json",
             R"({"n_compositions": 16, "lvl_count": 3, "services_min": 3, "services_max": 3})");
        REQUIRE(run_cli("--config " + dir + "/gen2.json --seed 2 generate --out " + dir +
                        "/c_imp.json")
                    .exit_code == 0);
        CliResult result = run_cli("--seed 2 importance --corpus " + dir + "/c_imp.json");
        CHECK(result.exit_code == 0);
        CHECK(result.out.find("MDA") != std::string::npos);
        CHECK(result.out.find("MDCD") != std::string::npos);
        CHECK(result.out.find("Community layer") != std::string::npos);
    }
}
