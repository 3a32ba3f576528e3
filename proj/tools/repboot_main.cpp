// Command-line front end: generate synthetic corpora, score rater
// credibility, train/evaluate the bootstrapping methods and predict the
// reputation level of new compositions.

#include <cstdio>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "repboot/errors.hpp"
#include "repboot/io.hpp"
#include "repboot/kernels.hpp"

namespace {

using repboot::io::Json;

struct GlobalArgs {
    std::uint64_t seed = 0;
    bool seed_given = false;
    int lvl = 0;  // 0 = per-config / corpus default
    int k_folds = 5;
    std::string config_path;
    bool json = false;
};

std::uint64_t effective_seed(const GlobalArgs& args) {
    if (args.seed_given) return args.seed;
    std::random_device entropy;
    std::uint64_t seed =
        (static_cast<std::uint64_t>(entropy()) << 32) ^ static_cast<std::uint64_t>(entropy());
    std::cerr << "seed: " << seed << "\n";
    return seed;
}

Json load_config(const GlobalArgs& args) {
    if (args.config_path.empty()) return Json::object();
    return repboot::io::load_json(args.config_path);
}

std::vector<repboot::MethodKind> parse_methods(const std::string& csv) {
    std::vector<repboot::MethodKind> methods;
    std::size_t start = 0;
    while (start <= csv.size()) {
        std::size_t comma = csv.find(',', start);
        std::string token = csv.substr(
            start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!token.empty()) methods.push_back(repboot::method_from_name(token));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (methods.empty()) throw repboot::ConfigError("no methods given");
    return methods;
}

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> values;
    std::size_t start = 0;
    while (start <= csv.size()) {
        std::size_t comma = csv.find(',', start);
        std::string token = csv.substr(
            start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!token.empty()) values.push_back(std::stoi(token));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return values;
}

void emit(const Json& doc, const std::string& out_path, bool to_stdout) {
    std::string text = doc.dump(2) + "\n";
    if (!out_path.empty()) {
        repboot::io::write_file(out_path, text);
    }
    if (to_stdout || out_path.empty()) {
        std::fputs(text.c_str(), stdout);
    }
}

int run_generate(const GlobalArgs& args, const std::string& out_path) {
    repboot::GeneratorConfig config = repboot::io::generator_config_from_json(load_config(args));
    if (args.seed_given) config.seed = args.seed;
    if (args.lvl > 0) config.lvl_count = args.lvl;
    repboot::CorpusFile corpus = repboot::generate(config);
    std::string text = repboot::corpus_to_json_text(corpus);
    if (!out_path.empty()) {
        repboot::io::write_file(out_path, text);
        std::fprintf(stdout, "wrote %zu samples to %s\n", corpus.samples.size(),
                     out_path.c_str());
    } else {
        std::fputs(text.c_str(), stdout);
    }
    return 0;
}

int run_credibility(const GlobalArgs& args, const std::string& graph_path, double damping,
                    double tolerance, int max_iters) {
    repboot::RaterGraph graph = repboot::io::load_rater_graph(graph_path);
    repboot::PageRankParams params;
    params.damping = damping;
    params.tolerance = tolerance;
    params.max_iters = max_iters;
    auto scores = repboot::pagerank_credibility(graph, params);
    Json doc = Json::object();
    for (const auto& [rater, score] : scores) doc[rater] = score;
    emit(doc, "", true);
    (void)args;
    return 0;
}

int run_train(const GlobalArgs& args, const std::string& corpus_path,
              const std::string& method_name, const std::string& out_path, int epochs) {
    repboot::CorpusFile corpus = repboot::ingest(corpus_path);
    repboot::MethodKind kind = repboot::method_from_name(method_name);
    repboot::MethodOptions options = repboot::io::method_options_from_json(load_config(args));
    std::uint64_t seed = effective_seed(args);
    options.forest.seed = seed;
    options.net.seed = seed;
    if (epochs > 0) options.net.epochs = epochs;

    std::vector<int> all(corpus.samples.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    std::unique_ptr<repboot::Model> model = repboot::train_model(kind, corpus, all, options);
    repboot::io::save_model(*model, corpus.schema, out_path);
    std::fprintf(stdout, "trained %s on %zu samples -> %s\n", method_name.c_str(), all.size(),
                 out_path.c_str());
    return 0;
}

int run_predict(const GlobalArgs& args, const std::string& model_path,
                const std::string& sample_path) {
    std::unique_ptr<repboot::Model> model = repboot::io::load_model(model_path);
    repboot::CompositionSample sample = repboot::io::load_sample(sample_path);
    repboot::Prediction prediction = model->predict(sample.topology);
    char bp_text[32];
    std::snprintf(bp_text, sizeof(bp_text), "%.4f", prediction.bp);
    char ac_text[32];
    std::snprintf(ac_text, sizeof(ac_text), "%.4f", prediction.ac);
    if (args.json) {
        Json doc;
        doc["level"] = prediction.level;
        doc["bp"] = Json::parse(bp_text).get<double>();
        if (prediction.ac >= 0.0) doc["ac"] = Json::parse(ac_text).get<double>();
        if (prediction.fallback) doc["fallback"] = true;
        emit(doc, "", true);
    } else {
        std::fprintf(stdout, "level %d  bp %s", prediction.level, bp_text);
        if (prediction.ac >= 0.0) std::fprintf(stdout, "  ac %s", ac_text);
        if (prediction.fallback) std::fprintf(stdout, "  (fallback: unseen topology)");
        std::fprintf(stdout, "\n");
    }
    return 0;
}

int run_importance(const GlobalArgs& args, const std::string& corpus_path) {
    repboot::CorpusFile corpus = repboot::ingest(corpus_path);
    repboot::MethodOptions options = repboot::io::method_options_from_json(load_config(args));
    std::uint64_t seed = effective_seed(args);
    options.forest.seed = seed;

    std::vector<const repboot::ServiceRecord*> rows;
    for (const auto& sample : corpus.samples) {
        for (const auto& service : sample.topology.services) {
            if (service.observed_level) rows.push_back(&service);
        }
    }
    if (rows.empty()) {
        throw repboot::ConfigError("corpus has no component services with observed levels");
    }
    repboot::FeatureMatrix matrix =
        repboot::build_atomic_matrix(corpus.schema, rows, corpus.lvl_count);
    repboot::DecisionForest forest = repboot::build_forest(
        matrix, repboot::layer_column_subsets(matrix.space()), options.forest);
    repboot::MdaParams mda;
    mda.seed = seed;
    repboot::ImportanceReport report = repboot::compute_importance(forest, matrix, mda);
    if (args.json) {
        emit(repboot::io::importance_to_json(report), "", true);
    } else {
        std::fputs(repboot::io::importance_table(report).c_str(), stdout);
    }
    return 0;
}

int run_evaluate(const GlobalArgs& args, const std::string& corpus_path,
                 const std::string& methods_csv) {
    repboot::CorpusFile corpus = repboot::ingest(corpus_path);
    std::vector<repboot::MethodKind> methods = parse_methods(methods_csv);
    repboot::MethodOptions options = repboot::io::method_options_from_json(load_config(args));
    std::uint64_t seed = effective_seed(args);
    options.forest.seed = seed;
    options.net.seed = seed;
    repboot::CompareReport report =
        repboot::compare_methods(corpus, methods, args.k_folds, seed, options);
    if (args.json) {
        emit(repboot::io::compare_report_to_json(report), "", true);
    } else {
        std::fputs(repboot::compare_report_text(report).c_str(), stdout);
    }
    return 0;
}

int run_sweep(const GlobalArgs& args, const std::string& axis_name, const std::string& values_csv,
              const std::string& methods_csv, const std::string& csv_path) {
    repboot::SweepAxis axis = repboot::sweep_axis_from_name(axis_name);
    std::vector<int> values = parse_int_list(values_csv);
    std::vector<repboot::MethodKind> methods = parse_methods(methods_csv);
    Json config_doc = load_config(args);
    repboot::GeneratorConfig base = repboot::io::generator_config_from_json(config_doc);
    repboot::MethodOptions options = repboot::io::method_options_from_json(config_doc);
    std::uint64_t seed = effective_seed(args);
    base.seed = seed;
    options.forest.seed = seed;
    options.net.seed = seed;
    if (args.lvl > 0) base.lvl_count = args.lvl;
    repboot::SweepReport report =
        repboot::sweep(base, axis, values, methods, args.k_folds, seed, options);
    std::string csv = repboot::sweep_csv(report);
    if (!csv_path.empty()) repboot::io::write_file(csv_path, csv);
    if (args.json) {
        emit(repboot::io::sweep_report_to_json(report), "", true);
    } else {
        std::fputs(csv.c_str(), stdout);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reputation bootstrapping for composite services"};
    app.require_subcommand(1);

    GlobalArgs args;
    app.add_option("--seed", args.seed, "Root seed for every random choice")
        ->each([&](const std::string&) { args.seed_given = true; });
    app.add_option("--lvl", args.lvl, "Number of reputation levels");
    app.add_option("--k-folds", args.k_folds, "Cross-validation folds");
    app.add_option("--config", args.config_path, "JSON config file");
    app.add_flag("--json", args.json, "Structured JSON output");

    auto* generate = app.add_subcommand("generate", "Generate a synthetic corpus");
    std::string out_path;
    generate->add_option("--out", out_path, "Output corpus file");

    auto* credibility = app.add_subcommand("credibility", "Rater credibility from a graph");
    std::string graph_path;
    double damping = 0.85, tolerance = 1e-8;
    int max_iters = 200;
    credibility->add_option("--graph", graph_path, "Rater graph JSON")->required();
    credibility->add_option("--damping", damping, "Damping factor");
    credibility->add_option("--tolerance", tolerance, "Convergence tolerance");
    credibility->add_option("--max-iters", max_iters, "Iteration cap");

    auto* train = app.add_subcommand("train", "Train a model on a corpus");
    std::string corpus_path, method = "fdnn", model_out = "model.json";
    int epochs = 0;
    train->add_option("--corpus", corpus_path, "Corpus file")->required();
    train->add_option("--method", method, "fdnn|forest|dnn|tfrb|min");
    train->add_option("--out", model_out, "Model output file");
    train->add_option("--epochs", epochs, "Training epochs override");

    auto* predict = app.add_subcommand("predict", "Predict one composition sample");
    std::string model_path, sample_path;
    predict->add_option("--model", model_path, "Trained model file")->required();
    predict->add_option("--sample", sample_path, "Sample JSON file")->required();

    auto* importance = app.add_subcommand("importance", "Indicator importance report");
    std::string imp_corpus;
    importance->add_option("--corpus", imp_corpus, "Corpus file")->required();

    auto* evaluate = app.add_subcommand("evaluate", "Cross-validated method comparison");
    std::string eval_corpus, eval_methods = "fdnn,tfrb,min";
    evaluate->add_option("--corpus", eval_corpus, "Corpus file")->required();
    evaluate->add_option("--methods", eval_methods, "Comma-separated method list");

    auto* sweep = app.add_subcommand("sweep", "Accuracy vs topology size or level count");
    std::string axis = "topology_size", values_csv, sweep_methods = "fdnn,tfrb,min", csv_out;
    sweep->add_option("--axis", axis, "topology_size|lvl_count");
    sweep->add_option("--values", values_csv, "Comma-separated axis values")->required();
    sweep->add_option("--methods", sweep_methods, "Comma-separated method list");
    sweep->add_option("--csv", csv_out, "CSV output file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (generate->parsed()) return run_generate(args, out_path);
        if (credibility->parsed()) {
            return run_credibility(args, graph_path, damping, tolerance, max_iters);
        }
        if (train->parsed()) return run_train(args, corpus_path, method, model_out, epochs);
        if (predict->parsed()) return run_predict(args, model_path, sample_path);
        if (importance->parsed()) return run_importance(args, imp_corpus);
        if (evaluate->parsed()) return run_evaluate(args, eval_corpus, eval_methods);
        if (sweep->parsed()) {
            return run_sweep(args, axis, values_csv, sweep_methods, csv_out);
        }
    } catch (const repboot::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
