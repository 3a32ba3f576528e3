#include "repboot/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "repboot/errors.hpp"

namespace repboot::io {

namespace {

constexpr int kFormatVersion = 1;

template <typename T>
T get_or(const Json& doc, const char* key, T fallback) {
    if (!doc.contains(key)) return fallback;
    return doc.at(key).get<T>();
}

void require(bool condition, const std::string& message) {
    if (!condition) throw ParseError(message);
}

}  // namespace

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io", "cannot write " + path);
    out << text;
    if (!out) throw Error("io", "short write to " + path);
}

Json parse_json(const std::string& text, const std::string& origin) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(origin + ": " + e.what());
    }
}

Json load_json(const std::string& path) { return parse_json(read_file(path), path); }

// ---------------------------------------------------------------- corpus

namespace {

Json service_to_json(const ServiceRecord& record) {
    Json doc;
    doc["service_id"] = record.service_id;
    Json indicators = Json::object();
    for (const auto& [id, value] : record.indicators) {
        Json cell;
        cell["type_tag"] = value.type_tag;
        cell["rating"] = value.rating;
        indicators[id.key()] = cell;
    }
    doc["indicators"] = indicators;
    if (record.observed_level) doc["observed_level"] = *record.observed_level;
    return doc;
}

ServiceRecord service_from_json(const Json& doc) {
    ServiceRecord record;
    record.service_id = doc.at("service_id").get<std::string>();
    if (doc.contains("indicators")) {
        for (const auto& [key, cell] : doc.at("indicators").items()) {
            IndicatorValue value;
            value.type_tag = cell.at("type_tag").get<std::string>();
            value.rating = cell.at("rating").get<double>();
            record.indicators[IndicatorId::from_key(key)] = value;
        }
    }
    if (doc.contains("observed_level") && !doc.at("observed_level").is_null()) {
        record.observed_level = doc.at("observed_level").get<int>();
    }
    return record;
}

Json topology_to_json(const CompositionTopology& topology) {
    Json doc;
    Json services = Json::array();
    for (const auto& service : topology.services) services.push_back(service_to_json(service));
    doc["services"] = services;
    Json edges = Json::array();
    for (const auto& [from, to] : topology.edges) edges.push_back(Json::array({from, to}));
    doc["edges"] = edges;
    doc["pattern"] = pattern_name(topology.pattern);
    return doc;
}

CompositionTopology topology_from_json(const Json& doc) {
    CompositionTopology topology;
    for (const auto& service : doc.at("services")) {
        topology.services.push_back(service_from_json(service));
    }
    for (const auto& edge : doc.at("edges")) {
        require(edge.is_array() && edge.size() == 2, "an edge must be a [from, to] pair");
        topology.edges.emplace_back(edge[0].get<std::string>(), edge[1].get<std::string>());
    }
    topology.pattern = pattern_from_name(doc.at("pattern").get<std::string>());
    return topology;
}

}  // namespace

Json corpus_to_json(const CorpusFile& corpus) {
    Json doc;
    doc["format_version"] = corpus.format_version;
    doc["lvl_count"] = corpus.lvl_count;
    Json indicators = Json::array();
    for (const auto& id : corpus.schema.indicators()) indicators.push_back(id.key());
    doc["schema"] = Json{{"indicators", indicators}};
    Json samples = Json::array();
    for (const auto& sample : corpus.samples) {
        Json s;
        s["topology"] = topology_to_json(sample.topology);
        if (sample.observed_level) s["observed_level"] = *sample.observed_level;
        samples.push_back(s);
    }
    doc["samples"] = samples;
    if (!corpus.rater_graphs.empty()) {
        Json graphs = Json::array();
        for (const auto& graph : corpus.rater_graphs) graphs.push_back(rater_graph_to_json(graph));
        doc["rater_graphs"] = graphs;
    }
    if (corpus.generator) {
        Json gen;
        gen["weights"] = corpus.generator->weights;
        gen["rho"] = corpus.generator->rho;
        gen["sigma"] = corpus.generator->sigma;
        gen["seed"] = corpus.generator->seed;
        doc["generator"] = gen;
    }
    return doc;
}

CorpusFile corpus_from_json(const Json& doc, const std::string& origin) {
    CorpusFile corpus;
    require(doc.contains("format_version"), origin + ": missing format_version");
    corpus.format_version = doc.at("format_version").get<int>();
    require(corpus.format_version == kFormatVersion,
            origin + ": unsupported format_version " + std::to_string(corpus.format_version));
    corpus.lvl_count = doc.at("lvl_count").get<int>();
    require(corpus.lvl_count >= 2, origin + ": lvl_count must be >= 2");

    std::vector<IndicatorId> indicators;
    for (const auto& key : doc.at("schema").at("indicators")) {
        indicators.push_back(IndicatorId::from_key(key.get<std::string>()));
    }
    corpus.schema = IndicatorSchema(std::move(indicators));

    std::size_t index = 0;
    for (const auto& s : doc.at("samples")) {
        std::string where = origin + ": sample " + std::to_string(index);
        CompositionSample sample;
        try {
            sample.topology = topology_from_json(s.at("topology"));
            if (s.contains("observed_level") && !s.at("observed_level").is_null()) {
                sample.observed_level = s.at("observed_level").get<int>();
                require(*sample.observed_level >= 1 &&
                            *sample.observed_level <= corpus.lvl_count,
                        where + ": observed_level out of range");
            }
            for (const auto& service : sample.topology.services) {
                validate_service_record(service, corpus.schema, corpus.lvl_count);
            }
            validate_topology(sample.topology);
        } catch (const Error& e) {
            throw ParseError(where + ": " + e.what());
        }
        corpus.samples.push_back(std::move(sample));
        ++index;
    }

    if (doc.contains("rater_graphs")) {
        for (const auto& graph : doc.at("rater_graphs")) {
            corpus.rater_graphs.push_back(rater_graph_from_json(graph));
        }
    }
    if (doc.contains("generator")) {
        const auto& gen = doc.at("generator");
        GeneratorRecord record;
        record.weights = gen.at("weights").get<std::map<std::string, double>>();
        record.rho = gen.at("rho").get<double>();
        record.sigma = gen.at("sigma").get<double>();
        record.seed = gen.at("seed").get<std::uint64_t>();
        corpus.generator = record;
    }
    return corpus;
}

Json rater_graph_to_json(const RaterGraph& graph) {
    Json doc;
    doc["raters"] = graph.raters;
    Json endorsements = Json::array();
    for (const auto& e : graph.endorsements) {
        Json item;
        item["from"] = e.from;
        item["to"] = e.to;
        item["weight"] = e.weight;
        endorsements.push_back(item);
    }
    doc["endorsements"] = endorsements;
    return doc;
}

RaterGraph rater_graph_from_json(const Json& doc) {
    RaterGraph graph;
    graph.raters = doc.at("raters").get<std::vector<std::string>>();
    for (const auto& item : doc.at("endorsements")) {
        RaterGraph::Endorsement e;
        e.from = item.at("from").get<std::string>();
        e.to = item.at("to").get<std::string>();
        e.weight = get_or(item, "weight", 1.0);
        graph.endorsements.push_back(std::move(e));
    }
    return graph;
}

RaterGraph load_rater_graph(const std::string& path) {
    return rater_graph_from_json(load_json(path));
}

// ---------------------------------------------------------------- forest

namespace {

const char* layout_name(FeatureLayout layout) {
    switch (layout) {
        case FeatureLayout::Atomic: return "atomic";
        case FeatureLayout::Concatenated: return "concatenated";
        case FeatureLayout::Numeric: return "numeric";
    }
    return "?";
}

FeatureLayout layout_from_name(const std::string& name) {
    if (name == "atomic") return FeatureLayout::Atomic;
    if (name == "concatenated") return FeatureLayout::Concatenated;
    if (name == "numeric") return FeatureLayout::Numeric;
    throw ParseError("unknown feature layout: " + name);
}

Json space_to_json(const FeatureSpace& space) {
    Json doc;
    doc["layout"] = layout_name(space.layout);
    Json columns = Json::array();
    for (const auto& column : space.columns) {
        Json c;
        c["name"] = column.name;
        c["layer"] = layer_name(column.layer);
        c["tags"] = column.tags;
        columns.push_back(c);
    }
    doc["columns"] = columns;
    doc["indicator_keys"] = space.indicator_keys;
    doc["service_ids"] = space.service_ids;
    return doc;
}

FeatureSpace space_from_json(const Json& doc) {
    FeatureSpace space;
    space.layout = layout_from_name(doc.at("layout").get<std::string>());
    for (const auto& c : doc.at("columns")) {
        FeatureColumn column;
        column.name = c.at("name").get<std::string>();
        column.layer = layer_from_name(c.at("layer").get<std::string>());
        column.tags = c.at("tags").get<std::vector<std::string>>();
        space.columns.push_back(std::move(column));
    }
    space.indicator_keys = doc.at("indicator_keys").get<std::vector<std::string>>();
    space.service_ids = doc.at("service_ids").get<std::vector<std::string>>();
    return space;
}

Json tree_to_json(const DecisionTree& tree) {
    Json doc;
    Json nodes = Json::array();
    for (const auto& node : tree.nodes) {
        Json n;
        n["impurity"] = node.impurity;
        n["n"] = node.n_samples;
        if (node.is_leaf()) {
            n["leaf"] = node.leaf_level;
            n["counts"] = node.class_counts;
        } else {
            n["feature"] = node.feature;
            n["kind"] = node.numeric_split ? "numeric" : "tag";
            if (node.numeric_split) {
                n["threshold"] = node.threshold;
            } else {
                n["tag"] = node.tag;
            }
            n["absent_left"] = node.absent_left;
            n["left"] = node.left;
            n["right"] = node.right;
        }
        nodes.push_back(n);
    }
    doc["nodes"] = nodes;
    doc["bag"] = tree.bag;
    doc["oob"] = tree.oob;
    doc["feature_subset"] = tree.feature_subset;
    return doc;
}

DecisionTree tree_from_json(const Json& doc) {
    DecisionTree tree;
    for (const auto& n : doc.at("nodes")) {
        TreeNode node;
        node.impurity = n.at("impurity").get<double>();
        node.n_samples = n.at("n").get<int>();
        if (n.contains("leaf")) {
            node.leaf_level = n.at("leaf").get<int>();
            node.class_counts = n.at("counts").get<std::vector<int>>();
        } else {
            node.feature = n.at("feature").get<int>();
            node.numeric_split = n.at("kind").get<std::string>() == "numeric";
            if (node.numeric_split) {
                node.threshold = n.at("threshold").get<double>();
            } else {
                node.tag = n.at("tag").get<int>();
            }
            node.absent_left = n.at("absent_left").get<bool>();
            node.left = n.at("left").get<int>();
            node.right = n.at("right").get<int>();
        }
        tree.nodes.push_back(std::move(node));
    }
    tree.bag = doc.at("bag").get<std::vector<int>>();
    tree.oob = doc.at("oob").get<std::vector<int>>();
    tree.feature_subset = doc.at("feature_subset").get<std::vector<int>>();
    return tree;
}

}  // namespace

Json forest_to_json(const DecisionForest& forest) {
    Json doc;
    doc["format_version"] = kFormatVersion;
    doc["kind"] = "forest";
    doc["lvl_count"] = forest.lvl_count;
    doc["impurity"] = forest.impurity == Impurity::Entropy ? "entropy" : "gini";
    doc["space"] = space_to_json(forest.space);
    Json trees = Json::array();
    for (const auto& tree : forest.trees) trees.push_back(tree_to_json(tree));
    doc["trees"] = trees;
    return doc;
}

DecisionForest forest_from_json(const Json& doc) {
    require(doc.at("kind").get<std::string>() == "forest", "not a forest document");
    DecisionForest forest;
    forest.lvl_count = doc.at("lvl_count").get<int>();
    forest.impurity = doc.at("impurity").get<std::string>() == "entropy" ? Impurity::Entropy
                                                                         : Impurity::Gini;
    forest.space = space_from_json(doc.at("space"));
    for (const auto& tree : doc.at("trees")) forest.trees.push_back(tree_from_json(tree));
    return forest;
}

// ---------------------------------------------------------------- network

Json network_to_json(const NetworkParams& params) {
    Json doc;
    doc["input_width"] = params.spec.input_width;
    doc["hidden_widths"] = params.spec.hidden_widths;
    doc["output_width"] = params.spec.output_width;
    Json layers = Json::array();
    for (const auto& layer : params.layers) {
        Json l;
        l["in"] = layer.in;
        l["out"] = layer.out;
        l["weights"] = layer.weights;
        l["bias"] = layer.bias;
        layers.push_back(l);
    }
    doc["layers"] = layers;
    return doc;
}

NetworkParams network_from_json(const Json& doc) {
    NetworkParams params;
    params.spec.input_width = doc.at("input_width").get<int>();
    params.spec.hidden_widths = doc.at("hidden_widths").get<std::vector<int>>();
    params.spec.output_width = doc.at("output_width").get<int>();
    for (const auto& l : doc.at("layers")) {
        DenseLayer layer;
        layer.in = l.at("in").get<int>();
        layer.out = l.at("out").get<int>();
        layer.weights = l.at("weights").get<std::vector<double>>();
        layer.bias = l.at("bias").get<std::vector<double>>();
        require(layer.weights.size() ==
                    static_cast<std::size_t>(layer.in) * static_cast<std::size_t>(layer.out),
                "layer weight size mismatch");
        params.layers.push_back(std::move(layer));
    }
    return params;
}

// ---------------------------------------------------------------- chain

namespace {

Json canon_to_json(const CanonicalTopology& canon) {
    Json doc;
    doc["pattern"] = pattern_name(canon.pattern);
    doc["m"] = canon.m;
    Json edges = Json::array();
    for (const auto& [a, b] : canon.edges) edges.push_back(Json::array({a, b}));
    doc["edges"] = edges;
    doc["depths"] = canon.depths;
    doc["hash"] = canon.hash;
    return doc;
}

CanonicalTopology canon_from_json(const Json& doc) {
    CanonicalTopology canon;
    canon.pattern = pattern_from_name(doc.at("pattern").get<std::string>());
    canon.m = doc.at("m").get<int>();
    for (const auto& edge : doc.at("edges")) {
        canon.edges.emplace_back(edge[0].get<int>(), edge[1].get<int>());
    }
    canon.depths = doc.at("depths").get<std::vector<int>>();
    canon.hash = doc.at("hash").get<std::string>();
    return canon;
}

Json role_forest_to_json(const RoleForest& role_forest) {
    Json doc;
    doc["forest"] = forest_to_json(role_forest.forest);
    doc["selected_trees"] = role_forest.selected_trees;
    return doc;
}

RoleForest role_forest_from_json(const Json& doc) {
    RoleForest role_forest;
    role_forest.forest = forest_from_json(doc.at("forest"));
    role_forest.selected_trees = doc.at("selected_trees").get<std::vector<int>>();
    return role_forest;
}

Json slots_to_json(const std::vector<InputSlot>& slots) {
    Json arr = Json::array();
    for (const auto& slot : slots) {
        Json s;
        s["source"] = slot.source == InputSlot::Source::Service ? "service" : "block";
        if (slot.source == InputSlot::Source::Service) {
            s["role"] = slot.role;
        } else {
            s["block"] = slot.block;
        }
        s["width"] = slot.width;
        arr.push_back(s);
    }
    return arr;
}

std::vector<InputSlot> slots_from_json(const Json& arr) {
    std::vector<InputSlot> slots;
    for (const auto& s : arr) {
        InputSlot slot;
        if (s.at("source").get<std::string>() == "service") {
            slot.source = InputSlot::Source::Service;
            slot.role = s.at("role").get<int>();
        } else {
            slot.source = InputSlot::Source::Block;
            slot.block = s.at("block").get<int>();
        }
        slot.width = s.at("width").get<int>();
        slots.push_back(slot);
    }
    return slots;
}

Json schema_to_json(const IndicatorSchema& schema) {
    Json arr = Json::array();
    for (const auto& id : schema.indicators()) arr.push_back(id.key());
    return arr;
}

IndicatorSchema schema_from_json(const Json& arr) {
    std::vector<IndicatorId> indicators;
    for (const auto& key : arr) indicators.push_back(IndicatorId::from_key(key.get<std::string>()));
    return IndicatorSchema(std::move(indicators));
}

}  // namespace

Json chain_to_json(const ChainedFdnn& chain) {
    Json doc;
    doc["canon"] = canon_to_json(chain.canon);
    doc["lvl_count"] = chain.lvl_count;
    doc["top_k"] = chain.top_k;
    doc["encoding"] = chain.encoding == ForestEncoding::ScalarLevel ? "scalar" : "one_hot";
    doc["input_kind"] =
        chain.input_kind == ServiceInputKind::ForestMatrix ? "forest_matrix" : "raw_features";
    doc["schema"] = schema_to_json(chain.schema);
    Json forests = Json::array();
    for (const auto& f : chain.forests) forests.push_back(role_forest_to_json(f));
    doc["forests"] = forests;
    Json blocks = Json::array();
    for (const auto& block : chain.blocks) {
        Json b;
        b["slots"] = slots_to_json(block.slots);
        b["net"] = network_to_json(block.net);
        blocks.push_back(b);
    }
    doc["blocks"] = blocks;
    doc["sink"] = chain.sink;
    Json info;
    info["seed"] = chain.train_info.seed;
    info["epochs"] = chain.train_info.epochs;
    info["final_loss"] = chain.train_info.final_loss;
    info["training_accuracy"] = chain.train_info.training_accuracy;
    doc["train_info"] = info;
    return doc;
}

ChainedFdnn chain_from_json(const Json& doc) {
    ChainedFdnn chain;
    chain.canon = canon_from_json(doc.at("canon"));
    chain.lvl_count = doc.at("lvl_count").get<int>();
    chain.top_k = doc.at("top_k").get<int>();
    chain.encoding = doc.at("encoding").get<std::string>() == "scalar"
                         ? ForestEncoding::ScalarLevel
                         : ForestEncoding::OneHot;
    chain.input_kind = doc.at("input_kind").get<std::string>() == "forest_matrix"
                           ? ServiceInputKind::ForestMatrix
                           : ServiceInputKind::RawFeatures;
    chain.schema = schema_from_json(doc.at("schema"));
    for (const auto& f : doc.at("forests")) chain.forests.push_back(role_forest_from_json(f));
    for (const auto& b : doc.at("blocks")) {
        ChainBlock block;
        block.slots = slots_from_json(b.at("slots"));
        block.net = network_from_json(b.at("net"));
        chain.blocks.push_back(std::move(block));
    }
    chain.sink = doc.at("sink").get<int>();
    const auto& info = doc.at("train_info");
    chain.train_info.seed = info.at("seed").get<std::uint64_t>();
    chain.train_info.epochs = info.at("epochs").get<int>();
    chain.train_info.final_loss = info.at("final_loss").get<double>();
    chain.train_info.training_accuracy = info.at("training_accuracy").get<double>();
    return chain;
}

// ---------------------------------------------------------------- models

Json model_to_json(const Model& model, const IndicatorSchema& schema) {
    Json doc;
    doc["format_version"] = kFormatVersion;
    doc["kind"] = "model";
    doc["method"] = method_name(model.kind());
    doc["lvl_count"] = model.lvl_count();
    doc["schema"] = schema_to_json(schema);

    switch (model.kind()) {
        case MethodKind::Fdnn:
        case MethodKind::ChainDnn: {
            const auto& m = dynamic_cast<const FdnnModel&>(model);
            doc["fallback_level"] = m.fallback_level_;
            Json buckets = Json::array();
            for (const auto& [hash, chain] : m.buckets_) {
                Json b;
                b["hash"] = hash;
                b["chain"] = chain_to_json(chain);
                buckets.push_back(b);
            }
            doc["buckets"] = buckets;
            break;
        }
        case MethodKind::ChainForest: {
            const auto& m = dynamic_cast<const ForestChainModel&>(model);
            doc["fallback_level"] = m.fallback_level_;
            doc["top_k"] = m.top_k_;
            doc["encoding"] = m.encoding_ == ForestEncoding::ScalarLevel ? "scalar" : "one_hot";
            Json buckets = Json::array();
            for (const auto& [hash, chain] : m.buckets_) {
                Json b;
                b["hash"] = hash;
                b["canon"] = canon_to_json(chain.canon);
                Json forests = Json::array();
                for (const auto& f : chain.forests) forests.push_back(role_forest_to_json(f));
                b["forests"] = forests;
                Json blocks = Json::array();
                for (const auto& block : chain.blocks) {
                    Json bb;
                    bb["slots"] = slots_to_json(block.slots);
                    bb["forest"] = forest_to_json(block.forest);
                    blocks.push_back(bb);
                }
                b["blocks"] = blocks;
                b["sink"] = chain.sink;
                buckets.push_back(b);
            }
            doc["buckets"] = buckets;
            break;
        }
        case MethodKind::Tfrb: {
            const auto& m = dynamic_cast<const TfrbWrappedModel&>(model);
            doc["arity"] = m.model_.arity;
            doc["forest"] = forest_to_json(m.model_.forest);
            break;
        }
        case MethodKind::MinBaseline: {
            const auto& m = dynamic_cast<const MinBaselineModel&>(model);
            doc["forest"] = forest_to_json(m.atomic_forest_);
            break;
        }
    }
    return doc;
}

std::unique_ptr<Model> model_from_json(const Json& doc) {
    require(doc.at("kind").get<std::string>() == "model", "not a model document");
    require(doc.at("format_version").get<int>() == kFormatVersion,
            "unsupported model format_version");
    MethodKind kind = method_from_name(doc.at("method").get<std::string>());
    int lvl_count = doc.at("lvl_count").get<int>();
    IndicatorSchema schema = schema_from_json(doc.at("schema"));

    switch (kind) {
        case MethodKind::Fdnn:
        case MethodKind::ChainDnn: {
            auto model = std::make_unique<FdnnModel>();
            model->kind_ = kind;
            model->lvl_count_ = lvl_count;
            model->schema_ = schema;
            model->fallback_level_ = doc.at("fallback_level").get<int>();
            for (const auto& b : doc.at("buckets")) {
                model->buckets_.emplace(b.at("hash").get<std::string>(),
                                        chain_from_json(b.at("chain")));
            }
            return model;
        }
        case MethodKind::ChainForest: {
            auto model = std::make_unique<ForestChainModel>();
            model->lvl_count_ = lvl_count;
            model->schema_ = schema;
            model->fallback_level_ = doc.at("fallback_level").get<int>();
            model->top_k_ = doc.at("top_k").get<int>();
            model->encoding_ = doc.at("encoding").get<std::string>() == "scalar"
                                   ? ForestEncoding::ScalarLevel
                                   : ForestEncoding::OneHot;
            for (const auto& b : doc.at("buckets")) {
                ForestChain chain;
                chain.canon = canon_from_json(b.at("canon"));
                for (const auto& f : b.at("forests")) {
                    chain.forests.push_back(role_forest_from_json(f));
                }
                for (const auto& bb : b.at("blocks")) {
                    ForestChainBlock block;
                    block.slots = slots_from_json(bb.at("slots"));
                    block.forest = forest_from_json(bb.at("forest"));
                    chain.blocks.push_back(std::move(block));
                }
                chain.sink = b.at("sink").get<int>();
                model->buckets_.emplace(b.at("hash").get<std::string>(), std::move(chain));
            }
            return model;
        }
        case MethodKind::Tfrb: {
            auto model = std::make_unique<TfrbWrappedModel>();
            model->lvl_count_ = lvl_count;
            model->model_.arity = doc.at("arity").get<int>();
            model->model_.forest = forest_from_json(doc.at("forest"));
            return model;
        }
        case MethodKind::MinBaseline: {
            auto model = std::make_unique<MinBaselineModel>();
            model->lvl_count_ = lvl_count;
            model->atomic_forest_ = forest_from_json(doc.at("forest"));
            return model;
        }
    }
    throw ParseError("unknown model method");
}

void save_model(const Model& model, const IndicatorSchema& schema, const std::string& path) {
    write_file(path, model_to_json(model, schema).dump(2) + "\n");
}

std::unique_ptr<Model> load_model(const std::string& path) {
    return model_from_json(load_json(path));
}

// ---------------------------------------------------------------- configs

CompositionSample sample_from_json(const Json& doc) {
    CompositionSample sample;
    sample.topology = topology_from_json(doc.at("topology"));
    if (doc.contains("observed_level") && !doc.at("observed_level").is_null()) {
        sample.observed_level = doc.at("observed_level").get<int>();
    }
    validate_topology(sample.topology);
    return sample;
}

CompositionSample load_sample(const std::string& path) {
    return sample_from_json(load_json(path));
}

GeneratorConfig generator_config_from_json(const Json& doc) {
    GeneratorConfig config;
    config.seed = get_or<std::uint64_t>(doc, "seed", config.seed);
    config.n_compositions = get_or(doc, "n_compositions", config.n_compositions);
    config.lvl_count = get_or(doc, "lvl_count", config.lvl_count);
    config.services_min = get_or(doc, "services_min", config.services_min);
    config.services_max = get_or(doc, "services_max", config.services_max);
    config.sequential_weight = get_or(doc, "sequential_weight", config.sequential_weight);
    config.parallel_weight = get_or(doc, "parallel_weight", config.parallel_weight);
    config.hybrid_weight = get_or(doc, "hybrid_weight", config.hybrid_weight);
    config.shapes_per_pattern = get_or(doc, "shapes_per_pattern", config.shapes_per_pattern);
    if (doc.contains("weights")) {
        config.weights = doc.at("weights").get<std::map<std::string, double>>();
    }
    config.rho = get_or(doc, "rho", config.rho);
    config.sigma = get_or(doc, "sigma", config.sigma);
    config.absent_rate = get_or(doc, "absent_rate", config.absent_rate);
    config.beta_a = get_or(doc, "beta_a", config.beta_a);
    config.beta_b = get_or(doc, "beta_b", config.beta_b);
    return config;
}

Json generator_config_to_json(const GeneratorConfig& config) {
    Json doc;
    doc["seed"] = config.seed;
    doc["n_compositions"] = config.n_compositions;
    doc["lvl_count"] = config.lvl_count;
    doc["services_min"] = config.services_min;
    doc["services_max"] = config.services_max;
    doc["sequential_weight"] = config.sequential_weight;
    doc["parallel_weight"] = config.parallel_weight;
    doc["hybrid_weight"] = config.hybrid_weight;
    doc["shapes_per_pattern"] = config.shapes_per_pattern;
    doc["weights"] = config.weights;
    doc["rho"] = config.rho;
    doc["sigma"] = config.sigma;
    doc["absent_rate"] = config.absent_rate;
    doc["beta_a"] = config.beta_a;
    doc["beta_b"] = config.beta_b;
    return doc;
}

MethodOptions method_options_from_json(const Json& doc) {
    MethodOptions options;
    if (doc.contains("forest")) {
        const auto& f = doc.at("forest");
        options.forest.n_outer = get_or(f, "n_outer", options.forest.n_outer);
        options.forest.m_vertical = get_or(f, "m_vertical", options.forest.m_vertical);
        options.forest.bag_fraction = get_or(f, "bag_fraction", options.forest.bag_fraction);
        options.forest.tree.min_node_size =
            get_or(f, "min_node_size", options.forest.tree.min_node_size);
        options.forest.tree.max_depth = get_or(f, "max_depth", options.forest.tree.max_depth);
        if (f.contains("impurity")) {
            options.forest.tree.impurity = f.at("impurity").get<std::string>() == "gini"
                                               ? Impurity::Gini
                                               : Impurity::Entropy;
        }
        options.forest.n_threads = get_or(f, "n_threads", options.forest.n_threads);
    }
    if (doc.contains("net")) {
        const auto& n = doc.at("net");
        options.net.rate = get_or(n, "rate", options.net.rate);
        options.net.beta1 = get_or(n, "beta1", options.net.beta1);
        options.net.beta2 = get_or(n, "beta2", options.net.beta2);
        options.net.eps = get_or(n, "eps", options.net.eps);
        options.net.batch_size = get_or(n, "batch_size", options.net.batch_size);
        options.net.epochs = get_or(n, "epochs", options.net.epochs);
    }
    options.top_k = get_or(doc, "top_k", options.top_k);
    if (doc.contains("hidden_widths")) {
        options.hidden_widths = doc.at("hidden_widths").get<std::vector<int>>();
    }
    if (doc.contains("encoding")) {
        options.encoding = doc.at("encoding").get<std::string>() == "one_hot"
                               ? ForestEncoding::OneHot
                               : ForestEncoding::ScalarLevel;
    }
    if (doc.contains("train_mode")) {
        options.train_mode = doc.at("train_mode").get<std::string>() == "stage_wise"
                                 ? TrainMode::StageWise
                                 : TrainMode::EndToEnd;
    }
    return options;
}

// ---------------------------------------------------------------- reports

Json compare_report_to_json(const CompareReport& report) {
    Json doc;
    doc["k_folds"] = report.k_folds;
    doc["seed"] = report.seed;
    doc["n_samples"] = report.n_samples;
    doc["averaging"] = "macro";
    Json methods = Json::array();
    for (const auto& m : report.methods) {
        Json item;
        item["method"] = method_name(m.method);
        item["mean_accuracy"] = m.mean_accuracy;
        item["var_accuracy"] = m.var_accuracy;
        item["mean_precision"] = m.mean_precision;
        item["var_precision"] = m.var_precision;
        item["mean_recall"] = m.mean_recall;
        item["var_recall"] = m.var_recall;
        item["fold_accuracy"] = m.fold_accuracy;
        item["fold_precision"] = m.fold_precision;
        item["fold_recall"] = m.fold_recall;
        item["fallback_predictions"] = m.fallback_predictions;
        if (!m.predictions.empty()) {
            item["confidence"] = histogram_to_json(confidence_histogram(m.predictions, m.labels));
        }
        methods.push_back(item);
    }
    doc["methods"] = methods;
    return doc;
}

Json sweep_report_to_json(const SweepReport& report) {
    Json doc;
    doc["axis"] = sweep_axis_name(report.axis);
    Json points = Json::array();
    for (const auto& point : report.points) {
        Json p;
        p["value"] = point.axis_value;
        p["report"] = compare_report_to_json(point.report);
        points.push_back(p);
    }
    doc["points"] = points;
    return doc;
}

Json importance_to_json(const ImportanceReport& report) {
    Json doc;
    Json features = Json::array();
    for (std::size_t f = 0; f < report.feature_names.size(); ++f) {
        Json item;
        item["feature"] = report.feature_names[f];
        item["layer"] = layer_name(report.feature_layers[f]);
        item["mda"] = report.mda_normalized[f];
        item["mda_raw"] = report.mda_mean[f];
        item["mda_std"] = report.mda_std[f];
        item["mdcd"] = report.mdcd[f];
        item["average"] = (report.mda_normalized[f] + report.mdcd[f]) / 2.0;
        features.push_back(item);
    }
    doc["features"] = features;
    Json layers = Json::array();
    for (const auto& row : layer_importance(report)) {
        Json item;
        item["layer"] = layer_name(row.layer);
        item["mda"] = row.mda;
        item["mdcd"] = row.mdcd;
        item["average"] = row.average;
        layers.push_back(item);
    }
    doc["layers"] = layers;
    return doc;
}

std::string importance_table(const ImportanceReport& report) {
    std::ostringstream out;
    char line[200];
    std::snprintf(line, sizeof(line), "%-44s %8s %8s %8s\n", "Features", "MDA", "MDCD", "Avg.");
    out << line;
    for (const auto& row : layer_importance(report)) {
        std::snprintf(line, sizeof(line), "%-44s %8.3f %8.3f %8.3f\n",
                      (std::string(layer_name(row.layer)) + " layer").c_str(), row.mda,
                      row.mdcd, row.average);
        out << line;
        for (std::size_t f = 0; f < report.feature_names.size(); ++f) {
            if (report.feature_layers[f] != row.layer) continue;
            double avg = (report.mda_normalized[f] + report.mdcd[f]) / 2.0;
            std::snprintf(line, sizeof(line), "  %-42s %8.3f %8.3f %8.3f\n",
                          report.feature_names[f].c_str(), report.mda_normalized[f],
                          report.mdcd[f], avg);
            out << line;
        }
    }
    return out.str();
}

Json histogram_to_json(const ConfidenceHistogram& hist) {
    Json doc;
    Json bins = Json::array();
    for (int b = 0; b < 10; ++b) {
        Json bin;
        char label[16];
        std::snprintf(label, sizeof(label), "(%.1f,%.1f]", b / 10.0, (b + 1) / 10.0);
        bin["range"] = label;
        bin["positive_count"] = hist.positive_counts[b];
        bin["positive_fraction"] = hist.positive_fractions[b];
        bin["negative_count"] = hist.negative_counts[b];
        bin["negative_fraction"] = hist.negative_fractions[b];
        bins.push_back(bin);
    }
    doc["bins"] = bins;
    doc["positive_mean_bp"] = hist.positive_mean_bp;
    doc["negative_mean_bp"] = hist.negative_mean_bp;
    doc["positives"] = hist.positives;
    doc["negatives"] = hist.negatives;
    return doc;
}

}  // namespace repboot::io

namespace repboot {

std::string corpus_to_json_text(const CorpusFile& corpus) {
    return io::corpus_to_json(corpus).dump(2) + "\n";
}

CorpusFile corpus_from_json_text(const std::string& text, const std::string& origin) {
    return io::corpus_from_json(io::parse_json(text, origin.empty() ? "corpus" : origin),
                                origin.empty() ? "corpus" : origin);
}

CorpusFile ingest(const std::string& path) {
    return io::corpus_from_json(io::load_json(path), path);
}

void write_corpus(const CorpusFile& corpus, const std::string& path) {
    io::write_file(path, corpus_to_json_text(corpus));
}

}  // namespace repboot
