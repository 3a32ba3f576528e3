#include "repboot/eval.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "repboot/errors.hpp"

namespace repboot {

PrfMetrics prf_metrics(const std::vector<int>& predictions, const std::vector<int>& labels,
                       int lvl_count) {
    if (predictions.empty() || predictions.size() != labels.size()) {
        throw DomainError("metrics need equal-length, nonempty prediction/label lists");
    }
    std::vector<int> tp(lvl_count, 0), fp(lvl_count, 0), fn(lvl_count, 0), support(lvl_count, 0);
    int correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        int p = predictions[i], l = labels[i];
        if (p < 1 || p > lvl_count || l < 1 || l > lvl_count) {
            throw DomainError("prediction or label out of [1, lvl_count]");
        }
        support[l - 1]++;
        if (p == l) {
            ++correct;
            tp[l - 1]++;
        } else {
            fp[p - 1]++;
            fn[l - 1]++;
        }
    }

    PrfMetrics metrics;
    metrics.accuracy = static_cast<double>(correct) / predictions.size();
    int present_classes = 0;
    for (int c = 0; c < lvl_count; ++c) {
        if (support[c] == 0) continue;  // classes absent from labels are skipped
        ++present_classes;
        int predicted = tp[c] + fp[c];
        metrics.macro_precision += predicted == 0 ? 0.0 : static_cast<double>(tp[c]) / predicted;
        metrics.macro_recall += static_cast<double>(tp[c]) / support[c];
    }
    if (present_classes > 0) {
        metrics.macro_precision /= present_classes;
        metrics.macro_recall /= present_classes;
    }
    return metrics;
}

namespace {

void summarize(const std::vector<double>& values, double& mean, double& variance) {
    mean = 0.0;
    variance = 0.0;
    if (values.empty()) return;
    for (double v : values) mean += v;
    mean /= values.size();
    for (double v : values) variance += (v - mean) * (v - mean);
    variance /= values.size();
}

}  // namespace

CompareReport compare_methods(const CorpusFile& corpus, const std::vector<MethodKind>& methods,
                              int k, std::uint64_t seed, const MethodOptions& options) {
    for (const auto& sample : corpus.samples) {
        if (!sample.observed_level) {
            throw ConfigError("comparison corpus must be fully labelled");
        }
    }
    std::vector<FoldSplit> folds = kfold_split(corpus.samples.size(), k, seed);

    CompareReport report;
    report.k_folds = k;
    report.seed = seed;
    report.n_samples = corpus.samples.size();

    for (MethodKind kind : methods) {
        MethodSummary summary;
        summary.method = kind;
        for (int f = 0; f < k; ++f) {
            MethodOptions fold_options = options;
            fold_options.forest.seed = options.forest.seed + 7919ULL * (f + 1);
            fold_options.net.seed = options.net.seed + 104729ULL * (f + 1);
            std::unique_ptr<Model> model =
                train_model(kind, corpus, folds[f].train, fold_options);

            std::vector<int> predictions;
            std::vector<int> labels;
            for (int i : folds[f].test) {
                Prediction p = model->predict(corpus.samples[i].topology);
                if (p.fallback) summary.fallback_predictions++;
                predictions.push_back(p.level);
                labels.push_back(*corpus.samples[i].observed_level);
                summary.predictions.push_back(p);
                summary.labels.push_back(*corpus.samples[i].observed_level);
            }
            PrfMetrics metrics = prf_metrics(predictions, labels, corpus.lvl_count);
            summary.fold_accuracy.push_back(metrics.accuracy);
            summary.fold_precision.push_back(metrics.macro_precision);
            summary.fold_recall.push_back(metrics.macro_recall);
        }
        summarize(summary.fold_accuracy, summary.mean_accuracy, summary.var_accuracy);
        summarize(summary.fold_precision, summary.mean_precision, summary.var_precision);
        summarize(summary.fold_recall, summary.mean_recall, summary.var_recall);
        report.methods.push_back(std::move(summary));
    }
    return report;
}

std::string compare_report_text(const CompareReport& report) {
    std::ostringstream out;
    char line[200];
    std::snprintf(line, sizeof(line), "%-8s %10s %10s %10s %10s %9s %8s %8s\n", "method",
                  "accuracy", "var", "precision", "recall", "fallback", "bp_hit", "bp_miss");
    out << line;
    for (const auto& m : report.methods) {
        ConfidenceHistogram hist = confidence_histogram(m.predictions, m.labels);
        std::snprintf(line, sizeof(line),
                      "%-8s %10.4f %10.4f %10.4f %10.4f %9d %8.4f %8.4f\n",
                      method_name(m.method), m.mean_accuracy, m.var_accuracy,
                      m.mean_precision, m.mean_recall, m.fallback_predictions,
                      hist.positive_mean_bp, hist.negative_mean_bp);
        out << line;
    }
    return out.str();
}

const char* sweep_axis_name(SweepAxis axis) {
    return axis == SweepAxis::TopologySize ? "topology_size" : "lvl_count";
}

SweepAxis sweep_axis_from_name(const std::string& name) {
    if (name == "topology_size") return SweepAxis::TopologySize;
    if (name == "lvl_count") return SweepAxis::LvlCount;
    throw ConfigError("unknown sweep axis: " + name);
}

SweepReport sweep(const GeneratorConfig& base, SweepAxis axis, const std::vector<int>& values,
                  const std::vector<MethodKind>& methods, int k, std::uint64_t seed,
                  const MethodOptions& options) {
    if (values.empty()) throw ConfigError("sweep needs at least one axis value");
    SweepReport report;
    report.axis = axis;
    for (std::size_t i = 0; i < values.size(); ++i) {
        GeneratorConfig config = base;
        config.seed = base.seed + 15485863ULL * i;
        if (axis == SweepAxis::TopologySize) {
            config.services_min = values[i];
            config.services_max = values[i];
        } else {
            config.lvl_count = values[i];
        }
        CorpusFile corpus = generate(config);
        SweepPoint point;
        point.axis_value = values[i];
        point.report = compare_methods(corpus, methods, k, seed, options);
        report.points.push_back(std::move(point));
    }
    return report;
}

std::string sweep_csv(const SweepReport& report) {
    std::ostringstream out;
    out << sweep_axis_name(report.axis);
    if (!report.points.empty()) {
        for (const auto& m : report.points[0].report.methods) {
            out << "," << method_name(m.method);
        }
    }
    out << "\n";
    char cell[32];
    for (const auto& point : report.points) {
        out << point.axis_value;
        for (const auto& m : point.report.methods) {
            std::snprintf(cell, sizeof(cell), ",%.4f", m.mean_accuracy);
            out << cell;
        }
        out << "\n";
    }
    return out.str();
}

ConfidenceHistogram confidence_histogram(const std::vector<Prediction>& predictions,
                                         const std::vector<int>& labels) {
    if (predictions.empty() || predictions.size() != labels.size()) {
        throw DomainError("histogram needs equal-length, nonempty inputs");
    }
    ConfidenceHistogram hist;
    hist.positive_counts.assign(10, 0);
    hist.negative_counts.assign(10, 0);
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        double bp = predictions[i].bp;
        int bin = std::min(9, std::max(0, static_cast<int>(std::ceil(bp * 10.0)) - 1));
        if (predictions[i].level == labels[i]) {
            hist.positive_counts[bin]++;
            hist.positive_mean_bp += bp;
            hist.positives++;
        } else {
            hist.negative_counts[bin]++;
            hist.negative_mean_bp += bp;
            hist.negatives++;
        }
    }
    hist.positive_fractions.assign(10, 0.0);
    hist.negative_fractions.assign(10, 0.0);
    for (int b = 0; b < 10; ++b) {
        if (hist.positives > 0) {
            hist.positive_fractions[b] =
                static_cast<double>(hist.positive_counts[b]) / hist.positives;
        }
        if (hist.negatives > 0) {
            hist.negative_fractions[b] =
                static_cast<double>(hist.negative_counts[b]) / hist.negatives;
        }
    }
    if (hist.positives > 0) hist.positive_mean_bp /= hist.positives;
    if (hist.negatives > 0) hist.negative_mean_bp /= hist.negatives;
    return hist;
}

}  // namespace repboot
