#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "repboot/data.hpp"
#include "repboot/methods.hpp"

namespace repboot {

struct PrfMetrics {
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
};

// Accuracy plus precision/recall macro-averaged over the classes that occur
// in the labels; a class with no predicted positives contributes precision 0.
PrfMetrics prf_metrics(const std::vector<int>& predictions, const std::vector<int>& labels,
                       int lvl_count);

struct MethodSummary {
    MethodKind method = MethodKind::Fdnn;
    std::vector<double> fold_accuracy;
    std::vector<double> fold_precision;
    std::vector<double> fold_recall;
    double mean_accuracy = 0.0, var_accuracy = 0.0;
    double mean_precision = 0.0, var_precision = 0.0;
    double mean_recall = 0.0, var_recall = 0.0;
    int fallback_predictions = 0;
    // Every held-out prediction across the folds, in fold order, with its
    // label; feeds the per-method confidence histogram.
    std::vector<Prediction> predictions;
    std::vector<int> labels;
};

struct CompareReport {
    int k_folds = 0;
    std::uint64_t seed = 0;
    std::size_t n_samples = 0;
    std::vector<MethodSummary> methods;
};

// K-fold cross-validated comparison of the given methods on one corpus.
// Pure function of (corpus, methods, k, seed, options).
CompareReport compare_methods(const CorpusFile& corpus, const std::vector<MethodKind>& methods,
                              int k, std::uint64_t seed, const MethodOptions& options);

std::string compare_report_text(const CompareReport& report);

enum class SweepAxis { TopologySize, LvlCount };

const char* sweep_axis_name(SweepAxis axis);
SweepAxis sweep_axis_from_name(const std::string& name);

struct SweepPoint {
    int axis_value = 0;
    CompareReport report;
};

struct SweepReport {
    SweepAxis axis = SweepAxis::TopologySize;
    std::vector<SweepPoint> points;
};

// Regenerates the base corpus once per axis value (services per composition
// or level count) and compares the methods on each.
SweepReport sweep(const GeneratorConfig& base, SweepAxis axis, const std::vector<int>& values,
                  const std::vector<MethodKind>& methods, int k, std::uint64_t seed,
                  const MethodOptions& options);

// Plot-ready CSV: one row per axis value, one accuracy column per method.
std::string sweep_csv(const SweepReport& report);

struct ConfidenceHistogram {
    // Ten bins over (0,1]: bin i covers (i/10, (i+1)/10].
    std::vector<int> positive_counts;
    std::vector<int> negative_counts;
    std::vector<double> positive_fractions;
    std::vector<double> negative_fractions;
    double positive_mean_bp = 0.0;
    double negative_mean_bp = 0.0;
    int positives = 0;
    int negatives = 0;
};

// Splits per-prediction confidences by whether the predicted level matched
// the observed one.
ConfidenceHistogram confidence_histogram(const std::vector<Prediction>& predictions,
                                         const std::vector<int>& labels);

}  // namespace repboot
