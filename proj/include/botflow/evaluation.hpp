#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "botflow/classifiers/common.hpp"

namespace botflow {

struct ConfusionMatrix {
    std::uint64_t tp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const noexcept { return tp + tn + fp + fn; }
    bool operator==(const ConfusionMatrix&) const = default;
};

/// Positive class is 1 (attack). Throws ValidationError on length mismatch or empty input.
ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred);

struct MetricsReport {
    std::string dataset;
    ModelKind classifier = ModelKind::nb;
    ConfusionMatrix cm;
    double accuracy = 0.0;   // percent
    double precision = 0.0;  // percent; 0 and flagged when TP + FP = 0
    double recall = 0.0;     // percent; 0 and flagged when TP + FN = 0
    double f1 = 0.0;         // percent; 0 when precision + recall = 0
    bool precision_degenerate = false;
    bool recall_degenerate = false;
};

/// Accuracy, precision, recall and F1 as percentages. Throws ValidationError
/// for an all-zero matrix.
MetricsReport compute_metrics(const ConfusionMatrix& cm, std::string dataset = {},
                              ModelKind classifier = ModelKind::nb);

enum class ReportFormat { text, csv };

/// One row per (dataset, classifier): datasets in first-seen order, classifiers
/// as NB, KNN, RF, LR. Metrics to 2 decimals.
std::string render_report(std::span<const MetricsReport> reports, ReportFormat format);

/// Parses the CSV produced by render_report(..., csv).
std::vector<MetricsReport> read_report_csv(const std::filesystem::path& path);

}  // namespace botflow
