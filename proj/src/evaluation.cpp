#include "botflow/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "botflow/csv.hpp"
#include "botflow/error.hpp"

namespace botflow {

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred) {
    if (y_true.size() != y_pred.size()) throw ValidationError("truth and prediction lengths differ");
    if (y_true.empty()) throw ValidationError("nothing to evaluate");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const bool t = y_true[i] != 0;
        const bool p = y_pred[i] != 0;
        if (t && p) ++cm.tp;
        else if (!t && !p) ++cm.tn;
        else if (p) ++cm.fp;
        else ++cm.fn;
    }
    return cm;
}

MetricsReport compute_metrics(const ConfusionMatrix& cm, std::string dataset, ModelKind classifier) {
    if (cm.total() == 0) throw ValidationError("confusion matrix is empty");
    MetricsReport r;
    r.dataset = std::move(dataset);
    r.classifier = classifier;
    r.cm = cm;
    const auto tp = static_cast<double>(cm.tp);
    r.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total()) * 100.0;
    if (cm.tp + cm.fp == 0) {
        r.precision_degenerate = true;
    } else {
        r.precision = tp / static_cast<double>(cm.tp + cm.fp) * 100.0;
    }
    if (cm.tp + cm.fn == 0) {
        r.recall_degenerate = true;
    } else {
        r.recall = tp / static_cast<double>(cm.tp + cm.fn) * 100.0;
    }
    if (r.precision + r.recall > 0) r.f1 = 2.0 * (r.recall * r.precision) / (r.recall + r.precision);
    return r;
}

namespace {

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::vector<const MetricsReport*> ordered(std::span<const MetricsReport> reports) {
    std::vector<std::string> datasets;
    for (const auto& r : reports) {
        if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) datasets.push_back(r.dataset);
    }
    std::vector<const MetricsReport*> rows;
    for (const auto& r : reports) rows.push_back(&r);
    std::stable_sort(rows.begin(), rows.end(), [&](const MetricsReport* a, const MetricsReport* b) {
        const auto da = std::find(datasets.begin(), datasets.end(), a->dataset) - datasets.begin();
        const auto db = std::find(datasets.begin(), datasets.end(), b->dataset) - datasets.begin();
        if (da != db) return da < db;
        return static_cast<int>(a->classifier) < static_cast<int>(b->classifier);
    });
    return rows;
}

}  // namespace

std::string render_report(std::span<const MetricsReport> reports, ReportFormat format) {
    const auto rows = ordered(reports);
    std::ostringstream out;
    if (format == ReportFormat::csv) {
        csv::write_row(out, {"dataset", "classifier", "accuracy", "precision", "recall", "f1"});
        for (const auto* r : rows) {
            csv::write_row(out, {r->dataset, std::string(to_string(r->classifier)), fixed2(r->accuracy),
                                 fixed2(r->precision), fixed2(r->recall), fixed2(r->f1)});
        }
        return out.str();
    }
    std::size_t name_w = 7;
    for (const auto* r : rows) name_w = std::max(name_w, r->dataset.size());
    char line[256];
    std::snprintf(line, sizeof line, "%-*s  %-10s  %8s  %9s  %8s  %8s\n", static_cast<int>(name_w), "Dataset",
                  "Classifier", "Accuracy", "Precision", "Recall", "F1-Score");
    out << line;
    for (const auto* r : rows) {
        std::string flags;
        if (r->precision_degenerate) flags += " (precision undefined)";
        if (r->recall_degenerate) flags += " (recall undefined)";
        std::snprintf(line, sizeof line, "%-*s  %-10s  %8s  %9s  %8s  %8s", static_cast<int>(name_w),
                      r->dataset.c_str(), std::string(to_string(r->classifier)).c_str(), fixed2(r->accuracy).c_str(),
                      fixed2(r->precision).c_str(), fixed2(r->recall).c_str(), fixed2(r->f1).c_str());
        out << line << flags << '\n';
    }
    return out.str();
}

std::vector<MetricsReport> read_report_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    csv::Reader reader(in);
    auto header = reader.next();
    if (!header || header->size() != 6) throw SchemaError("dataset", path.string() + ": not a metrics report");
    std::vector<MetricsReport> out;
    while (auto rec = reader.next()) {
        if (rec->size() != 6) throw ParseError(reader.line(), path.string() + ": ragged row");
        MetricsReport r;
        r.dataset = (*rec)[0];
        r.classifier = parse_model_kind((*rec)[1]);
        double* dst[] = {&r.accuracy, &r.precision, &r.recall, &r.f1};
        for (int i = 0; i < 4; ++i) {
            auto v = csv::parse_real((*rec)[static_cast<std::size_t>(2 + i)]);
            if (!v) throw ParseError(reader.line(), path.string() + ": bad metric");
            *dst[i] = *v;
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace botflow
