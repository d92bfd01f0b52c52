#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "botflow/classifiers/model.hpp"
#include "botflow/dataset.hpp"
#include "botflow/evaluation.hpp"
#include "botflow/flow.hpp"
#include "botflow/selection.hpp"

namespace botflow {

struct PipelineConfig {
    std::vector<DatasetManifest> manifests;
    MeterConfig meter;
    double split_ratio = 0.8;
    bool stratified = false;
    std::uint64_t seed = 42;
    std::size_t top_k = 10;
    int threshold = 2;
    std::vector<ModelSpec> models;  // see reseed_models
    std::filesystem::path output_dir = "out";

    /// Throws ValidationError on an invalid combination.
    void validate() const;
};

/// Reads a JSON pipeline configuration. Manifest and output paths resolve
/// against the config file's directory. Keys:
///   manifests: [path...]           (required)
///   output_dir, seed, split_ratio, stratified, top_k, threshold
///   meter: {flow_timeout_s, activity_timeout_s, home_prefixes: [cidr...]}
///   classifiers: ["NB", "KNN", "RF", "LR"]
///   models: {nb: {var_smoothing}, knn: {k}, rf: {n_trees, max_features,
///            min_samples_split, bootstrap}, lr: {l2_lambda, learning_rate, max_iters, tol}}
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// Sets every model seed to `seed`; an empty model list gets the four defaults.
void reseed_models(PipelineConfig& config);

enum class Stage { extract, label, rank, universal, train, evaluate };
std::string_view to_string(Stage stage);

/// Error raised by run_pipeline, tagged with the stage that failed.
class StageError : public std::runtime_error {
public:
    StageError(Stage stage, const std::string& what)
        : std::runtime_error(std::string(to_string(stage)) + ": " + what), stage_(stage) {}
    Stage stage() const noexcept { return stage_; }

private:
    Stage stage_;
};

struct DatasetOutcome {
    std::string name;
    std::size_t flows = 0;
    std::size_t positives = 0;
    RankedFeatureList ranking;
};

struct PipelineResult {
    std::vector<DatasetOutcome> datasets;
    UniversalFeatureSet universal;
    std::vector<MetricsReport> reports;
};

/// extract -> label -> rank (per dataset) -> universal set -> per-dataset
/// training on the universal features -> evaluation. Writes, under output_dir:
///   <dataset>/flows.csv, <dataset>/labeled.csv, <dataset>/ranked.csv,
///   <dataset>/test.csv, <dataset>/models/<KIND>.model,
///   universal.csv, report.csv, report.txt.
/// On failure a FAILED marker naming the stage is written, artifacts produced so
/// far are kept, and StageError is thrown. `log` receives progress and warnings.
PipelineResult run_pipeline(const PipelineConfig& config, std::ostream* log = nullptr);

/// Loads the labeled feature table of one dataset from a labeled CSV.
FeatureTable load_labeled_table(const std::filesystem::path& path, const std::string& normal_label);

/// Trains every spec on the universal columns of `table` and evaluates on the
/// held-out split. Models and the test split are written under `dir` when set.
std::vector<MetricsReport> train_and_evaluate(const FeatureTable& table, const std::string& dataset,
                                              const std::vector<std::string>& features,
                                              const std::vector<ModelSpec>& models, const SplitOptions& split,
                                              const std::optional<std::filesystem::path>& dir = std::nullopt);

}  // namespace botflow
