#pragma once

#include <filesystem>
#include <iosfwd>
#include <variant>
#include <vector>

#include "botflow/classifiers/knn.hpp"
#include "botflow/classifiers/logistic.hpp"
#include "botflow/classifiers/naive_bayes.hpp"
#include "botflow/classifiers/random_forest.hpp"

namespace botflow {

using ModelSpec = std::variant<NaiveBayesParams, KnnParams, RandomForestParams, LogisticParams>;
using Model = std::variant<GaussianNaiveBayes, KNearestNeighbors, RandomForest, LogisticRegression>;

ModelKind kind_of(const ModelSpec& spec);
ModelKind kind_of(const Model& model);

/// Default hyperparameters for a kind, with `seed` applied where the kind uses one.
ModelSpec default_spec(ModelKind kind, std::uint64_t seed = 0);

/// Throws ValidationError for out-of-range hyperparameters.
void validate_spec(const ModelSpec& spec);

Model fit(const ModelSpec& spec, const Matrix& x, std::span<const int> y, Exec exec = Exec::parallel);
std::vector<int> predict(const Model& model, const Matrix& x, Exec exec = Exec::parallel);
std::size_t model_width(const Model& model);

/// Text model format "botflow-model 1": kind, hyperparameters and fitted state,
/// doubles in shortest round-trip form. See README for the layout.
void save_model(const Model& model, std::ostream& out);
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(std::istream& in);
Model load_model(const std::filesystem::path& path);

}  // namespace botflow
