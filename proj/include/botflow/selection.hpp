#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "botflow/classifiers/logistic.hpp"
#include "botflow/dataset.hpp"
#include "botflow/standardize.hpp"

namespace botflow {

/// Column-wise z-scores of a table; constant columns become zeros and are
/// flagged in the returned parameters. Labels are carried over.
std::pair<FeatureTable, StandardizationParams> standardize(const FeatureTable& table);

struct RankedFeature {
    std::string name;
    double score = 0.0;  // |LR coefficient| on standardized data
};

struct RankedFeatureList {
    std::string dataset;
    std::vector<RankedFeature> features;  // score non-increasing, ties by name

    std::vector<std::string> names() const;
};

/// Fits the classifiers' logistic regression on `table` (standardized inside,
/// which is a no-op on already standardized input) and returns the k features
/// with the largest |w|. Constant columns are never ranked.
/// Throws ValidationError when labels are missing or single-class, or when k
/// exceeds the number of non-constant features.
RankedFeatureList rank_features_lr(const FeatureTable& table, std::size_t k = 10,
                                   const LogisticParams& params = {}, std::string dataset = {});

struct UniversalFeatureSet {
    std::vector<std::pair<std::string, int>> features;  // (canonical name, lists containing it)
    int threshold = 2;

    std::vector<std::string> names() const;
};

/// Counts, per alias-normalized name, how many lists contain it and keeps the
/// names with count >= threshold, ordered by count descending then name.
/// Throws ValidationError when threshold < 1 or no lists are given.
UniversalFeatureSet derive_universal_set(std::span<const RankedFeatureList> lists, int threshold = 2,
                                         const NameAliasMap& map = NameAliasMap::standard());

/// CSV "dataset,rank,feature,score".
void write_ranked_csv(const RankedFeatureList& list, const std::filesystem::path& path);
RankedFeatureList read_ranked_csv(const std::filesystem::path& path);

/// CSV "feature,count" plus a "# threshold=N" first line.
void write_universal_csv(const UniversalFeatureSet& set, const std::filesystem::path& path);
UniversalFeatureSet read_universal_csv(const std::filesystem::path& path);

}  // namespace botflow
