#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "botflow/matrix.hpp"

namespace botflow {

/// Maps the spellings used by different CICFlowMeter generations (and the
/// published CICIDS2017 / CSE-CIC-IDS2018 CSVs) onto this project's canonical
/// long feature names. Canonical names map to themselves.
class NameAliasMap {
public:
    /// The built-in alias set.
    static const NameAliasMap& standard();

    NameAliasMap() = default;

    /// Throws ValidationError if `alias` already maps to a different name.
    void add(std::string alias, std::string canonical);

    std::optional<std::string> lookup(std::string_view name) const;

    std::size_t size() const noexcept { return exact_.size(); }

private:
    std::unordered_map<std::string, std::string> exact_;
    std::unordered_map<std::string, std::string> folded_;  // lower-cased, whitespace-collapsed key
};

struct NormalizedName {
    std::string name;
    bool known = true;  // false: no alias matched, name returned as given (trimmed)
};

NormalizedName normalize_feature_name(std::string_view name,
                                      const NameAliasMap& map = NameAliasMap::standard());

/// Model-ready numeric table. Identity columns never appear here.
struct FeatureTable {
    std::vector<std::string> columns;
    Matrix rows;
    std::optional<std::vector<int>> labels;  // 0 = normal, 1 = attack

    std::size_t size() const noexcept { return rows.rows(); }
    std::size_t width() const noexcept { return columns.size(); }

    /// Index of a canonical column name, or nullopt.
    std::optional<std::size_t> column_index(std::string_view name) const;

    /// Copy restricted to the named columns, in the given order. Throws
    /// ValidationError for an unknown name.
    FeatureTable select(const std::vector<std::string>& names) const;

    /// Copy restricted to the given row indices, in order.
    FeatureTable take(const std::vector<std::size_t>& indices) const;

    /// Throws ValidationError if shapes disagree.
    void validate() const;
};

struct ReadOptions {
    /// Label cell value treated as class 0; any other string is class 1.
    /// Numeric "0"/"1" cells are taken as-is.
    std::string normal_label = "Normal";
};

/// Reads a feature CSV (flow CSV, labeled CSV or a table written by
/// write_feature_csv). Headers are alias-normalized; identity columns are
/// dropped; a "Label" column becomes `labels`.
FeatureTable read_feature_csv(const std::filesystem::path& path, const ReadOptions& options = {});
FeatureTable read_feature_csv(std::istream& in, const ReadOptions& options = {});

/// Writes columns (then "Label" with 0/1 when labels are present).
void write_feature_csv(const FeatureTable& table, const std::filesystem::path& path);
void write_feature_csv(const FeatureTable& table, std::ostream& out);

struct SplitOptions {
    double ratio = 0.8;
    std::uint64_t seed = 0;
    bool stratified = false;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Seeded shuffle of row indices; |train| = round(ratio * n) (per class when
/// stratified). Throws ValidationError for ratio outside (0,1), n < 2 or a
/// missing label vector.
SplitIndices split_indices(const FeatureTable& table, const SplitOptions& options);

std::pair<FeatureTable, FeatureTable> train_test_split(const FeatureTable& table,
                                                       const SplitOptions& options);

struct DatasetManifest {
    std::string name;
    std::vector<std::filesystem::path> captures;
    std::filesystem::path rules;
    /// Pre-extracted labeled feature CSV; when set, extraction and labeling are skipped.
    std::filesystem::path features;
    std::string default_label = "Normal";
    std::string notes;
};

/// Parses a `key = value` manifest. Keys: name, captures (comma-separated,
/// may repeat), rules, features, default_label, notes. '#' starts a comment.
/// Relative paths resolve against the manifest's directory.
DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

}  // namespace botflow
