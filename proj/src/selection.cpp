#include "botflow/selection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "botflow/csv.hpp"
#include "botflow/error.hpp"

namespace botflow {

std::pair<FeatureTable, StandardizationParams> standardize(const FeatureTable& table) {
    table.validate();
    auto params = StandardizationParams::fit(table.rows);
    FeatureTable out;
    out.columns = table.columns;
    out.rows = params.apply(table.rows);
    out.labels = table.labels;
    return {std::move(out), std::move(params)};
}

std::vector<std::string> RankedFeatureList::names() const {
    std::vector<std::string> out;
    for (const auto& f : features) out.push_back(f.name);
    return out;
}

RankedFeatureList rank_features_lr(const FeatureTable& table, std::size_t k, const LogisticParams& params,
                                   std::string dataset) {
    table.validate();
    if (!table.labels) throw ValidationError("feature ranking needs labels");
    if (k == 0) throw ValidationError("k must be at least 1");
    LogisticRegression lr(params);
    lr.fit(table.rows, *table.labels, Exec::parallel);

    std::vector<RankedFeature> candidates;
    for (std::size_t j = 0; j < table.width(); ++j) {
        if (lr.scaler().constant[j]) continue;
        candidates.push_back({table.columns[j], std::abs(lr.weights()[j])});
    }
    if (k > candidates.size()) {
        throw ValidationError("k = " + std::to_string(k) + " exceeds the " + std::to_string(candidates.size()) +
                              " non-constant features");
    }
    std::sort(candidates.begin(), candidates.end(), [](const RankedFeature& a, const RankedFeature& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.name < b.name;
    });
    candidates.resize(k);
    return {std::move(dataset), std::move(candidates)};
}

std::vector<std::string> UniversalFeatureSet::names() const {
    std::vector<std::string> out;
    for (const auto& [n, c] : features) out.push_back(n);
    return out;
}

UniversalFeatureSet derive_universal_set(std::span<const RankedFeatureList> lists, int threshold,
                                         const NameAliasMap& map) {
    if (threshold < 1) throw ValidationError("threshold must be at least 1");
    if (lists.empty()) throw ValidationError("need at least one ranked list");
    std::map<std::string, int> counts;
    for (const auto& list : lists) {
        std::set<std::string> seen;
        for (const auto& f : list.features) seen.insert(normalize_feature_name(f.name, map).name);
        for (const auto& n : seen) ++counts[n];
    }
    UniversalFeatureSet out;
    out.threshold = threshold;
    for (const auto& [name, c] : counts) {
        if (c >= threshold) out.features.emplace_back(name, c);
    }
    std::stable_sort(out.features.begin(), out.features.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return out;
}

void write_ranked_csv(const RankedFeatureList& list, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    csv::write_row(out, {"dataset", "rank", "feature", "score"});
    for (std::size_t i = 0; i < list.features.size(); ++i) {
        csv::write_row(out, {list.dataset, std::to_string(i + 1), list.features[i].name,
                             csv::format_real(list.features[i].score)});
    }
}

RankedFeatureList read_ranked_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    csv::Reader reader(in);
    auto header = reader.next();
    if (!header || header->size() < 4 || (*header)[2] != "feature") {
        throw SchemaError("feature", path.string() + ": not a ranked feature list");
    }
    RankedFeatureList list;
    while (auto rec = reader.next()) {
        if (rec->size() != header->size()) throw ParseError(reader.line(), path.string() + ": ragged row");
        auto score = csv::parse_real((*rec)[3]);
        if (!score) throw ParseError(reader.line(), path.string() + ": bad score");
        list.dataset = (*rec)[0];
        list.features.push_back({(*rec)[2], *score});
    }
    return list;
}

void write_universal_csv(const UniversalFeatureSet& set, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "# threshold=" << set.threshold << "\r\n";
    csv::write_row(out, {"feature", "count"});
    for (const auto& [name, count] : set.features) csv::write_row(out, {name, std::to_string(count)});
}

UniversalFeatureSet read_universal_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    UniversalFeatureSet set;
    if (in.peek() == '#') {
        std::string first;
        std::getline(in, first);
        const auto eq = first.find('=');
        if (eq != std::string::npos) set.threshold = std::stoi(first.substr(eq + 1));
    }
    csv::Reader reader(in);
    auto header = reader.next();
    if (!header || header->empty() || (*header)[0] != "feature") {
        throw SchemaError("feature", path.string() + ": not a universal feature set");
    }
    while (auto rec = reader.next()) {
        if (rec->empty()) continue;
        int count = 0;
        if (rec->size() > 1) {
            auto v = csv::parse_real((*rec)[1]);
            if (!v) throw ParseError(reader.line(), path.string() + ": bad count");
            count = static_cast<int>(*v);
        }
        set.features.emplace_back(normalize_feature_name((*rec)[0]).name, count);
    }
    return set;
}

}  // namespace botflow
