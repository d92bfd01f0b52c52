#include "botflow/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "botflow/csv.hpp"
#include "botflow/error.hpp"
#include "botflow/features.hpp"
#include "botflow/rng.hpp"

namespace botflow {

namespace {

std::string fold(std::string_view s) {
    std::string out;
    bool space = false;
    for (char c : csv::trim(s)) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            space = true;
            continue;
        }
        if (space && !out.empty()) out.push_back(' ');
        space = false;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

// alias -> canonical. Covers CICFlowMeter 3/4 ("Tot Fwd Pkts" style), the
// CICIDS2017 MachineLearningCSV headers and the Python cicflowmeter package.
constexpr std::pair<std::string_view, std::string_view> kAliases[] = {
    {"Src IP", "Src IP"},
    {"Source IP", "Src IP"},
    {"src_ip", "Src IP"},
    {"Src Port", "Src Port"},
    {"Source Port", "Src Port"},
    {"src_port", "Src Port"},
    {"Dst IP", "Dst IP"},
    {"Destination IP", "Dst IP"},
    {"dst_ip", "Dst IP"},
    {"Dst Port", "Dst Port"},
    {"Destination Port", "Dst Port"},
    {"dst_port", "Dst Port"},
    {"Flow ID", "Flow ID"},
    {"Protocol", "Protocol"},
    {"protocol", "Protocol"},
    {"Timestamp", "Timestamp"},
    {"timestamp", "Timestamp"},
    {"Label", "Label"},
    {"label", "Label"},

    {"Flow Duration", "Flow Duration"},
    {"flow_duration", "Flow Duration"},
    {"Tot Fwd Pkts", "Total Fwd Packets"},
    {"Total Fwd Packet", "Total Fwd Packets"},
    {"tot_fwd_pkts", "Total Fwd Packets"},
    {"Tot Bwd Pkts", "Total Backward Packets"},
    {"Total Bwd packets", "Total Backward Packets"},
    {"Total Bwd Packets", "Total Backward Packets"},
    {"tot_bwd_pkts", "Total Backward Packets"},
    {"TotLen Fwd Pkts", "Total Length of Fwd Packets"},
    {"Total Length of Fwd Packet", "Total Length of Fwd Packets"},
    {"totlen_fwd_pkts", "Total Length of Fwd Packets"},
    {"TotLen Bwd Pkts", "Total Length of Bwd Packets"},
    {"Total Length of Bwd Packet", "Total Length of Bwd Packets"},
    {"totlen_bwd_pkts", "Total Length of Bwd Packets"},
    {"Fwd Pkt Len Max", "Fwd Packet Length Max"},
    {"fwd_pkt_len_max", "Fwd Packet Length Max"},
    {"Fwd Pkt Len Min", "Fwd Packet Length Min"},
    {"fwd_pkt_len_min", "Fwd Packet Length Min"},
    {"Fwd Pkt Len Mean", "Fwd Packet Length Mean"},
    {"fwd_pkt_len_mean", "Fwd Packet Length Mean"},
    {"Fwd Pkt Len Std", "Fwd Packet Length Std"},
    {"fwd_pkt_len_std", "Fwd Packet Length Std"},
    {"Bwd Pkt Len Max", "Bwd Packet Length Max"},
    {"bwd_pkt_len_max", "Bwd Packet Length Max"},
    {"Bwd Pkt Len Min", "Bwd Packet Length Min"},
    {"bwd_pkt_len_min", "Bwd Packet Length Min"},
    {"Bwd Pkt Len Mean", "Bwd Packet Length Mean"},
    {"bwd_pkt_len_mean", "Bwd Packet Length Mean"},
    {"Bwd Pkt Len Std", "Bwd Packet Length Std"},
    {"bwd_pkt_len_std", "Bwd Packet Length Std"},
    {"Flow Byts/s", "Flow Bytes/s"},
    {"flow_byts_s", "Flow Bytes/s"},
    {"Flow Pkts/s", "Flow Packets/s"},
    {"flow_pkts_s", "Flow Packets/s"},
    {"flow_iat_mean", "Flow IAT Mean"},
    {"flow_iat_std", "Flow IAT Std"},
    {"flow_iat_max", "Flow IAT Max"},
    {"flow_iat_min", "Flow IAT Min"},
    {"Fwd IAT Tot", "Fwd IAT Total"},
    {"fwd_iat_tot", "Fwd IAT Total"},
    {"fwd_iat_mean", "Fwd IAT Mean"},
    {"fwd_iat_std", "Fwd IAT Std"},
    {"fwd_iat_max", "Fwd IAT Max"},
    {"fwd_iat_min", "Fwd IAT Min"},
    {"Bwd IAT Tot", "Bwd IAT Total"},
    {"bwd_iat_tot", "Bwd IAT Total"},
    {"bwd_iat_mean", "Bwd IAT Mean"},
    {"bwd_iat_std", "Bwd IAT Std"},
    {"bwd_iat_max", "Bwd IAT Max"},
    {"bwd_iat_min", "Bwd IAT Min"},
    {"fwd_psh_flags", "Fwd PSH Flags"},
    {"bwd_psh_flags", "Bwd PSH Flags"},
    {"fwd_urg_flags", "Fwd URG Flags"},
    {"bwd_urg_flags", "Bwd URG Flags"},
    {"Fwd Header Len", "Fwd Header Length"},
    {"fwd_header_len", "Fwd Header Length"},
    {"Bwd Header Len", "Bwd Header Length"},
    {"bwd_header_len", "Bwd Header Length"},
    {"Fwd Pkts/s", "Fwd Packets/s"},
    {"fwd_pkts_s", "Fwd Packets/s"},
    {"Bwd Pkts/s", "Bwd Packets/s"},
    {"bwd_pkts_s", "Bwd Packets/s"},
    {"Pkt Len Min", "Min Packet Length"},
    {"Packet Length Min", "Min Packet Length"},
    {"pkt_len_min", "Min Packet Length"},
    {"Pkt Len Max", "Max Packet Length"},
    {"Packet Length Max", "Max Packet Length"},
    {"pkt_len_max", "Max Packet Length"},
    {"Pkt Len Mean", "Packet Length Mean"},
    {"pkt_len_mean", "Packet Length Mean"},
    {"Pkt Len Std", "Packet Length Std"},
    {"pkt_len_std", "Packet Length Std"},
    {"Pkt Len Var", "Packet Length Variance"},
    {"pkt_len_var", "Packet Length Variance"},
    {"FIN Flag Cnt", "FIN Flag Count"},
    {"fin_flag_cnt", "FIN Flag Count"},
    {"SYN Flag Cnt", "SYN Flag Count"},
    {"syn_flag_cnt", "SYN Flag Count"},
    {"RST Flag Cnt", "RST Flag Count"},
    {"rst_flag_cnt", "RST Flag Count"},
    {"PSH Flag Cnt", "PSH Flag Count"},
    {"psh_flag_cnt", "PSH Flag Count"},
    {"ACK Flag Cnt", "ACK Flag Count"},
    {"ack_flag_cnt", "ACK Flag Count"},
    {"URG Flag Cnt", "URG Flag Count"},
    {"urg_flag_cnt", "URG Flag Count"},
    {"CWE Flag Count", "CWR Flag Count"},  // CICFlowMeter's historic misspelling
    {"CWR Flag Cnt", "CWR Flag Count"},
    {"cwe_flag_count", "CWR Flag Count"},
    {"ECE Flag Cnt", "ECE Flag Count"},
    {"ece_flag_cnt", "ECE Flag Count"},
    {"Down/Up Ratio", "Down/Up Ratio"},
    {"down_up_ratio", "Down/Up Ratio"},
    {"Pkt Size Avg", "Average Packet Size"},
    {"pkt_size_avg", "Average Packet Size"},
    {"Fwd Seg Size Avg", "Avg Fwd Segment Size"},
    {"Fwd Segment Size Avg", "Avg Fwd Segment Size"},
    {"fwd_seg_size_avg", "Avg Fwd Segment Size"},
    {"Bwd Seg Size Avg", "Avg Bwd Segment Size"},
    {"Bwd Segment Size Avg", "Avg Bwd Segment Size"},
    {"bwd_seg_size_avg", "Avg Bwd Segment Size"},
    {"Init Fwd Win Byts", "Init Fwd Win Bytes"},
    {"Init_Win_bytes_forward", "Init Fwd Win Bytes"},
    {"FWD Init Win Bytes", "Init Fwd Win Bytes"},
    {"init_fwd_win_byts", "Init Fwd Win Bytes"},
    {"Init Bwd Win Byts", "Init Bwd Win Bytes"},
    {"Init_Win_bytes_backward", "Init Bwd Win Bytes"},
    {"Bwd Init Win Bytes", "Init Bwd Win Bytes"},
    {"init_bwd_win_byts", "Init Bwd Win Bytes"},
    {"active_mean", "Active Mean"},
    {"active_std", "Active Std"},
    {"active_max", "Active Max"},
    {"active_min", "Active Min"},
    {"idle_mean", "Idle Mean"},
    {"idle_std", "Idle Std"},
    {"idle_max", "Idle Max"},
    {"idle_min", "Idle Min"},
};

const std::vector<std::string>& identity_columns() {
    static const std::vector<std::string> cols(identity_column_names().begin(),
                                               identity_column_names().end());
    return cols;
}

bool is_identity(std::string_view name) {
    const auto& ids = identity_columns();
    return std::find(ids.begin(), ids.end(), name) != ids.end();
}

}  // namespace

const NameAliasMap& NameAliasMap::standard() {
    static const NameAliasMap map = [] {
        NameAliasMap m;
        for (auto name : feature_names()) m.add(std::string(name), std::string(name));
        for (auto [alias, canonical] : kAliases) m.add(std::string(alias), std::string(canonical));
        return m;
    }();
    return map;
}

void NameAliasMap::add(std::string alias, std::string canonical) {
    auto [it, inserted] = exact_.emplace(alias, canonical);
    if (!inserted && it->second != canonical) {
        throw ValidationError("alias '" + alias + "' already maps to '" + it->second + "'");
    }
    // Canonical names must be fixed points.
    exact_.emplace(canonical, canonical);
    auto folded_key = fold(alias);
    auto [fit, finserted] = folded_.emplace(folded_key, canonical);
    if (!finserted && fit->second != canonical) {
        throw ValidationError("alias '" + alias + "' collides case-insensitively with '" + fit->second + "'");
    }
    folded_.emplace(fold(canonical), canonical);
}

std::optional<std::string> NameAliasMap::lookup(std::string_view name) const {
    const auto trimmed = csv::trim(name);
    if (auto it = exact_.find(std::string(trimmed)); it != exact_.end()) return it->second;
    if (auto it = folded_.find(fold(trimmed)); it != folded_.end()) return it->second;
    return std::nullopt;
}

NormalizedName normalize_feature_name(std::string_view name, const NameAliasMap& map) {
    if (auto canonical = map.lookup(name)) return {*canonical, true};
    return {std::string(csv::trim(name)), false};
}

std::optional<std::size_t> FeatureTable::column_index(std::string_view name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) return std::nullopt;
    return static_cast<std::size_t>(it - columns.begin());
}

FeatureTable FeatureTable::select(const std::vector<std::string>& names) const {
    std::vector<std::size_t> idx;
    idx.reserve(names.size());
    for (const auto& n : names) {
        auto i = column_index(n);
        if (!i) throw ValidationError("table has no column '" + n + "'");
        idx.push_back(*i);
    }
    FeatureTable out;
    out.columns = names;
    out.rows = Matrix(size(), names.size());
    for (std::size_t r = 0; r < size(); ++r) {
        for (std::size_t c = 0; c < idx.size(); ++c) out.rows(r, c) = rows(r, idx[c]);
    }
    out.labels = labels;
    return out;
}

FeatureTable FeatureTable::take(const std::vector<std::size_t>& indices) const {
    FeatureTable out;
    out.columns = columns;
    out.rows = Matrix(indices.size(), width());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        auto src = rows.row(indices[i]);
        std::copy(src.begin(), src.end(), out.rows.row(i).begin());
    }
    if (labels) {
        std::vector<int> l;
        l.reserve(indices.size());
        for (auto i : indices) l.push_back((*labels)[i]);
        out.labels = std::move(l);
    }
    return out;
}

void FeatureTable::validate() const {
    if (rows.rows() > 0 && rows.cols() != columns.size()) {
        throw ValidationError("table width " + std::to_string(rows.cols()) + " does not match " +
                              std::to_string(columns.size()) + " column names");
    }
    if (labels && labels->size() != rows.rows()) {
        throw ValidationError("label count does not match row count");
    }
}

FeatureTable read_feature_csv(std::istream& in, const ReadOptions& options) {
    csv::Reader reader(in);
    auto header = reader.next();
    if (!header) throw ParseError(1, "missing header row");

    FeatureTable table;
    std::vector<std::ptrdiff_t> target(header->size(), -1);  // column -> table index
    std::optional<std::size_t> label_col;
    for (std::size_t i = 0; i < header->size(); ++i) {
        auto norm = normalize_feature_name((*header)[i]);
        if (norm.name == "Label") {
            label_col = i;
        } else if (!is_identity(norm.name)) {
            if (table.column_index(norm.name)) {
                throw ParseError(reader.line(), "duplicate column '" + norm.name + "'");
            }
            target[i] = static_cast<std::ptrdiff_t>(table.columns.size());
            table.columns.push_back(norm.name);
        }
    }
    table.rows = Matrix(0, table.columns.size());
    std::vector<int> labels;
    std::vector<double> row(table.columns.size());
    while (auto rec = reader.next()) {
        if (rec->size() != header->size()) {
            throw ParseError(reader.line(), "ragged row: " + std::to_string(rec->size()) + " cells, expected " +
                                                std::to_string(header->size()));
        }
        for (std::size_t i = 0; i < rec->size(); ++i) {
            if (target[i] < 0) continue;
            auto v = csv::parse_real((*rec)[i]);
            if (!v) {
                throw ParseError(reader.line(), "non-numeric value '" + (*rec)[i] + "' in column '" +
                                                    table.columns[static_cast<std::size_t>(target[i])] + "'");
            }
            row[static_cast<std::size_t>(target[i])] = *v;
        }
        table.rows.push_row(row);
        if (label_col) {
            const auto cell = std::string(csv::trim((*rec)[*label_col]));
            if (cell == "0" || cell == "1") {
                labels.push_back(cell == "1" ? 1 : 0);
            } else {
                labels.push_back(cell == options.normal_label ? 0 : 1);
            }
        }
    }
    if (label_col) table.labels = std::move(labels);
    return table;
}

FeatureTable read_feature_csv(const std::filesystem::path& path, const ReadOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    try {
        return read_feature_csv(in, options);
    } catch (const ParseError& e) {
        throw ParseError(e.line(), path.string() + ": " + e.detail());
    }
}

void write_feature_csv(const FeatureTable& table, std::ostream& out) {
    table.validate();
    std::vector<std::string> header = table.columns;
    if (table.labels) header.emplace_back("Label");
    csv::write_row(out, header);
    std::vector<std::string> cells;
    for (std::size_t r = 0; r < table.size(); ++r) {
        cells.clear();
        for (double v : table.rows.row(r)) cells.push_back(csv::format_real(v));
        if (table.labels) cells.push_back(std::to_string((*table.labels)[r]));
        csv::write_row(out, cells);
    }
}

void write_feature_csv(const FeatureTable& table, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    write_feature_csv(table, out);
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

SplitIndices split_indices(const FeatureTable& table, const SplitOptions& options) {
    if (!(options.ratio > 0.0 && options.ratio < 1.0)) {
        throw ValidationError("split ratio must lie strictly between 0 and 1");
    }
    if (!table.labels) throw ValidationError("split requires a labeled table");
    const std::size_t n = table.size();
    if (n < 2) throw ValidationError("split requires at least 2 rows");

    Rng rng(options.seed);
    SplitIndices out;
    auto split_group = [&](std::vector<std::size_t> idx) {
        rng.shuffle(idx);
        const auto n_train = static_cast<std::size_t>(std::llround(options.ratio * static_cast<double>(idx.size())));
        out.train.insert(out.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
        out.test.insert(out.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    };
    if (options.stratified) {
        std::vector<std::size_t> neg, pos;
        for (std::size_t i = 0; i < n; ++i) ((*table.labels)[i] ? pos : neg).push_back(i);
        split_group(std::move(neg));
        split_group(std::move(pos));
    } else {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        split_group(std::move(idx));
    }
    return out;
}

std::pair<FeatureTable, FeatureTable> train_test_split(const FeatureTable& table, const SplitOptions& options) {
    auto idx = split_indices(table, options);
    return {table.take(idx.train), table.take(idx.test)};
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
    const auto base = path.parent_path();
    auto resolve = [&](std::string_view p) {
        std::filesystem::path fp{std::string(p)};
        return fp.is_absolute() ? fp : base / fp;
    };
    DatasetManifest m;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const auto body = csv::trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) throw ParseError(lineno, "expected 'key = value'");
        const auto key = std::string(csv::trim(body.substr(0, eq)));
        const auto value = csv::trim(body.substr(eq + 1));
        if (key == "name") {
            m.name = value;
        } else if (key == "captures" || key == "capture") {
            std::string_view rest = value;
            while (!rest.empty()) {
                const auto comma = rest.find(',');
                const auto item = csv::trim(rest.substr(0, comma));
                if (!item.empty()) m.captures.push_back(resolve(item));
                if (comma == std::string_view::npos) break;
                rest.remove_prefix(comma + 1);
            }
        } else if (key == "rules") {
            m.rules = resolve(value);
        } else if (key == "features") {
            m.features = resolve(value);
        } else if (key == "default_label") {
            m.default_label = value;
        } else if (key == "notes") {
            if (!m.notes.empty()) m.notes += '\n';
            m.notes += value;
        } else {
            throw ParseError(lineno, "unknown manifest key '" + key + "'");
        }
    }
    if (m.name.empty()) throw ValidationError("manifest '" + path.string() + "' has no name");
    if (m.features.empty() && (m.captures.empty() || m.rules.empty())) {
        throw ValidationError("manifest '" + m.name + "' needs captures and rules, or features");
    }
    if (m.default_label.empty()) throw ValidationError("manifest '" + m.name + "' has an empty default_label");
    return m;
}

void write_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "name = " << m.name << '\n';
    for (const auto& c : m.captures) out << "captures = " << c.string() << '\n';
    if (!m.rules.empty()) out << "rules = " << m.rules.string() << '\n';
    if (!m.features.empty()) out << "features = " << m.features.string() << '\n';
    out << "default_label = " << m.default_label << '\n';
    if (!m.notes.empty()) out << "notes = " << m.notes << '\n';
}

}  // namespace botflow
