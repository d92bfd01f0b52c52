#include "botflow/meter.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "botflow/csv.hpp"
#include "botflow/dataset.hpp"
#include "botflow/error.hpp"
#include "botflow/pcap.hpp"

namespace botflow {

namespace {

// Idle flows are swept out of the table every this many packets. A flow is only
// swept once it has been idle for twice the flow timeout, so a packet would have
// to be reordered by more than a full timeout for sweeping to change the output.
constexpr std::uint64_t kSweepInterval = 65536;

struct Finalized {
    std::uint64_t sequence;
    FeatureVector features;
};

class Collector {
public:
    explicit Collector(const MeterConfig& config) : table_(config) {}

    void offer(const PacketRecord& pkt) {
        take(table_.offer(pkt));
        if (++since_sweep_ >= kSweepInterval) {
            since_sweep_ = 0;
            take(table_.expire(pkt.timestamp_us - table_.config().flow_timeout_us));
        }
    }

    std::vector<FeatureVector> finish() {
        take(table_.flush());
        std::sort(done_.begin(), done_.end(),
                  [](const Finalized& a, const Finalized& b) { return a.sequence < b.sequence; });
        std::vector<FeatureVector> out;
        out.reserve(done_.size());
        for (auto& f : done_) out.push_back(std::move(f.features));
        done_.clear();
        return out;
    }

private:
    void take(std::vector<FlowAccumulator> flows) {
        for (auto& f : flows) done_.push_back({f.sequence(), compute_features(f, table_.config())});
    }

    FlowTable table_;
    std::vector<Finalized> done_;
    std::uint64_t since_sweep_ = 0;
};

}  // namespace

IngestResult ingest_capture(const std::filesystem::path& path, const MeterConfig& config) {
    PcapReader reader(path);
    Collector collector(config);
    IngestResult result;
    auto& st = result.stats;
    const auto link = reader.header().link_type;
    while (auto frame = reader.next()) {
        ++st.frames;
        auto decoded = decode_frame(link, frame->data, frame->timestamp_us);
        switch (decoded.status) {
            case DecodeStatus::ok:
                ++st.packets;
                collector.offer(decoded.packet);
                break;
            case DecodeStatus::not_ip: ++st.skipped_non_ip; break;
            case DecodeStatus::unsupported_l4: ++st.skipped_protocol; break;
            case DecodeStatus::truncated: ++st.skipped_truncated; break;
        }
    }
    st.skipped_truncated += reader.truncated_records();
    st.frames += reader.truncated_records();
    result.flows = collector.finish();
    st.flows = result.flows.size();
    return result;
}

std::vector<FeatureVector> meter_packets(std::span<const PacketRecord> packets, const MeterConfig& config) {
    Collector collector(config);
    for (const auto& p : packets) collector.offer(p);
    return collector.finish();
}

std::vector<IngestResult> ingest_captures(std::span<const std::filesystem::path> paths,
                                          const MeterConfig& config, Exec exec) {
    std::vector<IngestResult> out(paths.size());
    for_each_index(paths.size(), exec, [&](std::size_t i) { out[i] = ingest_capture(paths[i], config); });
    return out;
}

namespace {

std::vector<std::string> flow_header(bool labeled) {
    std::vector<std::string> h;
    for (auto n : identity_column_names()) h.emplace_back(n);
    for (auto n : feature_names()) h.emplace_back(n);
    if (labeled) h.emplace_back("Label");
    return h;
}

template <typename Int>
std::optional<Int> parse_int(std::string_view s) {
    s = csv::trim(s);
    Int v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

}  // namespace

void write_flow_csv(std::ostream& out, std::span<const FeatureVector> flows, std::span<const std::string> labels) {
    const bool labeled = !labels.empty();
    if (labeled && labels.size() != flows.size()) throw ValidationError("label count does not match flow count");
    csv::write_row(out, flow_header(labeled));
    std::vector<std::string> cells;
    cells.reserve(identity_column_names().size() + kFeatureCount + 1);
    for (std::size_t i = 0; i < flows.size(); ++i) {
        const auto& f = flows[i];
        cells.clear();
        cells.push_back(f.flow_id);
        cells.push_back(f.src_ip.to_string());
        cells.push_back(std::to_string(f.src_port));
        cells.push_back(f.dst_ip.to_string());
        cells.push_back(std::to_string(f.dst_port));
        cells.push_back(std::to_string(f.protocol));
        cells.push_back(std::to_string(f.start_ts_us));
        for (double v : f.values) cells.push_back(csv::format_real(v));
        if (labeled) cells.push_back(labels[i]);
        csv::write_row(out, cells);
    }
}

void write_flow_csv(const std::filesystem::path& path, std::span<const FeatureVector> flows,
                    std::span<const std::string> labels) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    write_flow_csv(out, flows, labels);
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

FlowCsv read_flow_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    csv::Reader reader(in);
    auto header = reader.next();
    if (!header) throw ParseError(1, path.string() + ": missing header row");

    std::vector<std::string> names;
    for (const auto& h : *header) names.push_back(normalize_feature_name(h).name);
    auto col = [&](std::string_view name) -> std::size_t {
        auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) {
            throw SchemaError(std::string(name), path.string() + ": missing column '" + std::string(name) + "'");
        }
        return static_cast<std::size_t>(it - names.begin());
    };
    std::array<std::size_t, 7> id_cols{};
    for (std::size_t i = 0; i < id_cols.size(); ++i) id_cols[i] = col(identity_column_names()[i]);
    std::array<std::size_t, kFeatureCount> feat_cols{};
    for (std::size_t i = 0; i < kFeatureCount; ++i) feat_cols[i] = col(feature_names()[i]);
    const auto label_it = std::find(names.begin(), names.end(), "Label");
    const bool labeled = label_it != names.end();
    const auto label_col = static_cast<std::size_t>(label_it - names.begin());

    FlowCsv out;
    while (auto rec = reader.next()) {
        const auto line = reader.line();
        if (rec->size() != header->size()) {
            throw ParseError(line, path.string() + ": ragged row: " + std::to_string(rec->size()) +
                                       " cells, expected " + std::to_string(header->size()));
        }
        const auto& r = *rec;
        FeatureVector f;
        f.flow_id = r[id_cols[0]];
        auto src = IpAddress::parse(csv::trim(r[id_cols[1]]));
        auto dst = IpAddress::parse(csv::trim(r[id_cols[3]]));
        auto sport = parse_int<std::uint16_t>(r[id_cols[2]]);
        auto dport = parse_int<std::uint16_t>(r[id_cols[4]]);
        auto proto = parse_int<unsigned>(r[id_cols[5]]);
        auto ts = parse_int<std::int64_t>(r[id_cols[6]]);
        if (!src || !dst) throw ParseError(line, path.string() + ": unparseable IP address");
        if (!sport || !dport || !proto || *proto > 255 || !ts) {
            throw ParseError(line, path.string() + ": malformed identity column");
        }
        f.src_ip = *src;
        f.dst_ip = *dst;
        f.src_port = *sport;
        f.dst_port = *dport;
        f.protocol = static_cast<std::uint8_t>(*proto);
        f.start_ts_us = *ts;
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
            auto v = csv::parse_real(r[feat_cols[i]]);
            if (!v) {
                throw ParseError(line, path.string() + ": non-numeric value in column '" +
                                           std::string(feature_names()[i]) + "'");
            }
            f.values[i] = *v;
        }
        out.flows.push_back(std::move(f));
        if (labeled) out.labels.push_back(r[label_col]);
    }
    return out;
}

}  // namespace botflow
