#include "botflow/features.hpp"

#include <algorithm>
#include <unordered_map>

namespace botflow {

namespace {

constexpr std::array<std::string_view, kFeatureCount> kNames = {
    "Flow Duration",
    "Total Fwd Packets",
    "Total Backward Packets",
    "Total Length of Fwd Packets",
    "Total Length of Bwd Packets",
    "Fwd Packet Length Max",
    "Fwd Packet Length Min",
    "Fwd Packet Length Mean",
    "Fwd Packet Length Std",
    "Bwd Packet Length Max",
    "Bwd Packet Length Min",
    "Bwd Packet Length Mean",
    "Bwd Packet Length Std",
    "Flow Bytes/s",
    "Flow Packets/s",
    "Flow IAT Mean",
    "Flow IAT Std",
    "Flow IAT Max",
    "Flow IAT Min",
    "Fwd IAT Total",
    "Fwd IAT Mean",
    "Fwd IAT Std",
    "Fwd IAT Max",
    "Fwd IAT Min",
    "Bwd IAT Total",
    "Bwd IAT Mean",
    "Bwd IAT Std",
    "Bwd IAT Max",
    "Bwd IAT Min",
    "Fwd PSH Flags",
    "Bwd PSH Flags",
    "Fwd URG Flags",
    "Bwd URG Flags",
    "Fwd Header Length",
    "Bwd Header Length",
    "Fwd Packets/s",
    "Bwd Packets/s",
    "Min Packet Length",
    "Max Packet Length",
    "Packet Length Mean",
    "Packet Length Std",
    "Packet Length Variance",
    "FIN Flag Count",
    "SYN Flag Count",
    "RST Flag Count",
    "PSH Flag Count",
    "ACK Flag Count",
    "URG Flag Count",
    "CWR Flag Count",
    "ECE Flag Count",
    "Down/Up Ratio",
    "Average Packet Size",
    "Avg Fwd Segment Size",
    "Avg Bwd Segment Size",
    "Init Fwd Win Bytes",
    "Init Bwd Win Bytes",
    "Active Mean",
    "Active Std",
    "Active Max",
    "Active Min",
    "Idle Mean",
    "Idle Std",
    "Idle Max",
    "Idle Min",
    "Inbound",
};

constexpr std::array<std::string_view, 7> kIdentity = {
    "Flow ID", "Src IP", "Src Port", "Dst IP", "Dst Port", "Protocol", "Timestamp",
};

}  // namespace

const std::array<std::string_view, kFeatureCount>& feature_names() { return kNames; }

std::string_view feature_name(Feature f) { return kNames[static_cast<std::size_t>(f)]; }

std::optional<Feature> feature_by_name(std::string_view canonical) {
    static const auto index = [] {
        std::unordered_map<std::string_view, Feature> m;
        for (std::size_t i = 0; i < kFeatureCount; ++i) m.emplace(kNames[i], static_cast<Feature>(i));
        return m;
    }();
    auto it = index.find(canonical);
    if (it == index.end()) return std::nullopt;
    return it->second;
}

bool is_count_feature(Feature f) {
    switch (f) {
        case Feature::flow_duration:
        case Feature::total_fwd_packets:
        case Feature::total_bwd_packets:
        case Feature::total_length_fwd:
        case Feature::total_length_bwd:
        case Feature::fwd_psh_flags:
        case Feature::bwd_psh_flags:
        case Feature::fwd_urg_flags:
        case Feature::bwd_urg_flags:
        case Feature::fwd_header_length:
        case Feature::bwd_header_length:
        case Feature::fin_flag_count:
        case Feature::syn_flag_count:
        case Feature::rst_flag_count:
        case Feature::psh_flag_count:
        case Feature::ack_flag_count:
        case Feature::urg_flag_count:
        case Feature::cwr_flag_count:
        case Feature::ece_flag_count:
        case Feature::init_fwd_win_bytes:
        case Feature::init_bwd_win_bytes:
        case Feature::inbound:
            return true;
        default:
            return false;
    }
}

const std::array<std::string_view, 7>& identity_column_names() { return kIdentity; }

std::string make_flow_id(const IpAddress& src, const IpAddress& dst, std::uint16_t sport,
                         std::uint16_t dport, std::uint8_t proto) {
    return src.to_string() + "-" + dst.to_string() + "-" + std::to_string(sport) + "-" +
           std::to_string(dport) + "-" + std::to_string(proto);
}

FeatureVector compute_features(const FlowAccumulator& flow, const MeterConfig& config) {
    FeatureVector fv;
    const auto& src = flow.forward_src();
    const auto& dst = flow.forward_dst();
    fv.src_ip = src.ip;
    fv.dst_ip = dst.ip;
    fv.src_port = src.port;
    fv.dst_port = dst.port;
    fv.protocol = flow.key().protocol;
    fv.start_ts_us = flow.first_ts_us();
    fv.flow_id = make_flow_id(src.ip, dst.ip, src.port, dst.port, fv.protocol);

    const auto& fwd = flow.fwd();
    const auto& bwd = flow.bwd();
    const auto& all = flow.length();
    const double duration = static_cast<double>(flow.last_ts_us() - flow.first_ts_us());
    const double fwd_n = static_cast<double>(fwd.length.count());
    const double bwd_n = static_cast<double>(bwd.length.count());
    const double total_n = static_cast<double>(all.count());
    const auto per_second = [duration](double x) { return duration > 0 ? x * 1e6 / duration : 0.0; };

    using F = Feature;
    fv[F::flow_duration] = duration;
    fv[F::total_fwd_packets] = fwd_n;
    fv[F::total_bwd_packets] = bwd_n;
    fv[F::total_length_fwd] = fwd.length.sum();
    fv[F::total_length_bwd] = bwd.length.sum();
    fv[F::fwd_packet_length_max] = fwd.length.max();
    fv[F::fwd_packet_length_min] = fwd.length.min();
    fv[F::fwd_packet_length_mean] = fwd.length.mean();
    fv[F::fwd_packet_length_std] = fwd.length.stddev();
    fv[F::bwd_packet_length_max] = bwd.length.max();
    fv[F::bwd_packet_length_min] = bwd.length.min();
    fv[F::bwd_packet_length_mean] = bwd.length.mean();
    fv[F::bwd_packet_length_std] = bwd.length.stddev();
    fv[F::flow_bytes_per_s] = per_second(all.sum());
    fv[F::flow_packets_per_s] = per_second(total_n);
    fv[F::flow_iat_mean] = flow.iat().mean();
    fv[F::flow_iat_std] = flow.iat().stddev();
    fv[F::flow_iat_max] = flow.iat().max();
    fv[F::flow_iat_min] = flow.iat().min();
    fv[F::fwd_iat_total] = fwd.iat.sum();
    fv[F::fwd_iat_mean] = fwd.iat.mean();
    fv[F::fwd_iat_std] = fwd.iat.stddev();
    fv[F::fwd_iat_max] = fwd.iat.max();
    fv[F::fwd_iat_min] = fwd.iat.min();
    fv[F::bwd_iat_total] = bwd.iat.sum();
    fv[F::bwd_iat_mean] = bwd.iat.mean();
    fv[F::bwd_iat_std] = bwd.iat.stddev();
    fv[F::bwd_iat_max] = bwd.iat.max();
    fv[F::bwd_iat_min] = bwd.iat.min();
    fv[F::fwd_psh_flags] = static_cast<double>(fwd.psh);
    fv[F::bwd_psh_flags] = static_cast<double>(bwd.psh);
    fv[F::fwd_urg_flags] = static_cast<double>(fwd.urg);
    fv[F::bwd_urg_flags] = static_cast<double>(bwd.urg);
    fv[F::fwd_header_length] = static_cast<double>(fwd.header_bytes);
    fv[F::bwd_header_length] = static_cast<double>(bwd.header_bytes);
    fv[F::fwd_packets_per_s] = per_second(fwd_n);
    fv[F::bwd_packets_per_s] = per_second(bwd_n);
    fv[F::min_packet_length] = all.min();
    fv[F::max_packet_length] = all.max();
    fv[F::packet_length_mean] = all.mean();
    fv[F::packet_length_std] = all.stddev();
    fv[F::packet_length_variance] = all.stddev() * all.stddev();
    fv[F::fin_flag_count] = static_cast<double>(flow.flag_count(tcp_flag::fin));
    fv[F::syn_flag_count] = static_cast<double>(flow.flag_count(tcp_flag::syn));
    fv[F::rst_flag_count] = static_cast<double>(flow.flag_count(tcp_flag::rst));
    fv[F::psh_flag_count] = static_cast<double>(flow.flag_count(tcp_flag::psh));
    fv[F::ack_flag_count] = static_cast<double>(flow.flag_count(tcp_flag::ack));
    fv[F::urg_flag_count] = static_cast<double>(flow.flag_count(tcp_flag::urg));
    fv[F::cwr_flag_count] = static_cast<double>(flow.flag_count(tcp_flag::cwr));
    fv[F::ece_flag_count] = static_cast<double>(flow.flag_count(tcp_flag::ece));
    fv[F::down_up_ratio] = fwd_n > 0 ? bwd_n / fwd_n : 0.0;
    fv[F::average_packet_size] = total_n > 0 ? all.sum() / total_n : 0.0;
    fv[F::avg_fwd_segment_size] = fv[F::fwd_packet_length_mean];
    fv[F::avg_bwd_segment_size] = fv[F::bwd_packet_length_mean];
    fv[F::init_fwd_win_bytes] = static_cast<double>(fwd.init_window);
    fv[F::init_bwd_win_bytes] = static_cast<double>(bwd.init_window);
    fv[F::active_mean] = flow.active().mean();
    fv[F::active_std] = flow.active().stddev();
    fv[F::active_max] = flow.active().max();
    fv[F::active_min] = flow.active().min();
    fv[F::idle_mean] = flow.idle().mean();
    fv[F::idle_std] = flow.idle().stddev();
    fv[F::idle_max] = flow.idle().max();
    fv[F::idle_min] = flow.idle().min();
    fv[F::inbound] = std::any_of(config.home_prefixes.begin(), config.home_prefixes.end(),
                                 [&](const IpPrefix& p) { return p.contains(dst.ip); })
                         ? 1.0
                         : 0.0;
    return fv;
}

}  // namespace botflow
