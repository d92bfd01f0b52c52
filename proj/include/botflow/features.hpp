#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "botflow/flow.hpp"

namespace botflow {

/// The 65 model features, in CSV column order.
enum class Feature : std::size_t {
    flow_duration,
    total_fwd_packets,
    total_bwd_packets,
    total_length_fwd,
    total_length_bwd,
    fwd_packet_length_max,
    fwd_packet_length_min,
    fwd_packet_length_mean,
    fwd_packet_length_std,
    bwd_packet_length_max,
    bwd_packet_length_min,
    bwd_packet_length_mean,
    bwd_packet_length_std,
    flow_bytes_per_s,
    flow_packets_per_s,
    flow_iat_mean,
    flow_iat_std,
    flow_iat_max,
    flow_iat_min,
    fwd_iat_total,
    fwd_iat_mean,
    fwd_iat_std,
    fwd_iat_max,
    fwd_iat_min,
    bwd_iat_total,
    bwd_iat_mean,
    bwd_iat_std,
    bwd_iat_max,
    bwd_iat_min,
    fwd_psh_flags,
    bwd_psh_flags,
    fwd_urg_flags,
    bwd_urg_flags,
    fwd_header_length,
    bwd_header_length,
    fwd_packets_per_s,
    bwd_packets_per_s,
    min_packet_length,
    max_packet_length,
    packet_length_mean,
    packet_length_std,
    packet_length_variance,
    fin_flag_count,
    syn_flag_count,
    rst_flag_count,
    psh_flag_count,
    ack_flag_count,
    urg_flag_count,
    cwr_flag_count,
    ece_flag_count,
    down_up_ratio,
    average_packet_size,
    avg_fwd_segment_size,
    avg_bwd_segment_size,
    init_fwd_win_bytes,
    init_bwd_win_bytes,
    active_mean,
    active_std,
    active_max,
    active_min,
    idle_mean,
    idle_std,
    idle_max,
    idle_min,
    inbound,
};

inline constexpr std::size_t kFeatureCount = 65;
static_assert(static_cast<std::size_t>(Feature::inbound) + 1 == kFeatureCount);

/// Canonical long names ("Flow Duration", "Pkt Len Mean" is an alias of
/// "Packet Length Mean", etc.).
const std::array<std::string_view, kFeatureCount>& feature_names();
std::string_view feature_name(Feature f);
std::optional<Feature> feature_by_name(std::string_view canonical);

/// True for features whose value is an integer count (compared exactly).
bool is_count_feature(Feature f);

/// Identity column names, in CSV order, preceding the model features.
const std::array<std::string_view, 7>& identity_column_names();

struct FeatureVector {
    std::string flow_id;  // "srcIP-dstIP-srcPort-dstPort-protocol"
    IpAddress src_ip;
    IpAddress dst_ip;
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    std::uint8_t protocol = 0;
    std::int64_t start_ts_us = 0;
    std::array<double, kFeatureCount> values{};

    double& operator[](Feature f) { return values[static_cast<std::size_t>(f)]; }
    double operator[](Feature f) const { return values[static_cast<std::size_t>(f)]; }
};

std::string make_flow_id(const IpAddress& src, const IpAddress& dst, std::uint16_t sport,
                         std::uint16_t dport, std::uint8_t proto);

/// Computes the feature vector of a closed flow.
FeatureVector compute_features(const FlowAccumulator& flow, const MeterConfig& config);

}  // namespace botflow
