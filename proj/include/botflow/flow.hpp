#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "botflow/net.hpp"
#include "botflow/packet.hpp"
#include "botflow/running_stats.hpp"

namespace botflow {

struct MeterConfig {
    std::int64_t flow_timeout_us = 120'000'000;
    std::int64_t activity_timeout_us = 5'000'000;
    std::vector<IpPrefix> home_prefixes = default_home_prefixes();

    /// Throws ValidationError unless flow_timeout_us > activity_timeout_us > 0.
    void validate() const;
};

/// Bidirectional 5-tuple with (ip_a, port_a) <= (ip_b, port_b).
struct FlowKey {
    IpAddress ip_a;
    IpAddress ip_b;
    std::uint16_t port_a = 0;
    std::uint16_t port_b = 0;
    std::uint8_t protocol = 0;

    static FlowKey of(const PacketRecord& pkt) noexcept;

    bool operator==(const FlowKey&) const = default;
};

struct FlowKeyHash {
    std::size_t operator()(const FlowKey& k) const noexcept;
};

struct Endpoint {
    IpAddress ip;
    std::uint16_t port = 0;
    bool operator==(const Endpoint&) const = default;
};

/// Per-direction counters kept by a live flow.
struct DirectionState {
    RunningStats length;   // payload bytes per packet
    RunningStats iat;      // microseconds between packets of this direction
    std::int64_t last_ts_us = 0;
    std::int64_t header_bytes = 0;
    std::int64_t psh = 0;
    std::int64_t urg = 0;
    std::int64_t fin = 0;
    std::int64_t init_window = -1;
};

/// In-progress state of one flow. The first packet's source is the forward
/// endpoint for the whole lifetime of the flow.
class FlowAccumulator {
public:
    FlowAccumulator(const PacketRecord& first, const MeterConfig& config, std::uint64_t sequence);

    /// Adds a packet that belongs to this flow (same key, not timed out).
    void add(const PacketRecord& pkt, const MeterConfig& config);

    /// True once the TCP exchange is over: any RST, or an ACK after FINs
    /// were seen in both directions.
    bool terminated() const noexcept { return terminated_; }

    /// Closes the trailing active period. Called once before feature extraction.
    void close();

    bool is_forward(const PacketRecord& pkt) const noexcept;

    const FlowKey& key() const noexcept { return key_; }
    const Endpoint& forward_src() const noexcept { return fwd_src_; }
    const Endpoint& forward_dst() const noexcept { return fwd_dst_; }
    std::uint64_t sequence() const noexcept { return sequence_; }
    std::int64_t first_ts_us() const noexcept { return first_ts_us_; }
    std::int64_t last_ts_us() const noexcept { return last_ts_us_; }

    const DirectionState& fwd() const noexcept { return fwd_; }
    const DirectionState& bwd() const noexcept { return bwd_; }
    const RunningStats& length() const noexcept { return length_; }
    const RunningStats& iat() const noexcept { return iat_; }
    const RunningStats& active() const noexcept { return active_; }
    const RunningStats& idle() const noexcept { return idle_; }

    std::int64_t packets() const noexcept { return length_.count(); }
    std::int64_t flag_count(std::uint8_t bit) const noexcept;

private:
    void update_activity(std::int64_t ts);

    FlowKey key_;
    Endpoint fwd_src_;
    Endpoint fwd_dst_;
    std::uint64_t sequence_ = 0;
    std::int64_t first_ts_us_ = 0;
    std::int64_t last_ts_us_ = 0;
    std::int64_t prev_arrival_us_ = 0;

    DirectionState fwd_;
    DirectionState bwd_;
    RunningStats length_;
    RunningStats iat_;

    std::int64_t flag_counts_[8] = {};

    RunningStats active_;
    RunningStats idle_;
    std::int64_t active_start_us_ = 0;
    std::int64_t active_end_us_ = 0;
    std::int64_t activity_timeout_us_ = 0;

    bool terminated_ = false;
    bool closed_ = false;
};

/// Streaming flow assembly for one capture. Single writer.
class FlowTable {
public:
    explicit FlowTable(MeterConfig config);

    /// Attributes `pkt` to its flow and returns every flow finalized as a result:
    /// the previous flow of the same key if it idled out, and the packet's own
    /// flow if the packet terminated it.
    std::vector<FlowAccumulator> offer(const PacketRecord& pkt);

    /// Finalizes flows idle for at least flow_timeout_us relative to `now_us`.
    /// A later packet of such a key would start a new flow anyway, so sweeping
    /// changes only when memory is released, never the flows produced.
    std::vector<FlowAccumulator> expire(std::int64_t now_us);

    /// Finalizes every live flow, in creation order.
    std::vector<FlowAccumulator> flush();

    std::size_t live_flows() const noexcept { return live_.size(); }
    const MeterConfig& config() const noexcept { return config_; }

private:
    MeterConfig config_;
    std::unordered_map<FlowKey, FlowAccumulator, FlowKeyHash> live_;
    std::uint64_t next_sequence_ = 0;
};

}  // namespace botflow
