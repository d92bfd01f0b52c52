#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "botflow/net.hpp"
#include "botflow/pcap.hpp"

namespace botflow {

enum class Direction { forward, backward };

struct PacketBlueprint {
    Direction direction = Direction::forward;
    std::int64_t payload_len = 0;
    std::int64_t gap_us = 0;  // since the previous packet of the same flow
    std::uint8_t tcp_flags = 0;
    std::optional<std::uint16_t> window;  // TCP only; drawn from the seed when unset
};

struct FlowBlueprint {
    IpAddress src_ip;  // forward source
    IpAddress dst_ip;
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    std::uint8_t protocol = 6;
    std::int64_t start_us = 0;  // offset of the first packet from the capture base time
    std::vector<PacketBlueprint> packets;
};

struct SynthOptions {
    TimestampResolution resolution = TimestampResolution::micro;
    bool swapped = false;
    std::int64_t base_time_us = 1'600'000'000'000'000;  // 2020-09-13
};

/// One packet of the generated capture, as the decoder will see it.
struct SynthPacket {
    std::size_t flow_index = 0;
    std::size_t packet_index = 0;
    std::int64_t timestamp_us = 0;
};

/// Renders the blueprints as an Ethernet pcap. Packets of all flows are merged
/// by timestamp (ties by flow index, then packet index). Header fields not fixed
/// by the blueprint (IP id, TCP sequence numbers, unset windows, payload bytes)
/// come from `seed`. Throws ValidationError for a blueprint with no packets.
std::vector<std::uint8_t> generate_synthetic_capture(const std::vector<FlowBlueprint>& flows,
                                                     std::uint64_t seed,
                                                     const SynthOptions& options = {},
                                                     std::vector<SynthPacket>* order = nullptr);

}  // namespace botflow
