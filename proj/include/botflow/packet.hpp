#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "botflow/net.hpp"

namespace botflow {

namespace ip_proto {
inline constexpr std::uint8_t icmp = 1;
inline constexpr std::uint8_t tcp = 6;
inline constexpr std::uint8_t udp = 17;
inline constexpr std::uint8_t icmpv6 = 58;
}  // namespace ip_proto

/// TCP flag bits as they appear in byte 13 of the TCP header.
namespace tcp_flag {
inline constexpr std::uint8_t fin = 0x01;
inline constexpr std::uint8_t syn = 0x02;
inline constexpr std::uint8_t rst = 0x04;
inline constexpr std::uint8_t psh = 0x08;
inline constexpr std::uint8_t ack = 0x10;
inline constexpr std::uint8_t urg = 0x20;
inline constexpr std::uint8_t ece = 0x40;
inline constexpr std::uint8_t cwr = 0x80;
}  // namespace tcp_flag

struct PacketRecord {
    std::int64_t timestamp_us = 0;
    IpAddress src_ip;
    IpAddress dst_ip;
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    std::uint8_t protocol = 0;
    std::int64_t payload_len = 0;
    std::int64_t header_len = 0;
    std::uint8_t tcp_flags = 0;
    std::optional<std::uint16_t> tcp_window;  // set iff protocol is TCP

    bool has_flag(std::uint8_t bit) const noexcept { return (tcp_flags & bit) != 0; }
};

/// Why a frame did not produce a PacketRecord.
enum class DecodeStatus {
    ok,
    not_ip,            // ARP, LLDP, ...
    unsupported_l4,    // IP, but not TCP/UDP/ICMP
    truncated,         // headers cut short by the snap length or a bad length field
};

/// Link-layer types this decoder understands (pcap LINKTYPE_* values).
namespace link_type {
inline constexpr std::uint32_t null = 0;
inline constexpr std::uint32_t ethernet = 1;
inline constexpr std::uint32_t raw = 101;
inline constexpr std::uint32_t linux_sll = 113;
inline constexpr std::uint32_t ipv4 = 228;
inline constexpr std::uint32_t ipv6 = 229;
}  // namespace link_type

struct DecodeResult {
    DecodeStatus status = DecodeStatus::truncated;
    PacketRecord packet;
};

/// Decodes one captured frame. Payload sizes come from the IP length fields,
/// so snap-length truncation of the payload does not shrink them.
DecodeResult decode_frame(std::uint32_t link, std::span<const std::uint8_t> frame,
                          std::int64_t timestamp_us);

}  // namespace botflow
