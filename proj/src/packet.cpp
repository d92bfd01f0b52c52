#include "botflow/packet.hpp"

namespace botflow {

namespace {

std::uint16_t be16(const std::uint8_t* p) { return static_cast<std::uint16_t>((p[0] << 8) | p[1]); }

struct L3 {
    const std::uint8_t* data;
    std::size_t captured;
};

DecodeResult fail(DecodeStatus s) {
    DecodeResult r;
    r.status = s;
    return r;
}

// Fills ports, flags, window and the transport part of the header/payload
// lengths. `l4_len` is the transport segment length according to the IP header.
DecodeResult decode_transport(PacketRecord pkt, std::uint8_t proto, const std::uint8_t* l4,
                              std::size_t captured, std::int64_t l4_len) {
    pkt.protocol = proto;
    std::int64_t l4_header = 0;
    switch (proto) {
        case ip_proto::tcp: {
            if (captured < 20) return fail(DecodeStatus::truncated);
            pkt.src_port = be16(l4);
            pkt.dst_port = be16(l4 + 2);
            l4_header = (l4[12] >> 4) * 4;
            if (l4_header < 20) return fail(DecodeStatus::truncated);
            pkt.tcp_flags = l4[13];
            pkt.tcp_window = be16(l4 + 14);
            break;
        }
        case ip_proto::udp:
            if (captured < 8) return fail(DecodeStatus::truncated);
            pkt.src_port = be16(l4);
            pkt.dst_port = be16(l4 + 2);
            l4_header = 8;
            break;
        case ip_proto::icmp:
        case ip_proto::icmpv6:
            if (captured < 4) return fail(DecodeStatus::truncated);
            l4_header = 8;
            break;
        default:
            return fail(DecodeStatus::unsupported_l4);
    }
    if (l4_len < l4_header) return fail(DecodeStatus::truncated);
    pkt.header_len += l4_header;
    pkt.payload_len = l4_len - l4_header;
    return DecodeResult{DecodeStatus::ok, std::move(pkt)};
}

DecodeResult decode_ipv4(L3 l3, std::int64_t ts) {
    if (l3.captured < 20) return fail(DecodeStatus::truncated);
    const std::uint8_t* ip = l3.data;
    if ((ip[0] >> 4) != 4) return fail(DecodeStatus::truncated);
    const std::size_t ihl = static_cast<std::size_t>(ip[0] & 0x0f) * 4;
    const std::int64_t total = be16(ip + 2);
    if (ihl < 20 || l3.captured < ihl || total < static_cast<std::int64_t>(ihl)) {
        return fail(DecodeStatus::truncated);
    }
    const std::uint16_t frag = be16(ip + 6);
    if ((frag & 0x1fff) != 0) return fail(DecodeStatus::unsupported_l4);  // non-first fragment
    PacketRecord pkt;
    pkt.timestamp_us = ts;
    pkt.src_ip = IpAddress::v4(std::span<const std::uint8_t, 4>(ip + 12, 4));
    pkt.dst_ip = IpAddress::v4(std::span<const std::uint8_t, 4>(ip + 16, 4));
    pkt.header_len = static_cast<std::int64_t>(ihl);
    return decode_transport(std::move(pkt), ip[9], ip + ihl, l3.captured - ihl,
                            total - static_cast<std::int64_t>(ihl));
}

DecodeResult decode_ipv6(L3 l3, std::int64_t ts) {
    if (l3.captured < 40) return fail(DecodeStatus::truncated);
    const std::uint8_t* ip = l3.data;
    if ((ip[0] >> 4) != 6) return fail(DecodeStatus::truncated);
    PacketRecord pkt;
    pkt.timestamp_us = ts;
    pkt.src_ip = IpAddress::v6(std::span<const std::uint8_t, 16>(ip + 8, 16));
    pkt.dst_ip = IpAddress::v6(std::span<const std::uint8_t, 16>(ip + 24, 16));
    std::int64_t remaining = be16(ip + 4);
    std::uint8_t next = ip[6];
    std::size_t offset = 40;
    pkt.header_len = 40;
    for (;;) {
        std::size_t ext_len = 0;
        if (next == 0 || next == 43 || next == 60) {
            if (l3.captured < offset + 2) return fail(DecodeStatus::truncated);
            ext_len = (static_cast<std::size_t>(l3.data[offset + 1]) + 1) * 8;
        } else if (next == 44) {
            if (l3.captured < offset + 8) return fail(DecodeStatus::truncated);
            if ((be16(l3.data + offset + 2) & 0xfff8) != 0) return fail(DecodeStatus::unsupported_l4);
            ext_len = 8;
        } else if (next == 51) {
            if (l3.captured < offset + 2) return fail(DecodeStatus::truncated);
            ext_len = (static_cast<std::size_t>(l3.data[offset + 1]) + 2) * 4;
        } else {
            break;
        }
        if (l3.captured < offset + ext_len) return fail(DecodeStatus::truncated);
        next = l3.data[offset];
        offset += ext_len;
        remaining -= static_cast<std::int64_t>(ext_len);
        pkt.header_len += static_cast<std::int64_t>(ext_len);
    }
    if (remaining < 0) return fail(DecodeStatus::truncated);
    return decode_transport(std::move(pkt), next, l3.data + offset, l3.captured - offset, remaining);
}

DecodeResult decode_by_ethertype(std::uint16_t ethertype, L3 l3, std::int64_t ts) {
    if (ethertype == 0x0800) return decode_ipv4(l3, ts);
    if (ethertype == 0x86dd) return decode_ipv6(l3, ts);
    return fail(DecodeStatus::not_ip);
}

DecodeResult decode_by_version(L3 l3, std::int64_t ts) {
    if (l3.captured < 1) return fail(DecodeStatus::truncated);
    switch (l3.data[0] >> 4) {
        case 4: return decode_ipv4(l3, ts);
        case 6: return decode_ipv6(l3, ts);
        default: return fail(DecodeStatus::not_ip);
    }
}

}  // namespace

DecodeResult decode_frame(std::uint32_t link, std::span<const std::uint8_t> frame,
                          std::int64_t timestamp_us) {
    const std::uint8_t* p = frame.data();
    const std::size_t n = frame.size();
    switch (link) {
        case link_type::ethernet: {
            if (n < 14) return fail(DecodeStatus::truncated);
            std::size_t off = 12;
            std::uint16_t type = be16(p + off);
            while (type == 0x8100 || type == 0x88a8) {
                off += 4;
                if (n < off + 2) return fail(DecodeStatus::truncated);
                type = be16(p + off);
            }
            off += 2;
            return decode_by_ethertype(type, L3{p + off, n - off}, timestamp_us);
        }
        case link_type::linux_sll:
            if (n < 16) return fail(DecodeStatus::truncated);
            return decode_by_ethertype(be16(p + 14), L3{p + 16, n - 16}, timestamp_us);
        case link_type::null: {
            if (n < 4) return fail(DecodeStatus::truncated);
            // Address family is in the capturing host's byte order.
            const std::uint32_t le = p[0] | (p[1] << 8) | (p[2] << 16) | (std::uint32_t{p[3]} << 24);
            const std::uint32_t be = (std::uint32_t{p[0]} << 24) | (p[1] << 16) | (p[2] << 8) | p[3];
            const std::uint32_t fam = le < 256 ? le : be;
            if (fam == 2) return decode_ipv4(L3{p + 4, n - 4}, timestamp_us);
            if (fam == 24 || fam == 28 || fam == 30) return decode_ipv6(L3{p + 4, n - 4}, timestamp_us);
            return fail(DecodeStatus::not_ip);
        }
        case link_type::raw:
            return decode_by_version(L3{p, n}, timestamp_us);
        case link_type::ipv4:
            return decode_ipv4(L3{p, n}, timestamp_us);
        case link_type::ipv6:
            return decode_ipv6(L3{p, n}, timestamp_us);
        default:
            return fail(DecodeStatus::not_ip);
    }
}

}  // namespace botflow
