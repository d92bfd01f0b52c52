#include "botflow/synth.hpp"

#include <algorithm>
#include <tuple>

#include "botflow/error.hpp"
#include "botflow/packet.hpp"
#include "botflow/rng.hpp"

namespace botflow {

namespace {

void put16(std::vector<std::uint8_t>& b, std::uint16_t v) {
    b.push_back(static_cast<std::uint8_t>(v >> 8));
    b.push_back(static_cast<std::uint8_t>(v));
}
void put32(std::vector<std::uint8_t>& b, std::uint32_t v) {
    put16(b, static_cast<std::uint16_t>(v >> 16));
    put16(b, static_cast<std::uint16_t>(v));
}

std::uint16_t ipv4_checksum(const std::uint8_t* hdr, std::size_t len) {
    std::uint32_t sum = 0;
    for (std::size_t i = 0; i + 1 < len; i += 2) sum += (hdr[i] << 8) | hdr[i + 1];
    while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
    return static_cast<std::uint16_t>(~sum);
}

std::size_t transport_header_len(std::uint8_t proto) {
    switch (proto) {
        case ip_proto::tcp: return 20;
        case ip_proto::udp:
        case ip_proto::icmp:
        case ip_proto::icmpv6: return 8;
        default: return 0;
    }
}

void validate(const std::vector<FlowBlueprint>& flows) {
    for (std::size_t i = 0; i < flows.size(); ++i) {
        const auto& f = flows[i];
        const auto where = "flow blueprint " + std::to_string(i);
        if (f.packets.empty()) throw ValidationError(where + " has no packets");
        if (f.src_ip.is_v4() != f.dst_ip.is_v4()) throw ValidationError(where + " mixes IPv4 and IPv6");
        if (transport_header_len(f.protocol) == 0) {
            throw ValidationError(where + ": protocol must be TCP, UDP or ICMP");
        }
        if (f.start_us < 0) throw ValidationError(where + " has a negative start offset");
        for (const auto& p : f.packets) {
            if (p.payload_len < 0 || p.gap_us < 0) {
                throw ValidationError(where + " has a negative payload length or gap");
            }
            if (p.payload_len > 65000) throw ValidationError(where + " payload exceeds 65000 bytes");
        }
    }
}

}  // namespace

std::vector<std::uint8_t> generate_synthetic_capture(const std::vector<FlowBlueprint>& flows,
                                                     std::uint64_t seed, const SynthOptions& options,
                                                     std::vector<SynthPacket>* order) {
    validate(flows);
    Rng rng(seed);

    struct Pending {
        std::int64_t ts;
        std::size_t flow;
        std::size_t pkt;
    };
    std::vector<Pending> all;
    for (std::size_t f = 0; f < flows.size(); ++f) {
        std::int64_t t = options.base_time_us + flows[f].start_us;
        for (std::size_t p = 0; p < flows[f].packets.size(); ++p) {
            if (p > 0) t += flows[f].packets[p].gap_us;
            all.push_back({t, f, p});
        }
    }
    std::stable_sort(all.begin(), all.end(), [](const Pending& a, const Pending& b) {
        return std::tie(a.ts, a.flow, a.pkt) < std::tie(b.ts, b.flow, b.pkt);
    });

    // Per-flow seeded state: TCP sequence numbers per direction, default windows.
    struct FlowState {
        std::uint32_t seq[2];
        std::uint16_t window[2];
        std::uint16_t ip_id;
    };
    std::vector<FlowState> state(flows.size());
    for (auto& s : state) {
        s.seq[0] = static_cast<std::uint32_t>(rng.next());
        s.seq[1] = static_cast<std::uint32_t>(rng.next());
        s.window[0] = static_cast<std::uint16_t>(rng.between(1024, 65535));
        s.window[1] = static_cast<std::uint16_t>(rng.between(1024, 65535));
        s.ip_id = static_cast<std::uint16_t>(rng.next());
    }

    PcapWriter writer(link_type::ethernet, options.resolution, options.swapped);
    std::vector<std::uint8_t> frame;
    for (const auto& item : all) {
        const auto& bp = flows[item.flow];
        const auto& pk = bp.packets[item.pkt];
        auto& st = state[item.flow];
        const bool fwd = pk.direction == Direction::forward;
        const int d = fwd ? 0 : 1;
        const IpAddress& src = fwd ? bp.src_ip : bp.dst_ip;
        const IpAddress& dst = fwd ? bp.dst_ip : bp.src_ip;
        const std::uint16_t sport = fwd ? bp.src_port : bp.dst_port;
        const std::uint16_t dport = fwd ? bp.dst_port : bp.src_port;
        const bool v4 = src.is_v4();
        const std::size_t l4_hdr = transport_header_len(bp.protocol);
        const auto payload = static_cast<std::size_t>(pk.payload_len);
        std::uint8_t proto = bp.protocol;
        if (!v4 && proto == ip_proto::icmp) proto = ip_proto::icmpv6;
        if (v4 && proto == ip_proto::icmpv6) proto = ip_proto::icmp;

        frame.clear();
        // Ethernet: locally administered MACs, one per direction.
        const std::uint8_t mac_a[6] = {0x02, 0, 0, 0, 0, 0x01};
        const std::uint8_t mac_b[6] = {0x02, 0, 0, 0, 0, 0x02};
        frame.insert(frame.end(), fwd ? mac_b : mac_a, (fwd ? mac_b : mac_a) + 6);
        frame.insert(frame.end(), fwd ? mac_a : mac_b, (fwd ? mac_a : mac_b) + 6);
        put16(frame, v4 ? 0x0800 : 0x86dd);

        const std::size_t l3_start = frame.size();
        if (v4) {
            put16(frame, 0x4500);
            put16(frame, static_cast<std::uint16_t>(20 + l4_hdr + payload));
            put16(frame, st.ip_id++);
            put16(frame, 0x4000);  // DF
            frame.push_back(64);
            frame.push_back(proto);
            put16(frame, 0);
            frame.insert(frame.end(), src.bytes().begin() + 12, src.bytes().end());
            frame.insert(frame.end(), dst.bytes().begin() + 12, dst.bytes().end());
            const auto csum = ipv4_checksum(frame.data() + l3_start, 20);
            frame[l3_start + 10] = static_cast<std::uint8_t>(csum >> 8);
            frame[l3_start + 11] = static_cast<std::uint8_t>(csum);
        } else {
            put32(frame, 0x60000000);
            put16(frame, static_cast<std::uint16_t>(l4_hdr + payload));
            frame.push_back(proto);
            frame.push_back(64);
            frame.insert(frame.end(), src.bytes().begin(), src.bytes().end());
            frame.insert(frame.end(), dst.bytes().begin(), dst.bytes().end());
        }

        switch (proto) {
            case ip_proto::tcp: {
                put16(frame, sport);
                put16(frame, dport);
                put32(frame, st.seq[d]);
                put32(frame, (pk.tcp_flags & tcp_flag::ack) ? st.seq[1 - d] : 0);
                frame.push_back(0x50);
                frame.push_back(pk.tcp_flags);
                put16(frame, pk.window ? *pk.window : st.window[d]);
                put16(frame, 0);  // checksum left zero
                put16(frame, 0);
                st.seq[d] += static_cast<std::uint32_t>(payload);
                if (pk.tcp_flags & (tcp_flag::syn | tcp_flag::fin)) ++st.seq[d];
                break;
            }
            case ip_proto::udp:
                put16(frame, sport);
                put16(frame, dport);
                put16(frame, static_cast<std::uint16_t>(8 + payload));
                put16(frame, 0);
                break;
            default:  // ICMP echo
                frame.push_back(fwd ? 8 : 0);
                frame.push_back(0);
                put16(frame, 0);
                put16(frame, static_cast<std::uint16_t>(item.flow));
                put16(frame, static_cast<std::uint16_t>(item.pkt));
                break;
        }
        for (std::size_t i = 0; i < payload; ++i) frame.push_back(static_cast<std::uint8_t>(rng.next()));
        writer.write(item.ts, frame);
        if (order) order->push_back({item.flow, item.pkt, item.ts});
    }
    return writer.release();
}

}  // namespace botflow
