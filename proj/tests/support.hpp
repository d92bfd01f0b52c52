#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include <unistd.h>

#include "botflow/features.hpp"
#include "botflow/matrix.hpp"
#include "botflow/flow.hpp"
#include "botflow/net.hpp"
#include "botflow/packet.hpp"
#include "botflow/rng.hpp"
#include "botflow/synth.hpp"

namespace testing_support {

namespace fs = std::filesystem;
using namespace botflow;

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = fs::temp_directory_path() /
                ("botflow-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline bool close_rel(double a, double b, double rel) {
    if (a == b) return true;
    const double scale = std::max(std::fabs(a), std::fabs(b));
    return std::fabs(a - b) <= rel * scale || std::fabs(a - b) <= 1e-12;
}

inline IpAddress ip(const std::string& text) { return *IpAddress::parse(text); }

inline PacketRecord tcp(std::int64_t ts, const std::string& src, std::uint16_t sport, const std::string& dst,
                        std::uint16_t dport, std::int64_t payload, std::uint8_t flags,
                        std::uint16_t window = 8192) {
    PacketRecord p;
    p.timestamp_us = ts;
    p.src_ip = ip(src);
    p.dst_ip = ip(dst);
    p.src_port = sport;
    p.dst_port = dport;
    p.protocol = ip_proto::tcp;
    p.payload_len = payload;
    p.header_len = 40;
    p.tcp_flags = flags;
    p.tcp_window = window;
    return p;
}

inline PacketRecord udp(std::int64_t ts, const std::string& src, std::uint16_t sport, const std::string& dst,
                        std::uint16_t dport, std::int64_t payload) {
    PacketRecord p;
    p.timestamp_us = ts;
    p.src_ip = ip(src);
    p.dst_ip = ip(dst);
    p.src_port = sport;
    p.dst_port = dport;
    p.protocol = ip_proto::udp;
    p.payload_len = payload;
    p.header_len = 28;
    return p;
}

inline PacketRecord reversed(PacketRecord p) {
    std::swap(p.src_ip, p.dst_ip);
    std::swap(p.src_port, p.dst_port);
    return p;
}

// ---------------------------------------------------------------------------
// Random capture blueprints. Gaps are drawn around the activity and flow
// timeouts (including the exact boundary values), several blueprints share a
// 5-tuple so the same key is reused across timeouts, and TCP flag patterns
// include FIN/ACK closes and RSTs.

inline std::vector<FlowBlueprint> random_blueprints(std::uint64_t seed, std::size_t max_packets = 500) {
    Rng rng(seed);
    const std::size_t budget = static_cast<std::size_t>(rng.between(1, static_cast<std::int64_t>(max_packets)));
    std::vector<FlowBlueprint> flows;
    std::size_t used = 0;
    const bool v6 = rng.chance(0.2);
    auto host = [&](int side) {
        if (v6) {
            std::array<std::uint8_t, 16> b{};
            b[0] = side == 0 ? 0xfd : 0x20;
            b[1] = side == 0 ? 0x00 : 0x01;
            b[15] = static_cast<std::uint8_t>(rng.between(1, 4));
            return IpAddress::v6(b);
        }
        return side == 0 ? IpAddress::v4(0xC0A80000u | static_cast<std::uint32_t>(rng.between(1, 4)))
                         : IpAddress::v4(0x5DB8D800u | static_cast<std::uint32_t>(rng.between(1, 4)));
    };
    auto gap = [&]() -> std::int64_t {
        switch (rng.below(10)) {
            case 0: return 5'000'000;
            case 1: return rng.between(4'900'000, 5'100'000);
            case 2: return 120'000'000;
            case 3: return rng.between(119'000'000, 121'000'000);
            case 4: return rng.between(6'000'000, 60'000'000);
            case 5: return 0;
            default: return rng.between(1, 400'000);
        }
    };
    while (used < budget) {
        FlowBlueprint f;
        const auto proto_pick = rng.below(10);
        f.protocol = proto_pick < 6 ? ip_proto::tcp : (proto_pick < 9 ? ip_proto::udp : ip_proto::icmp);
        // Small address/port pools force key reuse.
        const bool outbound = rng.chance(0.7);
        f.src_ip = host(outbound ? 0 : 1);
        f.dst_ip = host(outbound ? 1 : 0);
        if (f.protocol != ip_proto::icmp) {
            f.src_port = static_cast<std::uint16_t>(rng.chance(0.5) ? 40000 + rng.below(3) : 80 + rng.below(2));
            f.dst_port = static_cast<std::uint16_t>(rng.chance(0.5) ? 40000 + rng.below(3) : 80 + rng.below(2));
        }
        f.start_us = rng.between(0, 300'000'000);
        const std::size_t n = std::min<std::size_t>(budget - used, static_cast<std::size_t>(rng.between(1, 40)));
        for (std::size_t i = 0; i < n; ++i) {
            PacketBlueprint p;
            p.direction = rng.chance(0.55) ? Direction::forward : Direction::backward;
            p.payload_len = rng.chance(0.2) ? 0 : rng.between(1, 1460);
            p.gap_us = i == 0 ? 0 : gap();
            if (f.protocol == ip_proto::tcp) {
                const auto r = rng.below(100);
                if (r < 3) {
                    p.tcp_flags = tcp_flag::rst;
                } else if (r < 12) {
                    p.tcp_flags = tcp_flag::fin | tcp_flag::ack;
                } else if (r < 18) {
                    p.tcp_flags = tcp_flag::syn;
                } else {
                    p.tcp_flags = static_cast<std::uint8_t>(tcp_flag::ack | (rng.chance(0.3) ? tcp_flag::psh : 0) |
                                                            (rng.chance(0.03) ? tcp_flag::urg : 0) |
                                                            (rng.chance(0.03) ? tcp_flag::ece : 0) |
                                                            (rng.chance(0.03) ? tcp_flag::cwr : 0));
                }
                p.window = static_cast<std::uint16_t>(rng.between(0, 65535));
            }
            f.packets.push_back(p);
        }
        used += n;
        flows.push_back(std::move(f));
    }
    return flows;
}

/// The packet records a capture generated from `flows` must decode to, in file order.
inline std::vector<PacketRecord> expected_records(const std::vector<FlowBlueprint>& flows,
                                                  const std::vector<SynthPacket>& order) {
    std::vector<PacketRecord> out;
    for (const auto& sp : order) {
        const auto& f = flows[sp.flow_index];
        const auto& bp = f.packets[sp.packet_index];
        PacketRecord p;
        p.timestamp_us = sp.timestamp_us;
        const bool fwd = bp.direction == Direction::forward;
        p.src_ip = fwd ? f.src_ip : f.dst_ip;
        p.dst_ip = fwd ? f.dst_ip : f.src_ip;
        p.src_port = fwd ? f.src_port : f.dst_port;
        p.dst_port = fwd ? f.dst_port : f.src_port;
        p.protocol = f.protocol;
        if (!f.src_ip.is_v4() && p.protocol == ip_proto::icmp) p.protocol = ip_proto::icmpv6;
        p.payload_len = bp.payload_len;
        const std::int64_t l4 = f.protocol == ip_proto::tcp ? 20 : 8;
        p.header_len = (f.src_ip.is_v4() ? 20 : 40) + l4;
        if (f.protocol == ip_proto::tcp) {
            p.tcp_flags = bp.tcp_flags;
            p.tcp_window = bp.window;
        }
        out.push_back(p);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Brute-force flow oracle. Packets are grouped by unordered endpoint pair,
// each group is cut into flows by walking it once, and every statistic is then
// computed from the complete per-flow packet lists with two-pass formulas.

struct OracleStats {
    double count = 0, sum = 0, mean = 0, std = 0, min = 0, max = 0;
};

inline OracleStats oracle_stats(const std::vector<double>& xs) {
    OracleStats s;
    if (xs.empty()) return s;
    s.count = static_cast<double>(xs.size());
    for (double x : xs) s.sum += x;
    s.mean = s.sum / s.count;
    s.min = *std::min_element(xs.begin(), xs.end());
    s.max = *std::max_element(xs.begin(), xs.end());
    if (xs.size() > 1) {
        double ss = 0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.std = std::sqrt(ss / (s.count - 1));
    }
    return s;
}

inline bool oracle_home(const IpAddress& a) {
    const auto b = a.bytes();
    if (a.is_v4()) {
        const std::uint8_t o1 = b[12], o2 = b[13];
        return o1 == 10 || (o1 == 172 && o2 >= 16 && o2 <= 31) || (o1 == 192 && o2 == 168);
    }
    return (b[0] & 0xfe) == 0xfc;
}

struct OracleFlow {
    std::size_t first_index = 0;  // file position of the first packet
    std::vector<PacketRecord> packets;
};

inline std::vector<OracleFlow> oracle_segment(const std::vector<PacketRecord>& packets, std::int64_t flow_timeout_us) {
    using Side = std::tuple<IpAddress, std::uint16_t>;
    using Key = std::tuple<Side, Side, std::uint8_t>;
    std::map<Key, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < packets.size(); ++i) {
        const auto& p = packets[i];
        Side s{p.src_ip, p.src_port}, d{p.dst_ip, p.dst_port};
        if (d < s) std::swap(s, d);
        groups[Key{s, d, p.protocol}].push_back(i);
    }
    std::vector<OracleFlow> flows;
    for (const auto& [key, idx] : groups) {
        OracleFlow cur;
        std::int64_t max_ts = 0;
        bool fin_a = false, fin_b = false, done = false;
        for (std::size_t i : idx) {
            const auto& p = packets[i];
            const bool split = !cur.packets.empty() && (done || p.timestamp_us - max_ts >= flow_timeout_us);
            if (split) {
                flows.push_back(std::move(cur));
                cur = OracleFlow{};
            }
            if (cur.packets.empty()) {
                cur.first_index = i;
                max_ts = p.timestamp_us;
                fin_a = fin_b = done = false;
            }
            const auto& first = cur.packets.empty() ? p : cur.packets.front();
            const bool forward = p.src_ip == first.src_ip && p.src_port == first.src_port;
            cur.packets.push_back(p);
            max_ts = std::max(max_ts, p.timestamp_us);
            if (p.protocol == ip_proto::tcp) {
                if ((p.tcp_flags & tcp_flag::rst) || (fin_a && fin_b && (p.tcp_flags & tcp_flag::ack))) done = true;
                if (p.tcp_flags & tcp_flag::fin) (forward ? fin_a : fin_b) = true;
            }
        }
        if (!cur.packets.empty()) flows.push_back(std::move(cur));
    }
    std::sort(flows.begin(), flows.end(),
              [](const OracleFlow& a, const OracleFlow& b) { return a.first_index < b.first_index; });
    return flows;
}

inline FeatureVector oracle_features(const OracleFlow& flow, std::int64_t activity_timeout_us) {
    using F = Feature;
    const auto& pk = flow.packets;
    const auto& first = pk.front();
    auto is_fwd = [&](const PacketRecord& p) { return p.src_ip == first.src_ip && p.src_port == first.src_port; };

    std::vector<double> all_len, fwd_len, bwd_len, iat, fwd_iat, bwd_iat, active, idle;
    std::int64_t t_min = first.timestamp_us, t_max = first.timestamp_us;
    double fwd_hdr = 0, bwd_hdr = 0, fwd_psh = 0, bwd_psh = 0, fwd_urg = 0, bwd_urg = 0;
    std::array<double, 8> flags{};
    double init_fwd = -1, init_bwd = -1;
    const PacketRecord* last_fwd = nullptr;
    const PacketRecord* last_bwd = nullptr;
    for (std::size_t i = 0; i < pk.size(); ++i) {
        const auto& p = pk[i];
        const bool f = is_fwd(p);
        t_min = std::min(t_min, p.timestamp_us);
        t_max = std::max(t_max, p.timestamp_us);
        all_len.push_back(static_cast<double>(p.payload_len));
        (f ? fwd_len : bwd_len).push_back(static_cast<double>(p.payload_len));
        if (i > 0) iat.push_back(static_cast<double>(std::max<std::int64_t>(0, p.timestamp_us - pk[i - 1].timestamp_us)));
        auto& last = f ? last_fwd : last_bwd;
        if (last) {
            (f ? fwd_iat : bwd_iat).push_back(static_cast<double>(std::max<std::int64_t>(0, p.timestamp_us - last->timestamp_us)));
        }
        last = &p;
        (f ? fwd_hdr : bwd_hdr) += static_cast<double>(p.header_len);
        if (p.tcp_flags & tcp_flag::psh) (f ? fwd_psh : bwd_psh) += 1;
        if (p.tcp_flags & tcp_flag::urg) (f ? fwd_urg : bwd_urg) += 1;
        for (int b = 0; b < 8; ++b) {
            if (p.tcp_flags & (1 << b)) flags[b] += 1;
        }
        if (p.tcp_window) {
            double& w = f ? init_fwd : init_bwd;
            if (w < 0) w = *p.tcp_window;
        }
    }
    // Activity periods over the arrival sequence.
    std::int64_t a_start = pk.front().timestamp_us, a_end = a_start;
    for (std::size_t i = 1; i < pk.size(); ++i) {
        const auto t = pk[i].timestamp_us;
        if (t - a_end > activity_timeout_us) {
            if (a_end > a_start) active.push_back(static_cast<double>(a_end - a_start));
            idle.push_back(static_cast<double>(t - a_end));
            a_start = a_end = t;
        } else if (t > a_end) {
            a_end = t;
        }
    }
    if (a_end > a_start) active.push_back(static_cast<double>(a_end - a_start));

    const auto A = oracle_stats(all_len), Fw = oracle_stats(fwd_len), Bw = oracle_stats(bwd_len);
    const auto I = oracle_stats(iat), FI = oracle_stats(fwd_iat), BI = oracle_stats(bwd_iat);
    const auto Ac = oracle_stats(active), Id = oracle_stats(idle);
    const double dur = static_cast<double>(t_max - t_min);
    auto rate = [&](double x) { return dur == 0 ? 0.0 : x / (dur / 1e6); };

    FeatureVector v;
    v.src_ip = first.src_ip;
    v.dst_ip = first.dst_ip;
    v.src_port = first.src_port;
    v.dst_port = first.dst_port;
    v.protocol = first.protocol;
    v.start_ts_us = t_min;
    v.flow_id = first.src_ip.to_string() + "-" + first.dst_ip.to_string() + "-" + std::to_string(first.src_port) +
                "-" + std::to_string(first.dst_port) + "-" + std::to_string(first.protocol);
    v[F::flow_duration] = dur;
    v[F::total_fwd_packets] = Fw.count;
    v[F::total_bwd_packets] = Bw.count;
    v[F::total_length_fwd] = Fw.sum;
    v[F::total_length_bwd] = Bw.sum;
    v[F::fwd_packet_length_max] = Fw.max;
    v[F::fwd_packet_length_min] = Fw.min;
    v[F::fwd_packet_length_mean] = Fw.mean;
    v[F::fwd_packet_length_std] = Fw.std;
    v[F::bwd_packet_length_max] = Bw.max;
    v[F::bwd_packet_length_min] = Bw.min;
    v[F::bwd_packet_length_mean] = Bw.mean;
    v[F::bwd_packet_length_std] = Bw.std;
    v[F::flow_bytes_per_s] = rate(A.sum);
    v[F::flow_packets_per_s] = rate(A.count);
    v[F::flow_iat_mean] = I.mean;
    v[F::flow_iat_std] = I.std;
    v[F::flow_iat_max] = I.max;
    v[F::flow_iat_min] = I.min;
    v[F::fwd_iat_total] = FI.sum;
    v[F::fwd_iat_mean] = FI.mean;
    v[F::fwd_iat_std] = FI.std;
    v[F::fwd_iat_max] = FI.max;
    v[F::fwd_iat_min] = FI.min;
    v[F::bwd_iat_total] = BI.sum;
    v[F::bwd_iat_mean] = BI.mean;
    v[F::bwd_iat_std] = BI.std;
    v[F::bwd_iat_max] = BI.max;
    v[F::bwd_iat_min] = BI.min;
    v[F::fwd_psh_flags] = fwd_psh;
    v[F::bwd_psh_flags] = bwd_psh;
    v[F::fwd_urg_flags] = fwd_urg;
    v[F::bwd_urg_flags] = bwd_urg;
    v[F::fwd_header_length] = fwd_hdr;
    v[F::bwd_header_length] = bwd_hdr;
    v[F::fwd_packets_per_s] = rate(Fw.count);
    v[F::bwd_packets_per_s] = rate(Bw.count);
    v[F::min_packet_length] = A.min;
    v[F::max_packet_length] = A.max;
    v[F::packet_length_mean] = A.mean;
    v[F::packet_length_std] = A.std;
    v[F::packet_length_variance] = A.std * A.std;
    // Flag bits: FIN 0, SYN 1, RST 2, PSH 3, ACK 4, URG 5, ECE 6, CWR 7.
    v[F::fin_flag_count] = flags[0];
    v[F::syn_flag_count] = flags[1];
    v[F::rst_flag_count] = flags[2];
    v[F::psh_flag_count] = flags[3];
    v[F::ack_flag_count] = flags[4];
    v[F::urg_flag_count] = flags[5];
    v[F::ece_flag_count] = flags[6];
    v[F::cwr_flag_count] = flags[7];
    v[F::down_up_ratio] = Fw.count > 0 ? Bw.count / Fw.count : 0.0;
    v[F::average_packet_size] = A.sum / A.count;
    v[F::avg_fwd_segment_size] = Fw.mean;
    v[F::avg_bwd_segment_size] = Bw.mean;
    v[F::init_fwd_win_bytes] = init_fwd;
    v[F::init_bwd_win_bytes] = init_bwd;
    v[F::active_mean] = Ac.mean;
    v[F::active_std] = Ac.std;
    v[F::active_max] = Ac.max;
    v[F::active_min] = Ac.min;
    v[F::idle_mean] = Id.mean;
    v[F::idle_std] = Id.std;
    v[F::idle_max] = Id.max;
    v[F::idle_min] = Id.min;
    v[F::inbound] = oracle_home(first.dst_ip) ? 1.0 : 0.0;
    return v;
}

inline std::vector<FeatureVector> oracle_meter(const std::vector<PacketRecord>& packets, const MeterConfig& config) {
    std::vector<FeatureVector> out;
    for (const auto& f : oracle_segment(packets, config.flow_timeout_us)) {
        out.push_back(oracle_features(f, config.activity_timeout_us));
    }
    return out;
}

/// Empty string when the vectors agree (counts exact, reals within `rel`),
/// otherwise a description of the first mismatch.
inline std::string compare_flows(const std::vector<FeatureVector>& got, const std::vector<FeatureVector>& want,
                                 double rel = 1e-9) {
    if (got.size() != want.size()) {
        return "flow count " + std::to_string(got.size()) + " != " + std::to_string(want.size());
    }
    for (std::size_t i = 0; i < got.size(); ++i) {
        const auto& g = got[i];
        const auto& w = want[i];
        if (g.flow_id != w.flow_id || g.start_ts_us != w.start_ts_us || g.protocol != w.protocol) {
            return "flow " + std::to_string(i) + " identity " + g.flow_id + " != " + w.flow_id;
        }
        for (std::size_t k = 0; k < kFeatureCount; ++k) {
            const auto f = static_cast<Feature>(k);
            const bool ok = is_count_feature(f) ? g.values[k] == w.values[k] : close_rel(g.values[k], w.values[k], rel);
            if (!ok) {
                return "flow " + std::to_string(i) + " (" + g.flow_id + ") " + std::string(feature_name(f)) + ": " +
                       std::to_string(g.values[k]) + " != " + std::to_string(w.values[k]);
            }
        }
    }
    return {};
}

// Metric definitions evaluated directly from the four counts.
struct OracleMetrics {
    double accuracy, precision, recall, f1;
    bool precision_degenerate, recall_degenerate;
};

inline OracleMetrics oracle_metrics(double tp, double tn, double fp, double fn) {
    OracleMetrics m{};
    m.accuracy = 100.0 * (tp + tn) / (tp + tn + fp + fn);
    m.precision_degenerate = tp + fp == 0;
    m.recall_degenerate = tp + fn == 0;
    m.precision = m.precision_degenerate ? 0.0 : 100.0 * tp / (tp + fp);
    m.recall = m.recall_degenerate ? 0.0 : 100.0 * tp / (tp + fn);
    m.f1 = m.precision + m.recall == 0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

// Independent objective: mean log-loss plus lambda/(2n) * |w|^2.
inline double oracle_objective(const std::vector<double>& w, double b, const Matrix& x, const std::vector<int>& y, double lambda) {
    const double n = static_cast<double>(x.rows());
    double loss = 0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double z = b;
        for (std::size_t j = 0; j < w.size(); ++j) z += w[j] * x(i, j);
        // -log(sigmoid(z)) = log(1 + e^-z), written to stay exact for large |z|.
        const double m = y[i] ? -z : z;
        loss += m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
    }
    double reg = 0;
    for (double v : w) reg += v * v;
    return loss / n + lambda / (2.0 * n) * reg;
}

}  // namespace testing_support
