#include <gtest/gtest.h>

#include "botflow/error.hpp"
#include "botflow/meter.hpp"
#include "botflow/pcap.hpp"
#include "support.hpp"

using namespace botflow;
using namespace testing_support;
using F = Feature;

namespace {

constexpr std::int64_t S = 1'000'000;
const std::string A = "192.168.1.10";
const std::string B = "93.184.216.34";

std::vector<FeatureVector> meter(const std::vector<PacketRecord>& pkts, const MeterConfig& cfg = {}) {
    return meter_packets(pkts, cfg);
}

}  // namespace

TEST(FlowKey, ReplyMapsToSameKey) {
    const auto p = tcp(0, A, 1000, B, 80, 0, tcp_flag::syn);
    EXPECT_EQ(FlowKey::of(p), FlowKey::of(reversed(p)));
    const auto q = tcp(0, A, 1001, B, 80, 0, tcp_flag::syn);
    EXPECT_NE(FlowKey::of(p), FlowKey::of(q));
}

TEST(FlowMeter, SingleSynPacket) {
    const auto flows = meter({tcp(5 * S, A, 1000, B, 80, 0, tcp_flag::syn)});
    ASSERT_EQ(flows.size(), 1u);
    const auto& f = flows[0];
    EXPECT_EQ(f[F::total_fwd_packets], 1);
    EXPECT_EQ(f[F::total_bwd_packets], 0);
    EXPECT_EQ(f[F::flow_duration], 0);
    EXPECT_EQ(f[F::syn_flag_count], 1);
    EXPECT_EQ(f[F::min_packet_length], 0);
    EXPECT_EQ(f[F::max_packet_length], 0);
    EXPECT_EQ(f[F::packet_length_mean], 0);
    for (auto g : {F::flow_iat_mean, F::flow_iat_std, F::flow_iat_max, F::flow_iat_min, F::fwd_iat_total,
                   F::bwd_iat_total, F::flow_bytes_per_s, F::flow_packets_per_s, F::down_up_ratio, F::active_mean,
                   F::active_max, F::idle_mean, F::idle_max}) {
        EXPECT_EQ(f[g], 0) << feature_name(g);
    }
    EXPECT_EQ(f[F::init_fwd_win_bytes], 8192);
    EXPECT_EQ(f[F::init_bwd_win_bytes], -1);
    EXPECT_EQ(f.flow_id, A + "-" + B + "-1000-80-6");
}

TEST(FlowMeter, HandComputedFeatures) {
    // fwd payloads 100 and 200 at 0 s and 1 s, bwd 50 at 0.5 s.
    const auto flows = meter({udp(0, A, 5000, B, 53, 100), udp(S / 2, B, 53, A, 5000, 50), udp(S, A, 5000, B, 53, 200)});
    ASSERT_EQ(flows.size(), 1u);
    const auto& f = flows[0];
    EXPECT_EQ(f[F::flow_duration], 1'000'000);
    EXPECT_NEAR(f[F::packet_length_mean], 350.0 / 3.0, 1e-12);
    EXPECT_DOUBLE_EQ(f[F::flow_bytes_per_s], 350.0);
    EXPECT_DOUBLE_EQ(f[F::flow_packets_per_s], 3.0);
    EXPECT_DOUBLE_EQ(f[F::down_up_ratio], 0.5);
    EXPECT_EQ(f[F::fwd_iat_total], 1'000'000);
    EXPECT_NEAR(f[F::packet_length_std], 76.37626158259734, 1e-9);
    EXPECT_NEAR(f[F::packet_length_variance], 76.37626158259734 * 76.37626158259734, 1e-6);
    EXPECT_DOUBLE_EQ(f[F::average_packet_size], f[F::packet_length_mean]);
    EXPECT_DOUBLE_EQ(f[F::avg_fwd_segment_size], f[F::fwd_packet_length_mean]);
    EXPECT_EQ(f[F::init_fwd_win_bytes], -1);
}

TEST(FlowMeter, SampleStdOfTwoFourSix) {
    const auto flows = meter({udp(0, A, 5000, B, 53, 2), udp(10, A, 5000, B, 53, 4), udp(20, A, 5000, B, 53, 6)});
    ASSERT_EQ(flows.size(), 1u);
    EXPECT_DOUBLE_EQ(flows[0][F::packet_length_mean], 4.0);
    EXPECT_DOUBLE_EQ(flows[0][F::packet_length_std], 2.0);
}

TEST(FlowMeter, BidirectionalKeying) {
    const auto flows = meter({tcp(0, A, 1000, B, 80, 10, tcp_flag::ack), tcp(100, B, 80, A, 1000, 20, tcp_flag::ack)});
    ASSERT_EQ(flows.size(), 1u);
    EXPECT_EQ(flows[0][F::total_fwd_packets], 1);
    EXPECT_EQ(flows[0][F::total_bwd_packets], 1);
    EXPECT_EQ(flows[0].src_ip, ip(A));
    EXPECT_EQ(flows[0].src_port, 1000);
}

TEST(FlowTable, IdleTimeoutSplitsFlow) {
    MeterConfig cfg;
    FlowTable table(cfg);
    EXPECT_TRUE(table.offer(udp(0, A, 5000, B, 53, 10)).empty());
    const auto out = table.offer(udp(150 * S, B, 53, A, 5000, 10));
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].packets(), 1u);
    EXPECT_EQ(table.live_flows(), 1u);
    // The new flow's forward direction is the packet that opened it.
    const auto rest = table.flush();
    ASSERT_EQ(rest.size(), 1u);
    EXPECT_EQ(rest[0].forward_src().ip, ip(B));
}

TEST(FlowTable, TimeoutBoundaryIsInclusive) {
    FlowTable table(MeterConfig{});
    table.offer(udp(0, A, 5000, B, 53, 10));
    EXPECT_TRUE(table.offer(udp(120 * S - 1, A, 5000, B, 53, 10)).empty());
    EXPECT_EQ(table.offer(udp(240 * S - 1, A, 5000, B, 53, 10)).size(), 1u);
}

TEST(FlowTable, TcpTerminationAfterBidirectionalFin) {
    using namespace tcp_flag;
    FlowTable table(MeterConfig{});
    const std::vector<PacketRecord> exchange = {
        tcp(0, A, 1000, B, 80, 0, syn),           tcp(10, B, 80, A, 1000, 0, syn | ack),
        tcp(20, A, 1000, B, 80, 0, ack),          tcp(30, A, 1000, B, 80, 0, fin | ack),
        tcp(40, B, 80, A, 1000, 0, fin | ack),
    };
    for (const auto& p : exchange) EXPECT_TRUE(table.offer(p).empty());
    const auto out = table.offer(tcp(50, A, 1000, B, 80, 0, ack));
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].packets(), 6u);
    EXPECT_EQ(table.live_flows(), 0u);
}

TEST(FlowTable, RstTerminatesImmediately) {
    FlowTable table(MeterConfig{});
    table.offer(tcp(0, A, 1000, B, 80, 0, tcp_flag::syn));
    const auto out = table.offer(tcp(10, B, 80, A, 1000, 0, tcp_flag::rst | tcp_flag::ack));
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].packets(), 2u);
}

TEST(FlowMeter, ActiveIdlePeriods) {
    // Bursts [0, 1 s] and [8 s, 8.5 s], idle gap 7 s.
    const auto flows = meter({udp(0, A, 5000, B, 53, 1), udp(S, A, 5000, B, 53, 1), udp(8 * S, A, 5000, B, 53, 1),
                              udp(8 * S + S / 2, A, 5000, B, 53, 1)});
    ASSERT_EQ(flows.size(), 1u);
    const auto& f = flows[0];
    EXPECT_DOUBLE_EQ(f[F::idle_mean], 7e6);
    EXPECT_DOUBLE_EQ(f[F::active_max], 1e6);
    EXPECT_DOUBLE_EQ(f[F::active_min], 5e5);
    EXPECT_DOUBLE_EQ(f[F::active_mean], 7.5e5);
}

TEST(FlowMeter, OutOfOrderTimestampsTolerated) {
    const std::vector<PacketRecord> pkts = {udp(10 * S, A, 5000, B, 53, 1), udp(9 * S, B, 53, A, 5000, 1),
                                            udp(11 * S, A, 5000, B, 53, 1)};
    const auto flows = meter(pkts);
    ASSERT_EQ(flows.size(), 1u);
    EXPECT_EQ(flows[0].start_ts_us, 9 * S);
    EXPECT_EQ(flows[0][F::flow_duration], 2 * S);
    EXPECT_EQ(flows[0][F::flow_iat_min], 0);
    EXPECT_EQ(compare_flows(flows, oracle_meter(pkts, MeterConfig{})), "");
}

TEST(FlowMeter, InboundUsesForwardDestination) {
    auto flows = meter({udp(0, B, 5000, A, 53, 1)});
    EXPECT_EQ(flows[0][F::inbound], 1);
    flows = meter({udp(0, A, 5000, B, 53, 1)});
    EXPECT_EQ(flows[0][F::inbound], 0);
}

TEST(FlowMeter, ConfigValidation) {
    MeterConfig cfg;
    cfg.flow_timeout_us = cfg.activity_timeout_us;
    EXPECT_THROW(cfg.validate(), ValidationError);
    cfg = MeterConfig{};
    cfg.activity_timeout_us = 0;
    EXPECT_THROW(cfg.validate(), ValidationError);
}

// --- capture-level behaviour ------------------------------------------------

TEST(Ingest, EmptyCaptureYieldsNoFlows) {
    TempDir dir("ingest");
    PcapWriter w(link_type::ethernet);
    write_file(dir / "empty.pcap", w.bytes());
    const auto r = ingest_capture(dir / "empty.pcap", MeterConfig{});
    EXPECT_TRUE(r.flows.empty());
    EXPECT_EQ(r.stats.frames, 0u);
}

TEST(Ingest, MissingFileIsIoError) {
    EXPECT_THROW(ingest_capture("/nonexistent/capture.pcap", MeterConfig{}), IoError);
}

TEST(Ingest, ThreeFlowSyntheticCaptureMatchesOracle) {
    using namespace tcp_flag;
    std::vector<FlowBlueprint> flows(3);
    flows[0] = {ip(A), ip(B), 40000, 443, ip_proto::tcp, 0,
                {{Direction::forward, 0, 0, syn, 1000}, {Direction::backward, 0, 20'000, syn | ack, 2000},
                 {Direction::forward, 300, 100, psh | ack, 1000}, {Direction::backward, 1400, 30'000, ack, 2000},
                 {Direction::forward, 0, 7 * S, fin | ack, 1000}, {Direction::backward, 0, 100, fin | ack, 2000},
                 {Direction::forward, 0, 100, ack, 1000}}};
    flows[1] = {ip(A), ip("192.168.1.1"), 5353, 53, ip_proto::udp, 1000,
                {{Direction::forward, 40, 0, 0, {}}, {Direction::backward, 120, 3000, 0, {}}}};
    flows[2] = {ip("10.0.0.7"), ip(B), 0, 0, ip_proto::icmp, 50,
                {{Direction::forward, 56, 0, 0, {}}, {Direction::backward, 56, 900, 0, {}}}};
    std::vector<SynthPacket> order;
    TempDir dir("ingest3");
    write_file(dir / "c.pcap", generate_synthetic_capture(flows, 9, {}, &order));
    const auto r = ingest_capture(dir / "c.pcap", MeterConfig{});
    ASSERT_EQ(r.flows.size(), 3u);
    EXPECT_EQ(compare_flows(r.flows, oracle_meter(expected_records(flows, order), MeterConfig{})), "");
    EXPECT_EQ(r.stats.packets, 11u);
    EXPECT_EQ(r.stats.skipped(), 0u);
}

TEST(Ingest, TwoPacketBlueprintRoundTrip) {
    std::vector<FlowBlueprint> flows(2);
    flows[0] = {ip(A), ip(B), 1, 2, ip_proto::udp, 0, {{Direction::forward, 5, 0, 0, {}}, {Direction::backward, 6, 7, 0, {}}}};
    flows[1] = {ip(A), ip(B), 1, 3, ip_proto::udp, 0, {{Direction::forward, 5, 0, 0, {}}}};
    TempDir dir("rt");
    write_file(dir / "c.pcap", generate_synthetic_capture(flows, 1));
    const auto r = ingest_capture(dir / "c.pcap", MeterConfig{});
    ASSERT_EQ(r.flows.size(), 2u);
    EXPECT_EQ(r.flows[0][F::total_fwd_packets] + r.flows[0][F::total_bwd_packets], 2);
}

TEST(Ingest, ParallelMatchesSerial) {
    TempDir dir("par");
    std::vector<std::filesystem::path> paths;
    for (int i = 0; i < 4; ++i) {
        paths.push_back(dir / ("c" + std::to_string(i) + ".pcap"));
        write_file(paths.back(), generate_synthetic_capture(random_blueprints(100 + i), i));
    }
    const auto s = ingest_captures(paths, MeterConfig{}, Exec::serial);
    const auto p = ingest_captures(paths, MeterConfig{}, Exec::parallel);
    ASSERT_EQ(s.size(), p.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        EXPECT_EQ(compare_flows(s[i].flows, p[i].flows, 0.0), "");
        EXPECT_EQ(s[i].stats.packets, p[i].stats.packets);
    }
}

// --- oracle equivalence and properties ---------------------------------------

class RandomCapture : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(RandomCapture, MatchesOracleThroughPcap) {
    const auto flows = random_blueprints(GetParam());
    std::vector<SynthPacket> order;
    SynthOptions opt;
    opt.resolution = GetParam() % 2 ? TimestampResolution::nano : TimestampResolution::micro;
    opt.swapped = GetParam() % 3 == 0;
    TempDir dir("oracle");
    write_file(dir / "c.pcap", generate_synthetic_capture(flows, GetParam(), opt, &order));
    const auto r = ingest_capture(dir / "c.pcap", MeterConfig{});
    const auto expected = expected_records(flows, order);
    EXPECT_EQ(compare_flows(r.flows, oracle_meter(expected, MeterConfig{})), "");
    // Conservation: every decoded packet lands in exactly one flow.
    double total = 0;
    for (const auto& f : r.flows) total += f[F::total_fwd_packets] + f[F::total_bwd_packets];
    EXPECT_EQ(total, static_cast<double>(r.stats.frames - r.stats.skipped()));
    EXPECT_EQ(r.stats.packets, expected.size());
}

TEST_P(RandomCapture, ReversalKeepsInitiatorPerspective) {
    // Forward is the first packet's source, so mirroring every packet mirrors
    // the flow identity while the per-direction statistics stay attached to
    // the initiator.
    const auto flows = random_blueprints(GetParam());
    std::vector<SynthPacket> order;
    generate_synthetic_capture(flows, 1, {}, &order);
    auto pkts = expected_records(flows, order);
    const auto base = meter(pkts);
    for (auto& p : pkts) p = reversed(p);
    const auto rev = meter(pkts);
    ASSERT_EQ(base.size(), rev.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        EXPECT_EQ(base[i].src_ip, rev[i].dst_ip);
        EXPECT_EQ(base[i].dst_ip, rev[i].src_ip);
        EXPECT_EQ(base[i].src_port, rev[i].dst_port);
        EXPECT_EQ(base[i].dst_port, rev[i].src_port);
        for (std::size_t k = 0; k < kFeatureCount; ++k) {
            if (static_cast<F>(k) == F::inbound) continue;
            EXPECT_EQ(base[i].values[k], rev[i].values[k]) << feature_name(static_cast<F>(k));
        }
    }
}

TEST(FlowMeter, MirroredInitiatorSwapsDirections) {
    // Same conversation seen with the other endpoint speaking first: the two
    // opening packets share a timestamp, so only the initiator changes.
    using namespace tcp_flag;
    const std::vector<PacketRecord> a = {
        tcp(0, A, 1000, B, 80, 10, ack, 100), tcp(0, B, 80, A, 1000, 10, ack, 200),
        tcp(S, A, 1000, B, 80, 300, psh | ack, 100), tcp(2 * S, B, 80, A, 1000, 900, ack, 200),
        tcp(2 * S + 5, B, 80, A, 1000, 700, ack, 200)};
    std::vector<PacketRecord> b = a;
    std::swap(b[0], b[1]);
    const auto fa = meter(a);
    const auto fb = meter(b);
    ASSERT_EQ(fa.size(), 1u);
    ASSERT_EQ(fb.size(), 1u);
    const std::pair<F, F> swaps[] = {
        {F::total_fwd_packets, F::total_bwd_packets}, {F::total_length_fwd, F::total_length_bwd},
        {F::fwd_packet_length_max, F::bwd_packet_length_max}, {F::fwd_packet_length_mean, F::bwd_packet_length_mean},
        {F::fwd_packet_length_std, F::bwd_packet_length_std}, {F::fwd_iat_total, F::bwd_iat_total},
        {F::fwd_psh_flags, F::bwd_psh_flags}, {F::fwd_header_length, F::bwd_header_length},
        {F::fwd_packets_per_s, F::bwd_packets_per_s}, {F::init_fwd_win_bytes, F::init_bwd_win_bytes}};
    for (auto [x, y] : swaps) {
        EXPECT_EQ(fa[0][x], fb[0][y]) << feature_name(x);
        EXPECT_EQ(fa[0][y], fb[0][x]) << feature_name(y);
    }
    EXPECT_DOUBLE_EQ(fa[0][F::down_up_ratio], 1.0 / fb[0][F::down_up_ratio]);
    for (auto g : {F::packet_length_mean, F::packet_length_std, F::min_packet_length, F::max_packet_length}) {
        EXPECT_EQ(fa[0][g], fb[0][g]) << feature_name(g);
    }
}

TEST_P(RandomCapture, TimeShiftInvariance) {
    const auto flows = random_blueprints(GetParam());
    std::vector<SynthPacket> order;
    generate_synthetic_capture(flows, 1, {}, &order);
    auto pkts = expected_records(flows, order);
    const auto base = meter(pkts);
    constexpr std::int64_t shift = 86'400'000'000;
    for (auto& p : pkts) p.timestamp_us += shift;
    const auto moved = meter(pkts);
    ASSERT_EQ(base.size(), moved.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        EXPECT_EQ(base[i].values, moved[i].values);
        EXPECT_EQ(base[i].start_ts_us + shift, moved[i].start_ts_us);
    }
}

TEST_P(RandomCapture, PayloadScaleDoublesLengthFeatures) {
    const auto flows = random_blueprints(GetParam());
    std::vector<SynthPacket> order;
    generate_synthetic_capture(flows, 1, {}, &order);
    auto pkts = expected_records(flows, order);
    const auto base = meter(pkts);
    for (auto& p : pkts) p.payload_len *= 2;
    const auto scaled = meter(pkts);
    ASSERT_EQ(base.size(), scaled.size());
    const F doubled[] = {F::total_length_fwd, F::total_length_bwd, F::fwd_packet_length_max, F::fwd_packet_length_min,
                         F::fwd_packet_length_mean, F::fwd_packet_length_std, F::bwd_packet_length_max,
                         F::bwd_packet_length_min, F::bwd_packet_length_mean, F::bwd_packet_length_std,
                         F::flow_bytes_per_s, F::min_packet_length, F::max_packet_length, F::packet_length_mean,
                         F::packet_length_std, F::average_packet_size, F::avg_fwd_segment_size,
                         F::avg_bwd_segment_size};
    const F unchanged[] = {F::total_fwd_packets, F::total_bwd_packets, F::flow_iat_mean, F::flow_iat_std,
                           F::fwd_iat_total, F::bwd_iat_mean, F::syn_flag_count, F::ack_flag_count, F::down_up_ratio,
                           F::flow_packets_per_s, F::active_mean, F::idle_mean, F::flow_duration};
    for (std::size_t i = 0; i < base.size(); ++i) {
        for (auto g : doubled) EXPECT_TRUE(close_rel(scaled[i][g], 2 * base[i][g], 1e-12)) << feature_name(g);
        for (auto g : unchanged) EXPECT_EQ(scaled[i][g], base[i][g]) << feature_name(g);
        EXPECT_TRUE(close_rel(scaled[i][F::packet_length_variance], 4 * base[i][F::packet_length_variance], 1e-12));
    }
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomCapture, ::testing::Range<std::uint64_t>(1, 21));

TEST(FlowMeter, LongCaptureSweepMatchesOracle) {
    // Enough packets to trigger the periodic idle sweep several times.
    Rng rng(77);
    std::vector<PacketRecord> pkts;
    std::int64_t t = 0;
    for (int i = 0; i < 200'000; ++i) {
        t += rng.between(0, 3'000);
        const auto host = static_cast<std::uint32_t>(rng.below(50));
        auto p = udp(t, "10.0.0.1", static_cast<std::uint16_t>(1000 + host), B, 53, rng.between(0, 200));
        if (rng.chance(0.5)) p = reversed(p);
        pkts.push_back(p);
        if (i % 50'000 == 49'999) t += 250 * S;
    }
    const auto got = meter(pkts);
    EXPECT_EQ(compare_flows(got, oracle_meter(pkts, MeterConfig{})), "");
}
