#include "botflow/corpus.hpp"

#include <fstream>

#include <json.hpp>

#include "botflow/csv.hpp"
#include "botflow/dataset.hpp"
#include "botflow/error.hpp"
#include "botflow/packet.hpp"
#include "botflow/pcap.hpp"
#include "botflow/rng.hpp"

namespace botflow {

namespace {

using F = std::uint8_t;
constexpr F SYN = tcp_flag::syn, ACK = tcp_flag::ack, PSH = tcp_flag::psh, FIN = tcp_flag::fin,
            RST = tcp_flag::rst;

IpAddress v4(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d) {
    return IpAddress::v4((std::uint32_t{a} << 24) | (std::uint32_t{b} << 16) | (std::uint32_t{c} << 8) | d);
}

PacketBlueprint pkt(Direction dir, std::int64_t len, std::int64_t gap, F flags) {
    PacketBlueprint p;
    p.direction = dir;
    p.payload_len = len;
    p.gap_us = gap;
    p.tcp_flags = flags;
    return p;
}

constexpr auto FWD = Direction::forward;
constexpr auto BWD = Direction::backward;

class Builder {
public:
    Builder(std::uint64_t seed, int subnet) : rng_(seed), subnet_(static_cast<std::uint8_t>(subnet)) {}

    Rng& rng() { return rng_; }

    IpAddress client() { return v4(192, 168, subnet_, static_cast<std::uint8_t>(rng_.between(10, 60))); }
    IpAddress bot(int i) { return v4(192, 168, subnet_, static_cast<std::uint8_t>(100 + i)); }
    IpAddress server() {
        return v4(93, 184, static_cast<std::uint8_t>(rng_.between(1, 8)), static_cast<std::uint8_t>(rng_.between(1, 250)));
    }
    IpAddress resolver() { return v4(192, 168, subnet_, 1); }
    std::uint16_t ephemeral() { return static_cast<std::uint16_t>(rng_.between(32768, 60999)); }
    std::int64_t start() { return rng_.between(0, 900'000'000); }

    FlowBlueprint web() {
        FlowBlueprint f{client(), server(), ephemeral(), static_cast<std::uint16_t>(rng_.chance(0.7) ? 443 : 80),
                        ip_proto::tcp, start(), {}};
        const auto rtt = rng_.between(8'000, 90'000);
        f.packets.push_back(pkt(FWD, 0, 0, SYN));
        f.packets.push_back(pkt(BWD, 0, rtt, SYN | ACK));
        f.packets.push_back(pkt(FWD, 0, rtt / 10 + 50, ACK));
        const int exchanges = static_cast<int>(rng_.between(1, 4));
        for (int e = 0; e < exchanges; ++e) {
            // Think time between requests; sometimes long enough to open an idle period.
            const auto think = e == 0 ? 200 : (rng_.chance(0.25) ? rng_.between(6'000'000, 40'000'000)
                                                                 : rng_.between(50'000, 2'000'000));
            f.packets.push_back(pkt(FWD, rng_.between(180, 900), think, PSH | ACK));
            const int segments = static_cast<int>(rng_.between(2, 10));
            for (int s = 0; s < segments; ++s) {
                f.packets.push_back(pkt(BWD, rng_.between(700, 1460), s == 0 ? rtt : rng_.between(100, 3'000),
                                        s + 1 == segments ? PSH | ACK : ACK));
            }
            f.packets.push_back(pkt(FWD, 0, rng_.between(100, 2'000), ACK));
        }
        f.packets.push_back(pkt(FWD, 0, rng_.between(1'000, 500'000), FIN | ACK));
        f.packets.push_back(pkt(BWD, 0, rtt, FIN | ACK));
        f.packets.push_back(pkt(FWD, 0, rtt / 10 + 50, ACK));
        return f;
    }

    FlowBlueprint dns() {
        FlowBlueprint f{client(), resolver(), ephemeral(), 53, ip_proto::udp, start(), {}};
        f.packets.push_back(pkt(FWD, rng_.between(28, 70), 0, 0));
        f.packets.push_back(pkt(BWD, rng_.between(60, 480), rng_.between(2'000, 60'000), 0));
        return f;
    }

    FlowBlueprint http_flood(int bot_index, const IpAddress& victim) {
        FlowBlueprint f{bot(bot_index), victim, ephemeral(), 80, ip_proto::tcp, start(), {}};
        f.packets.push_back(pkt(FWD, 0, 0, SYN));
        f.packets.push_back(pkt(BWD, 0, rng_.between(500, 3'000), SYN | ACK));
        f.packets.push_back(pkt(FWD, 0, rng_.between(20, 200), ACK));
        const int reqs = static_cast<int>(rng_.between(3, 12));
        for (int r = 0; r < reqs; ++r) {
            f.packets.push_back(pkt(FWD, rng_.between(40, 120), rng_.between(100, 2'000), PSH | ACK));
            if (rng_.chance(0.3)) f.packets.push_back(pkt(BWD, 0, rng_.between(200, 2'000), ACK));
        }
        f.packets.push_back(pkt(FWD, 0, rng_.between(100, 1'000), RST | ACK));
        return f;
    }

    FlowBlueprint syn_probe(int bot_index, const IpAddress& victim, std::uint16_t port, bool answered) {
        FlowBlueprint f{bot(bot_index), victim, ephemeral(), port, ip_proto::tcp, start(), {}};
        f.packets.push_back(pkt(FWD, 0, 0, SYN));
        if (rng_.chance(0.5)) f.packets.push_back(pkt(FWD, 0, rng_.between(1'000'000, 3'000'000), SYN));
        if (answered) f.packets.push_back(pkt(BWD, 0, rng_.between(500, 80'000), RST | ACK));
        return f;
    }

    FlowBlueprint irc(int bot_index, const IpAddress& c2) {
        FlowBlueprint f{bot(bot_index), c2, ephemeral(), 6667, ip_proto::tcp, start(), {}};
        f.packets.push_back(pkt(FWD, 0, 0, SYN));
        f.packets.push_back(pkt(BWD, 0, rng_.between(20'000, 120'000), SYN | ACK));
        f.packets.push_back(pkt(FWD, 0, 300, ACK));
        const int beats = static_cast<int>(rng_.between(3, 9));
        const auto period = rng_.between(20'000'000, 90'000'000);
        for (int b = 0; b < beats; ++b) {
            // Periodic PING/PONG; an occasional silence longer than the flow
            // timeout splits the conversation into two flows.
            const auto gap = rng_.chance(0.1) ? rng_.between(130'000'000, 200'000'000) : period + rng_.between(-500'000, 500'000);
            f.packets.push_back(pkt(BWD, rng_.between(20, 60), b == 0 ? 1'000 : gap, PSH | ACK));
            f.packets.push_back(pkt(FWD, rng_.between(20, 60), rng_.between(1'000, 20'000), PSH | ACK));
        }
        return f;
    }

    FlowBlueprint udp_flood(int bot_index, const IpAddress& victim) {
        FlowBlueprint f{bot(bot_index), victim, ephemeral(), static_cast<std::uint16_t>(rng_.between(1, 65535)),
                        ip_proto::udp, start(), {}};
        const auto len = rng_.between(8, 64);
        const int n = static_cast<int>(rng_.between(5, 40));
        for (int i = 0; i < n; ++i) f.packets.push_back(pkt(FWD, len, i == 0 ? 0 : rng_.between(50, 400), 0));
        return f;
    }

private:
    Rng rng_;
    std::uint8_t subnet_;
};

LabelRule wildcard_source(const IpAddress& src, const std::string& label) {
    LabelRule r;
    r.src_ip = src;
    r.label = label;
    return r;
}

LabelRule exact(const FlowBlueprint& f, const std::string& label) {
    LabelRule r;
    r.src_ip = f.src_ip;
    r.src_port = f.src_port;
    r.dst_ip = f.dst_ip;
    r.dst_port = f.dst_port;
    r.protocol = f.protocol;
    r.label = label;
    return r;
}

}  // namespace

SyntheticDataset make_synthetic_dataset(AttackStyle style, std::size_t flows_per_class, std::uint64_t seed,
                                        int subnet) {
    Builder b(seed, subnet);
    auto& rng = b.rng();
    SyntheticDataset ds;
    constexpr int kBots = 8;
    const IpAddress victim = v4(203, 0, 113, static_cast<std::uint8_t>(10 + subnet));
    const std::string attack_label = style == AttackStyle::ddos ? "DDoS" : "Botnet";

    for (std::size_t i = 0; i < flows_per_class; ++i) {
        ds.flows.push_back(rng.chance(0.75) ? b.web() : b.dns());
        ds.truth.push_back(0);
    }
    for (std::size_t i = 0; i < flows_per_class; ++i) {
        const int bot = static_cast<int>(rng.below(kBots));
        switch (style) {
            case AttackStyle::ddos:
                ds.flows.push_back(rng.chance(0.7) ? b.http_flood(bot, victim) : b.syn_probe(bot, victim, 80, true));
                break;
            case AttackStyle::irc_c2:
                ds.flows.push_back(rng.chance(0.6) ? b.irc(bot, victim) : b.syn_probe(bot, b.server(), 445, rng.chance(0.5)));
                break;
            case AttackStyle::iot_scan:
                ds.flows.push_back(rng.chance(0.65)
                                       ? b.syn_probe(bot, b.server(), rng.chance(0.8) ? 23 : 2323, rng.chance(0.4))
                                       : b.udp_flood(bot, victim));
                break;
        }
        ds.truth.push_back(1);
    }

    // A handful of exact rules ahead of the wildcard ones, then one explicit
    // benign rule for the local resolver.
    for (std::size_t i = flows_per_class; i < flows_per_class + 5 && i < ds.flows.size(); ++i) {
        ds.rules.push_back(exact(ds.flows[i], attack_label));
    }
    for (int i = 0; i < kBots; ++i) ds.rules.push_back(wildcard_source(b.bot(i), attack_label));
    LabelRule dns_rule;
    dns_rule.dst_ip = b.resolver();
    dns_rule.dst_port = 53;
    dns_rule.protocol = ip_proto::udp;
    dns_rule.label = "Normal";
    ds.rules.push_back(dns_rule);
    return ds;
}

void write_rules_csv(const std::vector<LabelRule>& rules, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    csv::write_row(out, {"src_ip", "src_port", "dst_ip", "dst_port", "protocol", "label", "start_us", "end_us"});
    auto ip = [](const std::optional<IpAddress>& a) { return a ? a->to_string() : std::string("*"); };
    auto num = [](const auto& v) { return v ? std::to_string(*v) : std::string("*"); };
    for (const auto& r : rules) {
        csv::write_row(out, {ip(r.src_ip), num(r.src_port), ip(r.dst_ip), num(r.dst_port), num(r.protocol), r.label,
                             num(r.start_us), num(r.end_us)});
    }
}

std::filesystem::path write_synthetic_corpus(const std::filesystem::path& dir, const CorpusOptions& options) {
    namespace fs = std::filesystem;
    if (options.datasets == 0) throw ValidationError("corpus needs at least one dataset");
    fs::create_directories(dir);
    static constexpr AttackStyle kStyles[] = {AttackStyle::ddos, AttackStyle::irc_c2, AttackStyle::iot_scan};
    static constexpr const char* kNames[] = {"synthetic-ddos", "synthetic-c2", "synthetic-iot"};
    nlohmann::json cfg;
    cfg["manifests"] = nlohmann::json::array();
    for (std::size_t d = 0; d < options.datasets; ++d) {
        const auto style = kStyles[d % 3];
        const std::string name = std::string(kNames[d % 3]) + (d >= 3 ? "-" + std::to_string(d) : "");
        const auto sub = dir / name;
        fs::create_directories(sub);
        const auto ds = make_synthetic_dataset(style, options.flows_per_class, derive_seed(options.seed, d),
                                               static_cast<int>(d));
        const auto bytes = generate_synthetic_capture(ds.flows, derive_seed(options.seed, 100 + d));
        write_file(sub / "capture.pcap", bytes);
        write_rules_csv(ds.rules, sub / "rules.csv");
        DatasetManifest m;
        m.name = name;
        m.captures = {"capture.pcap"};
        m.rules = "rules.csv";
        m.default_label = "Normal";
        m.notes = "synthetic corpus, seed " + std::to_string(options.seed);
        write_manifest(m, sub / "manifest.txt");
        cfg["manifests"].push_back(name + "/manifest.txt");
    }
    cfg["output_dir"] = "out";
    cfg["seed"] = options.seed;
    cfg["split_ratio"] = 0.8;
    cfg["top_k"] = 10;
    cfg["threshold"] = 2;
    const auto path = dir / "config.json";
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << cfg.dump(2) << '\n';
    return path;
}

}  // namespace botflow
