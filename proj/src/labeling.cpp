#include "botflow/labeling.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "botflow/csv.hpp"
#include "botflow/error.hpp"

namespace botflow {

namespace {

bool is_wild(std::string_view s) { return s == "*" || s.empty(); }

template <typename Int>
std::optional<Int> to_int(std::string_view s) {
    Int v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

struct Tuple {
    const IpAddress& src_ip;
    std::uint16_t src_port;
    const IpAddress& dst_ip;
    std::uint16_t dst_port;
};

bool rule_matches(const LabelRule& r, const Tuple& t, std::uint8_t proto) {
    return (!r.src_ip || *r.src_ip == t.src_ip) && (!r.src_port || *r.src_port == t.src_port) &&
           (!r.dst_ip || *r.dst_ip == t.dst_ip) && (!r.dst_port || *r.dst_port == t.dst_port) &&
           (!r.protocol || *r.protocol == proto);
}

bool in_window(const LabelRule& r, std::int64_t ts) {
    return (!r.start_us || ts >= *r.start_us) && (!r.end_us || ts <= *r.end_us);
}

}  // namespace

std::vector<LabelRule> parse_rules(std::istream& in) {
    csv::Reader reader(in);
    auto header = reader.next();
    if (!header) throw SchemaError("src_ip", "rule file is empty: missing column 'src_ip'");
    std::vector<std::string> names;
    for (const auto& h : *header) names.emplace_back(csv::trim(h));
    auto find = [&](std::initializer_list<std::string_view> keys) -> std::optional<std::size_t> {
        for (auto k : keys) {
            auto it = std::find(names.begin(), names.end(), k);
            if (it != names.end()) return static_cast<std::size_t>(it - names.begin());
        }
        return std::nullopt;
    };
    auto require = [&](std::string_view key) {
        auto i = find({key});
        if (!i) throw SchemaError(std::string(key), "rule file: missing column '" + std::string(key) + "'");
        return *i;
    };
    const auto c_src = require("src_ip");
    const auto c_sport = require("src_port");
    const auto c_dst = require("dst_ip");
    const auto c_dport = require("dst_port");
    const auto c_proto = require("protocol");
    const auto c_label = require("label");
    const auto c_start = find({"start_us", "start"});
    const auto c_end = find({"end_us", "end"});

    std::vector<LabelRule> rules;
    while (auto rec = reader.next()) {
        const auto line = reader.line();
        if (rec->size() != names.size()) {
            throw ParseError(line, "expected " + std::to_string(names.size()) + " cells, got " +
                                       std::to_string(rec->size()));
        }
        auto cell = [&](std::size_t i) { return csv::trim((*rec)[i]); };
        LabelRule r;
        r.line = line;
        auto parse_ip = [&](std::size_t i) -> std::optional<IpAddress> {
            if (is_wild(cell(i))) return std::nullopt;
            auto ip = IpAddress::parse(cell(i));
            if (!ip) throw ParseError(line, "unparseable IP address '" + std::string(cell(i)) + "'");
            return ip;
        };
        auto parse_port = [&](std::size_t i) -> std::optional<std::uint16_t> {
            if (is_wild(cell(i))) return std::nullopt;
            auto p = to_int<std::uint16_t>(cell(i));
            if (!p) throw ParseError(line, "bad port '" + std::string(cell(i)) + "'");
            return p;
        };
        r.src_ip = parse_ip(c_src);
        r.dst_ip = parse_ip(c_dst);
        r.src_port = parse_port(c_sport);
        r.dst_port = parse_port(c_dport);
        if (!is_wild(cell(c_proto))) {
            auto p = to_int<unsigned>(cell(c_proto));
            if (!p || *p > 255) throw ParseError(line, "bad protocol '" + std::string(cell(c_proto)) + "'");
            r.protocol = static_cast<std::uint8_t>(*p);
        }
        r.label = std::string(cell(c_label));
        if (r.label.empty()) throw ParseError(line, "empty label");
        auto parse_time = [&](std::optional<std::size_t> c) -> std::optional<std::int64_t> {
            if (!c || is_wild(cell(*c))) return std::nullopt;
            auto t = to_int<std::int64_t>(cell(*c));
            if (!t) throw ParseError(line, "bad time bound '" + std::string(cell(*c)) + "'");
            return t;
        };
        r.start_us = parse_time(c_start);
        r.end_us = parse_time(c_end);
        if (r.start_us && r.end_us && *r.start_us > *r.end_us) {
            throw ParseError(line, "time window start is after its end");
        }
        rules.push_back(std::move(r));
    }
    return rules;
}

std::vector<LabelRule> parse_rules(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open rule file '" + path.string() + "'");
    try {
        return parse_rules(in);
    } catch (const ParseError& e) {
        throw ParseError(e.line(), path.string() + ": " + e.detail());
    }
}

LabelMatch match_flow(const FeatureVector& flow, std::span<const LabelRule> rules) {
    const Tuple fwd{flow.src_ip, flow.src_port, flow.dst_ip, flow.dst_port};
    const Tuple rev{flow.dst_ip, flow.dst_port, flow.src_ip, flow.src_port};
    std::optional<std::size_t> reversed, wildcard;
    for (std::size_t i = 0; i < rules.size(); ++i) {
        const auto& r = rules[i];
        if (!in_window(r, flow.start_ts_us)) continue;
        if (!r.has_wildcard()) {
            if (rule_matches(r, fwd, flow.protocol)) return {MatchTier::exact, i};
            if (!reversed && rule_matches(r, rev, flow.protocol)) reversed = i;
        } else if (!wildcard &&
                   (rule_matches(r, fwd, flow.protocol) || rule_matches(r, rev, flow.protocol))) {
            wildcard = i;
        }
    }
    if (reversed) return {MatchTier::reversed, *reversed};
    if (wildcard) return {MatchTier::wildcard, *wildcard};
    return {};
}

LabeledFlows label_flows(std::span<const FeatureVector> flows, std::span<const LabelRule> rules,
                         const std::string& default_label) {
    if (rules.empty()) throw ValidationError("labeling needs at least one rule");
    LabeledFlows out;
    out.labels.resize(flows.size());
    for (std::size_t i = 0; i < flows.size(); ++i) {
        const auto m = match_flow(flows[i], rules);
        switch (m.tier) {
            case MatchTier::exact: ++out.report.exact; break;
            case MatchTier::reversed: ++out.report.reversed; break;
            case MatchTier::wildcard: ++out.report.wildcard; break;
            case MatchTier::none: ++out.report.unmatched; break;
        }
        out.labels[i] = m.tier == MatchTier::none ? default_label : rules[m.rule].label;
        ++out.report.per_label[out.labels[i]];
    }
    return out;
}

}  // namespace botflow
