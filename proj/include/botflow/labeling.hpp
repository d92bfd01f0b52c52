#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "botflow/features.hpp"
#include "botflow/net.hpp"

namespace botflow {

/// One ground-truth statement. Empty optionals are wildcards ("*").
struct LabelRule {
    std::optional<IpAddress> src_ip;
    std::optional<std::uint16_t> src_port;
    std::optional<IpAddress> dst_ip;
    std::optional<std::uint16_t> dst_port;
    std::optional<std::uint8_t> protocol;
    std::string label;
    std::optional<std::int64_t> start_us;  // window on the flow start time, inclusive
    std::optional<std::int64_t> end_us;
    std::size_t line = 0;                  // source line, for diagnostics

    bool has_wildcard() const noexcept {
        return !src_ip || !src_port || !dst_ip || !dst_port || !protocol;
    }
};

/// Rule CSV with header columns src_ip, src_port, dst_ip, dst_port, protocol,
/// label and optionally start_us/end_us (or start/end), in any order.
std::vector<LabelRule> parse_rules(std::istream& in);
std::vector<LabelRule> parse_rules(const std::filesystem::path& path);

enum class MatchTier { exact, reversed, wildcard, none };

struct LabelMatch {
    MatchTier tier = MatchTier::none;
    std::size_t rule = 0;  // index into the rule list when tier != none
};

/// Precedence: fully specified rule in the flow's orientation, then fully
/// specified rule in the reverse orientation, then any wildcard rule (either
/// orientation). File order decides within a tier.
LabelMatch match_flow(const FeatureVector& flow, std::span<const LabelRule> rules);

struct LabelReport {
    std::map<std::string, std::size_t> per_label;
    std::size_t unmatched = 0;
    std::size_t exact = 0;
    std::size_t reversed = 0;
    std::size_t wildcard = 0;
};

struct LabeledFlows {
    std::vector<std::string> labels;  // parallel to the input flows
    LabelReport report;
};

/// Throws ValidationError when `rules` is empty.
LabeledFlows label_flows(std::span<const FeatureVector> flows, std::span<const LabelRule> rules,
                         const std::string& default_label = "Normal");

/// 0 for the normal label, 1 for anything else.
inline int binary_label(const std::string& label, const std::string& normal = "Normal") {
    return label == normal ? 0 : 1;
}

}  // namespace botflow
