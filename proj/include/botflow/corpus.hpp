#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "botflow/labeling.hpp"
#include "botflow/synth.hpp"

namespace botflow {

/// Flavour of attack traffic in a synthetic dataset.
enum class AttackStyle {
    ddos,       // short HTTP floods and half-open SYNs against one victim
    irc_c2,     // long-lived, periodic command-and-control chatter
    iot_scan,   // telnet scanning and small UDP floods from many bots
};

struct SyntheticDataset {
    std::vector<FlowBlueprint> flows;
    std::vector<LabelRule> rules;
    std::vector<int> truth;  // per blueprint: 1 = attack
};

/// Builds a labeled mix of benign traffic (web, DNS) and one attack style.
/// Attack flows originate from a small set of bot addresses; the rules label
/// them with wildcard source-address rules plus a few exact 5-tuple rules.
SyntheticDataset make_synthetic_dataset(AttackStyle style, std::size_t flows_per_class, std::uint64_t seed,
                                        int subnet = 0);

struct CorpusOptions {
    std::size_t datasets = 3;
    std::size_t flows_per_class = 150;
    std::uint64_t seed = 1;
};

/// Writes <dir>/<name>/{capture.pcap, rules.csv, manifest.txt} for each dataset
/// plus <dir>/config.json pointing at them. Returns the config path.
std::filesystem::path write_synthetic_corpus(const std::filesystem::path& dir, const CorpusOptions& options);

void write_rules_csv(const std::vector<LabelRule>& rules, const std::filesystem::path& path);

}  // namespace botflow
