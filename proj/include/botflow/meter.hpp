#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "botflow/features.hpp"
#include "botflow/flow.hpp"
#include "botflow/parallel.hpp"

namespace botflow {

struct IngestStats {
    std::uint64_t frames = 0;             // records read from the file
    std::uint64_t packets = 0;            // frames attributed to a flow
    std::uint64_t skipped_non_ip = 0;
    std::uint64_t skipped_protocol = 0;   // IP but not TCP/UDP/ICMP
    std::uint64_t skipped_truncated = 0;  // undecodable or EOF-truncated records
    std::uint64_t flows = 0;

    std::uint64_t skipped() const noexcept {
        return skipped_non_ip + skipped_protocol + skipped_truncated;
    }
};

struct IngestResult {
    std::vector<FeatureVector> flows;  // ordered by flow creation
    IngestStats stats;
};

/// Meters one classic pcap file into finalized flow feature vectors.
IngestResult ingest_capture(const std::filesystem::path& path, const MeterConfig& config);

/// Meters an already-decoded packet sequence (file order).
std::vector<FeatureVector> meter_packets(std::span<const PacketRecord> packets,
                                         const MeterConfig& config);

/// Meters several captures with independent flow tables; results keep input order.
std::vector<IngestResult> ingest_captures(std::span<const std::filesystem::path> paths,
                                          const MeterConfig& config, Exec exec = Exec::parallel);

/// Flow CSV: identity columns, then the 65 canonical feature columns, then an
/// optional trailing "Label" column when `labels` is non-empty.
void write_flow_csv(std::ostream& out, std::span<const FeatureVector> flows,
                    std::span<const std::string> labels = {});
void write_flow_csv(const std::filesystem::path& path, std::span<const FeatureVector> flows,
                    std::span<const std::string> labels = {});

struct FlowCsv {
    std::vector<FeatureVector> flows;
    std::vector<std::string> labels;  // empty when the file had no Label column
};

/// Reads a file produced by write_flow_csv. Headers are alias-normalized.
FlowCsv read_flow_csv(const std::filesystem::path& path);

}  // namespace botflow
