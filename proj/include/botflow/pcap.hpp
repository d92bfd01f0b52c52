#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace botflow {

enum class TimestampResolution { micro, nano };

struct PcapHeader {
    bool swapped = false;  // file byte order differs from host
    TimestampResolution resolution = TimestampResolution::micro;
    std::uint16_t version_major = 2;
    std::uint16_t version_minor = 4;
    std::uint32_t snaplen = 65535;
    std::uint32_t link_type = 1;
};

struct PcapFrame {
    std::int64_t timestamp_us = 0;
    std::uint32_t orig_len = 0;
    std::vector<std::uint8_t> data;
};

/// Streaming reader for classic (libpcap 2.4) capture files. Both byte orders
/// and the microsecond / nanosecond magic variants are accepted; pcapng is not.
class PcapReader {
public:
    /// Throws IoError if the file cannot be opened, FormatError on a bad magic.
    explicit PcapReader(const std::filesystem::path& path);

    const PcapHeader& header() const noexcept { return header_; }

    /// Next frame, or nullopt at end of file. A record whose header or body is
    /// cut short by EOF ends the stream and bumps truncated_records().
    std::optional<PcapFrame> next();

    std::uint64_t truncated_records() const noexcept { return truncated_; }

private:
    std::ifstream in_;
    PcapHeader header_;
    std::uint64_t truncated_ = 0;
    bool done_ = false;
};

/// Writes a classic pcap stream (host byte order unless `swapped`).
class PcapWriter {
public:
    explicit PcapWriter(std::uint32_t link_type,
                        TimestampResolution res = TimestampResolution::micro,
                        bool swapped = false, std::uint32_t snaplen = 65535);

    void write(std::int64_t timestamp_us, std::span<const std::uint8_t> frame);

    const std::vector<std::uint8_t>& bytes() const noexcept { return out_; }
    std::vector<std::uint8_t> release() { return std::move(out_); }

private:
    void put32(std::uint32_t v);
    void put16(std::uint16_t v);

    std::vector<std::uint8_t> out_;
    TimestampResolution res_;
    bool swapped_;
};

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace botflow
