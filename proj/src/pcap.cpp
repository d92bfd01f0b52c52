#include "botflow/pcap.hpp"

#include <bit>
#include <cstring>

#include "botflow/error.hpp"

namespace botflow {

namespace {

constexpr std::uint32_t kMagicMicro = 0xa1b2c3d4;
constexpr std::uint32_t kMagicNano = 0xa1b23c4d;
// Records larger than this cannot come from a sane capture; the stream is
// treated as corrupt from that point on.
constexpr std::uint32_t kMaxRecordLen = 256u * 1024u * 1024u;

std::uint32_t bswap32(std::uint32_t v) {
    return ((v & 0xff) << 24) | ((v & 0xff00) << 8) | ((v >> 8) & 0xff00) | (v >> 24);
}
std::uint16_t bswap16(std::uint16_t v) { return static_cast<std::uint16_t>((v << 8) | (v >> 8)); }

std::uint32_t load32(const std::uint8_t* p, bool swapped) {
    std::uint32_t v;
    std::memcpy(&v, p, 4);
    return swapped ? bswap32(v) : v;
}
std::uint16_t load16(const std::uint8_t* p, bool swapped) {
    std::uint16_t v;
    std::memcpy(&v, p, 2);
    return swapped ? bswap16(v) : v;
}

}  // namespace

PcapReader::PcapReader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open capture '" + path.string() + "'");
    std::uint8_t hdr[24];
    in_.read(reinterpret_cast<char*>(hdr), sizeof hdr);
    if (in_.gcount() < 4) throw FormatError("'" + path.string() + "': file too short for a pcap header");
    std::uint32_t magic;
    std::memcpy(&magic, hdr, 4);
    if (magic == kMagicMicro || magic == kMagicNano) {
        header_.swapped = false;
    } else if (bswap32(magic) == kMagicMicro || bswap32(magic) == kMagicNano) {
        header_.swapped = true;
        magic = bswap32(magic);
    } else {
        throw FormatError("'" + path.string() + "': not a classic pcap file (bad magic)");
    }
    if (in_.gcount() < static_cast<std::streamsize>(sizeof hdr)) {
        throw FormatError("'" + path.string() + "': truncated pcap header");
    }
    header_.resolution = magic == kMagicNano ? TimestampResolution::nano : TimestampResolution::micro;
    header_.version_major = load16(hdr + 4, header_.swapped);
    header_.version_minor = load16(hdr + 6, header_.swapped);
    header_.snaplen = load32(hdr + 16, header_.swapped);
    header_.link_type = load32(hdr + 20, header_.swapped) & 0x0fffffff;  // upper bits: FCS info
}

std::optional<PcapFrame> PcapReader::next() {
    if (done_) return std::nullopt;
    std::uint8_t rec[16];
    in_.read(reinterpret_cast<char*>(rec), sizeof rec);
    const auto got = in_.gcount();
    if (got == 0) {
        done_ = true;
        return std::nullopt;
    }
    if (got < static_cast<std::streamsize>(sizeof rec)) {
        ++truncated_;
        done_ = true;
        return std::nullopt;
    }
    const bool sw = header_.swapped;
    const std::uint32_t sec = load32(rec, sw);
    const std::uint32_t frac = load32(rec + 4, sw);
    const std::uint32_t incl = load32(rec + 8, sw);
    PcapFrame frame;
    frame.orig_len = load32(rec + 12, sw);
    if (incl > kMaxRecordLen) {
        ++truncated_;
        done_ = true;
        return std::nullopt;
    }
    const std::int64_t sub_us = header_.resolution == TimestampResolution::nano
                                    ? static_cast<std::int64_t>(frac / 1000)
                                    : static_cast<std::int64_t>(frac);
    frame.timestamp_us = static_cast<std::int64_t>(sec) * 1'000'000 + sub_us;
    frame.data.resize(incl);
    in_.read(reinterpret_cast<char*>(frame.data.data()), incl);
    if (in_.gcount() < static_cast<std::streamsize>(incl)) {
        ++truncated_;
        done_ = true;
        return std::nullopt;
    }
    return frame;
}

PcapWriter::PcapWriter(std::uint32_t link_type, TimestampResolution res, bool swapped,
                       std::uint32_t snaplen)
    : res_(res), swapped_(swapped) {
    put32(res == TimestampResolution::nano ? kMagicNano : kMagicMicro);
    put16(2);
    put16(4);
    put32(0);  // thiszone
    put32(0);  // sigfigs
    put32(snaplen);
    put32(link_type);
}

void PcapWriter::put32(std::uint32_t v) {
    if (swapped_) v = bswap32(v);
    std::uint8_t b[4];
    std::memcpy(b, &v, 4);
    out_.insert(out_.end(), b, b + 4);
}

void PcapWriter::put16(std::uint16_t v) {
    if (swapped_) v = bswap16(v);
    std::uint8_t b[2];
    std::memcpy(b, &v, 2);
    out_.insert(out_.end(), b, b + 2);
}

void PcapWriter::write(std::int64_t timestamp_us, std::span<const std::uint8_t> frame) {
    const auto sec = static_cast<std::uint32_t>(timestamp_us / 1'000'000);
    const auto us = static_cast<std::uint32_t>(timestamp_us % 1'000'000);
    put32(sec);
    put32(res_ == TimestampResolution::nano ? us * 1000 : us);
    put32(static_cast<std::uint32_t>(frame.size()));
    put32(static_cast<std::uint32_t>(frame.size()));
    out_.insert(out_.end(), frame.begin(), frame.end());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace botflow
