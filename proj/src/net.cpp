#include "botflow/net.hpp"

#include <arpa/inet.h>

#include <charconv>
#include <cstring>

namespace botflow {

namespace {
constexpr std::array<std::uint8_t, 12> kV4MappedPrefix = {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0xff, 0xff};
}

IpAddress IpAddress::v4(std::uint32_t host_order) {
    IpAddress a;
    std::memcpy(a.bytes_.data(), kV4MappedPrefix.data(), kV4MappedPrefix.size());
    a.bytes_[12] = static_cast<std::uint8_t>(host_order >> 24);
    a.bytes_[13] = static_cast<std::uint8_t>(host_order >> 16);
    a.bytes_[14] = static_cast<std::uint8_t>(host_order >> 8);
    a.bytes_[15] = static_cast<std::uint8_t>(host_order);
    return a;
}

IpAddress IpAddress::v4(std::span<const std::uint8_t, 4> bytes) {
    IpAddress a;
    std::memcpy(a.bytes_.data(), kV4MappedPrefix.data(), kV4MappedPrefix.size());
    std::memcpy(a.bytes_.data() + 12, bytes.data(), 4);
    return a;
}

IpAddress IpAddress::v6(std::span<const std::uint8_t, 16> bytes) {
    IpAddress a;
    std::memcpy(a.bytes_.data(), bytes.data(), 16);
    return a;
}

std::optional<IpAddress> IpAddress::parse(std::string_view text) {
    std::string s(text);
    std::uint8_t buf[16];
    if (s.find(':') == std::string::npos) {
        if (inet_pton(AF_INET, s.c_str(), buf) != 1) return std::nullopt;
        return v4(std::span<const std::uint8_t, 4>(buf, 4));
    }
    if (inet_pton(AF_INET6, s.c_str(), buf) != 1) return std::nullopt;
    return v6(std::span<const std::uint8_t, 16>(buf, 16));
}

bool IpAddress::is_v4() const noexcept {
    return std::memcmp(bytes_.data(), kV4MappedPrefix.data(), kV4MappedPrefix.size()) == 0;
}

std::uint32_t IpAddress::v4_value() const noexcept {
    return (std::uint32_t{bytes_[12]} << 24) | (std::uint32_t{bytes_[13]} << 16) |
           (std::uint32_t{bytes_[14]} << 8) | std::uint32_t{bytes_[15]};
}

std::string IpAddress::to_string() const {
    char buf[INET6_ADDRSTRLEN];
    if (is_v4()) {
        inet_ntop(AF_INET, bytes_.data() + 12, buf, sizeof buf);
    } else {
        inet_ntop(AF_INET6, bytes_.data(), buf, sizeof buf);
    }
    return buf;
}

IpPrefix::IpPrefix(IpAddress network, int length) : network_(network), v4_(network.is_v4()) {
    length_ = v4_ ? length + 96 : length;
}

std::optional<IpPrefix> IpPrefix::parse(std::string_view text) {
    const auto slash = text.find('/');
    if (slash == std::string_view::npos) {
        auto addr = IpAddress::parse(text);
        if (!addr) return std::nullopt;
        return IpPrefix(*addr, addr->is_v4() ? 32 : 128);
    }
    auto addr = IpAddress::parse(text.substr(0, slash));
    if (!addr) return std::nullopt;
    const auto len_text = text.substr(slash + 1);
    int len = -1;
    auto [ptr, ec] = std::from_chars(len_text.data(), len_text.data() + len_text.size(), len);
    if (ec != std::errc{} || ptr != len_text.data() + len_text.size()) return std::nullopt;
    if (len < 0 || len > (addr->is_v4() ? 32 : 128)) return std::nullopt;
    return IpPrefix(*addr, len);
}

bool IpPrefix::contains(const IpAddress& addr) const noexcept {
    if (addr.is_v4() != v4_) return false;
    const auto& a = addr.bytes();
    const auto& n = network_.bytes();
    int bits = length_;
    for (std::size_t i = 0; i < 16 && bits > 0; ++i, bits -= 8) {
        const std::uint8_t mask = bits >= 8 ? 0xff : static_cast<std::uint8_t>(0xff << (8 - bits));
        if ((a[i] & mask) != (n[i] & mask)) return false;
    }
    return true;
}

std::string IpPrefix::to_string() const {
    return network_.to_string() + "/" + std::to_string(v4_ ? length_ - 96 : length_);
}

std::vector<IpPrefix> default_home_prefixes() {
    std::vector<IpPrefix> out;
    for (const char* p : {"10.0.0.0/8", "172.16.0.0/12", "192.168.0.0/16", "fc00::/7"}) {
        out.push_back(*IpPrefix::parse(p));
    }
    return out;
}

std::size_t IpAddressHash::operator()(const IpAddress& a) const noexcept {
    // FNV-1a over the 16 bytes.
    std::uint64_t h = 1469598103934665603ull;
    for (auto b : a.bytes()) {
        h ^= b;
        h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
}

}  // namespace botflow
