#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace botflow {

/// IPv4 or IPv6 address. IPv4 is stored as an IPv4-mapped IPv6 address so
/// that ordering and hashing treat both families uniformly.
class IpAddress {
public:
    IpAddress() = default;

    static IpAddress v4(std::uint32_t host_order);
    static IpAddress v4(std::span<const std::uint8_t, 4> bytes);
    static IpAddress v6(std::span<const std::uint8_t, 16> bytes);

    /// Parses dotted-quad or RFC 4291 text. Returns nullopt on malformed input.
    static std::optional<IpAddress> parse(std::string_view text);

    bool is_v4() const noexcept;
    std::uint32_t v4_value() const noexcept;
    const std::array<std::uint8_t, 16>& bytes() const noexcept { return bytes_; }

    std::string to_string() const;

    auto operator<=>(const IpAddress&) const = default;
    bool operator==(const IpAddress&) const = default;

private:
    std::array<std::uint8_t, 16> bytes_{};
};

/// CIDR prefix, e.g. 10.0.0.0/8 or fc00::/7.
class IpPrefix {
public:
    IpPrefix(IpAddress network, int length);

    static std::optional<IpPrefix> parse(std::string_view text);

    bool contains(const IpAddress& addr) const noexcept;
    std::string to_string() const;

private:
    IpAddress network_;
    int length_ = 0;  // in bits of the 128-bit mapped form
    bool v4_ = false;
};

/// RFC 1918 IPv4 ranges plus the IPv6 unique-local block.
std::vector<IpPrefix> default_home_prefixes();

struct IpAddressHash {
    std::size_t operator()(const IpAddress& a) const noexcept;
};

}  // namespace botflow
