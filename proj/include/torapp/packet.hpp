#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <string>

namespace torapp {

/// Capture time with microsecond resolution, stored as an integer count so
/// that arithmetic on gaps and windows is exact.
class Timestamp {
public:
    constexpr Timestamp() = default;
    constexpr explicit Timestamp(std::int64_t micros) : micros_(micros) {}

    static Timestamp from_seconds(double s);

    constexpr std::int64_t micros() const { return micros_; }
    constexpr double seconds() const { return static_cast<double>(micros_) * 1e-6; }

    constexpr auto operator<=>(const Timestamp&) const = default;

private:
    std::int64_t micros_ = 0;
};

/// Duration in whole microseconds.
using Micros = std::int64_t;

constexpr Micros operator-(Timestamp a, Timestamp b) { return a.micros() - b.micros(); }
constexpr Timestamp operator+(Timestamp a, Micros d) { return Timestamp(a.micros() + d); }

Micros seconds_to_micros(double s);
constexpr double micros_to_seconds(Micros m) { return static_cast<double>(m) * 1e-6; }

/// IPv4 address in host byte order.
struct Ipv4 {
    std::uint32_t value = 0;

    static Ipv4 parse(const std::string& dotted);
    std::string to_string() const;

    constexpr auto operator<=>(const Ipv4&) const = default;
};

struct Endpoint {
    Ipv4 addr;
    std::uint16_t port = 0;

    std::string to_string() const;
    constexpr auto operator<=>(const Endpoint&) const = default;
};

/// TCP control bits, valued as on the wire (byte 13 of the TCP header).
enum class TcpFlag : std::uint8_t {
    Fin = 0x01,
    Syn = 0x02,
    Rst = 0x04,
    Psh = 0x08,
    Ack = 0x10,
    Urg = 0x20,
};

class TcpFlags {
public:
    static constexpr std::uint8_t kMask = 0x3f;

    constexpr TcpFlags() = default;
    constexpr explicit TcpFlags(std::uint8_t bits) : bits_(bits & kMask) {}
    constexpr TcpFlags(std::initializer_list<TcpFlag> flags) {
        for (auto f : flags) bits_ |= static_cast<std::uint8_t>(f);
    }

    constexpr bool has(TcpFlag f) const { return (bits_ & static_cast<std::uint8_t>(f)) != 0; }
    constexpr std::uint8_t bits() const { return bits_; }
    constexpr bool empty() const { return bits_ == 0; }

    constexpr bool operator==(const TcpFlags&) const = default;

private:
    std::uint8_t bits_ = 0;
};

enum class Direction : std::uint8_t { Unassigned, Outgoing, Incoming };

/// One captured TCP/IPv4 packet.
struct PacketRecord {
    static constexpr std::uint32_t kMinSize = 40;
    static constexpr std::uint32_t kMaxSize = 65535;

    Timestamp timestamp;
    Endpoint src;
    Endpoint dst;
    std::uint32_t size_bytes = kMinSize; // IP total length
    TcpFlags tcp_flags;
    Direction direction = Direction::Unassigned;

    bool operator==(const PacketRecord&) const = default;
};

} // namespace torapp
