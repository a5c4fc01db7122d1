#pragma once

#include "torapp/packet.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace torapp {

enum class LinkType : std::uint32_t {
    Ethernet = 1,
    RawIp = 101,
    LinuxSll = 113,
};

/// Packets recovered from a capture plus tallies of what was dropped.
struct PcapContents {
    LinkType link_type = LinkType::RawIp;
    std::vector<PacketRecord> packets;
    std::size_t skipped_non_ipv4 = 0;
    std::size_t skipped_non_tcp = 0;
    std::size_t skipped_malformed = 0; // snap-truncated headers, non-first fragments

    std::size_t skipped() const { return skipped_non_ipv4 + skipped_non_tcp + skipped_malformed; }
};

/// Parse a classic PCAP image. Accepts both byte orders and the nanosecond
/// magic (timestamps are truncated to microseconds). Only TCP over IPv4 is
/// returned; every record gets Direction::Unassigned.
PcapContents parse_pcap(std::span<const std::uint8_t> bytes);
PcapContents read_pcap(const std::filesystem::path& path);

/// Serialize as little-endian classic PCAP, Raw-IP link type, one minimal
/// IPv4+TCP header per record, zero payload up to size_bytes. Direction is
/// not stored on the wire.
std::vector<std::uint8_t> serialize_pcap(std::span<const PacketRecord> packets);
void write_pcap(std::span<const PacketRecord> packets, const std::filesystem::path& path);

} // namespace torapp
