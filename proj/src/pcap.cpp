#include "torapp/pcap.hpp"

#include "torapp/error.hpp"

#include <fstream>
#include <iterator>

namespace torapp {
namespace {

constexpr std::uint32_t kMagicMicro = 0xA1B2C3D4;
constexpr std::uint32_t kMagicNano = 0xA1B23C4D;
constexpr std::size_t kGlobalHeaderSize = 24;
constexpr std::size_t kRecordHeaderSize = 16;
constexpr std::size_t kIpHeaderSize = 20;
constexpr std::size_t kTcpHeaderSize = 20;
constexpr std::uint8_t kProtoTcp = 6;

std::uint32_t bswap32(std::uint32_t v) {
    return (v >> 24) | ((v >> 8) & 0xff00) | ((v << 8) & 0xff0000) | (v << 24);
}

std::uint32_t load_le32(const std::uint8_t* p) {
    return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
           std::uint32_t(p[3]) << 24;
}

std::uint16_t load_be16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] << 8 | p[1]);
}

std::uint32_t load_be32(const std::uint8_t* p) {
    return std::uint32_t(p[0]) << 24 | std::uint32_t(p[1]) << 16 | std::uint32_t(p[2]) << 8 |
           std::uint32_t(p[3]);
}

void put_le16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_le32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void store_be16(std::uint8_t* p, std::uint16_t v) {
    p[0] = static_cast<std::uint8_t>(v >> 8);
    p[1] = static_cast<std::uint8_t>(v);
}

void store_be32(std::uint8_t* p, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(v >> (24 - 8 * i));
}

// RFC 1071 one's-complement sum over big-endian 16-bit words.
std::uint32_t ones_sum(const std::uint8_t* p, std::size_t n, std::uint32_t acc = 0) {
    for (std::size_t i = 0; i + 1 < n; i += 2) acc += load_be16(p + i);
    if (n % 2) acc += std::uint32_t(p[n - 1]) << 8;
    return acc;
}

std::uint16_t fold_checksum(std::uint32_t acc) {
    while (acc >> 16) acc = (acc & 0xffff) + (acc >> 16);
    return static_cast<std::uint16_t>(~acc);
}

enum class L3 { Ipv4, Other, Truncated };

// Locate the IP datagram inside a link-layer frame.
L3 network_offset(LinkType link, const std::uint8_t* frame, std::size_t len, std::size_t& off) {
    switch (link) {
    case LinkType::RawIp:
        off = 0;
        if (len < 1) return L3::Truncated;
        return (frame[0] >> 4) == 4 ? L3::Ipv4 : L3::Other;
    case LinkType::Ethernet: {
        off = 14;
        if (len < off) return L3::Truncated;
        std::uint16_t ethertype = load_be16(frame + 12);
        while (ethertype == 0x8100 || ethertype == 0x88a8) {
            off += 4;
            if (len < off) return L3::Truncated;
            ethertype = load_be16(frame + off - 2);
        }
        return ethertype == 0x0800 ? L3::Ipv4 : L3::Other;
    }
    case LinkType::LinuxSll:
        off = 16;
        if (len < off) return L3::Truncated;
        return load_be16(frame + 14) == 0x0800 ? L3::Ipv4 : L3::Other;
    }
    return L3::Other;
}

} // namespace

PcapContents parse_pcap(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kGlobalHeaderSize)
        throw ParseError("truncated PCAP global header", bytes.size());

    const std::uint32_t raw_magic = load_le32(bytes.data());
    bool swapped = false;
    bool nanos = false;
    if (raw_magic == kMagicMicro) {
    } else if (raw_magic == bswap32(kMagicMicro)) {
        swapped = true;
    } else if (raw_magic == kMagicNano) {
        nanos = true;
    } else if (raw_magic == bswap32(kMagicNano)) {
        swapped = nanos = true;
    } else {
        throw FormatError("unsupported capture format: bad PCAP magic");
    }
    auto u32 = [&](std::size_t off) {
        std::uint32_t v = load_le32(bytes.data() + off);
        return swapped ? bswap32(v) : v;
    };

    PcapContents out;
    const std::uint32_t network = u32(20);
    if (network != 1 && network != 101 && network != 113)
        throw FormatError("unsupported PCAP link type " + std::to_string(network));
    out.link_type = static_cast<LinkType>(network);

    std::size_t pos = kGlobalHeaderSize;
    while (pos < bytes.size()) {
        if (bytes.size() - pos < kRecordHeaderSize)
            throw ParseError("truncated PCAP record header", pos);
        const std::uint32_t ts_sec = u32(pos);
        const std::uint32_t ts_frac = u32(pos + 4);
        const std::uint32_t incl_len = u32(pos + 8);
        const std::size_t data_off = pos + kRecordHeaderSize;
        if (bytes.size() - data_off < incl_len)
            throw ParseError("truncated PCAP record (" + std::to_string(incl_len) + " bytes declared)", pos);
        const std::uint8_t* frame = bytes.data() + data_off;
        pos = data_off + incl_len;

        std::size_t ip_off = 0;
        switch (network_offset(out.link_type, frame, incl_len, ip_off)) {
        case L3::Other: ++out.skipped_non_ipv4; continue;
        case L3::Truncated: ++out.skipped_malformed; continue;
        case L3::Ipv4: break;
        }
        const std::uint8_t* ip = frame + ip_off;
        const std::size_t avail = incl_len - ip_off;
        if (avail < kIpHeaderSize || (ip[0] >> 4) != 4) {
            ++out.skipped_malformed;
            continue;
        }
        if (ip[9] != kProtoTcp) {
            ++out.skipped_non_tcp;
            continue;
        }
        const std::size_t ihl = std::size_t(ip[0] & 0x0f) * 4;
        const std::uint16_t total_len = load_be16(ip + 2);
        const std::uint16_t frag_off = load_be16(ip + 6) & 0x1fff;
        if (ihl < kIpHeaderSize || frag_off != 0 || avail < ihl + kTcpHeaderSize ||
            total_len < ihl + kTcpHeaderSize) {
            ++out.skipped_malformed;
            continue;
        }
        const std::uint8_t* tcp = ip + ihl;

        PacketRecord rec;
        const std::int64_t frac_us = nanos ? ts_frac / 1000 : ts_frac;
        rec.timestamp = Timestamp(std::int64_t(ts_sec) * 1'000'000 + frac_us);
        rec.src = Endpoint{Ipv4{load_be32(ip + 12)}, load_be16(tcp)};
        rec.dst = Endpoint{Ipv4{load_be32(ip + 16)}, load_be16(tcp + 2)};
        rec.size_bytes = total_len;
        rec.tcp_flags = TcpFlags(tcp[13]);
        out.packets.push_back(rec);
    }
    return out;
}

PcapContents read_pcap(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open capture '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("error reading capture '" + path.string() + "'");
    return parse_pcap(bytes);
}

std::vector<std::uint8_t> serialize_pcap(std::span<const PacketRecord> packets) {
    std::size_t total = kGlobalHeaderSize;
    for (std::size_t i = 0; i < packets.size(); ++i) {
        const auto& p = packets[i];
        if (p.timestamp.micros() < 0)
            throw PreconditionError("packet " + std::to_string(i) + " has a negative timestamp");
        if (i > 0 && p.timestamp < packets[i - 1].timestamp)
            throw PreconditionError("packets are not time-ordered at index " + std::to_string(i));
        if (p.size_bytes < PacketRecord::kMinSize || p.size_bytes > PacketRecord::kMaxSize)
            throw PreconditionError("packet " + std::to_string(i) + " has size " +
                                    std::to_string(p.size_bytes) + " outside [40, 65535]");
        total += kRecordHeaderSize + p.size_bytes;
    }

    std::vector<std::uint8_t> out;
    out.reserve(total);
    put_le32(out, kMagicMicro);
    put_le16(out, 2);
    put_le16(out, 4);
    put_le32(out, 0); // thiszone
    put_le32(out, 0); // sigfigs
    put_le32(out, PacketRecord::kMaxSize);
    put_le32(out, static_cast<std::uint32_t>(LinkType::RawIp));

    for (const auto& p : packets) {
        const auto us = p.timestamp.micros();
        put_le32(out, static_cast<std::uint32_t>(us / 1'000'000));
        put_le32(out, static_cast<std::uint32_t>(us % 1'000'000));
        put_le32(out, p.size_bytes);
        put_le32(out, p.size_bytes);

        const std::size_t base = out.size();
        out.resize(base + p.size_bytes, 0);
        std::uint8_t* ip = out.data() + base;
        ip[0] = 0x45;
        store_be16(ip + 2, static_cast<std::uint16_t>(p.size_bytes));
        store_be16(ip + 6, 0x4000); // DF
        ip[8] = 64;
        ip[9] = kProtoTcp;
        store_be32(ip + 12, p.src.addr.value);
        store_be32(ip + 16, p.dst.addr.value);
        store_be16(ip + 10, fold_checksum(ones_sum(ip, kIpHeaderSize)));

        std::uint8_t* tcp = ip + kIpHeaderSize;
        store_be16(tcp, p.src.port);
        store_be16(tcp + 2, p.dst.port);
        tcp[12] = 5 << 4;
        tcp[13] = p.tcp_flags.bits();
        store_be16(tcp + 14, 0xffff);

        // Pseudo-header sum; the zero-filled payload adds nothing.
        const std::uint32_t seg_len = p.size_bytes - kIpHeaderSize;
        std::uint32_t acc = ones_sum(ip + 12, 8);
        acc += kProtoTcp + seg_len;
        acc = ones_sum(tcp, kTcpHeaderSize, acc);
        store_be16(tcp + 16, fold_checksum(acc));
    }
    return out;
}

void write_pcap(std::span<const PacketRecord> packets, const std::filesystem::path& path) {
    const auto bytes = serialize_pcap(packets);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create capture '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("error writing capture '" + path.string() + "'");
}

} // namespace torapp
