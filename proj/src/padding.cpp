#include "torapp/error.hpp"
#include "torapp/synth.hpp"

#include <algorithm>

namespace torapp {

std::string_view padding_mode_id(PaddingMode mode) {
    switch (mode) {
    case PaddingMode::None: return "none";
    case PaddingMode::Reduced: return "reduced";
    case PaddingMode::Full: return "full";
    }
    return "none";
}

PaddingMode parse_padding_mode(std::string_view id) {
    if (id == "none") return PaddingMode::None;
    if (id == "reduced") return PaddingMode::Reduced;
    if (id == "full") return PaddingMode::Full;
    throw PreconditionError("unknown padding mode '" + std::string(id) + "' (expected none, reduced or full)");
}

PaddingRange PaddingConfig::range() const {
    switch (mode) {
    case PaddingMode::Full: return full_range;
    case PaddingMode::Reduced: return reduced_range;
    case PaddingMode::None: break;
    }
    throw PreconditionError("padding mode 'none' has no timeout range");
}

double sample_padding_timeout(const PaddingConfig& config, Rng& rng) {
    const auto r = config.range();
    return std::uniform_real_distribution<double>(r.lo_s, r.hi_s)(rng);
}

std::vector<PacketRecord> inject_padding(std::span<const PacketRecord> packets, const PaddingConfig& config,
                                         Rng& rng) {
    std::vector<PacketRecord> out(packets.begin(), packets.end());
    if (config.mode == PaddingMode::None || packets.size() < 2) return out;

    // Orientation: the first packet that has one, else the first sender.
    Endpoint client = packets.front().src;
    Endpoint guard = packets.front().dst;
    for (const auto& p : packets) {
        if (p.direction == Direction::Outgoing) {
            client = p.src, guard = p.dst;
            break;
        }
        if (p.direction == Direction::Incoming) {
            client = p.dst, guard = p.src;
            break;
        }
    }

    auto padding_cell = [&](Timestamp at, bool from_client) {
        PacketRecord p;
        p.timestamp = at;
        p.src = from_client ? client : guard;
        p.dst = from_client ? guard : client;
        p.size_bytes = config.padding_cell_size;
        p.direction = from_client ? Direction::Outgoing : Direction::Incoming;
        return p;
    };
    auto timeout = [&] { return seconds_to_micros(sample_padding_timeout(config, rng)); };

    out.clear();
    out.reserve(packets.size() * 2);
    out.push_back(packets.front());
    Timestamp client_deadline = packets.front().timestamp + timeout();
    Timestamp guard_deadline = packets.front().timestamp + timeout();
    for (std::size_t i = 1; i < packets.size(); ++i) {
        const Timestamp next = packets[i].timestamp;
        while (std::min(client_deadline, guard_deadline) < next) {
            if (client_deadline <= guard_deadline) {
                out.push_back(padding_cell(client_deadline, true));
                client_deadline = client_deadline + timeout();
            } else {
                out.push_back(padding_cell(guard_deadline, false));
                guard_deadline = guard_deadline + timeout();
            }
        }
        out.push_back(packets[i]);
        client_deadline = next + timeout();
        guard_deadline = next + timeout();
    }
    return out;
}

TcpSession inject_padding(const TcpSession& session, const PaddingConfig& config, Rng& rng) {
    TcpSession out = session;
    out.packets = inject_padding(std::span<const PacketRecord>(session.packets), config, rng);
    return out;
}

} // namespace torapp
