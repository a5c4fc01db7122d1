#pragma once

#include "torapp/packet.hpp"

#include <optional>
#include <span>
#include <vector>

namespace torapp {

/// Orientation-free TCP 5-tuple; `low` sorts before `high`.
struct SessionKey {
    Endpoint low;
    Endpoint high;

    static SessionKey of(const PacketRecord& p);
    constexpr auto operator<=>(const SessionKey&) const = default;
};

/// Packets sharing one 5-tuple, oriented from the client's point of view.
/// Packets are time-ordered (ties in capture order) and every direction is
/// Outgoing iff the packet's source is `client`.
struct TcpSession {
    SessionKey key;
    Endpoint client;
    std::vector<PacketRecord> packets;
    bool fin_seen = false;

    Endpoint server() const { return client == key.low ? key.high : key.low; }
};

/// Group TCP packets into sessions, in order of first appearance.
///
/// The client is the sender of the first SYN without ACK, else the sender of
/// the chronologically first packet. A `client_hint` address overrides both
/// rules for any session with exactly one endpoint at that address.
std::vector<TcpSession> assemble_sessions(std::span<const PacketRecord> packets,
                                          std::optional<Ipv4> client_hint = std::nullopt);

/// Reassign every packet's direction relative to `session.client`.
void orient(TcpSession& session);

} // namespace torapp
