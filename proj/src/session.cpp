#include "torapp/session.hpp"

#include <algorithm>
#include <map>

namespace torapp {

SessionKey SessionKey::of(const PacketRecord& p) {
    return p.src < p.dst ? SessionKey{p.src, p.dst} : SessionKey{p.dst, p.src};
}

void orient(TcpSession& session) {
    for (auto& p : session.packets)
        p.direction = p.src == session.client ? Direction::Outgoing : Direction::Incoming;
}

std::vector<TcpSession> assemble_sessions(std::span<const PacketRecord> packets,
                                          std::optional<Ipv4> client_hint) {
    std::vector<TcpSession> sessions;
    std::map<SessionKey, std::size_t> index;
    for (const auto& p : packets) {
        const auto key = SessionKey::of(p);
        auto [it, inserted] = index.try_emplace(key, sessions.size());
        if (inserted) sessions.push_back(TcpSession{key, {}, {}, false});
        sessions[it->second].packets.push_back(p);
    }

    for (auto& s : sessions) {
        std::stable_sort(s.packets.begin(), s.packets.end(),
                         [](const PacketRecord& a, const PacketRecord& b) {
                             return a.timestamp < b.timestamp;
                         });

        const bool low_hinted = client_hint && s.key.low.addr == *client_hint;
        const bool high_hinted = client_hint && s.key.high.addr == *client_hint;
        if (low_hinted != high_hinted) {
            s.client = low_hinted ? s.key.low : s.key.high;
        } else {
            auto syn = std::find_if(s.packets.begin(), s.packets.end(), [](const PacketRecord& p) {
                return p.tcp_flags.has(TcpFlag::Syn) && !p.tcp_flags.has(TcpFlag::Ack);
            });
            s.client = syn != s.packets.end() ? syn->src : s.packets.front().src;
        }

        orient(s);
        s.fin_seen = std::any_of(s.packets.begin(), s.packets.end(), [](const PacketRecord& p) {
            return p.tcp_flags.has(TcpFlag::Fin);
        });
    }
    return sessions;
}

} // namespace torapp
