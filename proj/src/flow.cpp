#include "torapp/flow.hpp"

#include "torapp/error.hpp"

#include <algorithm>

namespace torapp {

void FlowConfig::validate() const {
    if (!(flow_timeout_s > 0) || !(activity_timeout_s > 0))
        throw PreconditionError("flow and activity timeouts must be positive");
    if (!(activity_timeout_s < flow_timeout_s))
        throw PreconditionError("activity timeout must be shorter than the flow timeout");
    if (flow_timeout() <= 0 || activity_timeout() <= 0)
        throw PreconditionError("timeouts must be at least one microsecond");
}

FlowSplit split_flows(const TcpSession& session, const FlowConfig& config,
                      const std::string& session_ref) {
    FlowSplit out;
    if (session.packets.empty()) return out;

    const Micros window = config.flow_timeout();
    if (window <= 0) throw PreconditionError("flow timeout must be positive");
    const Timestamp t0 = session.packets.front().timestamp;

    std::optional<std::int64_t> current;
    std::optional<std::int64_t> last_window;
    for (const auto& p : session.packets) {
        const std::int64_t w = (p.timestamp - t0) / window;
        if (last_window && w > *last_window) {
            ++out.discarded;
            continue;
        }
        if (current != w) {
            out.flows.push_back(Flow{{}, std::nullopt, session_ref});
            current = w;
        }
        out.flows.back().packets.push_back(p);
        if (!last_window && (p.tcp_flags.has(TcpFlag::Fin) || p.tcp_flags.has(TcpFlag::Rst)))
            last_window = w;
    }
    return out;
}

bool is_valid_label(const std::string& label) {
    return !label.empty() && std::none_of(label.begin(), label.end(), [](unsigned char c) {
        return c == ',' || c <= ' ' || c == 0x7f;
    });
}

std::vector<Flow> label_flows(std::vector<Flow> flows, const std::string& label) {
    if (!is_valid_label(label))
        throw PreconditionError("invalid class label '" + label + "'");
    for (auto& f : flows) {
        if (f.label && *f.label != label)
            throw PreconditionError("flow from '" + f.session_ref + "' already labeled '" +
                                    *f.label + "', refusing to relabel as '" + label + "'");
        f.label = label;
    }
    return flows;
}

} // namespace torapp
