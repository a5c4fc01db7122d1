#pragma once

#include "torapp/packet.hpp"
#include "torapp/session.hpp"

#include <optional>
#include <string>
#include <vector>

namespace torapp {

/// Flow window length (flow timeout) and the idle-gap threshold used for
/// active/idle segmentation (activity timeout). Both in seconds.
struct FlowConfig {
    double flow_timeout_s = 10.0;
    double activity_timeout_s = 2.0;

    Micros flow_timeout() const { return seconds_to_micros(flow_timeout_s); }
    Micros activity_timeout() const { return seconds_to_micros(activity_timeout_s); }

    /// Throws PreconditionError unless 0 < activity < flow timeout.
    void validate() const;
};

/// A slice of one session falling in a single flow-timeout window.
struct Flow {
    std::vector<PacketRecord> packets; // non-empty, time-ordered
    std::optional<std::string> label;
    std::string session_ref;

    Timestamp start() const { return packets.front().timestamp; }
    Timestamp end() const { return packets.back().timestamp; }
    Micros duration() const { return end() - start(); }
};

struct FlowSplit {
    std::vector<Flow> flows;
    std::size_t discarded = 0; // packets after the terminating FIN/RST window
};

/// Cut a session into windows [t0 + i*T, t0 + (i+1)*T) anchored at its first
/// packet. Empty windows produce nothing. The window holding the first FIN or
/// RST is the last one emitted; later packets are discarded.
FlowSplit split_flows(const TcpSession& session, const FlowConfig& config,
                      const std::string& session_ref = {});

/// Set `label` on every flow. Throws PreconditionError on an empty label or
/// when a flow already carries a different label.
std::vector<Flow> label_flows(std::vector<Flow> flows, const std::string& label);

/// Labels end up as CSV fields and whitespace-separated tokens, so they must
/// be non-empty and free of separators.
bool is_valid_label(const std::string& label);

} // namespace torapp
