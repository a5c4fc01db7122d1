#include "torapp/features.hpp"

#include "torapp/error.hpp"

#include <algorithm>
#include <numeric>

namespace torapp {
namespace {

void put_summary(FeatureArray<double>& v, int offset, const std::vector<double>& series) {
    const auto s = summarize4<double>(series);
    v.segment<4>(offset) << s.min, s.max, s.mean, s.std;
}

void put_bursts(FeatureArray<double>& v, int summary_offset, int lengths_offset,
                const std::vector<std::uint32_t>& bursts) {
    if (!bursts.empty()) {
        const double total = std::accumulate(bursts.begin(), bursts.end(), 0.0);
        v[summary_offset] = static_cast<double>(bursts.size());
        v[summary_offset + 1] = total / static_cast<double>(bursts.size());
        v[summary_offset + 2] = *std::max_element(bursts.begin(), bursts.end());
    }
    const auto n = std::min<std::size_t>(bursts.size(), layout::kBurstSlots);
    for (std::size_t i = 0; i < n; ++i) v[lengths_offset + static_cast<int>(i)] = bursts[i];
}

} // namespace

std::vector<double> iat_series(const Flow& flow, IatSelector selector) {
    std::vector<double> out;
    std::optional<Timestamp> prev;
    for (const auto& p : flow.packets) {
        const bool keep = selector == IatSelector::All ||
                          (selector == IatSelector::Forward && p.direction == Direction::Outgoing) ||
                          (selector == IatSelector::Backward && p.direction == Direction::Incoming);
        if (!keep) continue;
        if (prev) out.push_back(micros_to_seconds(p.timestamp - *prev));
        prev = p.timestamp;
    }
    return out;
}

ActiveIdle active_idle(const Flow& flow, Micros activity_timeout) {
    if (activity_timeout <= 0) throw PreconditionError("activity timeout must be positive");
    ActiveIdle out;
    if (flow.packets.empty()) return out;

    Timestamp run_start = flow.packets.front().timestamp;
    Timestamp prev = run_start;
    for (std::size_t i = 1; i < flow.packets.size(); ++i) {
        const Timestamp t = flow.packets[i].timestamp;
        const Micros gap = t - prev;
        if (gap > activity_timeout) {
            out.active.push_back(micros_to_seconds(prev - run_start));
            out.idle.push_back(micros_to_seconds(gap));
            run_start = t;
        }
        prev = t;
    }
    out.active.push_back(micros_to_seconds(prev - run_start));
    return out;
}

Bursts compute_bursts(const Flow& flow) {
    Bursts out;
    Direction run_dir = Direction::Unassigned;
    std::uint32_t run_len = 0;
    auto close_run = [&] {
        if (run_len == 0) return;
        (run_dir == Direction::Outgoing ? out.outgoing : out.incoming).push_back(run_len);
    };
    for (const auto& p : flow.packets) {
        if (p.direction == Direction::Unassigned)
            throw PreconditionError("burst extraction needs packet directions; assemble sessions first");
        if (p.direction != run_dir) {
            close_run();
            run_dir = p.direction;
            run_len = 0;
        }
        ++run_len;
    }
    close_run();
    return out;
}

FeatureVector extract_features(const Flow& flow, const FlowConfig& config) {
    if (flow.packets.empty()) throw PreconditionError("cannot extract features from an empty flow");

    FeatureVector fv;
    auto& v = fv.values;
    fv.label = flow.label;

    put_summary(v, layout::kFiat, iat_series(flow, IatSelector::Forward));
    put_summary(v, layout::kBiat, iat_series(flow, IatSelector::Backward));
    put_summary(v, layout::kFlowIat, iat_series(flow, IatSelector::All));
    const auto ai = active_idle(flow, config.activity_timeout());
    put_summary(v, layout::kActive, ai.active);
    put_summary(v, layout::kIdle, ai.idle);

    double bytes = 0;
    for (const auto& p : flow.packets) bytes += p.size_bytes;
    const double packets = static_cast<double>(flow.packets.size());
    const double duration = micros_to_seconds(flow.duration());
    // A zero-length flow is rated over one second.
    const double per = duration > 0 ? duration : 1.0;
    v[layout::kBytesPerSecond] = bytes / per;
    v[layout::kPacketsPerSecond] = packets / per;
    v[layout::kDuration] = duration;

    const auto n_dir = std::min<std::size_t>(flow.packets.size(), layout::kDirectionSlots);
    for (std::size_t i = 0; i < n_dir; ++i) {
        const auto d = flow.packets[i].direction;
        v[layout::kDirections + static_cast<int>(i)] =
            d == Direction::Outgoing ? 1.0 : d == Direction::Incoming ? -1.0 : 0.0;
    }

    const auto bursts = compute_bursts(flow);
    put_bursts(v, layout::kIncomingBursts, layout::kIncomingBurstLengths, bursts.incoming);
    put_bursts(v, layout::kOutgoingBursts, layout::kOutgoingBurstLengths, bursts.outgoing);

    for (const auto& p : flow.packets) {
        const auto it = std::find(layout::kTrackedSizes.begin(), layout::kTrackedSizes.end(), p.size_bytes);
        if (it != layout::kTrackedSizes.end())
            v[layout::kSizeCounts + static_cast<int>(it - layout::kTrackedSizes.begin())] += 1;
    }
    return fv;
}

} // namespace torapp
