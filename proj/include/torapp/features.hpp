#pragma once

#include "torapp/flow.hpp"

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace torapp {

inline constexpr int kFeatureDim = 68;
inline constexpr int kFeatureLayoutVersion = 1;

/// Zero-based offsets into the feature vector. The order is normative and
/// covered by kFeatureLayoutVersion.
namespace layout {
inline constexpr int kFiat = 0;           // min, max, mean, std
inline constexpr int kBiat = 4;
inline constexpr int kFlowIat = 8;
inline constexpr int kActive = 12;
inline constexpr int kIdle = 16;
inline constexpr int kBytesPerSecond = 20;
inline constexpr int kPacketsPerSecond = 21;
inline constexpr int kDuration = 22;
inline constexpr int kDirections = 23;    // first 10 packets: +1 out, -1 in, 0 pad
inline constexpr int kIncomingBursts = 33; // count, mean length, max length
inline constexpr int kOutgoingBursts = 36;
inline constexpr int kIncomingBurstLengths = 39; // first 10, zero padded
inline constexpr int kOutgoingBurstLengths = 49;
inline constexpr int kSizeCounts = 59;

inline constexpr int kDirectionSlots = 10;
inline constexpr int kBurstSlots = 10;

/// Packet sizes (IP total length) with a dedicated counter, in slot order.
inline constexpr std::array<std::uint32_t, 9> kTrackedSizes = {1500, 595, 583, 1097, 1384,
                                                                151,  1126, 1109, 233};
} // namespace layout

template <typename Scalar>
using FeatureArray = Eigen::Matrix<Scalar, kFeatureDim, 1>;

struct FeatureVector {
    FeatureArray<double> values = FeatureArray<double>::Zero();
    std::optional<std::string> label;
    /// Provenance of the scaler that produced these values, empty when raw.
    std::string scaled_by;
};

template <typename Scalar>
struct Summary {
    Scalar min = 0;
    Scalar max = 0;
    Scalar mean = 0;
    Scalar std = 0; // population

    bool operator==(const Summary&) const = default;
};

/// min, max, mean and population standard deviation; all zero when empty.
template <typename Derived>
Summary<typename Derived::Scalar> summarize4(const Eigen::DenseBase<Derived>& x) {
    using Scalar = typename Derived::Scalar;
    Summary<Scalar> s;
    if (x.size() == 0) return s;
    s.min = x.minCoeff();
    s.max = x.maxCoeff();
    s.mean = x.mean();
    s.std = std::sqrt((x.derived().array() - s.mean).square().mean());
    return s;
}

template <typename Scalar>
Summary<Scalar> summarize4(std::span<const Scalar> x) {
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    return summarize4(Eigen::Map<const Vec>(x.data(), static_cast<Eigen::Index>(x.size())));
}

enum class IatSelector { Forward, Backward, All };

/// Consecutive timestamp differences (seconds) among the selected packets.
std::vector<double> iat_series(const Flow& flow, IatSelector selector);

struct ActiveIdle {
    std::vector<double> active; // seconds
    std::vector<double> idle;
};

/// Gaps longer than `activity_timeout` are idle periods; the maximal runs of
/// packets between them are active periods lasting last - first.
ActiveIdle active_idle(const Flow& flow, Micros activity_timeout);

struct Bursts {
    std::vector<std::uint32_t> incoming; // lengths in packets, time order
    std::vector<std::uint32_t> outgoing;
};

/// Partition the direction sequence into maximal same-direction runs.
/// Throws PreconditionError if a packet has no direction.
Bursts compute_bursts(const Flow& flow);

FeatureVector extract_features(const Flow& flow, const FlowConfig& config);

} // namespace torapp
