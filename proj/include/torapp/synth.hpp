#pragma once

#include "torapp/packet.hpp"
#include "torapp/session.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace torapp {

enum class PaddingMode { None, Reduced, Full };

std::string_view padding_mode_id(PaddingMode mode);
PaddingMode parse_padding_mode(std::string_view id);

struct PaddingRange {
    double lo_s;
    double hi_s;
};

/// Connection padding: each endpoint keeps an idle timer drawn from the
/// mode's range and sends a padding cell when it expires.
struct PaddingConfig {
    PaddingMode mode = PaddingMode::Reduced;
    PaddingRange full_range{1.5, 9.5};
    PaddingRange reduced_range{9.0, 14.0};
    std::uint32_t padding_cell_size = 543; // 514-byte cell plus modeled framing

    PaddingRange range() const;
};

using Rng = std::mt19937_64;

/// Uniform draw from the mode's timeout range. Throws PreconditionError for
/// PaddingMode::None.
double sample_padding_timeout(const PaddingConfig& config, Rng& rng);

/// Two-endpoint timer simulation between the first and last packet. Real
/// packets reset both timers; a padding cell resets only its sender's timer.
/// Client padding is Outgoing, guard padding Incoming, both without TCP
/// flags. Real packets are kept verbatim and the output is time-ordered.
std::vector<PacketRecord> inject_padding(std::span<const PacketRecord> packets, const PaddingConfig& config,
                                         Rng& rng);
TcpSession inject_padding(const TcpSession& session, const PaddingConfig& config, Rng& rng);

/// Synthetic traffic profile for one app class.
///
/// A session is a TCP handshake followed by exchanges, each made of a think
/// time, an outgoing burst and the incoming burst answering it.
struct ArchetypeSpec {
    static constexpr std::size_t kPaletteSize = 9; // sizes of layout::kTrackedSizes

    std::string name;
    double think_time_mean_s = 1.0;
    double think_time_jitter_s = 0.0;  // think time ~ U[mean - jitter, mean + jitter]
    double outgoing_burst_mean = 1.0;  // packets, >= 1
    double down_up_ratio = 1.0;        // incoming burst mean = ratio * outgoing burst mean
    double intra_burst_gap_s = 0.005;  // mean of exponential gaps inside a burst
    double rtt_s = 0.1;
    std::array<double, kPaletteSize> size_weights{};
    double other_size_weight = 0.0;    // uniform over sizes not in the palette
    double session_duration_s = 120.0;

    /// Throws PreconditionError unless weights sum to 1 and durations are positive.
    void validate() const;
};

std::vector<ArchetypeSpec> default_archetypes();
std::vector<ArchetypeSpec> load_archetypes(const std::filesystem::path& path);
void save_archetypes(std::span<const ArchetypeSpec> specs, const std::filesystem::path& path);

/// One session starting at t=0: client SYN first, client FIN 1 us before
/// `duration_s`.
TcpSession generate_app_trace(const ArchetypeSpec& spec, double duration_s, std::uint64_t seed);

struct ManifestEntry {
    std::string filename; // relative to the manifest's directory
    std::string label;
    PaddingMode padding = PaddingMode::None;
    std::uint64_t seed = 0;

    bool operator==(const ManifestEntry&) const = default;
};

struct CorpusManifest {
    std::filesystem::path directory;
    std::vector<ManifestEntry> entries;
};

inline constexpr const char* kManifestFile = "manifest.csv";
inline constexpr const char* kCorpusMetaFile = "corpus.meta";

/// Writes one PCAP per session, `manifest.csv` and `corpus.meta` into
/// `out_dir`. Session seeds derive from `seed`, the class index and the
/// session index.
CorpusManifest build_labeled_corpus(std::span<const ArchetypeSpec> specs, std::size_t sessions_per_class,
                                    double duration_s, const PaddingConfig& padding, std::uint64_t seed,
                                    const std::filesystem::path& out_dir);

/// `path` is the manifest file or the directory holding it.
CorpusManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const CorpusManifest& manifest, const std::filesystem::path& path);

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

} // namespace torapp
