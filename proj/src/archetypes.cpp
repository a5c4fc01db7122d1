#include "torapp/error.hpp"
#include "torapp/features.hpp"
#include "torapp/flow.hpp"
#include "torapp/synth.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace torapp {

void ArchetypeSpec::validate() const {
    const auto fail = [&](const std::string& why) {
        throw PreconditionError("archetype '" + name + "': " + why);
    };
    if (!is_valid_label(name)) fail("name must be a valid class label");
    if (!(think_time_mean_s > 0)) fail("think time mean must be positive");
    if (!(think_time_jitter_s >= 0)) fail("think time jitter must be non-negative");
    if (!(outgoing_burst_mean >= 1)) fail("outgoing burst mean must be at least 1 packet");
    if (!(down_up_ratio > 0)) fail("down/up ratio must be positive");
    if (!(down_up_ratio * outgoing_burst_mean >= 1)) fail("incoming burst mean must be at least 1 packet");
    if (!(intra_burst_gap_s > 0) || !(rtt_s > 0)) fail("gaps must be positive");
    if (!(session_duration_s > 0)) fail("session duration must be positive");
    double total = other_size_weight;
    if (other_size_weight < 0) fail("weights must be non-negative");
    for (double w : size_weights) {
        if (w < 0) fail("weights must be non-negative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) fail("size weights sum to " + std::to_string(total) + ", not 1");
}

std::vector<ArchetypeSpec> default_archetypes() {
    // Weights follow the tracked-size order 1500, 595, 583, 1097, 1384, 151, 1126, 1109, 233.
    std::vector<ArchetypeSpec> specs;
    specs.push_back({"streaming_video", 1.5, 0.5, 2.0, 10.0, 0.004, 0.15,
                     {0.55, 0.05, 0.05, 0.0, 0.20, 0.05, 0.0, 0.0, 0.0}, 0.10, 120});
    specs.push_back({"streaming_audio", 4.0, 1.0, 1.5, 12.0, 0.01, 0.2,
                     {0.15, 0.15, 0.0, 0.40, 0.0, 0.10, 0.0, 0.0, 0.05}, 0.15, 120});
    specs.push_back({"social_feed", 6.0, 3.0, 3.0, 8.0, 0.006, 0.25,
                     {0.20, 0.10, 0.35, 0.0, 0.0, 0.0, 0.20, 0.0, 0.0}, 0.15, 120});
    specs.push_back({"voip", 0.15, 0.05, 1.0, 1.0, 0.02, 0.05,
                     {0.0, 0.05, 0.0, 0.0, 0.0, 0.50, 0.0, 0.0, 0.35}, 0.10, 120});
    specs.push_back({"torrent", 1.0, 0.5, 3.0, 3.0, 0.002, 0.1,
                     {0.50, 0.10, 0.05, 0.0, 0.0, 0.0, 0.0, 0.25, 0.0}, 0.10, 120});
    specs.push_back({"browser", 3.0, 2.0, 5.0, 6.0, 0.005, 0.2,
                     {0.20, 0.10, 0.10, 0.05, 0.10, 0.05, 0.05, 0.05, 0.10}, 0.20, 120});
    return specs;
}

namespace {

nlohmann::json to_json(const ArchetypeSpec& s) {
    nlohmann::json palette = nlohmann::json::object();
    for (std::size_t i = 0; i < ArchetypeSpec::kPaletteSize; ++i)
        palette[std::to_string(layout::kTrackedSizes[i])] = s.size_weights[i];
    return {
        {"name", s.name},
        {"think_time", {{"mean_s", s.think_time_mean_s}, {"jitter_s", s.think_time_jitter_s}}},
        {"outgoing_burst_mean", s.outgoing_burst_mean},
        {"down_up_ratio", s.down_up_ratio},
        {"intra_burst_gap_s", s.intra_burst_gap_s},
        {"rtt_s", s.rtt_s},
        {"size_palette", palette},
        {"other_size_weight", s.other_size_weight},
        {"session_duration_s", s.session_duration_s},
    };
}

ArchetypeSpec from_json(const nlohmann::json& j) {
    ArchetypeSpec s;
    s.name = j.at("name").get<std::string>();
    s.think_time_mean_s = j.at("think_time").at("mean_s").get<double>();
    s.think_time_jitter_s = j.at("think_time").at("jitter_s").get<double>();
    s.outgoing_burst_mean = j.at("outgoing_burst_mean").get<double>();
    s.down_up_ratio = j.at("down_up_ratio").get<double>();
    s.intra_burst_gap_s = j.at("intra_burst_gap_s").get<double>();
    s.rtt_s = j.at("rtt_s").get<double>();
    const auto& palette = j.at("size_palette");
    for (const auto& [key, value] : palette.items()) {
        const auto size = std::stoul(key);
        const auto it = std::find(layout::kTrackedSizes.begin(), layout::kTrackedSizes.end(), size);
        if (it == layout::kTrackedSizes.end())
            throw ParseError("archetype '" + s.name + "': size " + key + " is not a tracked packet size");
        s.size_weights[static_cast<std::size_t>(it - layout::kTrackedSizes.begin())] = value.get<double>();
    }
    s.other_size_weight = j.at("other_size_weight").get<double>();
    s.session_duration_s = j.at("session_duration_s").get<double>();
    s.validate();
    return s;
}

} // namespace

std::vector<ArchetypeSpec> load_archetypes(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open archetype file '" + path.string() + "'");
    std::vector<ArchetypeSpec> specs;
    try {
        const auto doc = nlohmann::json::parse(in);
        for (const auto& j : doc.at("archetypes")) specs.push_back(from_json(j));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("archetype file '" + path.string() + "': " + e.what());
    }
    if (specs.empty()) throw PreconditionError("archetype file '" + path.string() + "' defines no archetypes");
    return specs;
}

void save_archetypes(std::span<const ArchetypeSpec> specs, const std::filesystem::path& path) {
    nlohmann::json doc;
    doc["archetypes"] = nlohmann::json::array();
    for (const auto& s : specs) doc["archetypes"].push_back(to_json(s));
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot create '" + path.string() + "'");
    out << doc.dump(2) << '\n';
    if (!out.flush()) throw IoError("error writing '" + path.string() + "'");
}

TcpSession generate_app_trace(const ArchetypeSpec& spec, double duration_s, std::uint64_t seed) {
    spec.validate();
    if (!(duration_s > 0)) throw PreconditionError("trace duration must be positive");

    Rng rng(seed);
    // Endpoints derive from the seed so that sessions in one capture never share a 5-tuple.
    const Endpoint client{Ipv4{0x0a000000u | static_cast<std::uint32_t>(rng() & 0x00ffffffu)},
                          static_cast<std::uint16_t>(32768 + rng() % 28000)};
    const Endpoint guard{Ipv4{0xc6336400u | static_cast<std::uint32_t>(1 + rng() % 254)}, 9001};

    std::vector<double> weights(spec.size_weights.begin(), spec.size_weights.end());
    weights.push_back(spec.other_size_weight);
    std::discrete_distribution<std::size_t> pick_size(weights.begin(), weights.end());
    std::uniform_int_distribution<std::uint32_t> other_size(60, 1499);
    auto draw_size = [&]() -> std::uint32_t {
        const auto k = pick_size(rng);
        if (k < ArchetypeSpec::kPaletteSize) return layout::kTrackedSizes[k];
        while (true) {
            const auto s = other_size(rng);
            if (std::find(layout::kTrackedSizes.begin(), layout::kTrackedSizes.end(), s) ==
                layout::kTrackedSizes.end())
                return s;
        }
    };

    // Everything, FIN included, falls inside [0, duration): a 120 s trace
    // spans exactly twelve 10 s windows.
    const Micros end = std::max<Micros>(1, seconds_to_micros(duration_s) - 1);
    TcpSession session;
    session.client = client;
    session.key = client < guard ? SessionKey{client, guard} : SessionKey{guard, client};
    auto emit = [&](Micros t, bool outgoing, std::uint32_t size, TcpFlags flags) {
        PacketRecord p;
        p.timestamp = Timestamp(t);
        p.src = outgoing ? client : guard;
        p.dst = outgoing ? guard : client;
        p.size_bytes = size;
        p.tcp_flags = flags;
        p.direction = outgoing ? Direction::Outgoing : Direction::Incoming;
        session.packets.push_back(p);
    };

    const Micros rtt = std::max<Micros>(1, seconds_to_micros(spec.rtt_s));
    emit(0, true, 60, {TcpFlag::Syn});
    Micros t = rtt;
    if (t < end) emit(t, false, 60, {TcpFlag::Syn, TcpFlag::Ack});
    t += 1000;
    if (t < end) emit(t, true, 52, {TcpFlag::Ack});

    std::uniform_real_distribution<double> think(std::max(1e-3, spec.think_time_mean_s - spec.think_time_jitter_s),
                                                 spec.think_time_mean_s + spec.think_time_jitter_s);
    std::exponential_distribution<double> intra(1.0 / spec.intra_burst_gap_s);
    // Burst length is 1 + Poisson(mean - 1).
    auto burst_length = [&](double mean) {
        return mean > 1.0 ? 1 + std::poisson_distribution<int>(mean - 1.0)(rng) : 1;
    };

    auto burst = [&](bool outgoing, int count) {
        for (int i = 0; i < count; ++i) {
            if (i > 0) t += std::max<Micros>(1, seconds_to_micros(intra(rng)));
            if (t >= end) return false;
            emit(t, outgoing, draw_size(), {TcpFlag::Ack, TcpFlag::Psh});
        }
        return true;
    };
    while (true) {
        t += std::max<Micros>(1, seconds_to_micros(think(rng)));
        if (!burst(true, burst_length(spec.outgoing_burst_mean))) break;
        t += rtt;
        if (!burst(false, burst_length(spec.outgoing_burst_mean * spec.down_up_ratio))) break;
    }

    const Micros fin_at = std::max(end, session.packets.back().timestamp.micros());
    emit(fin_at, true, 52, {TcpFlag::Fin, TcpFlag::Ack});
    session.fin_seen = true;
    return session;
}

} // namespace torapp
