#include "support.hpp"

#include "torapp/error.hpp"
#include "torapp/pcap.hpp"
#include "torapp/synth.hpp"

#include <doctest.h>

#include <fstream>
#include <iterator>

using namespace torapp;

namespace {

Micros max_gap(const std::vector<PacketRecord>& ps) {
    Micros g = 0;
    for (std::size_t i = 1; i < ps.size(); ++i) g = std::max(g, ps[i].timestamp - ps[i - 1].timestamp);
    return g;
}

PaddingConfig mode(PaddingMode m) {
    PaddingConfig c;
    c.mode = m;
    return c;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const ArchetypeSpec& by_name(const std::vector<ArchetypeSpec>& specs, const std::string& name) {
    return *std::find_if(specs.begin(), specs.end(), [&](const auto& s) { return s.name == name; });
}

} // namespace

TEST_CASE("padding timeouts stay in their ranges") {
    Rng rng(1);
    for (int i = 0; i < 10000; ++i) {
        const double f = sample_padding_timeout(mode(PaddingMode::Full), rng);
        CHECK((f >= 1.5 && f <= 9.5));
        const double r = sample_padding_timeout(mode(PaddingMode::Reduced), rng);
        CHECK((r >= 9.0 && r <= 14.0));
    }
    CHECK_THROWS_AS(sample_padding_timeout(mode(PaddingMode::None), rng), PreconditionError);

    Rng a(77), b(77);
    for (int i = 0; i < 10; ++i)
        CHECK(sample_padding_timeout(mode(PaddingMode::Full), a) == sample_padding_timeout(mode(PaddingMode::Full), b));
    CHECK(parse_padding_mode("reduced") == PaddingMode::Reduced);
    CHECK(padding_mode_id(PaddingMode::Full) == "full");
    CHECK_THROWS(parse_padding_mode("heavy"));
}

TEST_CASE("padding injection") {
    Rng rng(5);
    const std::vector<PacketRecord> two{test::packet(0, true), test::packet(30, false)};

    SUBCASE("mode None is the identity") {
        CHECK(inject_padding(two, mode(PaddingMode::None), rng) == two);
    }
    SUBCASE("a 30 s silence under Full padding") {
        const auto out = inject_padding(two, mode(PaddingMode::Full), rng);
        CHECK(out.size() >= two.size() + 3);
        CHECK(max_gap(out) <= seconds_to_micros(9.5));
        CHECK(out.front() == two.front());
        CHECK(out.back() == two.back());
        for (std::size_t i = 1; i + 1 < out.size(); ++i) {
            CHECK(out[i].size_bytes == 543);
            CHECK(out[i].tcp_flags.empty());
            CHECK(out[i].src == (out[i].direction == Direction::Outgoing ? test::kClient : test::kServer));
        }
    }
    SUBCASE("a 5 s silence under Reduced padding adds nothing") {
        const std::vector<PacketRecord> near{test::packet(0, true), test::packet(5, false)};
        CHECK(inject_padding(near, mode(PaddingMode::Reduced), rng) == near);
    }
    SUBCASE("real packets are kept verbatim and in order") {
        std::mt19937_64 g(8);
        for (int round = 0; round < 50; ++round) {
            const auto s = test::random_session(g);
            for (auto m : {PaddingMode::Full, PaddingMode::Reduced}) {
                const auto out = inject_padding(s.packets, mode(m), rng);
                std::size_t j = 0;
                for (const auto& p : out)
                    if (j < s.packets.size() && p == s.packets[j]) ++j;
                CHECK(j == s.packets.size());
                CHECK(std::is_sorted(out.begin(), out.end(),
                                     [](const auto& x, const auto& y) { return x.timestamp < y.timestamp; }));
                CHECK(max_gap(out) <= seconds_to_micros(m == PaddingMode::Full ? 9.5 : 14.0));
            }
        }
    }
}

TEST_CASE("app trace generation") {
    const auto specs = default_archetypes();
    CHECK(specs.size() == 6);

    const auto voip = generate_app_trace(by_name(specs, "voip"), 60, 3);
    CHECK(voip.packets.front().tcp_flags == TcpFlags{TcpFlag::Syn});
    CHECK(voip.packets.front().direction == Direction::Outgoing);
    CHECK(voip.packets.back().tcp_flags.has(TcpFlag::Fin));
    CHECK(voip.packets.back().direction == Direction::Outgoing);
    CHECK(voip.packets.back().timestamp.micros() <= 60'000'000);
    CHECK(voip.fin_seen);
    CHECK(max_gap(voip.packets) < seconds_to_micros(by_name(specs, "social_feed").think_time_mean_s));
    std::size_t out = 0, in = 0;
    for (const auto& p : voip.packets) (p.direction == Direction::Outgoing ? out : in) += 1;
    const double ratio = static_cast<double>(in) / static_cast<double>(out);
    CHECK(ratio >= 0.8);
    CHECK(ratio <= 1.2);

    const auto again = generate_app_trace(by_name(specs, "voip"), 60, 3);
    CHECK(again.packets == voip.packets);
    CHECK(serialize_pcap(again.packets) == serialize_pcap(voip.packets));

    for (const auto& spec : specs) {
        const auto s = generate_app_trace(spec, 120, 9);
        CHECK(s.packets.back().timestamp.micros() < 120'000'000);
        for (const auto& p : s.packets) CHECK(p.direction == (p.src == s.client ? Direction::Outgoing : Direction::Incoming));
    }

    auto bad = specs[0];
    bad.size_weights[0] += 0.5;
    CHECK_THROWS_AS(bad.validate(), PreconditionError);
    CHECK_THROWS_AS(generate_app_trace(specs[0], 0, 1), PreconditionError);
}

TEST_CASE("shipped archetype file matches the presets") {
    const auto loaded = load_archetypes(std::filesystem::path(TORAPP_DATA_DIR) / "archetypes.json");
    const auto presets = default_archetypes();
    REQUIRE(loaded.size() == presets.size());
    for (std::size_t i = 0; i < presets.size(); ++i) {
        CHECK(loaded[i].name == presets[i].name);
        CHECK(loaded[i].think_time_mean_s == presets[i].think_time_mean_s);
        CHECK(loaded[i].think_time_jitter_s == presets[i].think_time_jitter_s);
        CHECK(loaded[i].outgoing_burst_mean == presets[i].outgoing_burst_mean);
        CHECK(loaded[i].down_up_ratio == presets[i].down_up_ratio);
        CHECK(loaded[i].intra_burst_gap_s == presets[i].intra_burst_gap_s);
        CHECK(loaded[i].rtt_s == presets[i].rtt_s);
        CHECK(loaded[i].size_weights == presets[i].size_weights);
        CHECK(loaded[i].other_size_weight == presets[i].other_size_weight);
    }

    const auto dir = test::temp_dir("archetypes");
    std::ofstream(dir / "bad.json") << R"({"archetypes":[{"name":"x"}]})";
    CHECK_THROWS_AS(load_archetypes(dir / "bad.json"), ParseError);
    CHECK_THROWS_AS(load_archetypes(dir / "missing.json"), IoError);
}

TEST_CASE("labeled corpus") {
    const auto specs = default_archetypes();
    const auto dir = test::temp_dir("corpus");
    const auto m = build_labeled_corpus(specs, 10, 30, mode(PaddingMode::Full), 4, dir / "a");
    CHECK(m.entries.size() == 60);
    std::size_t pcaps = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir / "a")) pcaps += e.path().extension() == ".pcap";
    CHECK(pcaps == 60);

    const auto back = read_manifest(dir / "a");
    CHECK(back.entries == m.entries);
    CHECK(read_manifest(dir / "a" / kManifestFile).entries == m.entries);

    for (const auto& e : m.entries) {
        CHECK(e.padding == PaddingMode::Full);
        const auto packets = read_pcap(dir / "a" / e.filename).packets;
        CHECK(max_gap(packets) <= seconds_to_micros(9.5));
    }

    build_labeled_corpus(specs, 10, 30, mode(PaddingMode::Full), 4, dir / "b");
    for (const auto& e : m.entries) CHECK(slurp(dir / "a" / e.filename) == slurp(dir / "b" / e.filename));
    CHECK(slurp(dir / "a" / kManifestFile) == slurp(dir / "b" / kManifestFile));
    CHECK(slurp(dir / "a" / kCorpusMetaFile).find("padding_cell_size=543") != std::string::npos);

    std::ofstream(dir / "file") << "x";
    CHECK_THROWS_AS(build_labeled_corpus(specs, 1, 10, mode(PaddingMode::None), 1, dir / "file" / "sub"), IoError);
    CHECK_THROWS_AS(read_manifest(dir / "nowhere"), IoError);
    CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
}
