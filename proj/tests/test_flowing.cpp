#include "support.hpp"

#include "torapp/error.hpp"
#include "torapp/flow.hpp"

#include <doctest.h>

using namespace torapp;

namespace {

std::vector<double> times_of(const Flow& f) {
    std::vector<double> t;
    for (const auto& p : f.packets) t.push_back(p.timestamp.seconds());
    return t;
}

} // namespace

TEST_CASE("flow config validation") {
    CHECK_NOTHROW(FlowConfig{10, 2}.validate());
    CHECK_THROWS_AS(FlowConfig({10, 10}).validate(), PreconditionError);
    CHECK_THROWS_AS(FlowConfig({10, 0}).validate(), PreconditionError);
    CHECK_THROWS_AS(FlowConfig({-1, -2}).validate(), PreconditionError);
}

TEST_CASE("single packet gives one zero-length flow") {
    const auto s = test::session_of({test::packet(0, true)});
    const auto split = split_flows(s, {});
    REQUIRE(split.flows.size() == 1);
    CHECK(split.flows[0].duration() == 0);
    CHECK(split.discarded == 0);
}

TEST_CASE("packets fall into windows anchored at the first packet") {
    std::vector<PacketRecord> ps;
    for (double t : {0.0, 3.0, 9.0, 11.0, 19.5}) ps.push_back(test::packet(t, true));
    const auto split = split_flows(test::session_of(ps), {10, 2});
    REQUIRE(split.flows.size() == 2);
    CHECK(times_of(split.flows[0]) == std::vector<double>{0, 3, 9});
    CHECK(times_of(split.flows[1]) == std::vector<double>{11, 19.5});
}

TEST_CASE("window boundaries are half-open and empty windows vanish") {
    std::vector<PacketRecord> ps;
    for (double t : {100.0, 109.999999, 110.0, 145.0}) ps.push_back(test::packet(t, false));
    const auto split = split_flows(test::session_of(ps), {10, 2});
    REQUIRE(split.flows.size() == 3);
    CHECK(split.flows[0].packets.size() == 2);
    CHECK(split.flows[1].packets.size() == 1);
    CHECK(times_of(split.flows[2]) == std::vector<double>{145});
}

TEST_CASE("FIN ends splitting") {
    std::vector<PacketRecord> ps{test::packet(0, true), test::packet(2, false),
                                 test::packet(4, true, 52, {TcpFlag::Fin, TcpFlag::Ack}), test::packet(12, false)};
    const auto split = split_flows(test::session_of(ps), {10, 2}, "s#0");
    REQUIRE(split.flows.size() == 1);
    CHECK(times_of(split.flows[0]) == std::vector<double>{0, 2, 4});
    CHECK(split.discarded == 1);
    CHECK(split.flows[0].session_ref == "s#0");

    SUBCASE("RST behaves like FIN") {
        ps[2].tcp_flags = {TcpFlag::Rst};
        const auto r = split_flows(test::session_of(ps), {10, 2});
        CHECK(r.flows.size() == 1);
        CHECK(r.discarded == 1);
    }
}

TEST_CASE("labeling") {
    std::vector<Flow> flows(3, test::outgoing_flow({0, 1}));
    auto labeled = label_flows(flows, "spotify");
    REQUIRE(labeled.size() == 3);
    for (const auto& f : labeled) CHECK(f.label == "spotify");

    CHECK(label_flows({}, "spotify").empty());

    auto skype = label_flows({test::outgoing_flow({0})}, "skype");
    CHECK(label_flows(skype, "skype")[0].label == "skype");
    CHECK_THROWS_AS(label_flows(skype, "spotify"), PreconditionError);
    CHECK_THROWS_AS(label_flows(flows, ""), PreconditionError);
    CHECK_THROWS_AS(label_flows(flows, "a,b"), PreconditionError);
    CHECK_THROWS_AS(label_flows(flows, "a b"), PreconditionError);
}

TEST_CASE("flow invariants on random sessions") {
    std::mt19937_64 rng(2024);
    for (int round = 0; round < 300; ++round) {
        const auto s = test::random_session(rng);
        const FlowConfig cfg{std::uniform_real_distribution<double>(1, 20)(rng), 0.5};
        const auto split = split_flows(s, cfg);
        const auto again = split_flows(s, cfg);

        // conservation up to the terminating window
        std::size_t kept = 0;
        for (const auto& f : split.flows) kept += f.packets.size();
        REQUIRE(kept + split.discarded == s.packets.size());

        std::size_t cursor = 0;
        const auto t0 = s.packets.front().timestamp;
        for (std::size_t i = 0; i < split.flows.size(); ++i) {
            const auto& f = split.flows[i];
            REQUIRE_FALSE(f.packets.empty());
            const auto w = (f.start() - t0) / cfg.flow_timeout();
            for (const auto& p : f.packets) {
                CHECK(p == s.packets[cursor++]);
                CHECK((p.timestamp - t0) / cfg.flow_timeout() == w);
            }
            if (i > 0) CHECK(split.flows[i - 1].end() < f.start());
        }
        // discarded packets are a suffix after a FIN/RST
        if (split.discarded > 0) {
            bool terminated = false;
            for (const auto& p : split.flows.back().packets)
                terminated |= p.tcp_flags.has(TcpFlag::Fin) || p.tcp_flags.has(TcpFlag::Rst);
            CHECK(terminated);
        }

        REQUIRE(again.flows.size() == split.flows.size());
        for (std::size_t i = 0; i < split.flows.size(); ++i) CHECK(again.flows[i].packets == split.flows[i].packets);
    }
}
