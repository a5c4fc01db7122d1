#pragma once

// Fixtures and independent reference implementations used by the tests.

#include "torapp/flow.hpp"
#include "torapp/metrics.hpp"
#include "torapp/packet.hpp"
#include "torapp/session.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace test {

using namespace torapp;

inline const Endpoint kClient{Ipv4{0x0a000001}, 40000}; // 10.0.0.1
inline const Endpoint kServer{Ipv4{0xc6336401}, 9001};  // 198.51.100.1

inline PacketRecord packet(double t_s, bool outgoing, std::uint32_t size = 100, TcpFlags flags = {TcpFlag::Ack}) {
    PacketRecord p;
    p.timestamp = Timestamp::from_seconds(t_s);
    p.src = outgoing ? kClient : kServer;
    p.dst = outgoing ? kServer : kClient;
    p.size_bytes = size;
    p.tcp_flags = flags;
    p.direction = outgoing ? Direction::Outgoing : Direction::Incoming;
    return p;
}

inline TcpSession session_of(std::vector<PacketRecord> packets) {
    TcpSession s;
    s.client = kClient;
    s.key = kClient < kServer ? SessionKey{kClient, kServer} : SessionKey{kServer, kClient};
    s.packets = std::move(packets);
    for (const auto& p : s.packets)
        if (p.tcp_flags.has(TcpFlag::Fin)) s.fin_seen = true;
    return s;
}

inline Flow flow_of(std::vector<PacketRecord> packets) {
    Flow f;
    f.packets = std::move(packets);
    return f;
}

inline Flow outgoing_flow(std::initializer_list<double> times, std::uint32_t size = 100) {
    std::vector<PacketRecord> ps;
    for (double t : times) ps.push_back(packet(t, true, size));
    return flow_of(std::move(ps));
}

/// Random time-ordered session with mixed directions, sizes and, sometimes,
/// a FIN or RST somewhere inside.
inline TcpSession random_session(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> count(1, 200);
    std::exponential_distribution<double> gap(1.0);
    std::bernoulli_distribution coin(0.5);
    std::uniform_int_distribution<std::uint32_t> size(40, 1500);
    std::uniform_int_distribution<int> pick(0, 9);

    const int n = count(rng);
    const int terminator = pick(rng) < 3 ? std::uniform_int_distribution<int>(0, n - 1)(rng) : -1;
    std::vector<PacketRecord> ps;
    Micros t = std::uniform_int_distribution<Micros>(0, 1'000'000'000)(rng);
    for (int i = 0; i < n; ++i) {
        if (i > 0 && pick(rng) != 0) t += seconds_to_micros(gap(rng) * (coin(rng) ? 1.0 : 4.0));
        auto p = packet(0, coin(rng), size(rng));
        p.timestamp = Timestamp(t);
        if (i == terminator) p.tcp_flags = coin(rng) ? TcpFlags{TcpFlag::Fin, TcpFlag::Ack} : TcpFlags{TcpFlag::Rst};
        ps.push_back(p);
    }
    return session_of(std::move(ps));
}

/// Straightforward min/max/mean/population-std by explicit loops.
struct StatsOracle {
    double min = 0, max = 0, mean = 0, std = 0;
};

inline StatsOracle stats_oracle(const std::vector<double>& x) {
    StatsOracle s;
    if (x.empty()) return s;
    s.min = x[0];
    s.max = x[0];
    long double sum = 0;
    for (double v : x) {
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
        sum += v;
    }
    s.mean = static_cast<double>(sum / x.size());
    long double sq = 0;
    for (double v : x) sq += (v - s.mean) * (v - s.mean);
    s.std = static_cast<double>(std::sqrt(sq / x.size()));
    return s;
}

/// Exhaustive k-NN: sort all training points by (distance, index), vote,
/// break vote ties by the nearest member among tied classes.
inline std::size_t knn_oracle(const std::vector<std::vector<double>>& train, const std::vector<std::size_t>& labels,
                              const std::vector<double>& q, std::size_t k) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t i = 0; i < train.size(); ++i) {
        double s = 0;
        for (std::size_t j = 0; j < q.size(); ++j) s += (train[i][j] - q[j]) * (train[i][j] - q[j]);
        d.emplace_back(s, i);
    }
    std::sort(d.begin(), d.end());
    std::map<std::size_t, std::size_t> votes;
    for (std::size_t r = 0; r < k; ++r) ++votes[labels[d[r].second]];
    std::size_t best = 0;
    for (const auto& [c, v] : votes) best = std::max(best, v);
    for (std::size_t r = 0; r < k; ++r)
        if (votes[labels[d[r].second]] == best) return labels[d[r].second];
    return labels[d[0].second];
}

/// Per-class and overall metrics straight from the counting definitions.
struct MetricsOracle {
    std::vector<double> p, r, f1, acc;
    double micro_p = 0, micro_r = 0, micro_f1 = 0;
    double macro_p = 0, macro_r = 0, macro_f1 = 0, avg_acc = 0, err = 0;
};

inline double ratio(double a, double b) { return b == 0 ? 0.0 : a / b; }

inline MetricsOracle metrics_oracle(const std::vector<std::vector<long long>>& m) {
    const std::size_t n = m.size();
    double total = 0;
    for (const auto& row : m)
        for (auto v : row) total += v;
    MetricsOracle o;
    double stp = 0, sfp = 0, sfn = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double tp = m[i][i], fp = 0, fn = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            fp += m[j][i];
            fn += m[i][j];
        }
        const double tn = total - tp - fp - fn;
        const double p = ratio(tp, tp + fp), r = ratio(tp, tp + fn);
        o.p.push_back(p);
        o.r.push_back(r);
        o.f1.push_back(ratio(2 * p * r, p + r));
        o.acc.push_back(ratio(tp + tn, total));
        o.err += ratio(fp + fn, total) / n;
        stp += tp;
        sfp += fp;
        sfn += fn;
    }
    o.micro_p = ratio(stp, stp + sfp);
    o.micro_r = ratio(stp, stp + sfn);
    o.micro_f1 = ratio(2 * o.micro_p * o.micro_r, o.micro_p + o.micro_r);
    for (std::size_t i = 0; i < n; ++i) {
        o.macro_p += o.p[i] / n;
        o.macro_r += o.r[i] / n;
        o.avg_acc += o.acc[i] / n;
    }
    o.macro_f1 = ratio(2 * o.macro_p * o.macro_r, o.macro_p + o.macro_r);
    return o;
}

inline ConfusionMatrix cm_from(const std::vector<std::vector<long long>>& m) {
    std::vector<std::string> classes;
    for (std::size_t i = 0; i < m.size(); ++i) classes.push_back("c" + std::to_string(i));
    ConfusionMatrix cm(classes);
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j) cm.add(i, j, m[i][j]);
    return cm;
}

/// Little-endian byte writer for hand-assembled captures.
struct Bytes {
    std::vector<std::uint8_t> v;
    void u8(std::uint8_t x) { v.push_back(x); }
    void le16(std::uint16_t x) { u8(x & 0xff), u8(x >> 8); }
    void le32(std::uint32_t x) { le16(x & 0xffff), le16(x >> 16); }
    void be16(std::uint16_t x) { u8(x >> 8), u8(x & 0xff); }
    void be32(std::uint32_t x) { be16(x >> 16), be16(x & 0xffff); }
    void zeros(std::size_t n) { v.insert(v.end(), n, 0); }
};

inline std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("torapp_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

} // namespace test
