#include "torapp/packet.hpp"

#include "torapp/error.hpp"

#include <charconv>
#include <cmath>

namespace torapp {

Micros seconds_to_micros(double s) {
    return static_cast<Micros>(std::llround(s * 1e6));
}

Timestamp Timestamp::from_seconds(double s) {
    return Timestamp(seconds_to_micros(s));
}

Ipv4 Ipv4::parse(const std::string& dotted) {
    std::uint32_t value = 0;
    const char* p = dotted.data();
    const char* end = p + dotted.size();
    for (int octet = 0; octet < 4; ++octet) {
        unsigned part = 0;
        auto [next, ec] = std::from_chars(p, end, part);
        if (ec != std::errc{} || part > 255)
            throw ParseError("invalid IPv4 address '" + dotted + "'");
        value = (value << 8) | part;
        p = next;
        if (octet < 3) {
            if (p == end || *p != '.') throw ParseError("invalid IPv4 address '" + dotted + "'");
            ++p;
        }
    }
    if (p != end) throw ParseError("invalid IPv4 address '" + dotted + "'");
    return Ipv4{value};
}

std::string Ipv4::to_string() const {
    return std::to_string(value >> 24) + '.' + std::to_string((value >> 16) & 0xff) + '.' +
           std::to_string((value >> 8) & 0xff) + '.' + std::to_string(value & 0xff);
}

std::string Endpoint::to_string() const {
    return addr.to_string() + ':' + std::to_string(port);
}

} // namespace torapp
