#include "rovwl/net.hpp"

#include <arpa/inet.h>

#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstring>

namespace rovwl {

std::optional<Asn> parse_asn(std::string_view text) {
    if (text.size() >= 2 && (text[0] == 'A' || text[0] == 'a') &&
        (text[1] == 'S' || text[1] == 's')) {
        text.remove_prefix(2);
    }
    if (text.empty() || text.size() > 10) return std::nullopt;
    uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    if (v > 0xffffffffULL) return std::nullopt;
    return Asn{static_cast<uint32_t>(v)};
}

bool is_bogon_asn(Asn asn) {
    uint32_t v = asn.value;
    if (v == 0 || v == 23456 || v == 65535) return true;
    if (v >= 64496 && v <= 64511) return true;    // documentation
    if (v >= 64512 && v <= 65534) return true;    // private use
    if (v >= 65536 && v <= 65551) return true;    // documentation
    if (v >= 65552 && v <= 131071) return true;   // reserved
    if (v >= 4200000000U) return true;            // private use + last ASN
    return false;
}

std::optional<Prefix> Prefix::parse(std::string_view text) {
    auto slash = text.find('/');
    if (slash == std::string_view::npos || slash == 0) return std::nullopt;
    std::string addr(text.substr(0, slash));
    std::string_view len_sv = text.substr(slash + 1);
    if (len_sv.empty() || len_sv.size() > 3) return std::nullopt;
    unsigned len = 0;
    auto [ptr, ec] = std::from_chars(len_sv.data(), len_sv.data() + len_sv.size(), len);
    if (ec != std::errc{} || ptr != len_sv.data() + len_sv.size()) return std::nullopt;

    std::array<uint8_t, 16> bytes{};
    Family fam;
    if (addr.find(':') != std::string::npos) {
        fam = Family::v6;
        if (inet_pton(AF_INET6, addr.c_str(), bytes.data()) != 1) return std::nullopt;
        if (len > 128) return std::nullopt;
    } else {
        fam = Family::v4;
        if (inet_pton(AF_INET, addr.c_str(), bytes.data()) != 1) return std::nullopt;
        if (len > 32) return std::nullopt;
    }
    return from_bytes(fam, bytes, static_cast<uint8_t>(len));
}

Prefix Prefix::from_bytes(Family family, const std::array<uint8_t, 16>& bytes,
                          uint8_t length) {
    Prefix p;
    p.family_ = family;
    p.length_ = length;
    p.bytes_ = bytes;
    // mask host bits
    for (size_t i = 0; i < 16; ++i) {
        int keep = int(length) - int(i * 8);
        if (keep >= 8) continue;
        if (keep <= 0) {
            p.bytes_[i] = 0;
        } else {
            p.bytes_[i] &= uint8_t(0xff << (8 - keep));
        }
    }
    return p;
}

bool Prefix::covers(const Prefix& other) const {
    if (family_ != other.family_ || length_ > other.length_) return false;
    unsigned full = length_ / 8;
    if (std::memcmp(bytes_.data(), other.bytes_.data(), full) != 0) return false;
    unsigned rem = length_ % 8;
    if (rem == 0) return true;
    uint8_t mask = uint8_t(0xff << (8 - rem));
    return (bytes_[full] & mask) == (other.bytes_[full] & mask);
}

std::string Prefix::str() const {
    char buf[INET6_ADDRSTRLEN] = {};
    if (family_ == Family::v4) {
        inet_ntop(AF_INET, bytes_.data(), buf, sizeof(buf));
    } else {
        inet_ntop(AF_INET6, bytes_.data(), buf, sizeof(buf));
    }
    return std::string(buf) + "/" + std::to_string(length_);
}

namespace {

// Howard Hinnant's civil-date algorithms.
int32_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + int32_t(doe) - 719468;
}

void civil_from_days(int32_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const int era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = int(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

}  // namespace

CalDate CalDate::from_ts(int64_t unix_seconds) {
    int64_t d = unix_seconds / 86400;
    if (unix_seconds < 0 && unix_seconds % 86400 != 0) --d;
    return CalDate{static_cast<int32_t>(d)};
}

std::optional<CalDate> CalDate::parse(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    int y = 0;
    unsigned m = 0, d = 0;
    auto num = [&](std::string_view s, auto& out) {
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        return ec == std::errc{} && p == s.data() + s.size();
    };
    if (!num(text.substr(0, 4), y) || !num(text.substr(5, 2), m) ||
        !num(text.substr(8, 2), d))
        return std::nullopt;
    if (m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
    return CalDate{days_from_civil(y, m, d)};
}

std::string CalDate::str() const {
    int y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", y, m, d);
    return buf;
}

std::optional<int64_t> parse_timestamp(std::string_view text) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
        text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
        text.remove_suffix(1);
    if (text.empty()) return std::nullopt;

    // bare integer epoch
    if (text.find('-', 1) == std::string_view::npos &&
        text.find(':') == std::string_view::npos) {
        int64_t v = 0;
        auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec == std::errc{} && p == text.data() + text.size()) return v;
        return std::nullopt;
    }

    if (text.size() < 10) return std::nullopt;
    auto date = CalDate::parse(text.substr(0, 10));
    if (!date) return std::nullopt;
    int64_t ts = date->start_ts();
    if (text.size() == 10) return ts;
    if (text[10] != ' ' && text[10] != 'T') return std::nullopt;
    std::string_view rest = text.substr(11);
    // strip UTC suffixes; non-UTC offsets are not accepted
    if (!rest.empty() && (rest.back() == 'Z' || rest.back() == 'z'))
        rest.remove_suffix(1);
    if (auto plus = rest.find('+'); plus != std::string_view::npos) {
        auto off = rest.substr(plus + 1);
        if (off != "00" && off != "0000" && off != "00:00") return std::nullopt;
        rest = rest.substr(0, plus);
    }
    if (rest.size() < 5) return std::nullopt;
    unsigned hh = 0, mm = 0, ss = 0;
    auto num = [&](std::string_view s, unsigned& out) {
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        return ec == std::errc{} && p == s.data() + s.size();
    };
    if (!num(rest.substr(0, 2), hh) || rest[2] != ':' || !num(rest.substr(3, 2), mm))
        return std::nullopt;
    if (rest.size() >= 8) {
        if (rest[5] != ':' || !num(rest.substr(6, 2), ss)) return std::nullopt;
    } else if (rest.size() != 5) {
        return std::nullopt;
    }
    if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
    return ts + hh * 3600 + mm * 60 + ss;
}

uint64_t fnv1a64(const void* data, size_t len, uint64_t seed) {
    const auto* p = static_cast<const uint8_t*>(data);
    uint64_t h = seed;
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace rovwl
