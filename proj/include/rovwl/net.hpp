#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace rovwl {

// 32-bit autonomous system number.
struct Asn {
    uint32_t value = 0;

    auto operator<=>(const Asn&) const = default;
};

// Accepts "AS3215" (case-insensitive prefix) or a bare integer.
std::optional<Asn> parse_asn(std::string_view text);

// IANA special-purpose / reserved origin numbers: 0, AS_TRANS,
// documentation and private-use blocks, 65535 and the 32-bit tail.
bool is_bogon_asn(Asn asn);

enum class Family : uint8_t { v4, v6 };

// An IP prefix in canonical form: bits beyond length() are zero and the
// textual form round-trips (inet_ntop output, lowercase compressed v6).
class Prefix {
public:
    Prefix() = default;

    // "193.2.0.0/15" / "2001:db8::/32". Host bits beyond the length are
    // masked off, so the result is always canonical.
    static std::optional<Prefix> parse(std::string_view text);
    static Prefix from_bytes(Family family, const std::array<uint8_t, 16>& bytes,
                             uint8_t length);

    Family family() const { return family_; }
    uint8_t length() const { return length_; }
    uint8_t family_max_length() const { return family_ == Family::v4 ? 32 : 128; }
    const std::array<uint8_t, 16>& bytes() const { return bytes_; }

    bool bit(uint8_t i) const {
        return (bytes_[i / 8] >> (7 - i % 8)) & 1;
    }

    // Equal or less specific than `other` and on the same address family.
    bool covers(const Prefix& other) const;

    std::string str() const;

    auto operator<=>(const Prefix&) const = default;

private:
    Family family_ = Family::v4;
    uint8_t length_ = 0;
    std::array<uint8_t, 16> bytes_{};  // network order, v4 in the first 4 bytes
};

// UTC calendar day counted from 1970-01-01.
struct CalDate {
    int32_t days = 0;

    static CalDate from_ts(int64_t unix_seconds);
    static std::optional<CalDate> parse(std::string_view text);  // YYYY-MM-DD
    std::string str() const;
    int64_t start_ts() const { return int64_t{days} * 86400; }

    CalDate operator+(int d) const { return {days + d}; }
    CalDate operator-(int d) const { return {days - d}; }
    int operator-(CalDate o) const { return days - o.days; }
    auto operator<=>(const CalDate&) const = default;
};

// Epoch seconds from either a bare integer or an ISO-ish timestamp
// ("YYYY-MM-DD", "YYYY-MM-DD HH:MM:SS", "YYYY-MM-DDTHH:MM:SS", optional
// trailing "Z" / "+00" / "+00:00").
std::optional<int64_t> parse_timestamp(std::string_view text);

// Structured parser diagnostic; tests assert on these, not on log text.
struct Diagnostic {
    size_t line = 0;
    std::string reason;
};

uint64_t fnv1a64(const void* data, size_t len, uint64_t seed = 0xcbf29ce484222325ULL);
uint64_t splitmix64(uint64_t x);

}  // namespace rovwl

template <>
struct std::hash<rovwl::Asn> {
    size_t operator()(const rovwl::Asn& a) const noexcept {
        return std::hash<uint32_t>{}(a.value);
    }
};

template <>
struct std::hash<rovwl::Prefix> {
    size_t operator()(const rovwl::Prefix& p) const noexcept {
        uint64_t h = rovwl::fnv1a64(p.bytes().data(), p.bytes().size());
        h = rovwl::fnv1a64(&h, sizeof(h), h ^ (uint64_t(p.length()) << 8) ^
                                              uint64_t(p.family()));
        return size_t(h);
    }
};
