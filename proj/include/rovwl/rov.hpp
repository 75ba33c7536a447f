#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rovwl/net.hpp"
#include "rovwl/prefix_trie.hpp"

namespace rovwl {

// Validated ROA payload.
struct Vrp {
    Asn asn;
    Prefix prefix;
    uint8_t max_length = 0;

    auto operator<=>(const Vrp&) const = default;
};

struct Announcement {
    Asn origin;                  // == as_path.back()
    Prefix prefix;
    std::vector<Asn> as_path;    // origin last
    int64_t ts = 0;
    std::optional<Asn> peer;
};

// Dedup key for a route: one entry per (origin, prefix).
struct RouteKey {
    Asn origin;
    Prefix prefix;

    auto operator<=>(const RouteKey&) const = default;
    std::string str() const { return "AS" + std::to_string(origin.value) + " " + prefix.str(); }
};

enum class Validity : uint8_t { Valid, Invalid, Unknown };

const char* to_string(Validity v);

struct RpkiStatus {
    Validity validity = Validity::Unknown;
    std::vector<Vrp> matched_vrps;  // all covering VRPs, most specific first
};

// Immutable after build; lookups are pure and safe to share across threads.
class RoaIndex {
public:
    RoaIndex() = default;
    static RoaIndex build(const std::vector<Vrp>& vrps);

    // Covering VRPs in descending prefix-length order.
    std::vector<Vrp> covering(const Prefix& p) const;

    RpkiStatus validate(const Announcement& ann) const;

    size_t size() const { return count_; }
    const std::vector<Vrp>& vrps() const { return all_; }

private:
    PrefixTrie<std::vector<Vrp>> trie_;
    std::vector<Vrp> all_;  // deduplicated, sorted
    size_t count_ = 0;
};

// --- file formats -----------------------------------------------------------

struct VrpParseResult {
    std::vector<Vrp> vrps;
    std::vector<Diagnostic> diagnostics;
};

// CSV with header "ASN,IP Prefix,Max Length,Trust Anchor"; ASN accepted as
// "AS64512" or bare integer. Malformed records are rejected per line.
VrpParseResult parse_vrp_csv(std::string_view text);
std::string to_vrp_csv(const std::vector<Vrp>& vrps);

struct AnnouncementParseResult {
    std::vector<Announcement> announcements;
    std::vector<Diagnostic> diagnostics;
};

// JSON-lines, one object per line: ts (integer seconds), peer_asn, prefix,
// as_path (array of integers, origin last). Unknown fields are ignored;
// AS_SET-style nested path elements are rejected with a diagnostic.
AnnouncementParseResult parse_announcements_jsonl(std::string_view text);
std::string to_announcements_jsonl(const std::vector<Announcement>& anns);

}  // namespace rovwl

template <>
struct std::hash<rovwl::RouteKey> {
    size_t operator()(const rovwl::RouteKey& k) const noexcept {
        return std::hash<rovwl::Prefix>{}(k.prefix) * 1000003ULL ^ k.origin.value;
    }
};
