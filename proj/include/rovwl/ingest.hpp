#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rovwl/net.hpp"
#include "rovwl/prefix_trie.hpp"
#include "rovwl/rov.hpp"

namespace rovwl::ingest {

// --- AS relationships (CAIDA serial-1) ---------------------------------------

class RelGraph {
public:
    // Rejects self-edges and edges that would put (a,b) in both
    // provider->customer directions within one snapshot.
    bool add_provider_customer(Asn provider, Asn customer);
    bool add_peer(Asn a, Asn b);

    bool has_pc(Asn a, Asn b) const;    // either direction
    bool has_peer(Asn a, Asn b) const;

    size_t edge_count() const { return p2c_.size() + peers_.size(); }
    const std::set<std::pair<Asn, Asn>>& provider_customer() const { return p2c_; }
    const std::set<std::pair<Asn, Asn>>& peers() const { return peers_; }  // min-first

private:
    std::set<std::pair<Asn, Asn>> p2c_;
    std::set<std::pair<Asn, Asn>> peers_;
};

struct RelGraphParseResult {
    RelGraph graph;
    std::vector<Diagnostic> diagnostics;
};

// "asn|asn|type" lines, type -1 = provider->customer, 0 = peer; '#' comments.
RelGraphParseResult parse_as_rel(std::string_view text);
std::string to_as_rel(const RelGraph& g);

// --- AS -> organization (CAIDA as2org JSONL) ---------------------------------

class OrgMap {
public:
    void set(Asn asn, std::string org_id) { map_[asn] = std::move(org_id); }
    const std::string* org_of(Asn asn) const;
    bool same_org(Asn a, Asn b) const;  // reflexive on identical ASNs
    size_t size() const { return map_.size(); }
    const std::map<Asn, std::string>& entries() const { return map_; }

private:
    std::map<Asn, std::string> map_;
};

struct OrgMapParseResult {
    OrgMap map;
    std::vector<Diagnostic> diagnostics;
};

// JSON-lines dumps; records of type "ASN" carry asn/aut + organizationId.
// Unknown record types are ignored, missing org ids skip the record.
OrgMapParseResult parse_as2org(std::string_view text);
std::string to_as2org(const OrgMap& m);

// --- AS hegemony (IHR) --------------------------------------------------------

struct HegemonySample {
    int64_t ts = 0;
    double value = 0;  // clamped to [0,1]

    auto operator<=>(const HegemonySample&) const = default;
};

struct HegemonySeries {
    std::vector<HegemonySample> samples;  // strictly increasing timestamps

    // Nearest sample at or before t.
    std::optional<double> value_at(int64_t t) const;
};

class HegemonyStore {
public:
    HegemonySeries& global(Asn origin) { return global_[origin]; }
    HegemonySeries& local(Asn origin, Asn dependent) {
        return local_[{origin, dependent}];
    }
    const HegemonySeries* find_global(Asn origin) const;
    const HegemonySeries* find_local(Asn origin, Asn dependent) const;
    size_t series_count() const { return global_.size() + local_.size(); }

    // Time-sorts every series; duplicate timebins keep the last sample seen.
    void normalize();

    const std::map<Asn, HegemonySeries>& global_series() const { return global_; }
    const std::map<std::pair<Asn, Asn>, HegemonySeries>& local_series() const {
        return local_;
    }

private:
    std::map<Asn, HegemonySeries> global_;
    std::map<std::pair<Asn, Asn>, HegemonySeries> local_;
};

struct HegemonyParseResult {
    HegemonyStore store;
    std::vector<Diagnostic> diagnostics;
};

// CSV "timebin,originasn,asn,hege". originasn == 0 marks a global-hegemony
// row for asn. Values outside [0,1] are clamped with a warning.
HegemonyParseResult parse_hegemony(std::string_view text);
std::string to_hegemony(const HegemonyStore& s);

// --- IRR route objects (RPSL) --------------------------------------------------

struct IrrRoute {
    Prefix prefix;
    Asn origin;
    std::string source;

    auto operator<=>(const IrrRoute&) const = default;
};

class IrrIndex {
public:
    void add(const IrrRoute& r);
    // Any object with this origin whose prefix equals or covers `p`.
    bool validates(Asn origin, const Prefix& p) const;
    size_t size() const { return all_.size(); }
    bool empty() const { return all_.empty(); }
    const std::vector<IrrRoute>& routes() const { return all_; }

private:
    PrefixTrie<std::set<Asn>> trie_;
    std::vector<IrrRoute> all_;
};

struct IrrParseResult {
    IrrIndex index;
    std::vector<Diagnostic> diagnostics;
};

// Blank-line separated RPSL paragraphs with route:/route6: and origin:
// attributes; paragraphs missing either attribute are skipped.
IrrParseResult parse_irr(std::string_view text);
std::string to_irr(const IrrIndex& idx);

// --- prefix geolocation ---------------------------------------------------------

struct GeoPoint {
    double lat = 0;
    double lon = 0;
};

class GeoIndex {
public:
    void add_block(const Prefix& network, GeoPoint p);
    // Longest-prefix match on the network address of `p`.
    std::optional<GeoPoint> locate(const Prefix& p) const;

    // Per-ASN prefix list, joined at runtime from the VRP file and the day's
    // announcements (not part of the CSV snapshot).
    void add_asn_prefix(Asn asn, const Prefix& p);
    void finalize_asn_prefixes();  // sort + dedup for deterministic sampling
    const std::vector<Prefix>* prefixes_of(Asn asn) const;

    size_t block_count() const { return blocks_.size(); }
    const std::vector<std::pair<Prefix, GeoPoint>>& blocks() const { return blocks_; }

private:
    std::shared_ptr<PrefixTrie<GeoPoint>> trie_ = std::make_shared<PrefixTrie<GeoPoint>>();
    std::vector<std::pair<Prefix, GeoPoint>> blocks_;
    std::map<Asn, std::vector<Prefix>> asn_prefixes_;
};

struct GeoParseResult {
    GeoIndex index;
    std::vector<Diagnostic> diagnostics;
};

// CSV "network,latitude,longitude"; rows with out-of-range coordinates are
// rejected.
GeoParseResult parse_geo(std::string_view text);
std::string to_geo(const GeoIndex& idx);

// --- snapshot store --------------------------------------------------------------

enum class Dataset : uint8_t { Vrps, AsRel, As2Org, Hegemony, Irr, Geo };

const char* dataset_dir(Dataset d);
std::optional<Dataset> dataset_from_dir(std::string_view name);

// Daily (UTC) snapshots of the six parsed datasets. latest_at(d) returns the
// newest snapshot dated <= d. Single writer, shareable read-only artifacts.
class SnapshotStore {
public:
    SnapshotStore() = default;

    // Persistent store rooted at `dir`; parses everything listed in the
    // manifest. Parse diagnostics are accumulated in `diagnostics`.
    static SnapshotStore open(const std::string& dir);

    // Parses and stores `raw` under (kind, date); when the store has a root
    // directory the text and manifest are written through.
    std::vector<Diagnostic> put_text(Dataset kind, CalDate date, std::string_view raw);

    std::shared_ptr<const RoaIndex> vrps_at(CalDate d) const;
    std::shared_ptr<const RelGraph> rel_at(CalDate d) const;
    std::shared_ptr<const OrgMap> orgs_at(CalDate d) const;
    std::shared_ptr<const HegemonyStore> hegemony_at(CalDate d) const;
    std::shared_ptr<const IrrIndex> irr_at(CalDate d) const;
    std::shared_ptr<const GeoIndex> geo_at(CalDate d) const;

    std::optional<CalDate> latest_date(Dataset kind, CalDate at) const;
    std::vector<CalDate> dates(Dataset kind) const;

    std::vector<Diagnostic> diagnostics;

private:
    template <typename T>
    using Series = std::map<CalDate, std::shared_ptr<const T>>;

    template <typename T>
    static std::shared_ptr<const T> latest(const Series<T>& m, CalDate d) {
        auto it = m.upper_bound(d);
        if (it == m.begin()) return nullptr;
        return std::prev(it)->second;
    }

    void write_through(Dataset kind, CalDate date, std::string_view raw);
    void write_manifest() const;

    std::string dir_;
    Series<RoaIndex> vrps_;
    Series<RelGraph> rel_;
    Series<OrgMap> orgs_;
    Series<HegemonyStore> hegemony_;
    Series<IrrIndex> irr_;
    Series<GeoIndex> geo_;
};

}  // namespace rovwl::ingest
