#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "rovwl/ingest.hpp"
#include "rovwl/net.hpp"
#include "rovwl/rov.hpp"

namespace rovwl {

enum class FeatureId : uint8_t {
    OriginMatch = 0,
    Pc = 1,
    Moas = 2,
    Parent = 3,
    Depen = 4,
    AltSources = 5,
    AsDist = 6,
};

inline constexpr size_t kFeatureCount = 7;
inline constexpr std::array<const char*, kFeatureCount> kFeatureNames = {
    "origin_match", "pc", "moas", "parent", "depen", "alt_sources", "as_dist"};

// The seven per-route features. Defaults (all zero, as_dist = 1) describe a
// pair with no detectable relationship, i.e. the hijack-looking corner.
struct FeatureVector {
    double origin_match = 0;
    double pc = 0;
    double moas = 0;
    double parent = 0;
    double depen = 0;
    double alt_sources = 0;
    double as_dist = 1.0;
    uint8_t missing_mask = 0;  // inputs unavailable; value equals the default

    bool is_missing(FeatureId f) const { return missing_mask >> uint8_t(f) & 1; }
    void mark_missing(FeatureId f) { missing_mask |= uint8_t(1) << uint8_t(f); }

    std::array<double, kFeatureCount> values() const {
        return {origin_match, pc, moas, parent, depen, alt_sources, as_dist};
    }
    double& value(FeatureId f) {
        switch (f) {
            case FeatureId::OriginMatch: return origin_match;
            case FeatureId::Pc: return pc;
            case FeatureId::Moas: return moas;
            case FeatureId::Parent: return parent;
            case FeatureId::Depen: return depen;
            case FeatureId::AltSources: return alt_sources;
            case FeatureId::AsDist: return as_dist;
        }
        return as_dist;
    }

    static FeatureVector all_defaults();  // everything missing
};

// An RPKI-invalid announcement next to the origins of its covering VRPs.
struct ConflictPair {
    Asn bgp_origin;
    std::vector<Asn> roa_origins;  // sorted, unique, non-empty
    Announcement announcement;

    static ConflictPair from_status(const Announcement& ann, const RpkiStatus& st);
};

struct FeatureValue {
    double value = 0;
    bool missing = false;
};

// Per-feature computations. Relational features OR/max over all ROA origins.
double feature_origin_match(const ConflictPair& pair);
double feature_pc(const ConflictPair& pair, const ingest::RelGraph& rel);
FeatureValue feature_moas(const ConflictPair& pair, const ingest::OrgMap* orgs);
double feature_parent(const ConflictPair& pair, const RoaIndex& index);
FeatureValue feature_depen(const ConflictPair& pair, const ingest::HegemonyStore* heg,
                           int64_t t);
FeatureValue feature_alt_sources(const ConflictPair& pair, const ingest::IrrIndex* irr);

// Haversine on a 6371.0 km sphere.
double great_circle_km(ingest::GeoPoint a, ingest::GeoPoint b);

// Median (lower-middle element) of great-circle distances from the announced
// prefix's location to the BGP origin's prefixes; samples uniformly without
// replacement down to 500 prefixes when the origin holds more.
std::optional<double> raw_distance_km(const ConflictPair& pair,
                                      const ingest::GeoIndex& geo, uint64_t seed);

// ASdist = (2/pi)*arctan(d); unlocatable -> 1.0 (the missing default).
double as_dist_scale(double km);
FeatureValue as_dist_from(std::optional<double> km);

struct FeatureContext {
    const RoaIndex* roas = nullptr;            // required
    const ingest::RelGraph* rel = nullptr;     // optional datasets: missing
    const ingest::OrgMap* orgs = nullptr;      // inputs produce defaults with
    const ingest::HegemonyStore* hegemony = nullptr;  // the missing flag set
    const ingest::IrrIndex* irr = nullptr;
    const ingest::GeoIndex* geo = nullptr;
};

// Deterministic for fixed (pair, context, seed); missing data is never an error.
FeatureVector compute_features(const ConflictPair& pair, const FeatureContext& ctx,
                               uint64_t seed);

// --- feature matrix CSV ---------------------------------------------------------

struct FeatureRow {
    RouteKey key;
    int64_t ts = 0;
    FeatureVector features;
    std::optional<bool> hijack_label;  // "benign" / "hijack" column, optional
};

std::string to_feature_csv(const std::vector<FeatureRow>& rows);

struct FeatureCsvParseResult {
    std::vector<FeatureRow> rows;
    std::vector<Diagnostic> diagnostics;
};
FeatureCsvParseResult parse_feature_csv(std::string_view text);

}  // namespace rovwl
