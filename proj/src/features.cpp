#include "rovwl/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <random>

#include <json.hpp>

namespace rovwl {

FeatureVector FeatureVector::all_defaults() {
    FeatureVector fv;
    for (size_t i = 0; i < kFeatureCount; ++i) fv.mark_missing(FeatureId(i));
    return fv;
}

ConflictPair ConflictPair::from_status(const Announcement& ann, const RpkiStatus& st) {
    ConflictPair pair;
    pair.bgp_origin = ann.origin;
    pair.announcement = ann;
    for (const Vrp& v : st.matched_vrps) pair.roa_origins.push_back(v.asn);
    std::sort(pair.roa_origins.begin(), pair.roa_origins.end());
    pair.roa_origins.erase(
        std::unique(pair.roa_origins.begin(), pair.roa_origins.end()),
        pair.roa_origins.end());
    return pair;
}

double feature_origin_match(const ConflictPair& pair) {
    // Invalidity with a matching covering origin can only be a MaxLength miss.
    return std::binary_search(pair.roa_origins.begin(), pair.roa_origins.end(),
                              pair.bgp_origin)
               ? 1.0
               : 0.0;
}

double feature_pc(const ConflictPair& pair, const ingest::RelGraph& rel) {
    for (Asn roa : pair.roa_origins) {
        if (rel.has_pc(roa, pair.bgp_origin)) return 1.0;
    }
    return 0.0;
}

FeatureValue feature_moas(const ConflictPair& pair, const ingest::OrgMap* orgs) {
    for (Asn roa : pair.roa_origins) {
        if (roa == pair.bgp_origin) return {1.0, false};
    }
    if (!orgs) return {0.0, true};
    const std::string* bgp_org = orgs->org_of(pair.bgp_origin);
    bool any_roa_mapped = false;
    for (Asn roa : pair.roa_origins) {
        const std::string* roa_org = orgs->org_of(roa);
        if (!roa_org) continue;
        any_roa_mapped = true;
        if (bgp_org && *bgp_org == *roa_org) return {1.0, false};
    }
    if (!bgp_org || !any_roa_mapped) return {0.0, true};
    return {0.0, false};
}

double feature_parent(const ConflictPair& pair, const RoaIndex& index) {
    const Prefix& announced = pair.announcement.prefix;
    for (const Vrp& v : index.covering(announced)) {
        if (v.asn == pair.bgp_origin && v.prefix.length() < announced.length())
            return 1.0;
    }
    return 0.0;
}

FeatureValue feature_depen(const ConflictPair& pair, const ingest::HegemonyStore* heg,
                           int64_t t) {
    if (!heg) return {0.0, true};
    bool found = false;
    double best = 0.0;
    for (Asn roa : pair.roa_origins) {
        for (auto [a, b] : {std::pair{roa, pair.bgp_origin},
                            std::pair{pair.bgp_origin, roa}}) {
            const ingest::HegemonySeries* series = heg->find_local(a, b);
            if (!series) continue;
            auto v = series->value_at(t);
            if (!v) continue;
            found = true;
            best = std::max(best, *v);
        }
    }
    if (!found) return {0.0, true};
    return {best, false};
}

FeatureValue feature_alt_sources(const ConflictPair& pair,
                                 const ingest::IrrIndex* irr) {
    if (!irr || irr->empty()) return {0.0, true};
    return {irr->validates(pair.bgp_origin, pair.announcement.prefix) ? 1.0 : 0.0,
            false};
}

double great_circle_km(ingest::GeoPoint a, ingest::GeoPoint b) {
    constexpr double kEarthRadiusKm = 6371.0;
    constexpr double kDeg2Rad = std::numbers::pi / 180.0;
    double lat1 = a.lat * kDeg2Rad, lon1 = a.lon * kDeg2Rad;
    double lat2 = b.lat * kDeg2Rad, lon2 = b.lon * kDeg2Rad;
    double sdlat = std::sin((lat2 - lat1) / 2);
    double sdlon = std::sin((lon2 - lon1) / 2);
    double h = sdlat * sdlat + std::cos(lat1) * std::cos(lat2) * sdlon * sdlon;
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

std::optional<double> raw_distance_km(const ConflictPair& pair,
                                      const ingest::GeoIndex& geo, uint64_t seed) {
    auto roa_side = geo.locate(pair.announcement.prefix);
    if (!roa_side) return std::nullopt;
    const std::vector<Prefix>* prefixes = geo.prefixes_of(pair.bgp_origin);
    if (!prefixes || prefixes->empty()) return std::nullopt;

    constexpr size_t kSampleCap = 500;
    std::vector<const Prefix*> chosen;
    chosen.reserve(std::min(prefixes->size(), kSampleCap));
    if (prefixes->size() > kSampleCap) {
        std::mt19937_64 rng(seed);
        std::vector<size_t> idx(prefixes->size());
        for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        for (size_t i = 0; i < kSampleCap; ++i) {  // partial Fisher-Yates
            std::uniform_int_distribution<size_t> pick(i, idx.size() - 1);
            std::swap(idx[i], idx[pick(rng)]);
            chosen.push_back(&(*prefixes)[idx[i]]);
        }
    } else {
        for (const Prefix& p : *prefixes) chosen.push_back(&p);
    }

    std::vector<double> dists;
    dists.reserve(chosen.size());
    for (const Prefix* p : chosen) {
        auto loc = geo.locate(*p);
        if (!loc) continue;
        dists.push_back(great_circle_km(*roa_side, *loc));
    }
    if (dists.empty()) return std::nullopt;
    // lower-middle element, no averaging
    size_t mid = (dists.size() - 1) / 2;
    std::nth_element(dists.begin(), dists.begin() + mid, dists.end());
    return dists[mid];
}

double as_dist_scale(double km) {
    return 2.0 / std::numbers::pi * std::atan(km);
}

FeatureValue as_dist_from(std::optional<double> km) {
    if (!km) return {1.0, true};
    return {as_dist_scale(*km), false};
}

FeatureVector compute_features(const ConflictPair& pair, const FeatureContext& ctx,
                               uint64_t seed) {
    FeatureVector fv;
    fv.origin_match = feature_origin_match(pair);
    if (ctx.rel) {
        fv.pc = feature_pc(pair, *ctx.rel);
    } else {
        fv.mark_missing(FeatureId::Pc);
    }
    auto moas = feature_moas(pair, ctx.orgs);
    fv.moas = moas.value;
    if (moas.missing) fv.mark_missing(FeatureId::Moas);
    fv.parent = ctx.roas ? feature_parent(pair, *ctx.roas) : 0.0;
    if (!ctx.roas) fv.mark_missing(FeatureId::Parent);
    auto depen = feature_depen(pair, ctx.hegemony, pair.announcement.ts);
    fv.depen = depen.value;
    if (depen.missing) fv.mark_missing(FeatureId::Depen);
    auto alt = feature_alt_sources(pair, ctx.irr);
    fv.alt_sources = alt.value;
    if (alt.missing) fv.mark_missing(FeatureId::AltSources);
    auto dist = as_dist_from(ctx.geo ? raw_distance_km(pair, *ctx.geo, seed)
                                     : std::nullopt);
    fv.as_dist = dist.value;
    if (dist.missing) fv.mark_missing(FeatureId::AsDist);
    return fv;
}

// --- CSV -------------------------------------------------------------------------

namespace {

std::string format_double(double v) {
    nlohmann::json j = v;
    return j.dump();
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

}  // namespace

std::string to_feature_csv(const std::vector<FeatureRow>& rows) {
    std::string out =
        "origin,prefix,ts,origin_match,pc,moas,parent,depen,alt_sources,as_dist,label\n";
    for (const FeatureRow& r : rows) {
        out += std::to_string(r.key.origin.value) + "," + r.key.prefix.str() + "," +
               std::to_string(r.ts);
        for (double v : r.features.values()) {
            out += ",";
            out += format_double(v);
        }
        out += ",";
        if (r.hijack_label) out += *r.hijack_label ? "hijack" : "benign";
        out += "\n";
    }
    return out;
}

FeatureCsvParseResult parse_feature_csv(std::string_view text) {
    FeatureCsvParseResult res;
    size_t line_no = 0;
    size_t start = 0;
    while (start <= text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = trim(text.substr(start, end - start));
        start = end + 1;
        ++line_no;
        if (line.empty()) continue;
        if (line_no == 1 && line.substr(0, 6) == "origin") continue;  // header
        std::vector<std::string_view> cols;
        size_t s = 0;
        while (true) {
            size_t pos = line.find(',', s);
            if (pos == std::string_view::npos) {
                cols.push_back(line.substr(s));
                break;
            }
            cols.push_back(line.substr(s, pos - s));
            s = pos + 1;
        }
        if (cols.size() < 10) {
            res.diagnostics.push_back({line_no, "expected at least 10 columns"});
            continue;
        }
        FeatureRow row;
        auto origin = parse_asn(trim(cols[0]));
        auto prefix = Prefix::parse(trim(cols[1]));
        if (!origin || !prefix) {
            res.diagnostics.push_back({line_no, "bad origin or prefix"});
            continue;
        }
        row.key = {*origin, *prefix};
        auto ts_sv = trim(cols[2]);
        if (auto [p, ec] =
                std::from_chars(ts_sv.data(), ts_sv.data() + ts_sv.size(), row.ts);
            ec != std::errc{} || p != ts_sv.data() + ts_sv.size()) {
            res.diagnostics.push_back({line_no, "bad ts"});
            continue;
        }
        bool ok = true;
        for (size_t i = 0; i < kFeatureCount; ++i) {
            std::string buf(trim(cols[3 + i]));
            char* endp = nullptr;
            double v = std::strtod(buf.c_str(), &endp);
            if (buf.empty() || endp != buf.c_str() + buf.size()) {
                ok = false;
                break;
            }
            row.features.value(FeatureId(i)) = v;
        }
        if (!ok) {
            res.diagnostics.push_back({line_no, "bad feature value"});
            continue;
        }
        if (cols.size() > 10) {
            auto label = trim(cols[10]);
            if (label == "hijack" || label == "1")
                row.hijack_label = true;
            else if (label == "benign" || label == "0")
                row.hijack_label = false;
            else if (!label.empty()) {
                res.diagnostics.push_back({line_no, "bad label"});
                continue;
            }
        }
        res.rows.push_back(std::move(row));
    }
    return res;
}

}  // namespace rovwl
