#include "rovwl/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace rovwl::ingest {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

// Calls fn(line_no, line) for each line, 1-based, trimmed.
template <typename Fn>
void for_lines(std::string_view text, Fn fn) {
    size_t line_no = 0;
    size_t start = 0;
    while (start <= text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = trim(text.substr(start, end - start));
        start = end + 1;
        fn(++line_no, line);
    }
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    size_t start = 0;
    while (true) {
        size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    // strtod needs a NUL-terminated buffer
    std::string buf(s);
    char* endp = nullptr;
    double v = std::strtod(buf.c_str(), &endp);
    if (endp != buf.c_str() + buf.size()) return std::nullopt;
    return v;
}

std::string format_double(double v) {
    nlohmann::json j = v;
    return j.dump();  // shortest round-trip representation
}

}  // namespace

// --- RelGraph ---------------------------------------------------------------

bool RelGraph::add_provider_customer(Asn provider, Asn customer) {
    if (provider == customer) return false;
    if (p2c_.count({customer, provider})) return false;  // conflicting direction
    p2c_.insert({provider, customer});
    return true;
}

bool RelGraph::add_peer(Asn a, Asn b) {
    if (a == b) return false;
    peers_.insert({std::min(a, b), std::max(a, b)});
    return true;
}

bool RelGraph::has_pc(Asn a, Asn b) const {
    return p2c_.count({a, b}) > 0 || p2c_.count({b, a}) > 0;
}

bool RelGraph::has_peer(Asn a, Asn b) const {
    return peers_.count({std::min(a, b), std::max(a, b)}) > 0;
}

RelGraphParseResult parse_as_rel(std::string_view text) {
    RelGraphParseResult res;
    for_lines(text, [&](size_t line_no, std::string_view line) {
        if (line.empty() || line.front() == '#') return;
        auto cols = split(line, '|');
        if (cols.size() < 3) {
            res.diagnostics.push_back({line_no, "expected asn|asn|type"});
            return;
        }
        auto a = parse_asn(trim(cols[0]));
        auto b = parse_asn(trim(cols[1]));
        if (!a || !b) {
            res.diagnostics.push_back({line_no, "non-integer ASN"});
            return;
        }
        auto type = trim(cols[2]);
        if (type == "-1") {
            if (!res.graph.add_provider_customer(*a, *b))
                res.diagnostics.push_back({line_no, "self-edge or conflicting direction"});
        } else if (type == "0") {
            if (!res.graph.add_peer(*a, *b))
                res.diagnostics.push_back({line_no, "self-edge"});
        } else {
            res.diagnostics.push_back({line_no, "unknown relationship type"});
        }
    });
    return res;
}

std::string to_as_rel(const RelGraph& g) {
    std::string out;
    for (const auto& [p, c] : g.provider_customer()) {
        out += std::to_string(p.value) + "|" + std::to_string(c.value) + "|-1\n";
    }
    for (const auto& [a, b] : g.peers()) {
        out += std::to_string(a.value) + "|" + std::to_string(b.value) + "|0\n";
    }
    return out;
}

// --- OrgMap -------------------------------------------------------------------

const std::string* OrgMap::org_of(Asn asn) const {
    auto it = map_.find(asn);
    return it == map_.end() ? nullptr : &it->second;
}

bool OrgMap::same_org(Asn a, Asn b) const {
    if (a == b) return true;
    const std::string* oa = org_of(a);
    const std::string* ob = org_of(b);
    return oa && ob && *oa == *ob;
}

OrgMapParseResult parse_as2org(std::string_view text) {
    OrgMapParseResult res;
    for_lines(text, [&](size_t line_no, std::string_view line) {
        if (line.empty()) return;
        nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) {
            res.diagnostics.push_back({line_no, "not a JSON object"});
            return;
        }
        if (obj.contains("type") && obj["type"].is_string() &&
            obj["type"].get<std::string>() != "ASN")
            return;  // organization records and friends
        const char* asn_key = obj.contains("aut") ? "aut"
                             : obj.contains("asn") ? "asn"
                                                   : nullptr;
        if (!asn_key) return;  // unknown record shape
        std::optional<Asn> asn;
        if (obj[asn_key].is_string()) {
            asn = parse_asn(obj[asn_key].get<std::string>());
        } else if (obj[asn_key].is_number_integer()) {
            asn = Asn{obj[asn_key].get<uint32_t>()};
        }
        if (!asn) {
            res.diagnostics.push_back({line_no, "bad ASN"});
            return;
        }
        const char* org_key = obj.contains("organizationId") ? "organizationId"
                              : obj.contains("org_id")       ? "org_id"
                                                             : nullptr;
        if (!org_key || !obj[org_key].is_string()) {
            res.diagnostics.push_back({line_no, "missing org id"});
            return;
        }
        std::string org = obj[org_key].get<std::string>();
        if (const std::string* prev = res.map.org_of(*asn); prev && *prev != org) {
            res.diagnostics.push_back({line_no, "ASN remapped to a different org"});
        }
        res.map.set(*asn, std::move(org));  // last record wins
    });
    return res;
}

std::string to_as2org(const OrgMap& m) {
    std::string out;
    for (const auto& [asn, org] : m.entries()) {
        nlohmann::json obj;
        obj["type"] = "ASN";
        obj["asn"] = std::to_string(asn.value);
        obj["organizationId"] = org;
        out += obj.dump();
        out += '\n';
    }
    return out;
}

// --- Hegemony -----------------------------------------------------------------

std::optional<double> HegemonySeries::value_at(int64_t t) const {
    auto it = std::upper_bound(samples.begin(), samples.end(), t,
                               [](int64_t lhs, const HegemonySample& s) {
                                   return lhs < s.ts;
                               });
    if (it == samples.begin()) return std::nullopt;
    return std::prev(it)->value;
}

const HegemonySeries* HegemonyStore::find_global(Asn origin) const {
    auto it = global_.find(origin);
    return it == global_.end() ? nullptr : &it->second;
}

const HegemonySeries* HegemonyStore::find_local(Asn origin, Asn dependent) const {
    auto it = local_.find({origin, dependent});
    return it == local_.end() ? nullptr : &it->second;
}

HegemonyParseResult parse_hegemony(std::string_view text) {
    HegemonyParseResult res;
    for_lines(text, [&](size_t line_no, std::string_view line) {
        if (line.empty() || line.front() == '#') return;
        auto cols = split(line, ',');
        if (cols.size() < 4) {
            res.diagnostics.push_back({line_no, "expected timebin,originasn,asn,hege"});
            return;
        }
        if (line_no == 1 && trim(cols[0]) == "timebin") return;  // header
        auto ts = parse_timestamp(trim(cols[0]));
        auto origin = parse_asn(trim(cols[1]));
        auto asn = parse_asn(trim(cols[2]));
        auto value = parse_double(cols[3]);
        if (!ts || !origin || !asn || !value) {
            res.diagnostics.push_back({line_no, "malformed row"});
            return;
        }
        double v = *value;
        if (v < 0.0 || v > 1.0) {
            v = std::clamp(v, 0.0, 1.0);
            res.diagnostics.push_back({line_no, "hegemony value clamped to [0,1]"});
        }
        HegemonySeries* series = nullptr;
        if (origin->value == 0 && asn->value == 0) {
            res.diagnostics.push_back({line_no, "no scope ASN"});
            return;
        }
        if (origin->value == 0) {
            series = &res.store.global(*asn);
        } else if (asn->value == 0) {
            series = &res.store.global(*origin);
        } else {
            series = &res.store.local(*origin, *asn);
        }
        series->samples.push_back({*ts, v});
    });
    res.store.normalize();
    return res;
}

void HegemonyStore::normalize() {
    auto fix = [](HegemonySeries& s) {
        std::stable_sort(s.samples.begin(), s.samples.end(),
                         [](const HegemonySample& a, const HegemonySample& b) {
                             return a.ts < b.ts;
                         });
        // keep the last sample of each duplicate timebin
        std::vector<HegemonySample> out;
        out.reserve(s.samples.size());
        for (const HegemonySample& sample : s.samples) {
            if (!out.empty() && out.back().ts == sample.ts)
                out.back() = sample;
            else
                out.push_back(sample);
        }
        s.samples = std::move(out);
    };
    for (auto& [k, s] : global_) fix(s);
    for (auto& [k, s] : local_) fix(s);
}

std::string to_hegemony(const HegemonyStore& s) {
    std::string out = "timebin,originasn,asn,hege\n";
    for (const auto& [asn, series] : s.global_series()) {
        for (const auto& sample : series.samples) {
            out += std::to_string(sample.ts) + ",0," + std::to_string(asn.value) + "," +
                   format_double(sample.value) + "\n";
        }
    }
    for (const auto& [key, series] : s.local_series()) {
        for (const auto& sample : series.samples) {
            out += std::to_string(sample.ts) + "," + std::to_string(key.first.value) +
                   "," + std::to_string(key.second.value) + "," +
                   format_double(sample.value) + "\n";
        }
    }
    return out;
}

// --- IRR ------------------------------------------------------------------------

void IrrIndex::add(const IrrRoute& r) {
    if (std::find(all_.begin(), all_.end(), r) != all_.end()) return;
    all_.push_back(r);
    trie_.at(r.prefix).insert(r.origin);
}

bool IrrIndex::validates(Asn origin, const Prefix& p) const {
    for (const auto* origins : trie_.covering(p)) {
        if (origins->count(origin)) return true;
    }
    return false;
}

IrrParseResult parse_irr(std::string_view text) {
    IrrParseResult res;
    std::optional<Prefix> route;
    std::optional<Asn> origin;
    std::string source;
    size_t para_start = 1;
    bool in_para = false;

    auto flush = [&](size_t end_line) {
        if (!in_para) return;
        if (route && origin) {
            res.index.add({*route, *origin, source});
        } else if (route || origin) {
            res.diagnostics.push_back(
                {para_start, "paragraph skipped: needs both route and origin"});
        }
        (void)end_line;
        route.reset();
        origin.reset();
        source.clear();
        in_para = false;
    };

    for_lines(text, [&](size_t line_no, std::string_view line) {
        if (line.empty()) {
            flush(line_no);
            return;
        }
        if (!in_para) {
            in_para = true;
            para_start = line_no;
        }
        auto colon = line.find(':');
        if (colon == std::string_view::npos) return;
        std::string_view key = trim(line.substr(0, colon));
        std::string_view val = trim(line.substr(colon + 1));
        if (key == "route" || key == "route6") {
            auto p = Prefix::parse(val);
            if (p)
                route = p;
            else
                res.diagnostics.push_back({line_no, "bad route prefix"});
        } else if (key == "origin") {
            auto a = parse_asn(val);
            if (a)
                origin = a;
            else
                res.diagnostics.push_back({line_no, "bad origin"});
        } else if (key == "source") {
            source = std::string(val);
        }
    });
    flush(0);
    return res;
}

std::string to_irr(const IrrIndex& idx) {
    std::vector<IrrRoute> routes = idx.routes();
    std::sort(routes.begin(), routes.end());
    std::string out;
    for (const IrrRoute& r : routes) {
        out += (r.prefix.family() == Family::v4 ? "route: " : "route6: ") +
               r.prefix.str() + "\n";
        out += "origin: AS" + std::to_string(r.origin.value) + "\n";
        if (!r.source.empty()) out += "source: " + r.source + "\n";
        out += "\n";
    }
    return out;
}

// --- Geo ---------------------------------------------------------------------------

void GeoIndex::add_block(const Prefix& network, GeoPoint p) {
    trie_->at(network) = p;
    blocks_.emplace_back(network, p);
}

std::optional<GeoPoint> GeoIndex::locate(const Prefix& p) const {
    // LPM on the network address: walk the full address depth
    Prefix host = Prefix::from_bytes(p.family(), p.bytes(), p.family_max_length());
    const GeoPoint* hit = trie_->longest_match(host);
    if (!hit) return std::nullopt;
    return *hit;
}

void GeoIndex::add_asn_prefix(Asn asn, const Prefix& p) {
    asn_prefixes_[asn].push_back(p);
}

void GeoIndex::finalize_asn_prefixes() {
    for (auto& [asn, list] : asn_prefixes_) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
}

const std::vector<Prefix>* GeoIndex::prefixes_of(Asn asn) const {
    auto it = asn_prefixes_.find(asn);
    return it == asn_prefixes_.end() ? nullptr : &it->second;
}

GeoParseResult parse_geo(std::string_view text) {
    GeoParseResult res;
    for_lines(text, [&](size_t line_no, std::string_view line) {
        if (line.empty() || line.front() == '#') return;
        auto cols = split(line, ',');
        if (cols.size() < 3) {
            res.diagnostics.push_back({line_no, "expected network,latitude,longitude"});
            return;
        }
        if (line_no == 1 && trim(cols[0]) == "network") return;  // header
        auto prefix = Prefix::parse(trim(cols[0]));
        auto lat = parse_double(cols[1]);
        auto lon = parse_double(cols[2]);
        if (!prefix || !lat || !lon) {
            res.diagnostics.push_back({line_no, "malformed row"});
            return;
        }
        if (*lat < -90.0 || *lat > 90.0 || *lon < -180.0 || *lon > 180.0) {
            res.diagnostics.push_back({line_no, "coordinates out of range"});
            return;
        }
        res.index.add_block(*prefix, {*lat, *lon});
    });
    return res;
}

std::string to_geo(const GeoIndex& idx) {
    auto blocks = idx.blocks();
    std::sort(blocks.begin(), blocks.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::string out = "network,latitude,longitude\n";
    Prefix last;
    bool first = true;
    for (const auto& [p, g] : blocks) {
        if (!first && p == last) continue;  // later add_block overwrote the trie slot
        first = false;
        last = p;
        out += p.str() + "," + format_double(g.lat) + "," + format_double(g.lon) + "\n";
    }
    return out;
}

// --- SnapshotStore ----------------------------------------------------------------

const char* dataset_dir(Dataset d) {
    switch (d) {
        case Dataset::Vrps: return "vrps";
        case Dataset::AsRel: return "as_rel";
        case Dataset::As2Org: return "as2org";
        case Dataset::Hegemony: return "hegemony";
        case Dataset::Irr: return "irr";
        case Dataset::Geo: return "geo";
    }
    return "?";
}

std::optional<Dataset> dataset_from_dir(std::string_view name) {
    for (Dataset d : {Dataset::Vrps, Dataset::AsRel, Dataset::As2Org,
                      Dataset::Hegemony, Dataset::Irr, Dataset::Geo}) {
        if (name == dataset_dir(d)) return d;
    }
    return std::nullopt;
}

SnapshotStore SnapshotStore::open(const std::string& dir) {
    SnapshotStore store;
    store.dir_ = dir;
    fs::create_directories(dir);
    fs::path manifest_path = fs::path(dir) / "manifest.json";
    if (!fs::exists(manifest_path)) return store;

    std::ifstream in(manifest_path);
    nlohmann::json manifest = nlohmann::json::parse(in, nullptr, false);
    if (manifest.is_discarded() || !manifest.is_object()) {
        store.diagnostics.push_back({0, "unreadable manifest.json"});
        return store;
    }
    for (auto& [kind_name, dates] : manifest.items()) {
        auto kind = dataset_from_dir(kind_name);
        if (!kind || !dates.is_array()) continue;
        for (const auto& date_str : dates) {
            if (!date_str.is_string()) continue;
            auto date = CalDate::parse(date_str.get<std::string>());
            if (!date) continue;
            fs::path file = fs::path(dir) / kind_name / date_str.get<std::string>();
            std::ifstream f(file);
            if (!f) {
                store.diagnostics.push_back({0, "missing snapshot file " + file.string()});
                continue;
            }
            std::stringstream buf;
            buf << f.rdbuf();
            std::string text = buf.str();
            // parse without re-writing the file
            std::string saved_dir;
            std::swap(saved_dir, store.dir_);
            auto diags = store.put_text(*kind, *date, text);
            std::swap(saved_dir, store.dir_);
            store.diagnostics.insert(store.diagnostics.end(), diags.begin(), diags.end());
        }
    }
    return store;
}

std::vector<Diagnostic> SnapshotStore::put_text(Dataset kind, CalDate date,
                                                std::string_view raw) {
    std::vector<Diagnostic> diags;
    switch (kind) {
        case Dataset::Vrps: {
            auto res = parse_vrp_csv(raw);
            vrps_[date] = std::make_shared<RoaIndex>(RoaIndex::build(res.vrps));
            diags = std::move(res.diagnostics);
            break;
        }
        case Dataset::AsRel: {
            auto res = parse_as_rel(raw);
            rel_[date] = std::make_shared<RelGraph>(std::move(res.graph));
            diags = std::move(res.diagnostics);
            break;
        }
        case Dataset::As2Org: {
            auto res = parse_as2org(raw);
            orgs_[date] = std::make_shared<OrgMap>(std::move(res.map));
            diags = std::move(res.diagnostics);
            break;
        }
        case Dataset::Hegemony: {
            auto res = parse_hegemony(raw);
            hegemony_[date] = std::make_shared<HegemonyStore>(std::move(res.store));
            diags = std::move(res.diagnostics);
            break;
        }
        case Dataset::Irr: {
            auto res = parse_irr(raw);
            irr_[date] = std::make_shared<IrrIndex>(std::move(res.index));
            diags = std::move(res.diagnostics);
            break;
        }
        case Dataset::Geo: {
            auto res = parse_geo(raw);
            geo_[date] = std::make_shared<GeoIndex>(std::move(res.index));
            diags = std::move(res.diagnostics);
            break;
        }
    }
    if (!dir_.empty()) write_through(kind, date, raw);
    return diags;
}

std::shared_ptr<const RoaIndex> SnapshotStore::vrps_at(CalDate d) const {
    return latest(vrps_, d);
}
std::shared_ptr<const RelGraph> SnapshotStore::rel_at(CalDate d) const {
    return latest(rel_, d);
}
std::shared_ptr<const OrgMap> SnapshotStore::orgs_at(CalDate d) const {
    return latest(orgs_, d);
}
std::shared_ptr<const HegemonyStore> SnapshotStore::hegemony_at(CalDate d) const {
    return latest(hegemony_, d);
}
std::shared_ptr<const IrrIndex> SnapshotStore::irr_at(CalDate d) const {
    return latest(irr_, d);
}
std::shared_ptr<const GeoIndex> SnapshotStore::geo_at(CalDate d) const {
    return latest(geo_, d);
}

std::optional<CalDate> SnapshotStore::latest_date(Dataset kind, CalDate at) const {
    auto pick = [&](const auto& m) -> std::optional<CalDate> {
        auto it = m.upper_bound(at);
        if (it == m.begin()) return std::nullopt;
        return std::prev(it)->first;
    };
    switch (kind) {
        case Dataset::Vrps: return pick(vrps_);
        case Dataset::AsRel: return pick(rel_);
        case Dataset::As2Org: return pick(orgs_);
        case Dataset::Hegemony: return pick(hegemony_);
        case Dataset::Irr: return pick(irr_);
        case Dataset::Geo: return pick(geo_);
    }
    return std::nullopt;
}

std::vector<CalDate> SnapshotStore::dates(Dataset kind) const {
    std::vector<CalDate> out;
    auto fill = [&](const auto& m) {
        for (const auto& [d, _] : m) out.push_back(d);
    };
    switch (kind) {
        case Dataset::Vrps: fill(vrps_); break;
        case Dataset::AsRel: fill(rel_); break;
        case Dataset::As2Org: fill(orgs_); break;
        case Dataset::Hegemony: fill(hegemony_); break;
        case Dataset::Irr: fill(irr_); break;
        case Dataset::Geo: fill(geo_); break;
    }
    return out;
}

void SnapshotStore::write_through(Dataset kind, CalDate date, std::string_view raw) {
    fs::path kind_dir = fs::path(dir_) / dataset_dir(kind);
    fs::create_directories(kind_dir);
    std::ofstream out(kind_dir / date.str(), std::ios::binary | std::ios::trunc);
    out.write(raw.data(), std::streamsize(raw.size()));
    write_manifest();
}

void SnapshotStore::write_manifest() const {
    nlohmann::json manifest;
    for (Dataset d : {Dataset::Vrps, Dataset::AsRel, Dataset::As2Org,
                      Dataset::Hegemony, Dataset::Irr, Dataset::Geo}) {
        auto ds = dates(d);
        if (ds.empty()) continue;
        auto& arr = manifest[dataset_dir(d)] = nlohmann::json::array();
        for (CalDate cd : ds) arr.push_back(cd.str());
    }
    std::ofstream out(fs::path(dir_) / "manifest.json", std::ios::trunc);
    out << manifest.dump(2) << "\n";
}

}  // namespace rovwl::ingest
