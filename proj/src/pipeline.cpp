#include "rovwl/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "rovwl/postanalyzer.hpp"

namespace fs = std::filesystem;

namespace rovwl::pipeline {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, std::string_view content) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(content.data(), std::streamsize(content.size()));
}

// --- config -------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

void apply_config_key(PipelineConfig& cfg, std::string_view key,
                      std::string_view value) {
    auto to_double = [&](double lo, double hi) {
        std::string buf(value);
        char* end = nullptr;
        double v = std::strtod(buf.c_str(), &end);
        if (end != buf.c_str() + buf.size() || v < lo || v > hi)
            throw std::invalid_argument("config: bad value for " + std::string(key));
        return v;
    };
    auto to_int = [&](long lo, long hi) {
        std::string buf(value);
        char* end = nullptr;
        long v = std::strtol(buf.c_str(), &end, 10);
        if (end != buf.c_str() + buf.size() || v < lo || v > hi)
            throw std::invalid_argument("config: bad value for " + std::string(key));
        return v;
    };

    if (key == "snapshot_dir") cfg.snapshot_dir = std::string(value);
    else if (key == "model_file") cfg.model_file = std::string(value);
    else if (key == "store_dir") cfg.store_dir = std::string(value);
    else if (key == "reports_dir") cfg.reports_dir = std::string(value);
    else if (key == "alpha") cfg.alpha = to_double(1e-9, 0.5);
    else if (key == "t_thr") cfg.t_thr = to_double(-1.0, 1.0);
    else if (key == "quarantine_days") cfg.quarantine_days = int(to_int(1, 365));
    else if (key == "purge_days") cfg.purge_days = int(to_int(1, 3650));
    else if (key == "seed") {
        std::string buf(value);
        char* end = nullptr;
        unsigned long long v = std::strtoull(buf.c_str(), &end, 10);
        if (end != buf.c_str() + buf.size())
            throw std::invalid_argument("config: bad value for seed");
        cfg.seed = v;
    } else if (key == "http_host") cfg.http_host = std::string(value);
    else if (key == "http_port") cfg.http_port = int(to_int(1, 65535));
    else if (key == "bogon_filter") {
        if (value == "true" || value == "1") cfg.bogon_filter = true;
        else if (value == "false" || value == "0") cfg.bogon_filter = false;
        else throw std::invalid_argument("config: bad value for bogon_filter");
    } else {
        throw std::invalid_argument("config: unknown key " + std::string(key));
    }
}

}  // namespace

PipelineConfig PipelineConfig::parse(std::string_view text) {
    PipelineConfig cfg;
    size_t start = 0;
    while (start <= text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = trim(text.substr(start, end - start));
        start = end + 1;
        if (line.empty() || line.front() == '#' || line.front() == ';') continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw std::invalid_argument("config: expected key = value");
        apply_config_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
    PipelineConfig cfg = parse(read_file(path));
    static constexpr const char* kKeys[] = {
        "snapshot_dir", "model_file", "store_dir",  "reports_dir",
        "alpha",        "t_thr",      "quarantine_days", "purge_days",
        "seed",         "http_host",  "http_port",  "bogon_filter"};
    for (const char* key : kKeys) {
        std::string env = "ROVWL_";
        for (const char* c = key; *c; ++c) env += char(std::toupper(*c));
        if (const char* v = std::getenv(env.c_str())) {
            apply_config_key(cfg, key, v);
        }
    }
    return cfg;
}

std::string PipelineConfig::serialize() const {
    std::ostringstream out;
    out << "snapshot_dir = " << snapshot_dir << "\n"
        << "model_file = " << model_file << "\n"
        << "store_dir = " << store_dir << "\n"
        << "reports_dir = " << reports_dir << "\n"
        << "alpha = " << nlohmann::json(alpha).dump() << "\n"
        << "t_thr = " << nlohmann::json(t_thr).dump() << "\n"
        << "quarantine_days = " << quarantine_days << "\n"
        << "purge_days = " << purge_days << "\n"
        << "seed = " << seed << "\n"
        << "http_host = " << http_host << "\n"
        << "http_port = " << http_port << "\n"
        << "bogon_filter = " << (bogon_filter ? "true" : "false") << "\n";
    return out.str();
}

// --- report -------------------------------------------------------------------

std::string DailyReport::to_json() const {
    nlohmann::json j;
    j["date"] = date.str();
    j["announcements"] = announcements;
    j["parse_errors"] = parse_errors;
    j["bogon_excluded"] = bogon_excluded;
    j["unique_routes"] = unique_routes;
    j["valid"] = valid;
    j["invalid"] = invalid;
    j["unknown"] = unknown;
    j["benign"] = benign;
    j["hijack"] = hijack;
    j["verified"] = verified;
    j["unverified"] = unverified;
    j["new_policy"] = new_policy;
    j["buckets"] = {{"whitelisted", bucket_whitelisted},
                    {"pending", bucket_pending},
                    {"verified_hijack", bucket_verified_hijack},
                    {"unverified_quarantined", bucket_unverified_quarantined},
                    {"denied", bucket_denied}};
    j["hijack_events"] = hijack_events;
    auto& adds = j["whitelist_adds"] = nlohmann::json::array();
    for (const auto& a : whitelist_adds) {
        adds.push_back({{"origin", a.key.origin.value},
                        {"prefix", a.key.prefix.str()},
                        {"provenance", wl::to_string(a.provenance)}});
    }
    auto& purges = j["whitelist_purges"] = nlohmann::json::array();
    for (const auto& p : whitelist_purges) {
        purges.push_back({{"origin", p.key.origin.value},
                          {"prefix", p.key.prefix.str()},
                          {"reason", wl::to_string(p.reason)}});
    }
    auto& expired = j["quarantine_expired"] = nlohmann::json::array();
    for (const auto& k : quarantine_expired) {
        expired.push_back({{"origin", k.origin.value}, {"prefix", k.prefix.str()}});
    }
    auto& causes = j["cause_counts"] = nlohmann::json::object();
    for (const auto& [cause, count] : cause_counts) {
        causes[wl::to_string(cause)] = count;
    }
    j["occurrence"] = {{"tracked", occurrence.tracked},
                       {"multi_day", occurrence.multi_day},
                       {"p80_frequency_days",
                        occurrence.p80_frequency_days
                            ? nlohmann::json(*occurrence.p80_frequency_days)
                            : nlohmann::json()}};
    return j.dump(2) + "\n";
}

double percentile(const std::vector<double>& sorted_values, double q) {
    if (sorted_values.empty() || !(q > 0.0 && q <= 1.0))
        throw std::invalid_argument("percentile: empty input or q out of (0,1]");
    size_t rank = size_t(std::ceil(q * double(sorted_values.size())));
    return sorted_values[rank - 1];
}

std::vector<OccurrenceRow> occurrence_rows(const wl::Store& store) {
    std::vector<OccurrenceRow> rows;
    for (const auto& [key, stat] : store.occurrences()) {
        OccurrenceRow row;
        row.key = key;
        row.occurrences = stat.occurrences;
        row.span_days = stat.last_seen - stat.first_seen;
        if (stat.occurrences >= 2)
            row.frequency_days = double(row.span_days) / double(stat.occurrences - 1);
        rows.push_back(row);
    }
    return rows;
}

std::string occurrence_report_csv(const wl::Store& store) {
    auto rows = occurrence_rows(store);
    std::map<uint32_t, uint64_t> occ_hist;
    std::map<double, uint64_t> freq_hist;
    uint64_t freq_n = 0;
    for (const auto& row : rows) {
        ++occ_hist[row.occurrences];
        if (row.frequency_days) {
            ++freq_hist[*row.frequency_days];
            ++freq_n;
        }
    }
    std::string out = "#rovwl-report-v1\nmetric,value,count,cum_fraction\n";
    auto emit = [&](const char* metric, const auto& hist, uint64_t total) {
        uint64_t cum = 0;
        for (const auto& [value, count] : hist) {
            cum += count;
            out += std::string(metric) + "," + nlohmann::json(value).dump() + "," +
                   std::to_string(count) + "," +
                   nlohmann::json(double(cum) / double(total)).dump() + "\n";
        }
    };
    if (!rows.empty()) emit("occurrences", occ_hist, rows.size());
    if (freq_n > 0) emit("frequency_days", freq_hist, freq_n);
    return out;
}

// --- pipeline --------------------------------------------------------------------

namespace {

uint64_t route_seed(uint64_t base, const RouteKey& key) {
    uint64_t h = fnv1a64(key.prefix.bytes().data(), key.prefix.bytes().size());
    uint8_t tail[6] = {uint8_t(key.prefix.length()), uint8_t(key.prefix.family()),
                       uint8_t(key.origin.value), uint8_t(key.origin.value >> 8),
                       uint8_t(key.origin.value >> 16), uint8_t(key.origin.value >> 24)};
    h = fnv1a64(tail, sizeof(tail), h);
    return splitmix64(base ^ h);
}

}  // namespace

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)) {
    auto loaded = ml::load_model_json(read_file(config_.model_file));
    if (!loaded.weights)
        throw std::runtime_error("model file carries no tightness weights; "
                                 "retrain with the rf family");
    model_ = std::move(loaded.model);
    weights_.w = *loaded.weights;

    snapshots_ = ingest::SnapshotStore::open(config_.snapshot_dir);

    fs::path current = fs::path(config_.store_dir) / "current.json";
    if (fs::exists(current)) {
        store_ = wl::Store::deserialize(read_file(current.string()));
    }
    store_.quarantine_days = config_.quarantine_days;
    store_.purge_days = config_.purge_days;
}

void Pipeline::save_store() const {
    fs::create_directories(config_.store_dir);
    write_file((fs::path(config_.store_dir) / "current.json").string(),
               store_.serialize());
    write_file((fs::path(config_.store_dir) / "whitelist.csv").string(),
               wl::whitelist_to_csv(store_));
    write_file((fs::path(config_.store_dir) / "whitelist.json").string(),
               wl::whitelist_to_json(store_));
    write_file((fs::path(config_.store_dir) / "deny.csv").string(),
               wl::deny_to_csv(store_));
}

DailyReport Pipeline::run_day(const std::string& announcements_path, CalDate date) {
    auto roas = snapshots_.vrps_at(date);
    if (!roas)
        throw std::runtime_error("no VRP snapshot at or before " + date.str());
    std::string text = read_file(announcements_path);

    // rerun idempotence: restore (or record) the day's pre-state
    fs::path pre_path =
        fs::path(config_.store_dir) / "pre" / (date.str() + ".json");
    if (fs::exists(pre_path)) {
        store_ = wl::Store::deserialize(read_file(pre_path.string()));
        store_.quarantine_days = config_.quarantine_days;
        store_.purge_days = config_.purge_days;
    } else {
        write_file(pre_path.string(), store_.serialize());
    }

    auto rel = snapshots_.rel_at(date);
    auto orgs = snapshots_.orgs_at(date);
    auto hegemony = snapshots_.hegemony_at(date);
    auto irr = snapshots_.irr_at(date);
    auto geo_snapshot = snapshots_.geo_at(date);

    DailyReport report;
    report.date = date;

    auto parsed = parse_announcements_jsonl(text);
    report.announcements = parsed.announcements.size() + parsed.diagnostics.size();
    report.parse_errors = parsed.diagnostics.size();

    // bogon origins are excluded before validation
    std::vector<Announcement> kept;
    kept.reserve(parsed.announcements.size());
    for (Announcement& ann : parsed.announcements) {
        if (config_.bogon_filter && is_bogon_asn(ann.origin)) {
            ++report.bogon_excluded;
            continue;
        }
        kept.push_back(std::move(ann));
    }

    // dedup to unique (origin, prefix), first-seen path/timestamp wins
    std::vector<Announcement> unique;
    {
        std::unordered_map<RouteKey, size_t> seen;
        for (Announcement& ann : kept) {
            RouteKey key{ann.origin, ann.prefix};
            if (seen.emplace(key, unique.size()).second)
                unique.push_back(std::move(ann));
        }
    }
    report.unique_routes = unique.size();

    // first pass: validation
    std::map<RouteKey, Validity> statuses;
    std::vector<RpkiStatus> route_status(unique.size());
    for (size_t i = 0; i < unique.size(); ++i) {
        route_status[i] = roas->validate(unique[i]);
        statuses[RouteKey{unique[i].origin, unique[i].prefix}] =
            route_status[i].validity;
        switch (route_status[i].validity) {
            case Validity::Valid: ++report.valid; break;
            case Validity::Unknown: ++report.unknown; break;
            case Validity::Invalid: ++report.invalid; break;
        }
    }

    // day-scoped geo view: coordinate blocks from the snapshot plus the
    // ASN->prefix join from the VRP file and today's vetted announcements.
    // Invalid routes stay out of the join: an unvetted announcement must not
    // place its own prefix inside the origin's footprint.
    std::optional<ingest::GeoIndex> day_geo;
    if (geo_snapshot) {
        day_geo = *geo_snapshot;
        for (const Vrp& v : roas->vrps()) day_geo->add_asn_prefix(v.asn, v.prefix);
        for (size_t i = 0; i < unique.size(); ++i) {
            if (route_status[i].validity != Validity::Invalid)
                day_geo->add_asn_prefix(unique[i].origin, unique[i].prefix);
        }
        day_geo->finalize_asn_prefixes();
    }

    FeatureContext ctx;
    ctx.roas = roas.get();
    ctx.rel = rel.get();
    ctx.orgs = orgs.get();
    ctx.hegemony = hegemony.get();
    ctx.irr = irr.get();
    ctx.geo = day_geo ? &*day_geo : nullptr;

    std::set<RouteKey> sightings;
    std::vector<post::VerifiedRoute> verified_routes;
    std::string verification_jsonl;

    // second pass: classify and route the invalid announcements
    for (size_t i = 0; i < unique.size(); ++i) {
        const Announcement& ann = unique[i];
        const RpkiStatus& st = route_status[i];
        if (st.validity != Validity::Invalid) continue;
        RouteKey key{ann.origin, ann.prefix};

        sightings.insert(key);
        ConflictPair pair = ConflictPair::from_status(ann, st);
        FeatureVector fv =
            compute_features(pair, ctx, route_seed(config_.seed, key));
        ml::Prediction pred = ml::predict(model_, fv);

        bool is_denied = store_.denied(key);
        if (pred.label == ml::Label::BenignConflict) {
            ++report.benign;
            for (wl::Cause cause : wl::categorize_cause(fv, pair))
                ++report.cause_counts[cause];
            store_.note_benign_occurrence(key, date);
            if (is_denied) {
                ++report.bucket_denied;
            } else if (store_.whitelist_check(key.origin, key.prefix)) {
                ++report.bucket_whitelisted;  // refresh happens in daily_update
            } else {
                bool existed = store_.find_whitelist(key) != nullptr;
                store_.enter_quarantine(key, date, wl::QuarantineReason::ClassifiedBenign);
                if (store_.fast_path_whitelist(key, fv, weights_, config_.t_thr, date)) {
                    ++report.bucket_whitelisted;
                    if (!existed)
                        report.whitelist_adds.push_back(
                            {key, wl::Provenance::TightnessFastPath});
                } else {
                    ++report.bucket_pending;
                }
            }
        } else {
            ++report.hijack;
            const ingest::HegemonySeries* series =
                hegemony ? hegemony->find_global(ann.origin) : nullptr;
            post::Verdict verdict;
            verdict.z = std::numeric_limits<double>::quiet_NaN();
            verdict.insufficient_history = true;
            if (series) verdict = post::verify(*series, ann.ts, config_.alpha);
            if (verdict.kind == post::VerdictKind::Verified && series &&
                post::persistence_check(*series, ann.ts, 86400, config_.alpha)) {
                verdict.kind = post::VerdictKind::NewPolicy;
            }

            wl::QuarantineReason reason = wl::QuarantineReason::UnverifiedHijack;
            if (verdict.kind == post::VerdictKind::Verified) {
                ++report.verified;
                verified_routes.push_back({key, ann.ts});
                if (is_denied)
                    ++report.bucket_denied;
                else
                    ++report.bucket_verified_hijack;
            } else {
                ++report.unverified;  // includes new-policy routes
                if (verdict.kind == post::VerdictKind::NewPolicy) {
                    ++report.new_policy;
                    reason = wl::QuarantineReason::NewPolicy;
                }
                if (is_denied) {
                    ++report.bucket_denied;
                } else {
                    store_.enter_quarantine(key, date, reason);
                    ++report.bucket_unverified_quarantined;
                }
            }

            nlohmann::json line;
            line["origin"] = key.origin.value;
            line["prefix"] = key.prefix.str();
            line["ts"] = ann.ts;
            line["z"] = verdict.z;            // NaN serializes as null
            line["p_right"] = std::isnan(verdict.z) ? nlohmann::json()
                                                    : nlohmann::json(verdict.p_right);
            line["verdict"] = post::to_string(verdict.kind);
            verification_jsonl += line.dump();
            verification_jsonl += '\n';
        }
    }

    report.hijack_events = post::group_events(verified_routes).size();

    wl::ChangeReport change = store_.daily_update(date, statuses, sightings);
    for (const auto& a : change.adds) report.whitelist_adds.push_back(a);
    report.whitelist_purges = change.purges;
    report.quarantine_expired = change.expired;

    report.occurrence.tracked = store_.occurrences().size();
    std::vector<double> freqs;
    for (const auto& row : occurrence_rows(store_)) {
        if (row.occurrences >= 2) ++report.occurrence.multi_day;
        if (row.frequency_days) freqs.push_back(*row.frequency_days);
    }
    if (!freqs.empty()) {
        std::sort(freqs.begin(), freqs.end());
        report.occurrence.p80_frequency_days = percentile(freqs, 0.8);
    }

    if (!config_.reports_dir.empty()) {
        write_file((fs::path(config_.reports_dir) / (date.str() + ".json")).string(),
                   report.to_json());
        write_file((fs::path(config_.reports_dir) /
                    (date.str() + ".verification.jsonl"))
                       .string(),
                   verification_jsonl);
    }
    save_store();
    return report;
}

std::vector<DailyReport> Pipeline::replay(const std::string& announcements_dir,
                                          CalDate from, CalDate to) {
    if (to < from) throw std::invalid_argument("replay: to < from");
    std::vector<DailyReport> reports;
    for (CalDate d = from; d <= to; d = d + 1) {
        fs::path file = fs::path(announcements_dir) / (d.str() + ".jsonl");
        reports.push_back(run_day(file.string(), d));
    }
    return reports;
}

}  // namespace rovwl::pipeline
