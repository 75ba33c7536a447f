#include "rovwl/quarantine.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

namespace rovwl::wl {

TightnessWeights TightnessWeights::uniform() {
    TightnessWeights w;
    w.w.fill(1.0 / double(kFeatureCount));
    return w;
}

double TightnessWeights::sum() const {
    double s = 0;
    for (double v : w) s += v;
    return s;
}

double tightness(const FeatureVector& fv, const TightnessWeights& w) {
    return w.w[0] * fv.origin_match + w.w[1] * fv.pc + w.w[2] * fv.moas +
           w.w[3] * fv.parent + w.w[4] * fv.depen + w.w[5] * fv.alt_sources -
           w.w[6] * fv.as_dist;
}

const char* to_string(QuarantineReason r) {
    switch (r) {
        case QuarantineReason::ClassifiedBenign: return "classified_benign";
        case QuarantineReason::UnverifiedHijack: return "unverified_hijack";
        case QuarantineReason::NewPolicy: return "new_policy";
    }
    return "?";
}

const char* to_string(QuarantineState s) {
    switch (s) {
        case QuarantineState::Pending: return "pending";
        case QuarantineState::Whitelisted: return "whitelisted";
        case QuarantineState::Rejected: return "rejected";
        case QuarantineState::Expired: return "expired";
    }
    return "?";
}

const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::TightnessFastPath: return "tightness_fast_path";
        case Provenance::BehaviorMonitoring: return "behavior_monitoring";
        case Provenance::Manual: return "manual";
    }
    return "?";
}

const char* to_string(PurgeReason r) {
    switch (r) {
        case PurgeReason::Stale: return "stale";
        case PurgeReason::ResolvedValid: return "resolved_valid";
        case PurgeReason::ResolvedUnknown: return "resolved_unknown";
    }
    return "?";
}

const char* to_string(Cause c) {
    switch (c) {
        case Cause::Deaggregation: return "deaggregation";
        case Cause::Dependencies: return "dependencies";
        case Cause::MultiOrigins: return "multi_origins";
        case Cause::DelayedRoas: return "delayed_roas";
    }
    return "?";
}

std::set<Cause> categorize_cause(const FeatureVector& fv, const ConflictPair& pair) {
    std::set<Cause> out;
    bool origin_match = fv.origin_match == 1.0;
    bool pc = fv.pc == 1.0;
    bool moas = fv.moas == 1.0;
    bool parent = fv.parent == 1.0;
    bool depen = fv.depen > 0.0;
    bool no_relation = !origin_match && !pc && !moas && !parent && !depen;

    if (origin_match) out.insert(Cause::Deaggregation);
    if (pc || parent || depen || (fv.as_dist == 0.0 && no_relation))
        out.insert(Cause::Dependencies);
    if (moas) {
        bool distinct = !std::binary_search(pair.roa_origins.begin(),
                                            pair.roa_origins.end(), pair.bgp_origin);
        if (distinct) out.insert(Cause::MultiOrigins);
    }
    if (no_relation && fv.alt_sources == 1.0) out.insert(Cause::DelayedRoas);
    return out;
}

// --- Store -------------------------------------------------------------------

QuarantineEntry& Store::enter_quarantine(const RouteKey& key, CalDate date,
                                         QuarantineReason reason) {
    auto it = quarantine_.find(key);
    if (it != quarantine_.end()) {
        QuarantineEntry& e = it->second;
        if (e.state == QuarantineState::Whitelisted ||
            e.state == QuarantineState::Expired) {
            e = QuarantineEntry{key, date, reason, {date}, QuarantineState::Pending};
        } else if (e.state == QuarantineState::Pending) {
            observe(key, date);
        }
        return e;  // Rejected entries stay rejected
    }
    auto [ins, _] = quarantine_.emplace(
        key, QuarantineEntry{key, date, reason, {date}, QuarantineState::Pending});
    return ins->second;
}

void Store::observe(const RouteKey& key, CalDate date) {
    auto it = quarantine_.find(key);
    if (it == quarantine_.end() || it->second.state != QuarantineState::Pending)
        return;
    QuarantineEntry& e = it->second;
    if (date < e.entered || date > e.entered + quarantine_days) return;
    e.sightings.insert(date);
}

bool Store::behavior_ok(const QuarantineEntry& entry, CalDate end_date,
                        int quarantine_days) {
    if (end_date < entry.entered + quarantine_days)
        throw std::logic_error("behavior_ok: monitoring period incomplete");
    if (entry.sightings.empty()) return false;
    // (b) still active: last sighting within a week of the quarantine end
    if (*entry.sightings.rbegin() < entry.entered + quarantine_days - 7) return false;
    // (a) two sightings within some 7-consecutive-day window
    for (int s = 0; s <= quarantine_days - 7 + 1; ++s) {
        CalDate win_start = entry.entered + s;
        auto lo = entry.sightings.lower_bound(win_start);
        auto hi = entry.sightings.upper_bound(win_start + 6);
        if (std::distance(lo, hi) >= 2) return true;
    }
    return false;
}

bool Store::whitelist_insert(const RouteKey& key, CalDate date, Provenance prov,
                             bool* newly_added) {
    if (denied(key)) {
        if (newly_added) *newly_added = false;
        return false;
    }
    auto it = whitelist_.find(key);
    if (it != whitelist_.end()) {
        it->second.last_seen = std::max(it->second.last_seen, date);
        if (newly_added) *newly_added = false;
        return true;
    }
    whitelist_.emplace(key, WhitelistEntry{key, date, date, prov});
    whitelist_index_.insert(key);
    if (newly_added) *newly_added = true;
    return true;
}

bool Store::fast_path_whitelist(const RouteKey& key, const FeatureVector& fv,
                                const TightnessWeights& w, double t_thr,
                                CalDate date) {
    if (tightness(fv, w) < t_thr) return false;  // stays Pending
    if (!whitelist_insert(key, date, Provenance::TightnessFastPath, nullptr))
        return false;  // denied
    auto it = quarantine_.find(key);
    if (it != quarantine_.end()) it->second.state = QuarantineState::Whitelisted;
    return true;
}

void Store::manual_decision(const RouteKey& key, ManualVerdict verdict,
                            std::string_view note, CalDate date) {
    manual_log_.push_back({key, verdict, std::string(note), date});
    if (verdict == ManualVerdict::Deny) {
        deny_.insert(key);
        if (whitelist_index_.erase(key)) whitelist_.erase(key);
        auto it = quarantine_.find(key);
        if (it != quarantine_.end()) it->second.state = QuarantineState::Rejected;
        return;
    }
    // Allow; the deny set wins when both exist
    if (denied(key)) return;
    whitelist_insert(key, date, Provenance::Manual, nullptr);
    auto it = quarantine_.find(key);
    if (it != quarantine_.end()) it->second.state = QuarantineState::Whitelisted;
}

ChangeReport Store::daily_update(CalDate date,
                                 const std::map<RouteKey, Validity>& statuses,
                                 const std::set<RouteKey>& sightings) {
    ChangeReport report;

    for (const RouteKey& key : sightings) {
        auto wit = whitelist_.find(key);
        if (wit != whitelist_.end())
            wit->second.last_seen = std::max(wit->second.last_seen, date);
        observe(key, date);
    }

    // graduate finished quarantine entries
    for (auto& [key, entry] : quarantine_) {
        if (entry.state != QuarantineState::Pending) continue;
        if (date - entry.entered < quarantine_days) continue;
        if (behavior_ok(entry, date, quarantine_days)) {
            bool added = false;
            if (whitelist_insert(key, date, Provenance::BehaviorMonitoring, &added)) {
                entry.state = QuarantineState::Whitelisted;
                if (added) report.adds.push_back({key, Provenance::BehaviorMonitoring});
            } else {
                entry.state = QuarantineState::Rejected;  // deny set
            }
        } else {
            entry.state = QuarantineState::Expired;
            report.expired.push_back(key);
        }
    }

    // purge: resolved status first, then staleness
    for (auto it = whitelist_.begin(); it != whitelist_.end();) {
        const RouteKey& key = it->first;
        std::optional<PurgeReason> purge;
        auto sit = statuses.find(key);
        if (sit != statuses.end()) {
            if (sit->second == Validity::Valid) purge = PurgeReason::ResolvedValid;
            if (sit->second == Validity::Unknown) purge = PurgeReason::ResolvedUnknown;
        }
        if (!purge && date - it->second.last_seen > purge_days)
            purge = PurgeReason::Stale;
        if (purge) {
            report.purges.push_back({key, *purge});
            whitelist_index_.erase(key);
            it = whitelist_.erase(it);
        } else {
            ++it;
        }
    }

    last_run = date;
    return report;
}

bool Store::whitelist_check(Asn origin, const Prefix& prefix) const {
    return whitelist_index_.count(RouteKey{origin, prefix}) > 0;
}

void Store::note_benign_occurrence(const RouteKey& key, CalDate date) {
    auto it = occurrences_.find(key);
    if (it == occurrences_.end()) {
        occurrences_.emplace(key, OccurrenceStat{1, date, date});
        return;
    }
    OccurrenceStat& stat = it->second;
    if (stat.last_seen == date) return;  // one occurrence per day
    ++stat.occurrences;
    stat.first_seen = std::min(stat.first_seen, date);
    stat.last_seen = std::max(stat.last_seen, date);
}

const QuarantineEntry* Store::find_quarantine(const RouteKey& key) const {
    auto it = quarantine_.find(key);
    return it == quarantine_.end() ? nullptr : &it->second;
}

const WhitelistEntry* Store::find_whitelist(const RouteKey& key) const {
    auto it = whitelist_.find(key);
    return it == whitelist_.end() ? nullptr : &it->second;
}

// --- serialization ---------------------------------------------------------------

namespace {

nlohmann::json key_to_json(const RouteKey& k) {
    return {{"origin", k.origin.value}, {"prefix", k.prefix.str()}};
}

RouteKey key_from_json(const nlohmann::json& j) {
    auto prefix = Prefix::parse(j.at("prefix").get<std::string>());
    if (!prefix) throw std::runtime_error("store: bad prefix");
    return RouteKey{Asn{j.at("origin").get<uint32_t>()}, *prefix};
}

CalDate date_from_json(const nlohmann::json& j) {
    auto d = CalDate::parse(j.get<std::string>());
    if (!d) throw std::runtime_error("store: bad date");
    return *d;
}

}  // namespace

std::string Store::serialize() const {
    nlohmann::json j;
    j["format_version"] = kStoreFormatVersion;
    j["quarantine_days"] = quarantine_days;
    j["purge_days"] = purge_days;
    j["last_run"] = last_run ? nlohmann::json(last_run->str()) : nlohmann::json();

    auto& q = j["quarantine"] = nlohmann::json::array();
    for (const auto& [key, e] : quarantine_) {
        nlohmann::json entry = key_to_json(key);
        entry["entered"] = e.entered.str();
        entry["reason"] = to_string(e.reason);
        entry["state"] = to_string(e.state);
        auto& s = entry["sightings"] = nlohmann::json::array();
        for (CalDate d : e.sightings) s.push_back(d.str());
        q.push_back(std::move(entry));
    }
    auto& w = j["whitelist"] = nlohmann::json::array();
    for (const auto& [key, e] : whitelist_) {
        nlohmann::json entry = key_to_json(key);
        entry["added"] = e.added.str();
        entry["last_seen"] = e.last_seen.str();
        entry["provenance"] = to_string(e.provenance);
        w.push_back(std::move(entry));
    }
    auto& d = j["deny"] = nlohmann::json::array();
    for (const RouteKey& key : deny_) d.push_back(key_to_json(key));
    auto& o = j["occurrences"] = nlohmann::json::array();
    for (const auto& [key, stat] : occurrences_) {
        nlohmann::json entry = key_to_json(key);
        entry["count"] = stat.occurrences;
        entry["first_seen"] = stat.first_seen.str();
        entry["last_seen"] = stat.last_seen.str();
        o.push_back(std::move(entry));
    }
    auto& m = j["manual_log"] = nlohmann::json::array();
    for (const ManualLogEntry& e : manual_log_) {
        nlohmann::json entry = key_to_json(e.key);
        entry["verdict"] = e.verdict == ManualVerdict::Allow ? "allow" : "deny";
        entry["note"] = e.note;
        entry["date"] = e.date.str();
        m.push_back(std::move(entry));
    }
    return j.dump(2) + "\n";
}

Store Store::deserialize(std::string_view text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw std::runtime_error("store: not a JSON object");
    if (!j.contains("format_version") ||
        j["format_version"].get<int>() != kStoreFormatVersion)
        throw std::runtime_error("store: unsupported format version");

    Store store;
    store.quarantine_days = j.value("quarantine_days", 14);
    store.purge_days = j.value("purge_days", 30);
    if (j.contains("last_run") && j["last_run"].is_string())
        store.last_run = date_from_json(j["last_run"]);

    for (const auto& entry : j.at("quarantine")) {
        QuarantineEntry e;
        e.key = key_from_json(entry);
        e.entered = date_from_json(entry.at("entered"));
        std::string reason = entry.at("reason").get<std::string>();
        e.reason = reason == "unverified_hijack" ? QuarantineReason::UnverifiedHijack
                   : reason == "new_policy"      ? QuarantineReason::NewPolicy
                                                 : QuarantineReason::ClassifiedBenign;
        std::string state = entry.at("state").get<std::string>();
        e.state = state == "whitelisted" ? QuarantineState::Whitelisted
                  : state == "rejected"  ? QuarantineState::Rejected
                  : state == "expired"   ? QuarantineState::Expired
                                         : QuarantineState::Pending;
        for (const auto& s : entry.at("sightings"))
            e.sightings.insert(date_from_json(s));
        store.quarantine_.emplace(e.key, std::move(e));
    }
    for (const auto& entry : j.at("whitelist")) {
        WhitelistEntry e;
        e.key = key_from_json(entry);
        e.added = date_from_json(entry.at("added"));
        e.last_seen = date_from_json(entry.at("last_seen"));
        std::string prov = entry.at("provenance").get<std::string>();
        e.provenance = prov == "behavior_monitoring" ? Provenance::BehaviorMonitoring
                       : prov == "manual"            ? Provenance::Manual
                                                     : Provenance::TightnessFastPath;
        store.whitelist_index_.insert(e.key);
        store.whitelist_.emplace(e.key, std::move(e));
    }
    for (const auto& entry : j.at("deny")) store.deny_.insert(key_from_json(entry));
    for (const auto& entry : j.at("occurrences")) {
        OccurrenceStat stat;
        stat.occurrences = entry.at("count").get<uint32_t>();
        stat.first_seen = date_from_json(entry.at("first_seen"));
        stat.last_seen = date_from_json(entry.at("last_seen"));
        store.occurrences_.emplace(key_from_json(entry), stat);
    }
    if (j.contains("manual_log")) {
        for (const auto& entry : j["manual_log"]) {
            ManualLogEntry e;
            e.key = key_from_json(entry);
            e.verdict = entry.at("verdict").get<std::string>() == "deny"
                            ? ManualVerdict::Deny
                            : ManualVerdict::Allow;
            e.note = entry.at("note").get<std::string>();
            e.date = date_from_json(entry.at("date"));
            store.manual_log_.push_back(std::move(e));
        }
    }
    return store;
}

uint64_t Store::state_hash() const {
    std::string blob = serialize();
    return fnv1a64(blob.data(), blob.size());
}

// --- exports -----------------------------------------------------------------------

std::string whitelist_to_csv(const Store& store) {
    std::string out = "#rovwl-whitelist-v1\norigin,prefix,added,last_seen,provenance\n";
    for (const auto& [key, e] : store.whitelist()) {
        out += std::to_string(key.origin.value) + "," + key.prefix.str() + "," +
               e.added.str() + "," + e.last_seen.str() + "," +
               to_string(e.provenance) + "\n";
    }
    return out;
}

std::string whitelist_to_json(const Store& store) {
    nlohmann::json j;
    j["format_version"] = kStoreFormatVersion;
    j["generation"] =
        store.last_run ? nlohmann::json(store.last_run->str()) : nlohmann::json();
    auto& entries = j["entries"] = nlohmann::json::array();
    for (const auto& [key, e] : store.whitelist()) {
        entries.push_back({{"origin", key.origin.value},
                           {"prefix", key.prefix.str()},
                           {"added", e.added.str()},
                           {"last_seen", e.last_seen.str()},
                           {"provenance", to_string(e.provenance)}});
    }
    j["count"] = entries.size();
    return j.dump(2) + "\n";
}

std::string deny_to_csv(const Store& store) {
    std::string out = "#rovwl-deny-v1\norigin,prefix\n";
    for (const RouteKey& key : store.deny_set()) {
        out += std::to_string(key.origin.value) + "," + key.prefix.str() + "\n";
    }
    return out;
}

}  // namespace rovwl::wl
