#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "rovwl/features.hpp"
#include "rovwl/net.hpp"
#include "rovwl/rov.hpp"

namespace rovwl::wl {

// One weight per feature, in Table-1 order; taken from the RF feature
// importance scores frozen at training time.
struct TightnessWeights {
    std::array<double, kFeatureCount> w{};

    static TightnessWeights uniform();
    double sum() const;
};

// T = w0*OriginMatch + w1*PC + w2*MOAS + w3*Parent + w4*Depen
//     + w5*AltSources - w6*ASdist
double tightness(const FeatureVector& fv, const TightnessWeights& w);

enum class QuarantineReason : uint8_t {
    ClassifiedBenign,
    UnverifiedHijack,
    NewPolicy,
};

enum class QuarantineState : uint8_t { Pending, Whitelisted, Rejected, Expired };

enum class Provenance : uint8_t { TightnessFastPath, BehaviorMonitoring, Manual };

enum class PurgeReason : uint8_t { Stale, ResolvedValid, ResolvedUnknown };

enum class ManualVerdict : uint8_t { Allow, Deny };

const char* to_string(QuarantineReason r);
const char* to_string(QuarantineState s);
const char* to_string(Provenance p);
const char* to_string(PurgeReason r);

struct QuarantineEntry {
    RouteKey key;
    CalDate entered;
    QuarantineReason reason = QuarantineReason::ClassifiedBenign;
    std::set<CalDate> sightings;  // within [entered, entered+quarantine_days]
    QuarantineState state = QuarantineState::Pending;
};

struct WhitelistEntry {
    RouteKey key;
    CalDate added;
    CalDate last_seen;  // >= added
    Provenance provenance = Provenance::TightnessFastPath;
};

struct OccurrenceStat {
    uint32_t occurrences = 0;  // distinct days this benign conflict appeared
    CalDate first_seen;
    CalDate last_seen;
};

struct ChangeReport {
    struct Add {
        RouteKey key;
        Provenance provenance;
    };
    struct Purge {
        RouteKey key;
        PurgeReason reason;
    };
    std::vector<Add> adds;
    std::vector<Purge> purges;
    std::vector<RouteKey> expired;  // failed behavior monitoring
};

struct ManualLogEntry {
    RouteKey key;
    ManualVerdict verdict;
    std::string note;
    CalDate date;
};

// Root-cause buckets for benign conflicts; one conflict can hit several.
enum class Cause : uint8_t { Deaggregation, Dependencies, MultiOrigins, DelayedRoas };

const char* to_string(Cause c);

std::set<Cause> categorize_cause(const FeatureVector& fv, const ConflictPair& pair);

// Quarantine + whitelist + deny-set state machine. Single writer; reads are
// pure. Persistence and per-day pre-state snapshots live in the pipeline.
class Store {
public:
    int quarantine_days = 14;
    int purge_days = 30;

    // Upsert: an existing Pending or Rejected entry is returned unchanged
    // (except for today's sighting); terminal Whitelisted/Expired entries are
    // replaced by a fresh Pending entry.
    QuarantineEntry& enter_quarantine(const RouteKey& key, CalDate date,
                                      QuarantineReason reason);

    // Records a sighting on a Pending entry; dates outside the quarantine
    // interval are ignored.
    void observe(const RouteKey& key, CalDate date);

    // True iff (a) some 7-consecutive-day window within the quarantine period
    // holds >= 2 sighting dates and (b) the last sighting is no more than a
    // week before the end of quarantine. Throws before entered+quarantine_days.
    static bool behavior_ok(const QuarantineEntry& entry, CalDate end_date,
                            int quarantine_days = 14);

    // Tightness fast path for ClassifiedBenign entries: T >= t_thr whitelists
    // immediately, otherwise the entry stays Pending. Returns whether the key
    // ended up whitelisted; the deny set blocks insertion.
    bool fast_path_whitelist(const RouteKey& key, const FeatureVector& fv,
                             const TightnessWeights& w, double t_thr, CalDate date);

    // Allow -> whitelist with Manual provenance (creating the entry when the
    // key was never quarantined); Deny -> Rejected plus a permanent deny-set
    // entry that blocks every later insertion. Deny overrides Allow.
    void manual_decision(const RouteKey& key, ManualVerdict verdict,
                         std::string_view note, CalDate date);

    // Refreshes last_seen from sightings, promotes quarantine graduates,
    // purges stale entries and entries that turned Valid/Unknown.
    ChangeReport daily_update(CalDate date,
                              const std::map<RouteKey, Validity>& statuses,
                              const std::set<RouteKey>& sightings);

    bool whitelist_check(Asn origin, const Prefix& prefix) const;
    bool denied(const RouteKey& key) const { return deny_.count(key) > 0; }

    // occurrence bookkeeping for classifier-identified benign conflicts
    void note_benign_occurrence(const RouteKey& key, CalDate date);

    const QuarantineEntry* find_quarantine(const RouteKey& key) const;
    const WhitelistEntry* find_whitelist(const RouteKey& key) const;
    const std::map<RouteKey, QuarantineEntry>& quarantine() const { return quarantine_; }
    const std::map<RouteKey, WhitelistEntry>& whitelist() const { return whitelist_; }
    const std::set<RouteKey>& deny_set() const { return deny_; }
    const std::map<RouteKey, OccurrenceStat>& occurrences() const { return occurrences_; }
    const std::vector<ManualLogEntry>& manual_log() const { return manual_log_; }

    std::optional<CalDate> last_run;

    std::string serialize() const;                     // versioned JSON
    static Store deserialize(std::string_view text);   // throws on mismatch
    uint64_t state_hash() const;

private:
    bool whitelist_insert(const RouteKey& key, CalDate date, Provenance prov,
                          bool* newly_added);

    std::map<RouteKey, QuarantineEntry> quarantine_;
    std::map<RouteKey, WhitelistEntry> whitelist_;
    std::unordered_set<RouteKey> whitelist_index_;  // O(1) membership checks
    std::set<RouteKey> deny_;
    std::map<RouteKey, OccurrenceStat> occurrences_;
    std::vector<ManualLogEntry> manual_log_;
};

inline constexpr int kStoreFormatVersion = 1;

// Exports; every file starts with a format-version marker.
std::string whitelist_to_csv(const Store& store);
std::string whitelist_to_json(const Store& store);
std::string deny_to_csv(const Store& store);

}  // namespace rovwl::wl
