#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rovwl/classifier.hpp"
#include "rovwl/ingest.hpp"
#include "rovwl/quarantine.hpp"

namespace rovwl::pipeline {

struct PipelineConfig {
    std::string snapshot_dir;
    std::string model_file;
    std::string store_dir;
    std::string reports_dir;
    double alpha = 0.05;
    double t_thr = 0.3;
    int quarantine_days = 14;
    int purge_days = 30;
    uint64_t seed = 0;
    std::string http_host = "127.0.0.1";
    int http_port = 8080;
    bool bogon_filter = true;

    // Flat "key = value" file, '#' comments. Unknown keys and out-of-range
    // values throw.
    static PipelineConfig parse(std::string_view text);
    // parse() plus ROVWL_<KEY> environment overrides.
    static PipelineConfig load(const std::string& path);
    std::string serialize() const;

    bool operator==(const PipelineConfig&) const = default;
};

struct OccurrenceSummary {
    uint64_t tracked = 0;    // benign conflicts seen so far
    uint64_t multi_day = 0;  // seen on at least two days
    std::optional<double> p80_frequency_days;
};

struct DailyReport {
    CalDate date;
    uint64_t announcements = 0;
    uint64_t parse_errors = 0;
    uint64_t bogon_excluded = 0;
    uint64_t unique_routes = 0;
    uint64_t valid = 0;
    uint64_t invalid = 0;
    uint64_t unknown = 0;
    // classifier counts over all invalid routes
    uint64_t benign = 0;
    uint64_t hijack = 0;
    // post-analyzer verdict counts over all hijack-classified routes;
    // new_policy is a sub-count of unverified
    uint64_t verified = 0;
    uint64_t unverified = 0;
    uint64_t new_policy = 0;
    // terminal buckets; they partition the invalid routes
    uint64_t bucket_whitelisted = 0;
    uint64_t bucket_pending = 0;
    uint64_t bucket_verified_hijack = 0;
    uint64_t bucket_unverified_quarantined = 0;
    uint64_t bucket_denied = 0;
    uint64_t hijack_events = 0;
    std::vector<wl::ChangeReport::Add> whitelist_adds;
    std::vector<wl::ChangeReport::Purge> whitelist_purges;
    std::vector<RouteKey> quarantine_expired;
    std::map<wl::Cause, uint64_t> cause_counts;
    OccurrenceSummary occurrence;

    std::string to_json() const;
};

// Nearest-rank percentile of an ascending-sorted vector, q in (0, 1].
double percentile(const std::vector<double>& sorted_values, double q);

struct OccurrenceRow {
    RouteKey key;
    uint32_t occurrences = 0;
    int span_days = 0;
    std::optional<double> frequency_days;  // span / (occurrences-1), multi-day only
};

std::vector<OccurrenceRow> occurrence_rows(const wl::Store& store);

// CDF-style occurrence/frequency statistics as CSV.
std::string occurrence_report_csv(const wl::Store& store);

// Loads the model (with its frozen tightness weights), the snapshot store and
// the whitelist store; orchestrates the daily run. Single writer.
class Pipeline {
public:
    explicit Pipeline(PipelineConfig config);  // throws when the model is missing

    // Validate -> classify -> post-analyze -> quarantine/whitelist -> daily
    // update. Writes the per-day report, the verification JSONL and the store
    // files. Re-running the same day restores the day's pre-state first.
    DailyReport run_day(const std::string& announcements_path, CalDate date);

    // run_day over <dir>/YYYY-MM-DD.jsonl for each date in [from, to].
    std::vector<DailyReport> replay(const std::string& announcements_dir,
                                    CalDate from, CalDate to);

    const wl::Store& store() const { return store_; }
    wl::Store& mutable_store() { return store_; }
    void save_store() const;

    const PipelineConfig& config() const { return config_; }
    const ml::TrainedModel& model() const { return model_; }
    const wl::TightnessWeights& weights() const { return weights_; }
    ingest::SnapshotStore& snapshots() { return snapshots_; }

private:
    PipelineConfig config_;
    ingest::SnapshotStore snapshots_;
    ml::TrainedModel model_;
    wl::TightnessWeights weights_;
    wl::Store store_;
};

std::string read_file(const std::string& path);  // throws on missing
void write_file(const std::string& path, std::string_view content);

}  // namespace rovwl::pipeline
