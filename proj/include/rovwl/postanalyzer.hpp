#pragma once

#include <optional>
#include <set>
#include <vector>

#include "rovwl/ingest.hpp"
#include "rovwl/net.hpp"
#include "rovwl/rov.hpp"

namespace rovwl::post {

// The 50 most recent global-hegemony samples strictly before the
// announcement time, newest last.
struct VisibilityWindow {
    static constexpr size_t kSize = 50;
    static constexpr size_t kMinSamples = 5;

    std::vector<double> values;
    double mu = 0;
    double sigma = 0;  // population standard deviation
    bool short_window = false;

    static VisibilityWindow from_values(std::vector<double> values);
};

// nullopt when fewer than kMinSamples precede t (insufficient history).
std::optional<VisibilityWindow> make_window(const ingest::HegemonySeries& series,
                                            int64_t t);

// Standard normal CDF via erfc, accurate well past 1e-12.
double normal_cdf(double z);

struct ZResult {
    double z = 0;          // NaN when the window is degenerate (sigma == 0)
    double p_right = 1.0;  // one-sided tail probability
    bool anomalous = false;
    bool degenerate = false;
};

// Right-tailed test: anomalous iff p_right < alpha. A degenerate window
// (sigma == 0) flags anomalous iff observed > mu.
ZResult z_test(const VisibilityWindow& window, double observed, double alpha = 0.05);

enum class VerdictKind : uint8_t { Verified, Unverified, NewPolicy };

const char* to_string(VerdictKind v);

struct Verdict {
    VerdictKind kind = VerdictKind::Unverified;
    double z = 0;  // NaN when no test ran
    double p_right = 1.0;
    bool insufficient_history = false;
};

// Tests the first hegemony sample at or after t against the pre-t window.
// Insufficient history or no post-announcement observation stays Unverified
// (the route goes to quarantine). Callers downgrade Verified to NewPolicy via
// persistence_check.
Verdict verify(const ingest::HegemonySeries& series, int64_t t, double alpha = 0.05);

// True iff every sample in (t, t+horizon] stays anomalous against the pre-t
// window: a persistent new visibility level rather than an incident spike.
bool persistence_check(const ingest::HegemonySeries& series, int64_t t,
                       int64_t horizon_seconds = 86400, double alpha = 0.05);

struct HijackEvent {
    Asn origin;
    CalDate date;
    std::set<RouteKey> routes;
};

struct VerifiedRoute {
    RouteKey key;
    int64_t ts = 0;
};

// Partition by (origin, UTC day), ordered by (day, origin).
std::vector<HijackEvent> group_events(const std::vector<VerifiedRoute>& routes);

}  // namespace rovwl::post
