#include "rovwl/postanalyzer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rovwl::post {

VisibilityWindow VisibilityWindow::from_values(std::vector<double> values) {
    VisibilityWindow w;
    w.values = std::move(values);
    w.short_window = w.values.size() < kSize;
    if (w.values.empty()) return w;
    auto [lo, hi] = std::minmax_element(w.values.begin(), w.values.end());
    double sum = 0;
    for (double v : w.values) sum += v;
    w.mu = sum / double(w.values.size());
    if (*lo == *hi) {
        w.mu = *lo;  // constant window is degenerate exactly
        w.sigma = 0.0;
        return w;
    }
    double var = 0;
    for (double v : w.values) var += (v - w.mu) * (v - w.mu);
    w.sigma = std::sqrt(var / double(w.values.size()));
    return w;
}

std::optional<VisibilityWindow> make_window(const ingest::HegemonySeries& series,
                                            int64_t t) {
    auto end = std::lower_bound(series.samples.begin(), series.samples.end(), t,
                                [](const ingest::HegemonySample& s, int64_t lhs) {
                                    return s.ts < lhs;
                                });
    size_t available = size_t(end - series.samples.begin());
    if (available < VisibilityWindow::kMinSamples) return std::nullopt;
    size_t take = std::min(available, VisibilityWindow::kSize);
    std::vector<double> values;
    values.reserve(take);
    for (auto it = end - std::ptrdiff_t(take); it != end; ++it)
        values.push_back(it->value);
    return VisibilityWindow::from_values(std::move(values));
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

ZResult z_test(const VisibilityWindow& window, double observed, double alpha) {
    ZResult r;
    if (window.sigma == 0.0) {
        r.degenerate = true;
        r.z = std::numeric_limits<double>::quiet_NaN();
        r.anomalous = observed > window.mu;
        r.p_right = r.anomalous ? 0.0 : 1.0;
        return r;
    }
    r.z = (observed - window.mu) / window.sigma;
    r.p_right = 1.0 - normal_cdf(r.z);
    r.anomalous = r.p_right < alpha;
    return r;
}

const char* to_string(VerdictKind v) {
    switch (v) {
        case VerdictKind::Verified: return "verified";
        case VerdictKind::Unverified: return "unverified";
        case VerdictKind::NewPolicy: return "new_policy";
    }
    return "?";
}

Verdict verify(const ingest::HegemonySeries& series, int64_t t, double alpha) {
    Verdict v;
    v.z = std::numeric_limits<double>::quiet_NaN();
    auto window = make_window(series, t);
    if (!window) {
        v.insufficient_history = true;
        return v;  // conservative: quarantine
    }
    auto obs = std::lower_bound(series.samples.begin(), series.samples.end(), t,
                                [](const ingest::HegemonySample& s, int64_t lhs) {
                                    return s.ts < lhs;
                                });
    if (obs == series.samples.end()) return v;  // nothing observed after t
    ZResult z = z_test(*window, obs->value, alpha);
    v.z = z.z;
    v.p_right = z.p_right;
    v.kind = z.anomalous ? VerdictKind::Verified : VerdictKind::Unverified;
    return v;
}

bool persistence_check(const ingest::HegemonySeries& series, int64_t t,
                       int64_t horizon_seconds, double alpha) {
    auto window = make_window(series, t);
    if (!window) return false;
    auto it = std::upper_bound(series.samples.begin(), series.samples.end(), t,
                               [](int64_t lhs, const ingest::HegemonySample& s) {
                                   return lhs < s.ts;
                               });
    bool any = false;
    for (; it != series.samples.end() && it->ts <= t + horizon_seconds; ++it) {
        any = true;
        if (!z_test(*window, it->value, alpha).anomalous) return false;
    }
    return any;
}

std::vector<HijackEvent> group_events(const std::vector<VerifiedRoute>& routes) {
    std::map<std::pair<CalDate, Asn>, std::set<RouteKey>> groups;
    for (const VerifiedRoute& r : routes) {
        groups[{CalDate::from_ts(r.ts), r.key.origin}].insert(r.key);
    }
    std::vector<HijackEvent> out;
    out.reserve(groups.size());
    for (auto& [key, keys] : groups) {
        out.push_back({key.second, key.first, std::move(keys)});
    }
    return out;
}

}  // namespace rovwl::post
