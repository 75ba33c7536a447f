#include <doctest.h>

#include <random>

#include "rovwl/quarantine.hpp"
#include "support/oracles.hpp"

using namespace rovwl;
using namespace rovwl::wl;

namespace {

RouteKey key(uint32_t asn, const char* prefix = "10.0.0.0/24") {
    return {Asn{asn}, *Prefix::parse(prefix)};
}

const CalDate day0 = *CalDate::parse("2022-10-01");

FeatureVector tight_vector() {
    FeatureVector fv;
    fv.pc = 1.0;
    fv.moas = 1.0;
    fv.depen = 1.0;
    fv.as_dist = 0.01;
    return fv;
}

}  // namespace

TEST_CASE("tightness is the weighted sum with the distance subtracted") {
    TightnessWeights uniform = TightnessWeights::uniform();

    // only ASdist contributes on the all-default vector
    CHECK(tightness(FeatureVector::all_defaults(), uniform) ==
          doctest::Approx(-1.0 / 7));

    FeatureVector all_on;
    all_on.origin_match = all_on.pc = all_on.moas = all_on.parent = 1.0;
    all_on.depen = all_on.alt_sources = 1.0;
    all_on.as_dist = 0.0;
    CHECK(tightness(all_on, uniform) == doctest::Approx(6.0 / 7));

    // strongly related pair from the tightness definition: PC = 1, Depen = 1,
    // ASdist = 0.01
    TightnessWeights w;
    w.w = {0.05, 0.2, 0.15, 0.1, 0.2, 0.15, 0.15};
    FeatureVector fv;
    fv.pc = 1.0;
    fv.depen = 1.0;
    fv.as_dist = 0.01;
    CHECK(tightness(fv, w) == doctest::Approx(0.2 + 0.2 - 0.01 * 0.15));

    // dot-product oracle on random vectors and weights
    std::mt19937_64 rng(0x10);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        FeatureVector r;
        for (size_t f = 0; f < kFeatureCount; ++f)
            r.value(FeatureId(f)) = unit(rng);
        TightnessWeights rw;
        for (double& x : rw.w) x = unit(rng);
        double expect = 0;
        auto vals = r.values();
        for (size_t f = 0; f < 6; ++f) expect += rw.w[f] * vals[f];
        expect -= rw.w[6] * vals[6];
        CHECK(tightness(r, rw) == expect);
    }
}

TEST_CASE("fast path whitelists at or above the threshold") {
    TightnessWeights w;
    w.w = {0.05, 0.2, 0.15, 0.1, 0.2, 0.15, 0.15};

    Store store;
    RouteKey k1 = key(1);
    store.enter_quarantine(k1, day0, QuarantineReason::ClassifiedBenign);
    CHECK(store.fast_path_whitelist(k1, tight_vector(), w, 0.3, day0));
    CHECK(store.whitelist_check(k1.origin, k1.prefix));
    CHECK(store.find_quarantine(k1)->state == QuarantineState::Whitelisted);

    // T exactly at the threshold is inclusive
    Store store2;
    RouteKey k2 = key(2);
    store2.enter_quarantine(k2, day0, QuarantineReason::ClassifiedBenign);
    FeatureVector boundary;  // pc + depen with these weights gives exactly 0.4
    boundary.pc = 1.0;
    boundary.depen = 1.0;
    boundary.as_dist = 0.0;
    CHECK(tightness(boundary, w) == doctest::Approx(0.4));
    CHECK(store2.fast_path_whitelist(k2, boundary, w, 0.4, day0));

    // all-default vector stays pending
    Store store3;
    RouteKey k3 = key(3);
    store3.enter_quarantine(k3, day0, QuarantineReason::ClassifiedBenign);
    CHECK(!store3.fast_path_whitelist(k3, FeatureVector::all_defaults(), w, 0.3, day0));
    CHECK(store3.find_quarantine(k3)->state == QuarantineState::Pending);
    CHECK(!store3.whitelist_check(k3.origin, k3.prefix));
}

TEST_CASE("behavior rule: frequency and recency, against the enumeration oracle") {
    // {day1, day3, day12} relative to entry passes both rules
    Store store;
    RouteKey k = key(4);
    auto& entry = store.enter_quarantine(k, day0, QuarantineReason::ClassifiedBenign);
    store.observe(k, day0 + 1);
    store.observe(k, day0 + 3);
    store.observe(k, day0 + 12);
    CHECK(Store::behavior_ok(entry, day0 + 14, 14));

    // a single sighting fails the frequency rule
    Store s2;
    auto& e2 = s2.enter_quarantine(key(5), day0 + 1, QuarantineReason::ClassifiedBenign);
    CHECK(!Store::behavior_ok(e2, day0 + 15, 14));

    // early sightings only: recency fails
    Store s3;
    RouteKey k3 = key(6);
    auto& e3 = s3.enter_quarantine(k3, day0, QuarantineReason::ClassifiedBenign);
    s3.observe(k3, day0 + 1);
    s3.observe(k3, day0 + 2);
    e3.sightings.erase(day0);  // keep exactly {day1, day2}
    CHECK(!Store::behavior_ok(e3, day0 + 14, 14));

    // calling before the period ends is an error
    CHECK_THROWS(Store::behavior_ok(e3, day0 + 13, 14));

    // random sighting sets match the direct enumeration
    std::mt19937_64 rng(0x5151);
    std::uniform_int_distribution<int> day(0, 14);
    std::uniform_int_distribution<int> n(0, 8);
    for (int i = 0; i < 1000; ++i) {
        QuarantineEntry e;
        e.key = key(100);
        e.entered = day0;
        std::set<int> days;
        int count = n(rng);
        for (int j = 0; j < count; ++j) days.insert(day(rng));
        for (int d : days) e.sightings.insert(day0 + d);
        CHECK(Store::behavior_ok(e, day0 + 14, 14) ==
              oracles::activity_rule(days, 0, 14));
    }
}

TEST_CASE("no behavior-monitoring whitelist before day 14") {
    Store store;
    RouteKey k = key(7);
    store.enter_quarantine(k, day0, QuarantineReason::UnverifiedHijack);
    for (int d = 0; d < 14; ++d) {
        store.daily_update(day0 + d, {}, {k});
        CHECK(!store.whitelist_check(k.origin, k.prefix));
        CHECK(store.find_quarantine(k)->state == QuarantineState::Pending);
    }
    auto report = store.daily_update(day0 + 14, {}, {k});
    CHECK(store.whitelist_check(k.origin, k.prefix));
    CHECK(store.find_whitelist(k)->provenance == Provenance::BehaviorMonitoring);
    REQUIRE(report.adds.size() == 1);
    CHECK(report.adds[0].provenance == Provenance::BehaviorMonitoring);
}

TEST_CASE("quarantine entries that fail the activity rule expire") {
    Store store;
    RouteKey k = key(8);
    store.enter_quarantine(k, day0, QuarantineReason::ClassifiedBenign);
    // sighted only on entry day
    auto report = store.daily_update(day0 + 14, {}, {});
    CHECK(store.find_quarantine(k)->state == QuarantineState::Expired);
    REQUIRE(report.expired.size() == 1);
    CHECK(!store.whitelist_check(k.origin, k.prefix));
}

TEST_CASE("sightings outside the quarantine interval are ignored") {
    Store store;
    RouteKey k = key(9);
    auto& e = store.enter_quarantine(k, day0 + 5, QuarantineReason::ClassifiedBenign);
    store.observe(k, day0);        // before entry
    store.observe(k, day0 + 30);   // after entry+14
    store.observe(k, day0 + 10);
    CHECK(e.sightings == std::set<CalDate>{day0 + 5, day0 + 10});
}

TEST_CASE("manual decisions: allow, deny, deny precedence") {
    Store store;
    RouteKey k = key(10);

    // allow for a route never quarantined creates the entry directly
    store.manual_decision(k, ManualVerdict::Allow, "operator confirmed", day0);
    CHECK(store.whitelist_check(k.origin, k.prefix));
    CHECK(store.find_whitelist(k)->provenance == Provenance::Manual);

    // deny removes it and blocks everything afterwards
    store.manual_decision(k, ManualVerdict::Deny, "hijack confirmed", day0 + 1);
    CHECK(!store.whitelist_check(k.origin, k.prefix));
    CHECK(store.denied(k));

    // fast path after deny stays blocked
    store.enter_quarantine(k, day0 + 2, QuarantineReason::ClassifiedBenign);
    TightnessWeights w = TightnessWeights::uniform();
    CHECK(!store.fast_path_whitelist(k, tight_vector(), w, 0.1, day0 + 2));
    CHECK(!store.whitelist_check(k.origin, k.prefix));

    // allow after deny: deny wins
    store.manual_decision(k, ManualVerdict::Allow, "second thoughts", day0 + 3);
    CHECK(!store.whitelist_check(k.origin, k.prefix));

    // behavior graduation after deny stays blocked too
    Store s2;
    RouteKey k2 = key(11);
    s2.enter_quarantine(k2, day0, QuarantineReason::ClassifiedBenign);
    for (int d = 0; d < 14; ++d) s2.daily_update(day0 + d, {}, {k2});
    s2.manual_decision(k2, ManualVerdict::Deny, "", day0 + 13);
    s2.daily_update(day0 + 14, {}, {k2});
    CHECK(!s2.whitelist_check(k2.origin, k2.prefix));
    CHECK(s2.manual_log().size() == 1);
}

TEST_CASE("daily update purges stale and resolved entries") {
    Store store;
    RouteKey stale = key(20, "10.1.0.0/24");
    RouteKey fresh = key(21, "10.2.0.0/24");
    RouteKey fixed = key(22, "10.3.0.0/24");
    RouteKey gone = key(23, "10.4.0.0/24");
    for (const RouteKey& k : {stale, fresh, fixed, gone}) {
        store.enter_quarantine(k, day0, QuarantineReason::ClassifiedBenign);
        store.fast_path_whitelist(k, tight_vector(), TightnessWeights::uniform(),
                                  0.1, day0);
    }

    // 31 days later: `fresh` was seen today, `fixed` became valid,
    // `gone` became unknown, `stale` wasn't seen at all
    std::map<RouteKey, Validity> statuses{{fresh, Validity::Invalid},
                                          {fixed, Validity::Valid},
                                          {gone, Validity::Unknown}};
    auto report = store.daily_update(day0 + 31, statuses, {fresh});

    CHECK(store.whitelist_check(fresh.origin, fresh.prefix));
    CHECK(!store.whitelist_check(stale.origin, stale.prefix));
    CHECK(!store.whitelist_check(fixed.origin, fixed.prefix));
    CHECK(!store.whitelist_check(gone.origin, gone.prefix));
    REQUIRE(report.purges.size() == 3);
    std::map<RouteKey, PurgeReason> reasons;
    for (const auto& p : report.purges) reasons[p.key] = p.reason;
    CHECK(reasons[stale] == PurgeReason::Stale);
    CHECK(reasons[fixed] == PurgeReason::ResolvedValid);
    CHECK(reasons[gone] == PurgeReason::ResolvedUnknown);

    // purge correctness: no survivor is stale or resolved
    for (const auto& [k, e] : store.whitelist()) {
        CHECK((day0 + 31) - e.last_seen <= 30);
        auto it = statuses.find(k);
        if (it != statuses.end()) CHECK(it->second == Validity::Invalid);
    }

    // an entry seen exactly 30 days ago survives ("longer than a month")
    Store s2;
    RouteKey k30 = key(24);
    s2.enter_quarantine(k30, day0, QuarantineReason::ClassifiedBenign);
    s2.fast_path_whitelist(k30, tight_vector(), TightnessWeights::uniform(), 0.1,
                           day0);
    s2.daily_update(day0 + 30, {}, {});
    CHECK(s2.whitelist_check(k30.origin, k30.prefix));
    s2.daily_update(day0 + 31, {}, {});
    CHECK(!s2.whitelist_check(k30.origin, k30.prefix));
}

TEST_CASE("daily update is idempotent for identical inputs") {
    Store store;
    RouteKey a = key(30, "10.1.0.0/24");
    RouteKey b = key(31, "10.2.0.0/24");
    store.enter_quarantine(a, day0 - 14, QuarantineReason::ClassifiedBenign);
    store.observe(a, day0 - 14);
    store.observe(a, day0 - 12);
    store.observe(a, day0 - 2);
    store.enter_quarantine(b, day0, QuarantineReason::UnverifiedHijack);
    store.fast_path_whitelist(b, tight_vector(), TightnessWeights::uniform(), 0.1,
                              day0);

    std::map<RouteKey, Validity> statuses{{a, Validity::Invalid},
                                          {b, Validity::Invalid}};
    std::set<RouteKey> sightings{a, b};
    store.daily_update(day0, statuses, sightings);
    uint64_t h1 = store.state_hash();
    store.daily_update(day0, statuses, sightings);
    CHECK(store.state_hash() == h1);
}

TEST_CASE("whitelist entries are unique; re-insertion refreshes last_seen") {
    Store store;
    RouteKey k = key(40);
    store.enter_quarantine(k, day0, QuarantineReason::ClassifiedBenign);
    CHECK(store.fast_path_whitelist(k, tight_vector(), TightnessWeights::uniform(),
                                    0.1, day0));
    CHECK(store.find_whitelist(k)->added == day0);

    store.enter_quarantine(k, day0 + 3, QuarantineReason::ClassifiedBenign);
    CHECK(store.fast_path_whitelist(k, tight_vector(), TightnessWeights::uniform(),
                                    0.1, day0 + 3));
    CHECK(store.whitelist().size() == 1);
    CHECK(store.find_whitelist(k)->added == day0);
    CHECK(store.find_whitelist(k)->last_seen == day0 + 3);
}

TEST_CASE("whitelist check is exact-match only") {
    Store store;
    RouteKey k = key(41, "10.0.0.0/16");
    store.enter_quarantine(k, day0, QuarantineReason::ClassifiedBenign);
    store.fast_path_whitelist(k, tight_vector(), TightnessWeights::uniform(), 0.1,
                              day0);
    CHECK(store.whitelist_check(Asn{41}, *Prefix::parse("10.0.0.0/16")));
    // a more specific prefix of a listed pair is not listed
    CHECK(!store.whitelist_check(Asn{41}, *Prefix::parse("10.0.1.0/24")));
    CHECK(!store.whitelist_check(Asn{42}, *Prefix::parse("10.0.0.0/16")));
}

TEST_CASE("cause categorization") {
    ConflictPair same_origin;
    same_origin.bgp_origin = Asn{5};
    same_origin.roa_origins = {Asn{5}};
    ConflictPair distinct;
    distinct.bgp_origin = Asn{5};
    distinct.roa_origins = {Asn{9}};

    FeatureVector deagg;
    deagg.origin_match = 1.0;
    CHECK(categorize_cause(deagg, same_origin) == std::set<Cause>{Cause::Deaggregation});

    FeatureVector delayed;
    delayed.alt_sources = 1.0;
    CHECK(categorize_cause(delayed, distinct) == std::set<Cause>{Cause::DelayedRoas});

    FeatureVector multi;
    multi.moas = 1.0;
    CHECK(categorize_cause(multi, distinct) == std::set<Cause>{Cause::MultiOrigins});
    // same-ASN MOAS does not count as multi-origin
    CHECK(categorize_cause(multi, same_origin).empty());

    FeatureVector dep;
    dep.pc = 1.0;
    CHECK(categorize_cause(dep, distinct) == std::set<Cause>{Cause::Dependencies});
    dep = FeatureVector{};
    dep.depen = 0.4;
    CHECK(categorize_cause(dep, distinct) == std::set<Cause>{Cause::Dependencies});

    // zero distance with no other relation implies a hidden dependency
    FeatureVector colo;
    colo.as_dist = 0.0;
    CHECK(categorize_cause(colo, distinct) == std::set<Cause>{Cause::Dependencies});
    // ... but not when another relation explains it
    colo.moas = 1.0;
    CHECK(categorize_cause(colo, distinct) == std::set<Cause>{Cause::MultiOrigins});

    // multiple causes at once
    FeatureVector both;
    both.origin_match = 1.0;
    both.pc = 1.0;
    CHECK(categorize_cause(both, same_origin) ==
          std::set<Cause>{Cause::Deaggregation, Cause::Dependencies});
}

TEST_CASE("occurrence bookkeeping counts one appearance per day") {
    Store store;
    RouteKey k = key(50);
    store.note_benign_occurrence(k, day0);
    store.note_benign_occurrence(k, day0);  // same day, no double count
    store.note_benign_occurrence(k, day0 + 3);
    store.note_benign_occurrence(k, day0 + 9);
    const auto& stat = store.occurrences().at(k);
    CHECK(stat.occurrences == 3);
    CHECK(stat.first_seen == day0);
    CHECK(stat.last_seen == day0 + 9);
}

TEST_CASE("store serialization round-trips and rejects other versions") {
    Store store;
    RouteKey a = key(60, "10.0.0.0/24");
    RouteKey b = key(61, "2001:db8::/32");
    store.enter_quarantine(a, day0, QuarantineReason::NewPolicy);
    store.observe(a, day0 + 1);
    store.enter_quarantine(b, day0, QuarantineReason::ClassifiedBenign);
    store.fast_path_whitelist(b, tight_vector(), TightnessWeights::uniform(), 0.1,
                              day0);
    store.manual_decision(key(62), ManualVerdict::Deny, "confirmed", day0);
    store.note_benign_occurrence(b, day0);
    store.last_run = day0;

    std::string blob = store.serialize();
    Store back = Store::deserialize(blob);
    CHECK(back.serialize() == blob);
    CHECK(back.state_hash() == store.state_hash());
    CHECK(back.whitelist_check(b.origin, b.prefix));
    CHECK(back.denied(key(62)));
    CHECK(back.find_quarantine(a)->reason == QuarantineReason::NewPolicy);
    CHECK(back.last_run == day0);

    std::string tampered = blob;
    auto pos = tampered.find("\"format_version\": 1");
    REQUIRE(pos != std::string::npos);
    tampered.replace(pos, 19, "\"format_version\": 9");
    CHECK_THROWS(Store::deserialize(tampered));

    // exports carry the format-version marker
    CHECK(whitelist_to_csv(store).substr(0, 20) == "#rovwl-whitelist-v1\n");
    CHECK(deny_to_csv(store).substr(0, 15) == "#rovwl-deny-v1\n");
    CHECK(whitelist_to_json(store).find("\"format_version\": 1") != std::string::npos);
}
