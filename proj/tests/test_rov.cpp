#include <doctest.h>

#include "rovwl/rov.hpp"
#include "support/oracles.hpp"

using namespace rovwl;

namespace {

Announcement make_ann(uint32_t origin, const char* prefix, int64_t ts = 0) {
    Announcement ann;
    ann.prefix = *Prefix::parse(prefix);
    ann.as_path = {Asn{64496}, Asn{origin}};
    ann.origin = Asn{origin};
    ann.ts = ts;
    return ann;
}

Vrp make_vrp(uint32_t asn, const char* prefix, int max_length) {
    return {Asn{asn}, *Prefix::parse(prefix), uint8_t(max_length)};
}

}  // namespace

TEST_CASE("empty index answers Unknown everywhere") {
    RoaIndex idx = RoaIndex::build({});
    CHECK(idx.size() == 0);
    auto st = idx.validate(make_ann(3215, "193.2.0.0/15"));
    CHECK(st.validity == Validity::Unknown);
    CHECK(st.matched_vrps.empty());
}

TEST_CASE("delegation example: provider ROA, customer announcements") {
    // provider AS3215 holds 193.2.0.0/15 with max length 15; its customers
    // announce /24s without ROAs of their own
    RoaIndex idx = RoaIndex::build({make_vrp(3215, "193.2.0.0/15", 15)});
    CHECK(idx.size() == 1);

    auto customer = idx.validate(make_ann(1272, "193.2.35.0/24"));
    CHECK(customer.validity == Validity::Invalid);
    REQUIRE(customer.matched_vrps.size() == 1);
    CHECK(customer.matched_vrps[0].asn.value == 3215);

    auto customer2 = idx.validate(make_ann(8361, "193.2.155.0/24"));
    CHECK(customer2.validity == Validity::Invalid);

    // exact self-match
    CHECK(idx.validate(make_ann(3215, "193.2.0.0/15")).validity == Validity::Valid);

    // origin matches but 24 > max length 15
    CHECK(idx.validate(make_ann(3215, "193.2.35.0/24")).validity ==
          Validity::Invalid);
}

TEST_CASE("covering lookup returns descending prefix length") {
    RoaIndex idx = RoaIndex::build({
        make_vrp(1, "10.0.0.0/8", 8),
        make_vrp(2, "10.1.0.0/16", 24),
        make_vrp(3, "10.1.2.0/24", 24),
    });
    auto covering = idx.covering(*Prefix::parse("10.1.2.0/25"));
    REQUIRE(covering.size() == 3);
    CHECK(covering[0].asn.value == 3);
    CHECK(covering[1].asn.value == 2);
    CHECK(covering[2].asn.value == 1);

    CHECK(idx.covering(*Prefix::parse("10.0.0.0/8")).size() == 1);
    CHECK(idx.covering(*Prefix::parse("11.0.0.0/8")).empty());
    CHECK(RoaIndex::build({}).covering(*Prefix::parse("10.0.0.0/8")).empty());
}

TEST_CASE("duplicate VRPs collapse; distinct max lengths both kept") {
    RoaIndex idx = RoaIndex::build({
        make_vrp(9, "10.0.0.0/16", 16),
        make_vrp(9, "10.0.0.0/16", 16),   // exact duplicate
        make_vrp(9, "10.0.0.0/16", 24),   // differing max length survives
    });
    CHECK(idx.size() == 2);
    // the /24 announcement is valid thanks to the max-length-24 VRP
    CHECK(idx.validate(make_ann(9, "10.0.0.0/24")).validity == Validity::Valid);
}

TEST_CASE("trichotomy and monotonicity on random cases") {
    oracles::PrefixGen gen(0x5eed);
    std::vector<Vrp> vrps;
    for (int i = 0; i < 400; ++i) vrps.push_back(gen.next_vrp());
    RoaIndex idx = RoaIndex::build(vrps);

    for (int i = 0; i < 500; ++i) {
        Announcement ann = gen.next_announcement();
        auto st = idx.validate(ann);
        // trichotomy: matched set empty exactly for Unknown
        CHECK((st.validity == Validity::Unknown) == st.matched_vrps.empty());

        // monotonicity: adding one VRP never degrades Valid
        if (st.validity == Validity::Valid) {
            std::vector<Vrp> more = vrps;
            more.push_back(gen.next_vrp());
            CHECK(RoaIndex::build(more).validate(ann).validity == Validity::Valid);
        }
    }
}

TEST_CASE("trie validation agrees with the linear-scan oracle") {
    oracles::PrefixGen gen(0xfeed);
    std::vector<Vrp> vrps;
    for (int i = 0; i < 1000; ++i) vrps.push_back(gen.next_vrp());
    RoaIndex idx = RoaIndex::build(vrps);

    for (int i = 0; i < 1000; ++i) {
        Announcement ann = gen.next_announcement();
        CHECK(idx.validate(ann).validity == oracles::scan_validate(vrps, ann));
    }

    // covering equals the oracle scan as a set and in order
    for (int i = 0; i < 200; ++i) {
        Prefix p = gen.next();
        auto got = idx.covering(p);
        auto want = oracles::scan_covering(vrps, p);
        CHECK(got == want);
    }
}

TEST_CASE("index lookups are pure") {
    oracles::PrefixGen gen(7);
    std::vector<Vrp> vrps;
    for (int i = 0; i < 50; ++i) vrps.push_back(gen.next_vrp());
    RoaIndex idx = RoaIndex::build(vrps);
    Announcement ann = gen.next_announcement();
    auto first = idx.validate(ann);
    for (int i = 0; i < 10; ++i) {
        auto again = idx.validate(ann);
        CHECK(again.validity == first.validity);
        CHECK(again.matched_vrps == first.matched_vrps);
    }
}

TEST_CASE("VRP CSV parsing: header, AS-prefix forms, per-record rejection") {
    const char* text =
        "ASN,IP Prefix,Max Length,Trust Anchor\n"
        "AS3215,193.2.0.0/15,15,ripe\n"
        "13335,1.0.0.0/24,24,apnic\n"
        "ASxx,1.2.0.0/16,16,ripe\n"       // bad ASN
        "13335,1.0.0.0/24,12,apnic\n"     // max length below prefix length
        "13335,1.0.0.0/24,40,apnic\n"     // beyond family maximum
        "13335,nonsense,24,apnic\n";
    auto res = parse_vrp_csv(text);
    CHECK(res.vrps.size() == 2);
    CHECK(res.diagnostics.size() == 4);
    CHECK(res.diagnostics[0].line == 4);
    CHECK(res.vrps[0].asn.value == 3215);

    // serialize -> parse is a fixed point, ASNs emitted bare
    std::string out = to_vrp_csv(res.vrps);
    CHECK(out.find("AS3215") == std::string::npos);
    CHECK(out.find("3215,") != std::string::npos);
    auto back = parse_vrp_csv(out);
    CHECK(back.diagnostics.empty());
    CHECK(to_vrp_csv(back.vrps) == out);
}

TEST_CASE("announcement JSONL parsing") {
    const char* text =
        "{\"ts\":100,\"peer_asn\":64500,\"prefix\":\"10.0.0.0/24\",\"as_path\":[64500,65010],\"extra\":true}\n"
        "{\"prefix\":\"10.0.0.0/24\",\"as_path\":[1],\"ts\":7}\n"
        "{\"ts\":1,\"prefix\":\"10.0.0.0/24\",\"as_path\":[]}\n"
        "{\"ts\":1,\"prefix\":\"10.0.0.0/24\",\"as_path\":[1,[2,3]]}\n"
        "{\"ts\":1,\"prefix\":\"10.0.0.0/24\"}\n"
        "not json\n";
    auto res = parse_announcements_jsonl(text);
    REQUIRE(res.announcements.size() == 2);
    CHECK(res.diagnostics.size() == 4);
    CHECK(res.announcements[0].origin.value == 65010);
    CHECK(res.announcements[0].peer->value == 64500);
    CHECK(res.announcements[0].ts == 100);
    CHECK(res.announcements[1].origin.value == 1);   // field order irrelevant
    CHECK(!res.announcements[1].peer);

    // AS_SET-style nested element rejected with a diagnostic
    bool saw_as_set = false;
    for (const auto& d : res.diagnostics) {
        if (d.line == 4 && d.reason.find("plain ASN") != std::string::npos)
            saw_as_set = true;
    }
    CHECK(saw_as_set);

    // round-trip
    auto out = to_announcements_jsonl(res.announcements);
    auto back = parse_announcements_jsonl(out);
    CHECK(back.diagnostics.empty());
    CHECK(to_announcements_jsonl(back.announcements) == out);
}
