#include <doctest.h>

#include "rovwl/net.hpp"

using namespace rovwl;

TEST_CASE("asn parsing accepts AS-prefixed and bare forms") {
    CHECK(parse_asn("AS3215")->value == 3215);
    CHECK(parse_asn("as3215")->value == 3215);
    CHECK(parse_asn("3215")->value == 3215);
    CHECK(parse_asn("4294967295")->value == 4294967295u);
    CHECK(!parse_asn("4294967296"));
    CHECK(!parse_asn(""));
    CHECK(!parse_asn("AS"));
    CHECK(!parse_asn("AS12x"));
    CHECK(!parse_asn("-5"));
}

TEST_CASE("bogon origin predicate matches the IANA special-purpose ranges") {
    CHECK(is_bogon_asn(Asn{0}));
    CHECK(is_bogon_asn(Asn{23456}));
    CHECK(is_bogon_asn(Asn{64500}));
    CHECK(is_bogon_asn(Asn{65000}));
    CHECK(is_bogon_asn(Asn{65535}));
    CHECK(is_bogon_asn(Asn{65536}));
    CHECK(is_bogon_asn(Asn{100000}));
    CHECK(is_bogon_asn(Asn{4200000000u}));
    CHECK(is_bogon_asn(Asn{4294967295u}));
    CHECK(!is_bogon_asn(Asn{3215}));
    CHECK(!is_bogon_asn(Asn{131072}));
    CHECK(!is_bogon_asn(Asn{212483}));
}

TEST_CASE("prefix parse canonicalizes and round-trips") {
    auto p = Prefix::parse("193.2.0.0/15");
    REQUIRE(p);
    CHECK(p->family() == Family::v4);
    CHECK(p->length() == 15);
    CHECK(p->str() == "193.2.0.0/15");

    // host bits are masked off
    auto masked = Prefix::parse("193.2.35.1/24");
    REQUIRE(masked);
    CHECK(masked->str() == "193.2.35.0/24");

    auto v6 = Prefix::parse("2001:DB8::/32");
    REQUIRE(v6);
    CHECK(v6->family() == Family::v6);
    CHECK(v6->str() == "2001:db8::/32");  // lowercase canonical

    CHECK(!Prefix::parse("193.2.0.0"));
    CHECK(!Prefix::parse("193.2.0.0/33"));
    CHECK(!Prefix::parse("2001:db8::/129"));
    CHECK(!Prefix::parse("banana/8"));
    CHECK(!Prefix::parse("/8"));
}

TEST_CASE("prefix covers: equal or less specific, same family") {
    auto p15 = *Prefix::parse("193.2.0.0/15");
    auto p24 = *Prefix::parse("193.2.35.0/24");
    auto other = *Prefix::parse("194.0.0.0/15");
    auto v6 = *Prefix::parse("2001:db8::/32");

    CHECK(p15.covers(p24));
    CHECK(p15.covers(p15));
    CHECK(!p24.covers(p15));
    CHECK(!other.covers(p24));
    CHECK(!p15.covers(v6));
    CHECK(Prefix::parse("0.0.0.0/0")->covers(p24));
}

TEST_CASE("prefix bit addressing matches the textual form") {
    auto p = *Prefix::parse("128.0.0.0/1");
    CHECK(p.bit(0) == true);
    auto q = *Prefix::parse("64.0.0.0/2");
    CHECK(q.bit(0) == false);
    CHECK(q.bit(1) == true);
}

TEST_CASE("calendar dates round-trip and convert from timestamps") {
    auto d = CalDate::parse("2022-10-01");
    REQUIRE(d);
    CHECK(d->str() == "2022-10-01");
    CHECK((*d + 1).str() == "2022-10-02");
    CHECK((*d + 31).str() == "2022-11-01");
    CHECK(CalDate::parse("1970-01-01")->days == 0);
    CHECK(CalDate::from_ts(0).days == 0);
    CHECK(CalDate::from_ts(86399).days == 0);
    CHECK(CalDate::from_ts(86400).days == 1);
    CHECK(CalDate::from_ts(d->start_ts() + 3600) == *d);
    CHECK(!CalDate::parse("2022-13-01"));
    CHECK(!CalDate::parse("20221001"));
}

TEST_CASE("timestamp parsing handles epoch and ISO forms") {
    CHECK(*parse_timestamp("1664582400") == 1664582400);
    CHECK(*parse_timestamp("2022-10-01") == 1664582400);
    CHECK(*parse_timestamp("2022-10-01 00:00:00") == 1664582400);
    CHECK(*parse_timestamp("2022-10-01T01:30:00Z") == 1664582400 + 5400);
    CHECK(*parse_timestamp("2022-10-01 00:15:00+00") == 1664582400 + 900);
    CHECK(!parse_timestamp("not-a-time"));
    CHECK(!parse_timestamp("2022-10-01 00:15:00+02"));
}
