#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <random>
#include <sstream>

#include "ciro/rng.hpp"
#include "ciro/wire.hpp"

using namespace ciro;

namespace {

std::vector<uint8_t> read_hex_file(const std::string& name) {
    std::ifstream in(std::string(CIRO_TEST_DATA_DIR "/") + name);
    REQUIRE(in.good());
    std::string hex;
    in >> hex;
    REQUIRE(hex.size() % 2 == 0);
    std::vector<uint8_t> out;
    for (size_t i = 0; i < hex.size(); i += 2)
        out.push_back(static_cast<uint8_t>(std::stoi(hex.substr(i, 2), nullptr, 16)));
    return out;
}

constexpr uint64_t kT0 = 1735689600;  // 2025-01-01T00:00:00Z

RoutingMessage golden_mixed_message() {
    RoutingMessage msg;
    msg.timestamp = kT0 + 3600;
    msg.origin = 1;

    AsEntry absent;
    absent.as = 1;
    absent.ingress = 0;
    absent.egress = 2;
    msg.entries.push_back(absent);

    AsEntry flat;
    flat.as = 300;
    flat.ingress = 7;
    flat.egress = 9;
    flat.ext.kind = ExtKind::flat;
    for (size_t i = 0; i < 24; ++i) {
        flat.ext.flat.octets[i] = static_cast<uint8_t>(i);
        flat.ext.flat.octets[24 + i] = static_cast<uint8_t>(100 + i);
    }
    msg.entries.push_back(flat);

    AsEntry mapped;
    mapped.as = 0xDEADBEEF;
    mapped.ingress = 2;
    mapped.egress = 1;
    mapped.ext.kind = ExtKind::map;
    CidtWireVector v1, v2;
    v1.octets.fill(5);
    for (size_t i = 0; i < 48; ++i) v2.octets[i] = static_cast<uint8_t>(i % 7);
    mapped.ext.keyed = {{2, v1}, {9, v2}};
    msg.entries.push_back(mapped);
    return msg;
}

}  // namespace

TEST_CASE("quantization against the golden table") {
    std::ifstream in(CIRO_TEST_DATA_DIR "/encode.csv");
    REQUIRE(in.good());
    std::string line;
    std::getline(in, line);  // header
    size_t rows = 0;
    while (std::getline(in, line)) {
        auto f = split(trim(line), ',');
        REQUIRE(f.size() == 2);
        double g = parse_double(f[0]);
        auto expected = static_cast<uint8_t>(parse_int(f[1]));
        INFO("g/bit = " << f[0]);
        CHECK(encode_cidt(g) == expected);
        ++rows;
    }
    CHECK(rows >= 10);
}

TEST_CASE("quantization semantics") {
    CHECK(encode_cidt(0.0) == 0);
    CHECK(encode_cidt(2.7778e-12) == 3);  // 2.7778 mg/Gbit rounds half-up to 3
    CHECK(decode_cidt(3) == 3e-12);
    CHECK_THROWS_AS(encode_cidt(-1e-12), Error);
    CHECK_THROWS_AS(encode_cidt(std::numeric_limits<double>::quiet_NaN()), Error);

    SECTION("clamp statistics") {
        ClampStats st;
        encode_cidt(1e-9, &st);   // 1000 mg -> clamped
        encode_cidt(1e-12, &st);  // 1 mg -> kept
        CHECK(st.encoded == 2);
        CHECK(st.clamped == 1);
    }
    SECTION("round-trip error is at most half a quantum below the clamp range") {
        std::mt19937_64 rng(7);
        for (int i = 0; i < 2000; ++i) {
            double mg = static_cast<double>(rng() % 2550000) / 10000.0;  // [0, 255)
            double g = mg * 1e-12;
            double back = decode_cidt(encode_cidt(g)) * 1e12;
            CHECK(std::abs(back - mg) <= 0.5 + 1e-9);
        }
    }
}

TEST_CASE("time alignment shift") {
    Hours24 v{};
    for (size_t i = 0; i < 24; ++i) v[i] = static_cast<double>(i + 1);

    SECTION("zero shift is identity") {
        CHECK(align_shift(v, 0) == v);
    }
    SECTION("shift moves slots toward the future and zero-fills the past") {
        Hours24 s = align_shift(v, 3);
        for (size_t i = 0; i < 3; ++i) CHECK(s[i] == 0.0);
        for (size_t i = 3; i < 24; ++i) CHECK(s[i] == v[i - 3]);
    }
    SECTION("shift of 24 or more clears everything") {
        Hours24 s = align_shift(v, 24);
        for (double x : s) CHECK(x == 0.0);
        s = align_shift(v, 1000);
        for (double x : s) CHECK(x == 0.0);
    }
}

TEST_CASE("current hour index") {
    CHECK(current_hour_index(kT0, kT0) == 0);
    CHECK(current_hour_index(kT0 + 3599, kT0) == 0);
    CHECK(current_hour_index(kT0 + 3600, kT0) == 1);
    CHECK(current_hour_index(kT0 + 23 * 3600, kT0) == 23);
    CHECK_FALSE(current_hour_index(kT0 + 24 * 3600, kT0).has_value());
    CHECK_FALSE(current_hour_index(kT0 - 3600, kT0).has_value());
    // sub-hour skew inside the same hour still works
    CHECK(current_hour_index(kT0 + 1800, kT0 + 60) == 0);
}

TEST_CASE("extension building from a forecast database") {
    ForecastDatabase db;
    db.base_hour = hour_of(kT0);
    Hours24 fwd{}, bwd{};
    for (size_t h = 0; h < 24; ++h) {
        fwd[h] = static_cast<double>(h) * 1e-12;        // h mg/Gbit
        bwd[h] = static_cast<double>(h + 30) * 1e-12;   // h+30 mg/Gbit
    }
    db.records[{1, 2}] = fwd;
    db.records[{2, 1}] = bwd;

    SECTION("aligned at origination") {
        CidtExtension ext = build_extension(db, 1, 2, kT0, kT0);
        REQUIRE(ext.kind == ExtKind::flat);
        for (size_t h = 0; h < 24; ++h) {
            CHECK(ext.flat.forward(h) == h);
            CHECK(ext.flat.backward(h) == h + 30);
        }
    }
    SECTION("extension two hours after origination shifts the vectors") {
        CidtExtension ext = build_extension(db, 1, 2, kT0, kT0 + 2 * 3600);
        CHECK(ext.flat.forward(0) == 0);
        CHECK(ext.flat.forward(1) == 0);
        CHECK(ext.flat.forward(2) == 0);  // fwd[0] shifted to slot 2
        CHECK(ext.flat.forward(3) == 1);
        CHECK(ext.flat.backward(2) == 30);
        CHECK(ext.flat.backward(3) == 31);
    }
    SECTION("missing either direction yields an absent extension") {
        CHECK(build_extension(db, 1, 3, kT0, kT0).kind == ExtKind::absent);
        CHECK(build_extension(db, 3, 1, kT0, kT0).kind == ExtKind::absent);
    }
    SECTION("future message timestamps are rejected") {
        CHECK_THROWS_AS(build_extension(db, 1, 2, kT0 + 3600, kT0), Error);
    }
    SECTION("map form keys sorted, deduplicated, egress dropped") {
        db.records[{3, 2}] = fwd;
        db.records[{2, 3}] = bwd;
        CidtExtension ext = build_extension_map(db, {3, 1, 3, 2, 5}, 2, kT0, kT0);
        REQUIRE(ext.kind == ExtKind::map);
        REQUIRE(ext.keyed.size() == 2);  // key 2 == egress dropped, key 5 has no records
        CHECK(ext.keyed[0].first == 1);
        CHECK(ext.keyed[1].first == 3);
        CHECK(ext.vector_for_key(1) != nullptr);
        CHECK(ext.vector_for_key(5) == nullptr);
        CidtExtension empty = build_extension_map(db, {5}, 2, kT0, kT0);
        CHECK(empty.kind == ExtKind::absent);
    }
}

TEST_CASE("golden wire vectors") {
    SECTION("header-only message") {
        std::vector<uint8_t> bytes = read_hex_file("empty.hex");
        CHECK(bytes.size() == kHeaderOctets);
        RoutingMessage msg;
        msg.timestamp = kT0;
        msg.origin = 65000;
        CHECK(serialize(msg) == bytes);
        RoutingMessage rt = deserialize(bytes);
        CHECK(rt == msg);
    }
    SECTION("mixed extensions") {
        std::vector<uint8_t> bytes = read_hex_file("mixed.hex");
        RoutingMessage msg = golden_mixed_message();
        CHECK(serialize(msg) == bytes);
        CHECK(deserialize(bytes) == msg);

        std::ifstream in(CIRO_TEST_DATA_DIR "/mixed.hash");
        REQUIRE(in.good());
        uint64_t expected_hash;
        in >> expected_hash;
        CHECK(message_hash(msg) == expected_hash);
    }
}

TEST_CASE("serialization round-trips random messages") {
    Rng rng(20240101);
    for (int it = 0; it < 500; ++it) {
        RoutingMessage msg;
        msg.timestamp = kT0 + rng.below(100000);
        msg.origin = rng.below(1 << 20);
        size_t n = rng.below(6);
        for (size_t e = 0; e < n; ++e) {
            AsEntry entry;
            entry.as = rng.below(1 << 16) + 1;
            entry.ingress = static_cast<IntfId>(rng.below(10));
            entry.egress = static_cast<IntfId>(rng.below(10) + 1);
            switch (rng.below(3)) {
                case 0: break;
                case 1: {
                    entry.ext.kind = ExtKind::flat;
                    for (auto& o : entry.ext.flat.octets) o = static_cast<uint8_t>(rng.below(256));
                    break;
                }
                default: {
                    entry.ext.kind = ExtKind::map;
                    size_t keys = 1 + rng.below(3);
                    for (size_t k = 0; k < keys; ++k) {
                        CidtWireVector v;
                        for (auto& o : v.octets) o = static_cast<uint8_t>(rng.below(256));
                        entry.ext.keyed.push_back({static_cast<IntfId>(k + 1), v});
                    }
                    break;
                }
            }
            msg.entries.push_back(std::move(entry));
        }
        std::vector<uint8_t> bytes = serialize(msg);
        CHECK(deserialize(bytes) == msg);
    }
}

TEST_CASE("malformed wire data is rejected") {
    RoutingMessage msg = golden_mixed_message();
    std::vector<uint8_t> bytes = serialize(msg);

    SECTION("truncation") {
        for (size_t cut : {size_t{0}, size_t{4}, size_t{22}, bytes.size() - 1})
            CHECK_THROWS_AS(deserialize(std::span(bytes.data(), cut)), Error);
    }
    SECTION("trailing bytes") {
        std::vector<uint8_t> extra = bytes;
        extra.push_back(0);
        CHECK_THROWS_AS(deserialize(extra), Error);
    }
    SECTION("bad magic") {
        std::vector<uint8_t> bad = bytes;
        bad[0] ^= 0xff;
        CHECK_THROWS_AS(deserialize(bad), Error);
    }
    SECTION("bad version") {
        std::vector<uint8_t> bad = bytes;
        bad[4] = 9;
        CHECK_THROWS_AS(deserialize(bad), Error);
    }
    SECTION("bad extension kind") {
        std::vector<uint8_t> bad = bytes;
        bad[kHeaderOctets + 12] = 7;  // first entry's kind octet
        CHECK_THROWS_AS(deserialize(bad), Error);
    }
    SECTION("empty map extension on the wire") {
        RoutingMessage m;
        m.timestamp = kT0;
        m.origin = 5;
        AsEntry e;
        e.as = 5;
        e.egress = 1;
        e.ext.kind = ExtKind::map;  // keyed empty
        m.entries.push_back(e);
        CHECK_THROWS_AS(serialize(m), Error);
    }
}

TEST_CASE("cumulative current-hour CIDT") {
    RoutingMessage msg;
    msg.timestamp = kT0;
    msg.origin = 1;

    AsEntry origin;  // no extension: contributes zero
    origin.as = 1;
    origin.egress = 1;
    msg.entries.push_back(origin);

    AsEntry a;
    a.as = 2;
    a.ingress = 1;
    a.egress = 2;
    a.ext.kind = ExtKind::flat;
    a.ext.flat.octets[0] = 10;
    a.ext.flat.octets[1] = 11;
    msg.entries.push_back(a);

    AsEntry b;  // map keyed by its ingress
    b.as = 3;
    b.ingress = 4;
    b.egress = 5;
    b.ext.kind = ExtKind::map;
    CidtWireVector v;
    v.octets[0] = 20;
    v.octets[1] = 21;
    b.ext.keyed = {{4, v}};
    msg.entries.push_back(b);

    CHECK(cumulative_current_cidt(msg, kT0) == 30e-12);
    CHECK(cumulative_current_cidt(msg, kT0 + 3600) == 32e-12);
    CHECK(cumulative_current_cidt(msg, kT0 + 24 * 3600) == 0.0);  // window expired

    SECTION("single-key map falls back when the ingress key is missing") {
        msg.entries[2].ext.keyed[0].first = 9;  // key no longer matches ingress 4
        CHECK(cumulative_current_cidt(msg, kT0) == 30e-12);
    }
}
