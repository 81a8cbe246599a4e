#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "ciro/forecast.hpp"
#include "ciro/topology.hpp"
#include "ciro/topology_io.hpp"

using namespace ciro;

namespace {

constexpr uint64_t kT0 = 1735689600;  // 2025-01-01T00:00:00Z

// Three routers in a row with a long detour edge; two border interfaces.
AsNode make_node() {
    AsNode as;
    as.id = 1;
    as.pue = 2.0;
    as.intra.routers = {{1, {0, 0}}, {2, {0, 1}}, {3, {0, 2}}};
    as.intra.links = {{1, 2, 111.0}, {2, 3, 111.0}, {1, 3, 400.0}};
    as.interfaces[1] = Interface{1, 100, {0, 0}, 1};
    as.interfaces[2] = Interface{2, 200, {0, 2}, 3};
    return as;
}

// Single-region provider whose level can be changed between ticks; hour h
// fetches level + h so slots are distinguishable.
struct LevelProvider : CieProvider {
    double level = 100.0;
    std::string location_key(const GeoCoord&) const override { return "z"; }
    Hours24 fetch(const std::string&, uint64_t) const override {
        Hours24 v;
        for (size_t h = 0; h < 24; ++h) v[h] = level + static_cast<double>(h);
        return v;
    }
};

struct FlakyProvider : CieProvider {
    bool outage = false;
    std::string location_key(const GeoCoord&) const override { return "z"; }
    Hours24 fetch(const std::string&, uint64_t) const override {
        if (outage) throw NotFound("fetch outage");
        Hours24 v;
        v.fill(50.0);
        return v;
    }
};

}  // namespace

TEST_CASE("forecast refresh computes the energy model per hour") {
    AsNode as = make_node();
    LevelProvider provider;
    ForecastDatabase db;
    run_tcie_tick(as, provider, kT0, db);

    CHECK(db.base_hour == hour_of(kT0));
    REQUIRE(db.records.size() == 2);  // (1,2) and (2,1)
    REQUIRE(db.cie_cache.count("z") == 1);

    const IntraDomainPath& path = as.device_path(1, 2);
    // detour edge is longer: route runs 1-2-3, so 3 sites plus 2 amplifiers
    CHECK(path.devices.size() == 23);
    for (size_t h = 0; h < 24; ++h) {
        double cie_h = 100.0 + static_cast<double>(h);
        CieLookup flat = [&](const GeoCoord&) { return cie_h; };
        CHECK(query_forecast(db, 1, 2)[h] == path_cidt(path, flat));
    }
    // every slot is positive and scales linearly with the electricity intensity
    LevelProvider doubled;
    doubled.level = 200.0;
    AsNode as2 = make_node();
    ForecastDatabase db2;
    run_tcie_tick(as2, doubled, kT0, db2);
    CHECK(query_forecast(db2, 1, 2)[0] == 2.0 * query_forecast(db, 1, 2)[0]);

    CHECK_THROWS_AS(query_forecast(db, 1, 7), NotFound);
}

TEST_CASE("path refresh reuses cached electricity forecasts") {
    AsNode as = make_node();
    LevelProvider provider;
    ForecastDatabase db;
    run_tcie_tick(as, provider, kT0, db);
    Hours24 before = query_forecast(db, 1, 2);

    SECTION("unchanged paths keep their records bitwise") {
        provider.level = 999.0;  // would change values if recomputed from a fetch
        run_tpath_tick(as, provider, db);
        CHECK(query_forecast(db, 1, 2) == before);
        CHECK(db.base_hour == hour_of(kT0));
    }
    SECTION("a changed path recomputes against the cached vectors") {
        as.intra.links[2].km = 100.0;  // the 1-3 detour becomes the shortcut
        as.invalidate_paths();
        provider.level = 999.0;  // must NOT be fetched by the path tick
        run_tpath_tick(as, provider, db);
        const IntraDomainPath& path = as.device_path(1, 2);
        CHECK(path.devices.size() == 15);  // 2 sites + 1 amplifier
        for (size_t h = 0; h < 24; ++h) {
            double cie_h = 100.0 + static_cast<double>(h);  // cached level
            CieLookup flat = [&](const GeoCoord&) { return cie_h; };
            CHECK(query_forecast(db, 1, 2)[h] == path_cidt(path, flat));
        }
    }
    SECTION("appearing and vanishing pairs are reflected") {
        as.interfaces[3] = Interface{3, 300, {0, 1}, 2};
        run_tpath_tick(as, provider, db);
        CHECK(db.records.size() == 6);
        CHECK_NOTHROW(query_forecast(db, 3, 1));
        as.interfaces.erase(3);
        as.invalidate_paths();
        run_tpath_tick(as, provider, db);
        CHECK(db.records.size() == 2);
        CHECK_THROWS_AS(query_forecast(db, 3, 1), NotFound);
    }
}

TEST_CASE("a failed fetch leaves the database untouched") {
    AsNode as = make_node();
    FlakyProvider provider;
    ForecastDatabase db;
    run_tcie_tick(as, provider, kT0, db);
    Hours24 before = query_forecast(db, 1, 2);

    provider.outage = true;
    CHECK_THROWS_AS(run_tcie_tick(as, provider, kT0 + 3600, db), NotFound);
    CHECK(db.base_hour == hour_of(kT0));
    CHECK(query_forecast(db, 1, 2) == before);
}

TEST_CASE("static annual provider") {
    Topology topo = gen_synthetic(11, 8);
    StaticAnnualProvider provider(topo);
    for (auto& [name, zone] : topo.zones) {
        Hours24 v = provider.fetch(name, hour_of(kT0));
        for (double x : v) CHECK(x == zone.cie_annual);
        CHECK(provider.location_key(zone.center) == name);
    }
    CHECK_THROWS_AS(provider.fetch("atlantis", 0), NotFound);

    SECTION("refresh of a synthetic node matches the annual closed form") {
        AsNode& as = topo.node(1);
        ForecastDatabase db;
        run_tcie_tick(as, provider, kT0, db);
        CieLookup annual = topo.annual_cie_lookup();
        for (auto& [pair, vec] : db.records) {
            double expect = path_cidt(as.device_path(pair.first, pair.second), annual);
            for (size_t h = 0; h < 24; ++h) CHECK(vec[h] == expect);
        }
    }
}

TEST_CASE("diurnal provider is a pure function of zone and absolute hour") {
    Topology topo = gen_synthetic(11, 8);
    SyntheticDiurnalProvider provider(topo, 0.3, 0.05, 77);
    uint64_t bh = hour_of(kT0);

    std::string key = topo.zones.begin()->first;
    Hours24 a = provider.fetch(key, bh);
    Hours24 b = provider.fetch(key, bh);
    CHECK(a == b);
    // shifting the base hour re-addresses the same absolute hours
    Hours24 c = provider.fetch(key, bh + 1);
    for (size_t h = 0; h + 1 < 24; ++h) CHECK(c[h] == a[h + 1]);

    SECTION("values stay above the floor even in the cleanest zone") {
        SyntheticDiurnalProvider wild(topo, 1.5, 1.0, 3);
        for (auto& [name, zone] : topo.zones) {
            Hours24 v = wild.fetch(name, bh);
            for (double x : v) CHECK(x >= 0.5);
        }
    }
    SECTION("different zones and seeds decorrelate") {
        SyntheticDiurnalProvider other(topo, 0.3, 0.05, 78);
        CHECK(other.fetch(key, bh) != a);
    }
}

TEST_CASE("forecast CSV round-trip") {
    AsNode as = make_node();
    LevelProvider provider;
    provider.level = 321.5;
    ForecastDatabase db;
    run_tcie_tick(as, provider, kT0 + 7 * 3600, db);

    std::ostringstream out;
    dump_forecast_csv(db, out);
    std::istringstream in(out.str());
    ForecastDatabase back = load_forecast_csv(in);
    CHECK(back.base_hour == db.base_hour);
    CHECK(back.records == db.records);

    SECTION("wrong arity is rejected") {
        std::istringstream bad("1,2,3\n");
        CHECK_THROWS_AS(load_forecast_csv(bad), Error);
    }
}

TEST_CASE("CSV-backed electricity provider") {
    Topology topo = gen_synthetic(11, 6);
    SyntheticDiurnalProvider source(topo, 0.3, 0.05, 9);
    uint64_t bh = hour_of(kT0);

    std::ostringstream out;
    dump_cie_csv(topo, source, bh, out);
    std::istringstream in(out.str());
    CsvCieProvider csv(in, [&](const GeoCoord& g) { return topo.zone_of_point(g).name; });

    for (auto& [name, zone] : topo.zones) {
        CHECK(csv.fetch(name, bh) == source.fetch(name, bh));
        CHECK(csv.location_key(zone.center) == name);
    }
    CHECK_THROWS_AS(csv.fetch(topo.zones.begin()->first, bh + 1), NotFound);
    CHECK_THROWS_AS(csv.fetch("atlantis", bh), NotFound);

    SECTION("wrong arity is rejected") {
        std::istringstream bad("z,2025-01-01T00:00:00Z,1,2\n");
        CHECK_THROWS_AS(CsvCieProvider(bad, [](const GeoCoord&) { return "z"; }), Error);
    }
}
