#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "ciro/beaconing.hpp"
#include "ciro/topology_io.hpp"

using namespace ciro;

namespace {

constexpr uint64_t kT0 = 1735689600;  // 2025-01-01T00:00:00Z

Topology make_topo(const std::vector<RelEdge>& rel, const std::map<AsId, GeoCoord>& loc) {
    IngestInputs in;
    in.rel = rel;
    std::map<AsId, std::set<AsId>> nbs;
    for (auto& e : rel) {
        nbs[e.a].insert(e.b);
        nbs[e.b].insert(e.a);
    }
    for (auto& [as, s] : nbs) {
        IntfId next = 1;
        for (AsId nb : s) {
            in.geo[{as, next}] = geo_interpolate(loc.at(as), loc.at(nb), 0.2);
            ++next;
        }
    }
    Zone z;
    z.name = "coalland";
    z.mix[Resource::coal] = 1.0;
    z.cie_annual = cie_from_mix(z.mix);
    z.center = {0, 0};
    in.zones = {z};
    return build_ingested_topology(in);
}

Topology chain3() {
    return make_topo({{1, 2, Rel::p2c}, {2, 3, Rel::p2c}},
                     {{1, {10, 0}}, {2, {10, 1}}, {3, {10, 2}}});
}

// A message whose single controlled knob is the current-hour forward octet.
RoutingMessage mk_msg(AsId origin, uint64_t ts, const std::vector<std::tuple<AsId, IntfId, IntfId, int>>& hops) {
    RoutingMessage m;
    m.origin = origin;
    m.timestamp = ts;
    for (auto& [as, ing, eg, octet] : hops) {
        AsEntry e;
        e.as = as;
        e.ingress = ing;
        e.egress = eg;
        if (octet >= 0) {
            e.ext.kind = ExtKind::flat;
            e.ext.flat.octets[0] = static_cast<uint8_t>(octet);
        }
        m.entries.push_back(e);
    }
    return m;
}

detail::Delivery mk_delivery(AsId to, IntfId ingress, RoutingMessage msg,
                             BeaconKind kind = BeaconKind::flat) {
    detail::Delivery d;
    d.to = to;
    d.ingress = ingress;
    d.kind = kind;
    d.hash = message_hash(msg);
    d.size_octets = static_cast<uint32_t>(serialize(msg).size());
    d.msg = std::move(msg);
    return d;
}

uint64_t store_digest(const Simulation& sim) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (auto& [id, st] : sim.states) {
        h = fnv1a64_append(h, id);
        for (auto& [key, list] : st.store.by_origin) {
            h = fnv1a64_append(h, key.first);
            h = fnv1a64_append(h, key.second);
            for (const StoredPcb& s : list) {
                h = fnv1a64_append(h, s.hash);
                h = fnv1a64_append(h, s.path_id);
            }
        }
    }
    return h;
}

void check_loop_free(const Simulation& sim) {
    for (auto& [id, st] : sim.states) {
        for (auto& [key, list] : st.store.by_origin) {
            for (const StoredPcb& s : list) {
                std::set<AsId> seen;
                for (const AsEntry& e : s.msg.entries) {
                    CHECK(seen.insert(e.as).second);  // no repeated AS
                    CHECK(e.as != id);                // never the store owner
                }
                CHECK(s.msg.origin == key.first);
                CHECK(s.msg.entries.front().as == s.msg.origin);
            }
        }
    }
}

}  // namespace

TEST_CASE("dissemination period bounds") {
    CHECK_FALSE(period_violation(1.0, 2));
    CHECK_FALSE(period_violation(2.6, 2));
    CHECK(period_violation(2.7, 2));
    CHECK(period_violation(0.9, 2));
    // 13 hops -> upper bound 24/12 = 2.0
    CHECK_FALSE(period_violation(2.0, 13));
    CHECK(period_violation(2.1, 13));
    // 25 hops -> exactly one valid period
    CHECK_FALSE(period_violation(1.0, 25));
    CHECK(period_violation(1.1, 25));
    // 26 hops -> no valid period at all
    CHECK(period_violation(1.0, 26));
    CHECK(period_violation(0.96, 26));
    CHECK(period_violation(1.0, 1));
    CHECK_THROWS_AS(validate_period(2.7, 2), Error);
    CHECK_NOTHROW(validate_period(1.5, 10));
}

TEST_CASE("coverage ratio") {
    CHECK(coverage_ratio(RoutingMessage{}) == 0.0);
    RoutingMessage m = mk_msg(1, kT0, {{1, 0, 1, -1}, {2, 1, 2, 7}});
    CHECK(coverage_ratio(m) == 0.5);
    m.entries[0].ext.kind = ExtKind::flat;
    CHECK(coverage_ratio(m) == 1.0);
}

TEST_CASE("candidate ordering prefers coverage, freshness, low hash") {
    BeaconStore store;
    auto add = [&](uint64_t ts, bool with_ext, uint64_t hash) {
        StoredPcb s;
        s.msg = mk_msg(9, ts, {{9, 0, 1, with_ext ? 3 : -1}});
        s.hash = hash;
        s.path_id = hash;  // distinct
        store.by_origin[{9, 0}].push_back(s);
    };
    add(100, true, 5);   // coverage 1, old
    add(200, false, 1);  // coverage 0
    add(200, true, 9);   // coverage 1, fresh, high hash
    add(200, true, 3);   // coverage 1, fresh, low hash

    auto order = select_pcbs(store, 9, BeaconKind::flat);
    REQUIRE(order.size() == 4);
    CHECK(order[0]->hash == 3);
    CHECK(order[1]->hash == 9);
    CHECK(order[2]->hash == 5);
    CHECK(order[3]->hash == 1);
    CHECK(select_pcbs(store, 77, BeaconKind::flat).empty());
}

TEST_CASE("green retention keeps the cleanest candidates") {
    std::vector<StoredPcb> owned;
    auto mk = [&](int octet, size_t hops, uint64_t hash) {
        StoredPcb s;
        std::vector<std::tuple<AsId, IntfId, IntfId, int>> entries;
        for (size_t h = 0; h < hops; ++h)
            entries.push_back({AsId(100 + h), IntfId(1), IntfId(2), h == 0 ? octet : 0});
        s.msg = mk_msg(100, kT0, entries);
        s.hash = hash;
        owned.push_back(s);
    };
    mk(10, 1, 1);  // dirty
    mk(2, 1, 2);   // cleanest
    mk(5, 1, 3);
    std::vector<const StoredPcb*> cands{&owned[0], &owned[1], &owned[2]};

    auto kept = green_retain(cands, 2, kT0);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0]->hash == 2);
    CHECK(kept[1]->hash == 3);

    SECTION("zero keeps everything, sorted") {
        auto all = green_retain(cands, 0, kT0);
        REQUIRE(all.size() == 3);
        CHECK(all[0]->hash == 2);
        CHECK(all[2]->hash == 1);
    }
    SECTION("ties prefer fewer hops, then lower hash") {
        owned.clear();
        mk(4, 2, 7);
        mk(4, 1, 9);
        mk(4, 1, 8);
        std::vector<const StoredPcb*> t{&owned[0], &owned[1], &owned[2]};
        auto kept2 = green_retain(t, 2, kT0);
        REQUIRE(kept2.size() == 2);
        CHECK(kept2[0]->hash == 8);
        CHECK(kept2[1]->hash == 9);
    }
}

TEST_CASE("store insertion, refresh, and eviction") {
    BeaconStore store;
    RoutingMessage a = mk_msg(1, kT0, {{1, 0, 1, 10}});
    RoutingMessage b = mk_msg(1, kT0, {{1, 0, 2, 2}});  // different path
    RoutingMessage c = mk_msg(1, kT0, {{1, 0, 3, 5}});

    SECTION("duplicate paths refresh on newer timestamps only") {
        CHECK(store_insert(store, mk_delivery(7, 1, a), kT0, 5, true));
        CHECK_FALSE(store_insert(store, mk_delivery(7, 1, a), kT0, 5, true));  // same ts
        RoutingMessage a2 = a;
        a2.timestamp = kT0 + 3600;
        CHECK_FALSE(store_insert(store, mk_delivery(7, 1, a2), kT0 + 3600, 5, true));
        auto& list = store.by_origin.at({1, 0});
        REQUIRE(list.size() == 1);
        CHECK(list[0].msg.timestamp == kT0 + 3600);  // refreshed in place
        RoutingMessage a0 = a;
        a0.timestamp = kT0 - 3600;
        CHECK_FALSE(store_insert(store, mk_delivery(7, 1, a0), kT0, 5, true));
        CHECK(list[0].msg.timestamp == kT0 + 3600);  // stale copy ignored
    }
    SECTION("green eviction per ingress class") {
        CHECK(store_insert(store, mk_delivery(7, 1, a), kT0, 1, true));   // octet 10
        CHECK(store_insert(store, mk_delivery(7, 1, b), kT0, 1, true));   // octet 2 evicts
        auto& list = store.by_origin.at({1, 0});
        REQUIRE(list.size() == 1);
        CHECK(list[0].msg.entries[0].egress == 2);
        CHECK_FALSE(store_insert(store, mk_delivery(7, 1, c), kT0, 1, true));  // dirtier, rejected
        CHECK(list[0].msg.entries[0].egress == 2);
        // a different ingress class has its own budget
        CHECK(store_insert(store, mk_delivery(7, 2, c), kT0, 1, true));
        CHECK(list.size() == 2);
    }
    SECTION("non-green eviction prefers coverage then freshness") {
        RoutingMessage bare = mk_msg(1, kT0 + 9, {{1, 0, 1, -1}});  // coverage 0, fresh
        RoutingMessage covered = mk_msg(1, kT0, {{1, 0, 2, 200}});  // coverage 1, dirty
        CHECK(store_insert(store, mk_delivery(7, 1, bare), kT0, 1, false));
        CHECK(store_insert(store, mk_delivery(7, 1, covered), kT0, 1, false));
        auto& list = store.by_origin.at({1, 0});
        REQUIRE(list.size() == 1);
        CHECK(list[0].msg.entries[0].egress == 2);  // coverage won despite dirt and age
        CHECK_FALSE(store_insert(store, mk_delivery(7, 1, bare), kT0, 1, false));
    }
    SECTION("limit zero means unlimited") {
        for (IntfId eg = 1; eg <= 9; ++eg) {
            RoutingMessage m = mk_msg(1, kT0, {{1, 0, eg, 1}});
            CHECK(store_insert(store, mk_delivery(7, 1, m), kT0, 0, true));
        }
        CHECK(store.by_origin.at({1, 0}).size() == 9);
    }
}

TEST_CASE("three-AS chain dissemination") {
    Topology topo = chain3();
    StaticAnnualProvider provider(topo);
    DisseminationConfig cfg;
    cfg.period_hours = 1.0;
    cfg.round_hours = 1.0;
    cfg.start_time = kT0;
    Simulation sim = make_simulation(topo, provider, cfg);

    std::vector<TranscriptRow> rows;
    sim.transcript = [&](const TranscriptRow& r) { rows.push_back(r); };

    run_round(sim);
    // round 0: pure origination, one message per interface
    CHECK(rows.size() == 4);
    for (const TranscriptRow& r : rows) {
        CHECK(r.round == 0);
        CHECK(r.origin == r.sender);
        CHECK(r.hop_count == 1);
        CHECK(r.coverage == 0.0);  // origination entries carry no segment data
        CHECK(r.size_octets == 36);
        CHECK(r.current_cidt_mg_gbit == 0.0);
    }
    CHECK(sim.states.at(2).store.by_origin.count({1, 0}) == 1);
    CHECK(sim.states.at(2).store.by_origin.count({3, 0}) == 1);
    CHECK(sim.states.at(3).store.by_origin.count({2, 0}) == 1);
    CHECK(sim.states.at(3).store.by_origin.count({1, 0}) == 0);  // two hops away

    rows.clear();
    run_round(sim);
    // round 1: four re-originations plus the two forwarded beacons
    CHECK(rows.size() == 6);
    size_t forwards = 0;
    for (const TranscriptRow& r : rows) {
        if (r.hop_count == 1) continue;
        ++forwards;
        CHECK(r.hop_count == 2);
        CHECK(r.sender == 2);
        CHECK(r.coverage == 0.5);
        CHECK(r.size_octets == 36 + 13 + 48);
    }
    CHECK(forwards == 2);

    const auto& at3 = sim.states.at(3).store.by_origin.at({1, 0});
    REQUIRE(at3.size() == 1);
    const RoutingMessage& msg = at3[0].msg;
    REQUIRE(msg.entries.size() == 2);
    CHECK(msg.entries[0].as == 1);
    CHECK(msg.entries[0].ingress == kNoIntf);
    CHECK(msg.entries[0].ext.kind == ExtKind::absent);
    CHECK(msg.entries[1].as == 2);
    CHECK(msg.entries[1].ext.kind == ExtKind::flat);
    // one coal-powered router site: 2*pue*16.1 J/Gbit * 1001 g/kWh -> 17.9 -> 18
    uint64_t now = sim.now_seconds() - 3600;  // delivery time of that beacon
    auto idx = current_hour_index(now, msg.timestamp);
    REQUIRE(idx.has_value());
    CHECK(msg.entries[1].ext.flat.forward(*idx) == 18);
    CHECK(cumulative_current_cidt(msg, now) == 18e-12);

    CHECK(sim.stats.messages == 10);
    CHECK(sim.stats.size_hist.at(36) == 8);
    CHECK(sim.stats.size_hist.at(97) == 2);
    CHECK(sim.stats.octets == 8 * 36 + 2 * 97);
    check_loop_free(sim);
}

TEST_CASE("convergence detection ignores refreshes") {
    Topology topo = chain3();
    StaticAnnualProvider provider(topo);
    DisseminationConfig cfg;
    cfg.start_time = kT0;
    Simulation sim = make_simulation(topo, provider, cfg);
    uint32_t executed = run_until_stable(sim, 50);
    CHECK(executed <= 6);
    CHECK_FALSE(run_round(sim));  // still stable: refreshes don't count as change
    check_loop_free(sim);
}

TEST_CASE("triangle stores alternative paths per ingress") {
    Topology topo = make_topo({{1, 2, Rel::p2c}, {1, 3, Rel::p2c}, {2, 3, Rel::p2p}},
                              {{1, {10, 0}}, {2, {10, 1}}, {3, {10, 2}}});
    StaticAnnualProvider provider(topo);
    DisseminationConfig cfg;
    cfg.start_time = kT0;
    Simulation sim = make_simulation(topo, provider, cfg);
    run_until_stable(sim, 20);

    const auto& at2 = sim.states.at(2).store.by_origin.at({1, 0});
    CHECK(at2.size() == 2);  // direct and via 3
    std::set<size_t> lengths;
    for (const StoredPcb& s : at2) lengths.insert(s.msg.entries.size());
    CHECK(lengths == std::set<size_t>{1, 2});
    check_loop_free(sim);
}

TEST_CASE("the hop cap stops extension") {
    Topology topo = make_topo(
        {{1, 2, Rel::p2c}, {2, 3, Rel::p2c}, {3, 4, Rel::p2c}, {4, 5, Rel::p2c}},
        {{1, {10, 0}}, {2, {10, 1}}, {3, {10, 2}}, {4, {10, 3}}, {5, {10, 4}}});
    StaticAnnualProvider provider(topo);
    DisseminationConfig cfg;
    cfg.start_time = kT0;
    cfg.max_path_hops = 3;
    Simulation sim = make_simulation(topo, provider, cfg);
    run_until_stable(sim, 30);

    for (auto& [id, st] : sim.states)
        for (auto& [key, list] : st.store.by_origin)
            for (const StoredPcb& s : list) CHECK(s.msg.entries.size() <= 3);
    // origin 1 is four hops from AS5, beyond the cap
    CHECK(sim.states.at(5).store.by_origin.count({1, 0}) == 0);
    CHECK(sim.states.at(5).store.by_origin.count({2, 0}) == 1);
    CHECK(sim.states.at(4).store.by_origin.count({1, 0}) == 1);
}

TEST_CASE("valley-free export holds beacons at policy boundaries") {
    // 1 provides 2; 2 peers with 4; 2 provides 3
    Topology topo = make_topo({{1, 2, Rel::p2c}, {2, 4, Rel::p2p}, {2, 3, Rel::p2c}},
                              {{1, {10, 0}}, {2, {10, 1}}, {3, {10, 2}}, {4, {10, 3}}});
    StaticAnnualProvider provider(topo);
    DisseminationConfig cfg;
    cfg.start_time = kT0;
    cfg.export_policy = DisseminationConfig::Export::valley_free;
    Simulation sim = make_simulation(topo, provider, cfg);
    run_until_stable(sim, 20);

    auto has = [&](AsId at, AsId origin) {
        return sim.states.at(at).store.by_origin.count({origin, 0}) == 1;
    };
    // provider-learned beacons don't cross the peering link
    CHECK_FALSE(has(4, 1));
    // customer-learned beacons do
    CHECK(has(4, 3));
    CHECK(has(4, 2));
    // peer-learned beacons flow down but not up
    CHECK(has(3, 4));
    CHECK_FALSE(has(1, 4));
    // customer beacons flow up
    CHECK(has(1, 3));
    CHECK(has(1, 2));
    // and provider beacons flow down
    CHECK(has(3, 1));
    check_loop_free(sim);
}

TEST_CASE("hierarchical mode splits core and intra-domain beacons") {
    // cores 1 and 2 peer; 2 provides 3; 3 provides 4
    Topology topo = make_topo({{1, 2, Rel::p2p}, {2, 3, Rel::p2c}, {3, 4, Rel::p2c}},
                              {{1, {10, 0}}, {2, {10, 1}}, {3, {10, 2}}, {4, {10, 3}}});
    topo.node(1).core = true;
    topo.node(2).core = true;
    StaticAnnualProvider provider(topo);
    DisseminationConfig cfg;
    cfg.start_time = kT0;
    cfg.mode = DisseminationConfig::Mode::hierarchical;
    Simulation sim = make_simulation(topo, provider, cfg);
    run_until_stable(sim, 20);

    auto core_u8 = static_cast<uint8_t>(BeaconKind::core);
    auto isd_u8 = static_cast<uint8_t>(BeaconKind::intra_isd);

    // core beacons live on the core mesh only
    CHECK(sim.states.at(1).store.by_origin.count({2, core_u8}) == 1);
    CHECK(sim.states.at(2).store.by_origin.count({1, core_u8}) == 1);
    CHECK(sim.states.at(3).store.by_origin.count({1, core_u8}) == 0);
    CHECK(sim.states.at(3).store.by_origin.count({2, core_u8}) == 0);

    // intra-domain beacons flow downhill from the core
    REQUIRE(sim.states.at(3).store.by_origin.count({2, isd_u8}) == 1);
    REQUIRE(sim.states.at(4).store.by_origin.count({2, isd_u8}) == 1);
    CHECK(sim.states.at(1).store.by_origin.count({2, isd_u8}) == 0);

    // non-core ASes never originate
    for (auto& [id, st] : sim.states)
        for (auto& [key, list] : st.store.by_origin) {
            CHECK(key.first != 3);
            CHECK(key.first != 4);
        }

    SECTION("map extensions key the relevant interfaces") {
        const auto& at4 = sim.states.at(4).store.by_origin.at({2, isd_u8});
        REQUIRE(at4.size() == 1);
        const RoutingMessage& msg = at4[0].msg;
        REQUIRE(msg.entries.size() == 2);
        // origin entry covers the core-facing interface of AS2
        CHECK(msg.entries[0].as == 2);
        REQUIRE(msg.entries[0].ext.kind == ExtKind::map);
        REQUIRE(msg.entries[0].ext.keyed.size() == 1);
        CHECK(msg.entries[0].ext.keyed[0].first == topo.node(2).intf_to(1));
        // transit entry covers its own ingress
        CHECK(msg.entries[1].as == 3);
        REQUIRE(msg.entries[1].ext.kind == ExtKind::map);
        REQUIRE(msg.entries[1].ext.keyed.size() == 1);
        CHECK(msg.entries[1].ext.keyed[0].first == topo.node(3).intf_to(2));
    }
    SECTION("core origination entries carry no segment data") {
        const auto& at1 = sim.states.at(1).store.by_origin.at({2, core_u8});
        REQUIRE(at1.size() == 1);
        CHECK(at1[0].msg.entries.size() == 1);
        CHECK(at1[0].msg.entries[0].ext.kind == ExtKind::absent);
    }
    check_loop_free(sim);
}

TEST_CASE("single-send mode still converges to the same stores") {
    Topology topo = make_topo({{1, 2, Rel::p2c}, {1, 3, Rel::p2c}, {2, 3, Rel::p2p}},
                              {{1, {10, 0}}, {2, {10, 1}}, {3, {10, 2}}});
    StaticAnnualProvider provider(topo);
    DisseminationConfig cfg;
    cfg.start_time = kT0;
    cfg.resend_retained = false;
    Simulation sim = make_simulation(topo, provider, cfg);
    run_until_stable(sim, 20);
    check_loop_free(sim);
    CHECK(sim.states.at(2).store.by_origin.at({1, 0}).size() == 2);

    // single-send floods strictly fewer messages than resend mode
    Topology topo2 = make_topo({{1, 2, Rel::p2c}, {1, 3, Rel::p2c}, {2, 3, Rel::p2p}},
                               {{1, {10, 0}}, {2, {10, 1}}, {3, {10, 2}}});
    DisseminationConfig cfg2 = cfg;
    cfg2.resend_retained = true;
    Simulation sim2 = make_simulation(topo2, provider, cfg2);
    for (uint32_t r = 0; r < sim.stats.rounds; ++r) run_round(sim2);
    CHECK(sim.stats.messages < sim2.stats.messages);
}

TEST_CASE("simulation runs are deterministic") {
    auto run_once = [](uint64_t seed) {
        Topology topo = gen_synthetic(seed, 12);
        StaticAnnualProvider provider(topo);
        DisseminationConfig cfg;
        cfg.start_time = kT0;
        cfg.retention_n = 2;
        Simulation sim = make_simulation(topo, provider, cfg);
        for (int r = 0; r < 5; ++r) run_round(sim);
        check_loop_free(sim);
        return std::make_tuple(store_digest(sim), sim.stats.messages, sim.stats.octets);
    };
    auto a = run_once(33);
    auto b = run_once(33);
    CHECK(a == b);
    auto c = run_once(34);
    CHECK(std::get<0>(a) != std::get<0>(c));
}
