#pragma once

// Inter-domain topology (AS graph with business relationships), per-AS
// intra-domain router topologies, and the device-level path construction
// that the energy model consumes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ciro/geo.hpp"
#include "ciro/model.hpp"
#include "ciro/rng.hpp"
#include "ciro/util.hpp"

namespace ciro {

using AsId = uint64_t;
using IntfId = uint16_t;   // 0 means "none" (origination)
using RouterId = uint32_t;

inline constexpr IntfId kNoIntf = 0;
inline constexpr RouterId kNoRouter = 0xffffffff;

enum class Rel : uint8_t { p2c, p2p };  // provider-to-customer / peer-to-peer

// Relationship edge as ingested from an AS-relationship file. For p2c, a is
// the provider and b the customer.
struct RelEdge {
    AsId a = 0, b = 0;
    Rel rel = Rel::p2c;
};

// What a neighbor is to this AS.
enum class NeighborRel : uint8_t { customer, peer, provider };

struct AsLink {
    AsId a = 0, b = 0;
    Rel rel = Rel::p2c;  // a provider of b when p2c
    IntfId intf_a = 0, intf_b = 0;
    GeoCoord geo_a, geo_b;
};

struct Router {
    RouterId id = 0;
    GeoCoord loc;
};

struct IntraLink {
    RouterId a = 0, b = 0;
    double km = 0.0;
};

struct IntraTopology {
    std::vector<Router> routers;  // kept sorted by id
    std::vector<IntraLink> links;

    const Router& router(RouterId id) const {
        for (const Router& r : routers)
            if (r.id == id) return r;
        throw NotFound("router " + std::to_string(id));
    }

    std::map<RouterId, std::vector<std::pair<RouterId, double>>> adjacency() const {
        std::map<RouterId, std::vector<std::pair<RouterId, double>>> adj;
        for (const Router& r : routers) adj[r.id];
        for (const IntraLink& l : links) {
            adj[l.a].push_back({l.b, l.km});
            adj[l.b].push_back({l.a, l.km});
        }
        for (auto& [id, v] : adj) std::sort(v.begin(), v.end());
        return adj;
    }
};

struct Interface {
    IntfId id = 0;
    AsId neighbor = 0;
    GeoCoord geo;
    RouterId router = kNoRouter;  // border router serving this interface
};

struct Zone {
    std::string name;
    GeoCoord center;
    EnergyMix mix;
    double cie_annual = 0.0;  // g/kWh, mix-weighted
};

// Lowest-cost intra-domain router walk between two routers: smallest total
// km, ties broken by the lexicographically smallest router-id sequence.
inline std::vector<RouterId> intra_router_path(const IntraTopology& intra, RouterId from, RouterId to) {
    if (from == to) return {from};
    auto adj = intra.adjacency();
    if (!adj.count(from) || !adj.count(to)) throw NotFound("intra path endpoint");
    std::map<RouterId, double> dist;
    std::map<RouterId, std::vector<RouterId>> path;
    std::set<RouterId> done;
    dist[from] = 0.0;
    path[from] = {from};
    while (true) {
        RouterId cur = kNoRouter;
        for (auto& [id, d] : dist) {
            if (done.count(id)) continue;
            if (cur == kNoRouter || d < dist[cur] || (d == dist[cur] && path[id] < path[cur])) cur = id;
        }
        if (cur == kNoRouter) throw NotFound("intra path: unreachable router");
        if (cur == to) return path[cur];
        done.insert(cur);
        for (auto& [nb, km] : adj[cur]) {
            if (done.count(nb)) continue;
            double nd = dist[cur] + km;
            std::vector<RouterId> np = path[cur];
            np.push_back(nb);
            auto it = dist.find(nb);
            if (it == dist.end() || nd < it->second || (nd == it->second && np < path[nb])) {
                dist[nb] = nd;
                path[nb] = std::move(np);
            }
        }
    }
}

// Router chain synthesized when an AS lacks router-level data: the chain
// length follows a step function of the border-to-border distance, routers
// spread evenly along the great circle (a single router sits at the middle).
inline std::vector<GeoCoord> synth_router_chain(const GeoCoord& a, const GeoCoord& b) {
    double d = great_circle_km(a, b);
    int k;
    if (d < 1.0) k = 1;
    else if (d < 20.0) k = 2;
    else if (d < 100.0) k = 3;
    else if (d < 1000.0) k = 4;
    else k = 5;
    std::vector<GeoCoord> out;
    if (k == 1) {
        out.push_back(geo_interpolate(a, b, 0.5));
        return out;
    }
    for (int i = 0; i < k; ++i) out.push_back(geo_interpolate(a, b, double(i) / (k - 1)));
    return out;
}

// IP and optical equipment along a router chain: per router one core router,
// two WDM switches, two transponders and two muxponders; per span one
// amplifier per started 80 km and one regenerator per started 1500 km,
// evenly spaced. Every device carries one identical co-located redundant.
inline std::vector<Device> place_optical(const std::vector<GeoCoord>& routers, double pue) {
    if (routers.empty()) throw Error("place_optical: empty router chain");
    std::vector<Device> out;
    auto add = [&](DeviceKind kind, const GeoCoord& loc) {
        Device d{kind, DeviceSpec{}, loc, pue, {}};
        d.redundants.push_back(Device{kind, DeviceSpec{}, loc, pue, {}});
        out.push_back(std::move(d));
    };
    auto add_router_site = [&](const GeoCoord& loc) {
        add(DeviceKind::core_router, loc);
        for (int i = 0; i < 2; ++i) add(DeviceKind::wdm_switch, loc);
        for (int i = 0; i < 2; ++i) add(DeviceKind::transponder, loc);
        for (int i = 0; i < 2; ++i) add(DeviceKind::muxponder, loc);
    };
    add_router_site(routers[0]);
    for (size_t i = 1; i < routers.size(); ++i) {
        double km = great_circle_km(routers[i - 1], routers[i]);
        int n_amp = static_cast<int>(std::floor(km / 80.0));
        for (int j = 1; j <= n_amp; ++j)
            add(DeviceKind::amplifier, geo_interpolate(routers[i - 1], routers[i], double(j) / (n_amp + 1)));
        int n_reg = static_cast<int>(std::floor(km / 1500.0));
        for (int j = 1; j <= n_reg; ++j)
            add(DeviceKind::regenerator, geo_interpolate(routers[i - 1], routers[i], double(j) / (n_reg + 1)));
        add_router_site(routers[i]);
    }
    return out;
}

struct AsNode {
    AsId id = 0;
    GeoCoord loc;
    std::string zone;
    bool core = false;
    double pue = 2.0;
    IntraTopology intra;
    std::map<IntfId, Interface> interfaces;

    const Interface& intf(IntfId i) const {
        auto it = interfaces.find(i);
        if (it == interfaces.end())
            throw NotFound("AS " + std::to_string(id) + " interface " + std::to_string(i));
        return it->second;
    }

    // Unique interface facing a neighbor (one link per AS pair).
    IntfId intf_to(AsId neighbor) const {
        for (auto& [i, f] : interfaces)
            if (f.neighbor == neighbor) return i;
        throw NotFound("AS " + std::to_string(id) + " has no interface to " + std::to_string(neighbor));
    }

    GeoCoord border_router_loc(IntfId i) const {
        const Interface& f = intf(i);
        if (f.router == kNoRouter || intra.routers.empty()) return f.geo;
        return intra.router(f.router).loc;
    }

    // Device-level forwarding path between two border interfaces (cached).
    const IntraDomainPath& device_path(IntfId ing, IntfId eg) {
        if (ing == eg) throw Error("device_path: ingress equals egress");
        auto key = std::make_pair(ing, eg);
        auto it = path_cache_.find(key);
        if (it != path_cache_.end()) return it->second;
        const Interface& fi = intf(ing);
        const Interface& fe = intf(eg);
        std::vector<GeoCoord> locs;
        uint64_t fp = 0xcbf29ce484222325ULL;
        if (!intra.routers.empty() && fi.router != kNoRouter && fe.router != kNoRouter) {
            std::vector<RouterId> rpath = intra_router_path(intra, fi.router, fe.router);
            for (RouterId r : rpath) {
                locs.push_back(intra.router(r).loc);
                fp = fnv1a64_append(fp, r);
            }
        } else {
            locs = synth_router_chain(fi.geo, fe.geo);
            fp = fnv1a64_append(fp, locs.size());
        }
        IntraDomainPath p;
        p.devices = place_optical(locs, pue);
        p.weight = 1.0;
        fp = fnv1a64_append(fp, p.devices.size());
        fingerprints_[key] = fp;
        return path_cache_.emplace(key, std::move(p)).first->second;
    }

    uint64_t path_fingerprint(IntfId ing, IntfId eg) {
        device_path(ing, eg);
        return fingerprints_.at({ing, eg});
    }

    void invalidate_paths() {
        path_cache_.clear();
        fingerprints_.clear();
    }

  private:
    std::map<std::pair<IntfId, IntfId>, IntraDomainPath> path_cache_;
    std::map<std::pair<IntfId, IntfId>, uint64_t> fingerprints_;
};

struct Topology {
    std::map<AsId, AsNode> ases;
    std::vector<AsLink> links;
    std::map<std::string, Zone> zones;
    uint64_t seed = 0;  // generator seed when synthetic, else 0

    AsNode& node(AsId id) {
        auto it = ases.find(id);
        if (it == ases.end()) throw NotFound("AS " + std::to_string(id));
        return it->second;
    }
    const AsNode& node(AsId id) const {
        auto it = ases.find(id);
        if (it == ases.end()) throw NotFound("AS " + std::to_string(id));
        return it->second;
    }

    const AsLink* link_between(AsId x, AsId y) const {
        for (const AsLink& l : links)
            if ((l.a == x && l.b == y) || (l.a == y && l.b == x)) return &l;
        return nullptr;
    }

    NeighborRel rel_of(AsId self, AsId nb) const {
        const AsLink* l = link_between(self, nb);
        if (!l) throw NotFound("no link " + std::to_string(self) + "-" + std::to_string(nb));
        if (l->rel == Rel::p2p) return NeighborRel::peer;
        if (l->a == self) return NeighborRel::customer;  // self provides nb
        return NeighborRel::provider;
    }

    const Zone& zone_of_point(const GeoCoord& g) const {
        if (zones.empty()) throw Error("topology has no zones");
        const Zone* best = nullptr;
        double bd = 0.0;
        for (auto& [name, z] : zones) {
            double d = great_circle_km(g, z.center);
            if (!best || d < bd) {
                best = &z;
                bd = d;
            }
        }
        return *best;
    }

    // Annual-average carbon intensity of electricity by location.
    CieLookup annual_cie_lookup() const {
        return [this](const GeoCoord& g) { return zone_of_point(g).cie_annual; };
    }
};

// --- AS-relationship ingestion helpers -------------------------------------

// Iterative min-degree pruning down to k ASes; ties remove the lowest AS id.
// Returns the surviving edges (induced subgraph).
inline std::vector<RelEdge> prune_to_core(const std::vector<RelEdge>& edges, size_t k) {
    std::map<AsId, std::set<AsId>> adj;
    for (const RelEdge& e : edges) {
        adj[e.a].insert(e.b);
        adj[e.b].insert(e.a);
    }
    if (adj.size() < k) throw Error("prune_to_core: fewer ASes than requested core size");
    while (adj.size() > k) {
        AsId victim = 0;
        size_t best = SIZE_MAX;
        for (auto& [id, nbs] : adj) {
            if (nbs.size() < best) {
                best = nbs.size();
                victim = id;
            }
        }
        for (AsId nb : adj[victim]) adj[nb].erase(victim);
        adj.erase(victim);
    }
    std::vector<RelEdge> out;
    for (const RelEdge& e : edges)
        if (adj.count(e.a) && adj.count(e.b)) out.push_back(e);
    return out;
}

// cone(a) = a plus everything reachable over provider->customer edges.
// Throws on provider cycles.
inline std::map<AsId, std::vector<AsId>> customer_cones(const std::vector<RelEdge>& edges) {
    std::map<AsId, std::vector<AsId>> children;
    std::set<AsId> all;
    for (const RelEdge& e : edges) {
        all.insert(e.a);
        all.insert(e.b);
        if (e.rel == Rel::p2c) children[e.a].push_back(e.b);
    }
    std::map<AsId, std::set<AsId>> cone;
    std::map<AsId, int> state;  // 0 new, 1 visiting, 2 done
    std::function<void(AsId)> visit = [&](AsId a) {
        if (state[a] == 2) return;
        if (state[a] == 1) throw Error("customer_cones: provider cycle at AS " + std::to_string(a));
        state[a] = 1;
        cone[a].insert(a);
        for (AsId c : children[a]) {
            visit(c);
            cone[a].insert(cone[c].begin(), cone[c].end());
        }
        state[a] = 2;
    };
    for (AsId a : all) visit(a);
    std::map<AsId, std::vector<AsId>> out;
    for (auto& [a, s] : cone) out[a] = std::vector<AsId>(s.begin(), s.end());
    return out;
}

// Bind each interface to the nearest router (ties: lowest router id); an AS
// without routers gets one created at the interface location.
inline void map_border_routers(AsNode& as) {
    for (auto& [iid, f] : as.interfaces) {
        if (!as.intra.routers.empty()) {
            RouterId best = kNoRouter;
            double bd = 0.0;
            for (const Router& r : as.intra.routers) {
                double d = great_circle_km(r.loc, f.geo);
                if (best == kNoRouter || d < bd || (d == bd && r.id < best)) {
                    best = r.id;
                    bd = d;
                }
            }
            f.router = best;
        } else {
            RouterId nid = 1;
            for (const Router& r : as.intra.routers) nid = std::max(nid, r.id + 1);
            as.intra.routers.push_back(Router{nid, f.geo});
            f.router = nid;
        }
    }
}

// --- synthetic generation ---------------------------------------------------

struct SynthParams {
    uint32_t attach_m = 2;        // preferential-attachment links per new AS
    double peer_fraction = 0.08;  // extra p2p links as a fraction of n
    uint32_t max_routers = 10;
    double router_spread_deg = 2.5;
    double as_spread_deg = 3.0;
    double pue = 2.0;
    uint32_t zones = 8;          // palette entries used (1..8)
    double core_fraction = 0.1;  // top-degree ASes labeled core
};

namespace detail {

inline const std::array<std::pair<const char*, std::vector<std::pair<Resource, double>>>, 8>&
zone_palette() {
    static const std::array<std::pair<const char*, std::vector<std::pair<Resource, double>>>, 8> pal{{
        {"coalland", {{Resource::coal, 1.0}}},
        {"hydroland", {{Resource::hydro, 1.0}}},
        {"gasland", {{Resource::natural_gas, 1.0}}},
        {"sunland", {{Resource::solar, 0.6}, {Resource::wind, 0.4}}},
        {"mixland", {{Resource::coal, 0.5}, {Resource::natural_gas, 0.5}}},
        {"atomland", {{Resource::nuclear, 0.7}, {Resource::hydro, 0.3}}},
        {"bioland", {{Resource::biomass, 0.7}, {Resource::solar, 0.3}}},
        {"geoland", {{Resource::geothermal, 0.5}, {Resource::wind, 0.5}}},
    }};
    return pal;
}

}  // namespace detail

// Seeded synthetic inter-domain topology: preferential attachment with
// provider-to-customer orientation toward earlier (established) ASes, a dash
// of peering links among the best-connected ASes, per-AS scattered router
// topologies, and generation-mix zones covering the full clean-to-dirty
// carbon intensity range.
inline Topology gen_synthetic(uint64_t seed, uint32_t n, const SynthParams& prm = {}) {
    if (n < 3) throw Error("gen_synthetic: need at least 3 ASes");
    uint32_t m = std::max<uint32_t>(1, std::min(prm.attach_m, n - 1));
    Topology topo;
    topo.seed = seed;

    // zones
    uint32_t nz = std::max<uint32_t>(1, std::min<uint32_t>(prm.zones, 8));
    {
        Rng rng(mix_seed(seed, 0xA1));
        for (uint32_t z = 0; z < nz; ++z) {
            const auto& [name, shares] = detail::zone_palette()[z];
            Zone zone;
            zone.name = name;
            zone.center = {rng.range(-55.0, 65.0), rng.range(-180.0, 180.0)};
            for (auto& [res, s] : shares) zone.mix[res] = s;
            zone.cie_annual = cie_from_mix(zone.mix);
            topo.zones[zone.name] = zone;
        }
    }
    std::vector<const Zone*> zones_in_order;
    for (auto& [name, z] : topo.zones) zones_in_order.push_back(&z);

    // AS seats
    {
        Rng rng(mix_seed(seed, 0xA2));
        for (AsId id = 1; id <= n; ++id) {
            AsNode as;
            as.id = id;
            as.pue = prm.pue;
            const Zone* z = zones_in_order[rng.below(zones_in_order.size())];
            as.zone = z->name;
            double lat = z->center.lat_deg + rng.normal(0.0, prm.as_spread_deg);
            double lon = z->center.lon_deg + rng.normal(0.0, prm.as_spread_deg);
            as.loc = {std::clamp(lat, -85.0, 85.0), std::clamp(lon, -180.0, 180.0)};
            topo.ases[id] = std::move(as);
        }
    }

    // AS graph: seed clique of m+1, then degree-weighted attachment
    std::map<AsId, uint32_t> degree;
    std::set<std::pair<AsId, AsId>> present;
    std::vector<RelEdge> rels;
    auto add_rel = [&](AsId a, AsId b, Rel r) {
        rels.push_back({a, b, r});
        present.insert({std::min(a, b), std::max(a, b)});
        ++degree[a];
        ++degree[b];
    };
    {
        Rng rng(mix_seed(seed, 0xA3));
        for (AsId i = 1; i <= m + 1; ++i)
            for (AsId j = i + 1; j <= m + 1; ++j) add_rel(i, j, Rel::p2c);
        for (AsId j = m + 2; j <= n; ++j) {
            std::set<AsId> targets;
            while (targets.size() < m) {
                uint64_t total = 0;
                for (AsId i = 1; i < j; ++i)
                    if (!targets.count(i)) total += degree[i] + 1;
                uint64_t pick = rng.below(total);
                for (AsId i = 1; i < j; ++i) {
                    if (targets.count(i)) continue;
                    uint64_t w = degree[i] + 1;
                    if (pick < w) {
                        targets.insert(i);
                        break;
                    }
                    pick -= w;
                }
            }
            for (AsId t : targets) add_rel(t, j, Rel::p2c);  // established AS provides
        }
        // peering among the best-connected quartile
        size_t np = static_cast<size_t>(std::llround(prm.peer_fraction * n));
        std::vector<AsId> by_deg;
        for (AsId i = 1; i <= n; ++i) by_deg.push_back(i);
        std::sort(by_deg.begin(), by_deg.end(), [&](AsId x, AsId y) {
            if (degree[x] != degree[y]) return degree[x] > degree[y];
            return x < y;
        });
        size_t pool = std::max<size_t>(2, by_deg.size() / 4);
        size_t attempts = 0;
        for (size_t added = 0; added < np && attempts < 20 * np + 20; ++attempts) {
            AsId x = by_deg[rng.below(pool)];
            AsId y = by_deg[rng.below(pool)];
            if (x == y || present.count({std::min(x, y), std::max(x, y)})) continue;
            add_rel(x, y, Rel::p2p);
            ++added;
        }
    }

    // interfaces (ids count up per AS in link creation order)
    std::map<AsId, IntfId> next_intf;
    for (AsId i = 1; i <= n; ++i) next_intf[i] = 1;
    for (const RelEdge& e : rels) {
        AsLink l;
        l.a = e.a;
        l.b = e.b;
        l.rel = e.rel;
        l.intf_a = next_intf[e.a]++;
        l.intf_b = next_intf[e.b]++;
        const GeoCoord& ga = topo.ases[e.a].loc;
        const GeoCoord& gb = topo.ases[e.b].loc;
        l.geo_a = geo_interpolate(ga, gb, 0.2);
        l.geo_b = geo_interpolate(ga, gb, 0.8);
        topo.links.push_back(l);
        topo.ases[e.a].interfaces[l.intf_a] = Interface{l.intf_a, e.b, l.geo_a, kNoRouter};
        topo.ases[e.b].interfaces[l.intf_b] = Interface{l.intf_b, e.a, l.geo_b, kNoRouter};
    }

    // per-AS router scatter: nearest-neighbor spanning tree plus shortcuts
    {
        Rng rng(mix_seed(seed, 0xA4));
        for (auto& [id, as] : topo.ases) {
            uint32_t nr = std::min<uint32_t>(2 + degree[id], prm.max_routers);
            for (RouterId r = 1; r <= nr; ++r) {
                double lat = as.loc.lat_deg + rng.normal(0.0, prm.router_spread_deg);
                double lon = as.loc.lon_deg + rng.normal(0.0, prm.router_spread_deg);
                as.intra.routers.push_back(Router{r, {std::clamp(lat, -85.0, 85.0), std::clamp(lon, -180.0, 180.0)}});
            }
            std::set<RouterId> in_tree{1};
            while (in_tree.size() < nr) {
                RouterId bi = 0, bj = 0;
                double bd = 0.0;
                for (RouterId i : in_tree) {
                    for (RouterId j = 1; j <= nr; ++j) {
                        if (in_tree.count(j)) continue;
                        double d = great_circle_km(as.intra.routers[i - 1].loc, as.intra.routers[j - 1].loc);
                        if (bi == 0 || d < bd) {
                            bi = i;
                            bj = j;
                            bd = d;
                        }
                    }
                }
                as.intra.links.push_back(IntraLink{bi, bj, std::max(bd, 0.01)});
                in_tree.insert(bj);
            }
            std::set<std::pair<RouterId, RouterId>> have;
            for (const IntraLink& l : as.intra.links) have.insert({std::min(l.a, l.b), std::max(l.a, l.b)});
            for (uint32_t e = 0; e < nr / 3; ++e) {
                RouterId x = static_cast<RouterId>(1 + rng.below(nr));
                RouterId y = static_cast<RouterId>(1 + rng.below(nr));
                if (x == y || have.count({std::min(x, y), std::max(x, y)})) continue;
                double d = great_circle_km(as.intra.routers[x - 1].loc, as.intra.routers[y - 1].loc);
                as.intra.links.push_back(IntraLink{std::min(x, y), std::max(x, y), std::max(d, 0.01)});
                have.insert({std::min(x, y), std::max(x, y)});
            }
            map_border_routers(as);
        }
    }

    // core labels: best-connected share
    {
        std::vector<AsId> by_deg;
        for (AsId i = 1; i <= n; ++i) by_deg.push_back(i);
        std::sort(by_deg.begin(), by_deg.end(), [&](AsId x, AsId y) {
            if (degree[x] != degree[y]) return degree[x] > degree[y];
            return x < y;
        });
        size_t nc = static_cast<size_t>(std::ceil(prm.core_fraction * n));
        for (size_t i = 0; i < std::min(nc, by_deg.size()); ++i) topo.ases[by_deg[i]].core = true;
    }
    return topo;
}

}  // namespace ciro
