#pragma once

// Policy-routing baseline: Gao-Rexford route selection and export over the
// relationship-annotated AS graph, iterated to a fixpoint. The stable state
// is unique on provider-cycle-free graphs, so the processing order must not
// matter; a convergence cap turns pathological inputs into an error.

#include <algorithm>
#include <map>
#include <vector>

#include "ciro/rng.hpp"
#include "ciro/topology.hpp"
#include "ciro/util.hpp"

namespace ciro {

enum class RouteSrc : uint8_t { self = 0, customer = 1, peer = 2, provider = 3 };

struct Route {
    std::vector<AsId> path;  // [owner, ..., destination]
    RouteSrc learned_from = RouteSrc::self;

    AsId dst() const { return path.back(); }
    AsId next_hop() const { return path.size() > 1 ? path[1] : path[0]; }
    size_t hops() const { return path.size() - 1; }
};

// owner AS -> destination -> selected route
using BgpTables = std::map<AsId, std::map<AsId, Route>>;

// Customer routes beat peer routes beat provider routes; then fewer hops;
// then the lower next-hop AS.
inline bool route_better(const Route& a, const Route& b) {
    if (a.learned_from != b.learned_from) return a.learned_from < b.learned_from;
    if (a.path.size() != b.path.size()) return a.path.size() < b.path.size();
    return a.next_hop() < b.next_hop();
}

// What `owner` announces to `to`: everything to customers, but only self and
// customer-learned routes to peers and providers.
inline bool exports_route(const Route& r, NeighborRel to_is) {
    if (to_is == NeighborRel::customer) return true;
    return r.learned_from == RouteSrc::self || r.learned_from == RouteSrc::customer;
}

inline RouteSrc src_from_rel(NeighborRel nb_is) {
    switch (nb_is) {
        case NeighborRel::customer: return RouteSrc::customer;
        case NeighborRel::peer: return RouteSrc::peer;
        case NeighborRel::provider: return RouteSrc::provider;
    }
    throw Error("bad relationship");
}

// Iterate best-route selection to the unique stable state. order_seed
// shuffles the per-round AS processing order (the fixpoint must not depend
// on it); the iteration cap is 4 * |ASes| rounds.
inline BgpTables propagate(const Topology& topo, uint64_t order_seed = 0) {
    std::vector<AsId> order;
    for (auto& [id, as] : topo.ases) order.push_back(id);
    if (order_seed != 0) {
        Rng rng(order_seed);
        rng.shuffle(order);
    }

    BgpTables tables;
    for (AsId id : order) tables[id][id] = Route{{id}, RouteSrc::self};

    size_t cap = 4 * topo.ases.size();
    for (size_t round = 0;; ++round) {
        if (round >= cap) throw Error("bgp propagate: no convergence within 4*|V| rounds");
        bool changed = false;
        for (AsId x : order) {
            const AsNode& xn = topo.node(x);
            for (auto& [intf, f] : xn.interfaces) {
                AsId n = f.neighbor;
                NeighborRel n_is = topo.rel_of(x, n);          // what n is to x
                NeighborRel x_is_to_n = topo.rel_of(n, x);     // what x is to n
                auto tn = tables.find(n);
                if (tn == tables.end()) continue;
                for (auto& [dst, rn] : tn->second) {
                    if (dst == x) continue;
                    if (!exports_route(rn, x_is_to_n)) continue;
                    if (std::find(rn.path.begin(), rn.path.end(), x) != rn.path.end()) continue;
                    Route cand;
                    cand.path.reserve(rn.path.size() + 1);
                    cand.path.push_back(x);
                    cand.path.insert(cand.path.end(), rn.path.begin(), rn.path.end());
                    cand.learned_from = src_from_rel(n_is);
                    auto& slot = tables[x];
                    auto it = slot.find(dst);
                    if (it == slot.end() || route_better(cand, it->second)) {
                        slot[dst] = std::move(cand);
                        changed = true;
                    }
                }
            }
        }
        if (!changed) break;
    }
    return tables;
}

// Gao-Rexford validity of an AS path: uphill (to providers), at most one
// peering step, then downhill (to customers).
inline bool valley_free(const Topology& topo, const std::vector<AsId>& path) {
    bool ascending = true, seen_peer = false;
    for (size_t i = 0; i + 1 < path.size(); ++i) {
        NeighborRel next_is = topo.rel_of(path[i], path[i + 1]);
        if (next_is == NeighborRel::provider) {  // uphill step
            if (!ascending || seen_peer) return false;
        } else if (next_is == NeighborRel::peer) {
            if (!ascending || seen_peer) return false;
            seen_peer = true;
            ascending = false;
        } else {
            ascending = false;  // downhill from here on
        }
    }
    return true;
}

// The alternative routes visible across the source's border routers: each
// router prefers the best route learned on its own interfaces and falls back
// to the AS-best route. Result deduplicated by path, at most one per router.
inline std::vector<Route> k_bgp_alternatives(const Topology& topo, const BgpTables& tables, AsId src,
                                             AsId dst) {
    const AsNode& sn = topo.node(src);
    std::map<RouterId, std::vector<IntfId>> by_router;
    for (auto& [iid, f] : sn.interfaces) by_router[f.router].push_back(iid);

    auto learned_via = [&](IntfId iid) -> std::optional<Route> {
        AsId n = sn.intf(iid).neighbor;
        auto tn = tables.find(n);
        if (tn == tables.end()) return std::nullopt;
        auto it = tn->second.find(dst);
        if (it == tn->second.end()) return std::nullopt;
        const Route& rn = it->second;
        if (!exports_route(rn, topo.rel_of(n, src))) return std::nullopt;
        if (std::find(rn.path.begin(), rn.path.end(), src) != rn.path.end()) return std::nullopt;
        Route cand;
        cand.path.reserve(rn.path.size() + 1);
        cand.path.push_back(src);
        cand.path.insert(cand.path.end(), rn.path.begin(), rn.path.end());
        cand.learned_from = src_from_rel(topo.rel_of(src, n));
        return cand;
    };

    const Route* as_best = nullptr;
    auto ts = tables.find(src);
    if (ts != tables.end()) {
        auto it = ts->second.find(dst);
        if (it != ts->second.end()) as_best = &it->second;
    }

    std::vector<Route> out;
    std::vector<std::vector<AsId>> seen;
    for (auto& [router, intfs] : by_router) {
        std::optional<Route> best;
        for (IntfId iid : intfs) {
            auto cand = learned_via(iid);
            if (cand && (!best || route_better(*cand, *best))) best = cand;
        }
        if (!best && as_best) best = *as_best;
        if (!best) continue;
        if (std::find(seen.begin(), seen.end(), best->path) != seen.end()) continue;
        seen.push_back(best->path);
        out.push_back(std::move(*best));
    }
    return out;
}

// Exact model CIDT of an AS-level path, g/bit: the sum over transit hops of
// the intra-domain segment cost between the hop's ingress and egress
// interfaces. Endpoint ASes contribute no segment (traffic originates and
// terminates inside them at unmodeled locations).
inline double as_path_cidt(Topology& topo, const std::vector<AsId>& path, const CieLookup& cie) {
    if (path.size() < 2) return 0.0;
    double sum = 0.0;
    for (size_t i = 1; i + 1 < path.size(); ++i) {
        AsNode& as = topo.node(path[i]);
        IntfId ing = as.intf_to(path[i - 1]);
        IntfId eg = as.intf_to(path[i + 1]);
        sum += path_cidt(as.device_path(ing, eg), cie);
    }
    return sum;
}

// Signal speed 2e8 m/s (two thirds of c in fiber): km / (2e8 m/s) = km * 5e-6 s.
inline constexpr double kMsPerKm = 5e-3;

// Lower-bound propagation delay of an AS-level path in ms: great-circle
// distances between consecutive border routers at signal speed 2e8 m/s.
inline double as_path_delay_ms(const Topology& topo, const std::vector<AsId>& path) {
    double km = 0.0;
    for (size_t i = 0; i + 1 < path.size(); ++i) {
        const AsNode& a = topo.node(path[i]);
        const AsNode& b = topo.node(path[i + 1]);
        IntfId ea = a.intf_to(path[i + 1]);
        IntfId ib = b.intf_to(path[i]);
        km += great_circle_km(a.border_router_loc(ea), b.border_router_loc(ib));
        if (i > 0) {
            IntfId ia = a.intf_to(path[i - 1]);
            km += great_circle_km(a.border_router_loc(ia), a.border_router_loc(ea));
        }
    }
    return km * kMsPerKm;
}

}  // namespace ciro
