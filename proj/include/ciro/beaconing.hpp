#pragma once

// Round-based dissemination of path-construction beacons with carbon
// forecast extensions. Each acting AS re-originates fresh beacons, ranks the
// beacons stored per origin, extends the retained ones with its own AS entry
// and sends them onward. Deliveries apply at the end of the round, so one
// round moves a beacon exactly one AS hop regardless of processing order.

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ciro/bgp.hpp"
#include "ciro/forecast.hpp"
#include "ciro/topology.hpp"
#include "ciro/util.hpp"
#include "ciro/wire.hpp"

namespace ciro {

// A dissemination period must give every AS at least one fresh reading per
// day after the longest allowed path consumed its share of the window.
inline std::optional<std::string> period_violation(double period_hours, uint32_t max_path_hops) {
    if (max_path_hops < 2) return "max_path_hops must be at least 2";
    double upper = std::min(2.6, 24.0 / (max_path_hops - 1));
    if (!(period_hours >= 1.0)) return "period below 1 hour";
    if (period_hours > upper) return "period above min(2.6, 24/(max_path_hops-1)) = " + fmt_double(upper);
    return std::nullopt;
}

inline void validate_period(double period_hours, uint32_t max_path_hops) {
    if (auto why = period_violation(period_hours, max_path_hops))
        throw Error("invalid dissemination period " + fmt_double(period_hours) + "h: " + *why);
}

enum class BeaconKind : uint8_t { flat = 0, core = 1, intra_isd = 2 };

struct DisseminationConfig {
    double period_hours = 1.0;
    std::map<AsId, double> as_period_hours;  // per-AS overrides
    double round_hours = 1.0;                // wall-clock per simulated round
    uint64_t start_time = 1735689600;        // 2025-01-01T00:00:00Z
    uint32_t retention_n = 5;                // kept per (origin, egress) when sending
    uint32_t store_per_ingress = 0;          // store bound per (origin, ingress); 0 -> retention_n
    bool green = true;                       // rank by CIDT instead of coverage/freshness
    uint32_t max_path_hops = 10;
    enum class Export : uint8_t { flood, valley_free } export_policy = Export::flood;
    enum class Mode : uint8_t { flat, hierarchical } mode = Mode::flat;
    std::vector<AsId> origins;     // empty: every AS (flat) / every core AS (hierarchical)
    bool resend_retained = true;   // false: each retained beacon goes out on an egress once
};

struct StoredPcb {
    RoutingMessage msg;
    BeaconKind kind = BeaconKind::flat;
    IntfId ingress = 0;       // local interface the beacon arrived on
    uint64_t received_at = 0;
    uint64_t hash = 0;        // serialized-message hash
    uint64_t path_id = 0;     // identity of origin + (as, ingress, egress) sequence
    uint32_t size_octets = 0;
    std::vector<IntfId> sent_on;  // egresses already served (resend_retained = false)
};

struct BeaconStore {
    // (origin, kind) -> stored beacons, insertion-ordered
    std::map<std::pair<AsId, uint8_t>, std::vector<StoredPcb>> by_origin;
};

inline double coverage_ratio(const RoutingMessage& msg) {
    if (msg.entries.empty()) return 0.0;
    size_t with = 0;
    for (const AsEntry& e : msg.entries)
        if (e.ext.kind != ExtKind::absent) ++with;
    return static_cast<double>(with) / static_cast<double>(msg.entries.size());
}

// Candidate ordering for propagation: best coverage first, then freshest
// origination, then lowest serialized-message hash.
inline std::vector<const StoredPcb*> select_pcbs(const BeaconStore& store, AsId origin,
                                                 BeaconKind kind = BeaconKind::flat) {
    std::vector<const StoredPcb*> out;
    auto it = store.by_origin.find({origin, static_cast<uint8_t>(kind)});
    if (it == store.by_origin.end()) return out;
    for (const StoredPcb& s : it->second) out.push_back(&s);
    std::sort(out.begin(), out.end(), [](const StoredPcb* a, const StoredPcb* b) {
        double ca = coverage_ratio(a->msg), cb = coverage_ratio(b->msg);
        if (ca != cb) return ca > cb;
        if (a->msg.timestamp != b->msg.timestamp) return a->msg.timestamp > b->msg.timestamp;
        return a->hash < b->hash;
    });
    return out;
}

// Green retention: the n candidates with the lowest cumulative current-hour
// CIDT; ties prefer fewer hops, then lower hash. Candidate order in, subset
// out — n of 0 or more than the candidate count keeps everything.
inline std::vector<const StoredPcb*> green_retain(std::vector<const StoredPcb*> candidates, uint32_t n,
                                                  uint64_t now_seconds) {
    std::sort(candidates.begin(), candidates.end(), [&](const StoredPcb* a, const StoredPcb* b) {
        double ca = cumulative_current_cidt(a->msg, now_seconds);
        double cb = cumulative_current_cidt(b->msg, now_seconds);
        if (ca != cb) return ca < cb;
        if (a->msg.entries.size() != b->msg.entries.size())
            return a->msg.entries.size() < b->msg.entries.size();
        return a->hash < b->hash;
    });
    if (n > 0 && candidates.size() > n) candidates.resize(n);
    return candidates;
}

struct TranscriptRow {
    uint32_t round = 0;
    AsId sender = 0;
    IntfId egress = 0;
    AsId origin = 0;
    uint32_t hop_count = 0;
    double coverage = 0.0;
    double current_cidt_mg_gbit = 0.0;
    uint32_t size_octets = 0;
};

struct SimStats {
    uint64_t messages = 0;
    uint64_t octets = 0;
    std::map<uint32_t, uint64_t> size_hist;
    ClampStats clamp;
    uint32_t rounds = 0;
};

struct AsSimState {
    ForecastDatabase db;
    BeaconStore store;
    double next_due_hours = 0.0;
};

struct Simulation {
    Topology* topo = nullptr;
    const CieProvider* provider = nullptr;
    DisseminationConfig cfg;
    std::map<AsId, AsSimState> states;
    uint32_t round = 0;
    SimStats stats;
    std::function<void(const TranscriptRow&)> transcript;  // optional

    uint64_t now_seconds() const {
        return cfg.start_time +
               static_cast<uint64_t>(std::llround(static_cast<double>(round) * cfg.round_hours * 3600.0));
    }
};

inline Simulation make_simulation(Topology& topo, const CieProvider& provider,
                                  const DisseminationConfig& cfg) {
    validate_period(cfg.period_hours, cfg.max_path_hops);
    for (auto& [id, p] : cfg.as_period_hours) validate_period(p, cfg.max_path_hops);
    if (cfg.round_hours <= 0.0) throw Error("round_hours must be positive");
    Simulation sim;
    sim.topo = &topo;
    sim.provider = &provider;
    sim.cfg = cfg;
    for (auto& [id, as] : topo.ases) sim.states[id];
    return sim;
}

// The relevant interfaces whose segments a hierarchical extension covers.
enum class BeaconRole : uint8_t { core_beacon, intra_isd_origin, intra_isd_propagate };

inline std::vector<IntfId> relevant_interfaces(const Topology& topo, const AsNode& as, BeaconRole role,
                                               IntfId ingress, IntfId egress) {
    std::vector<IntfId> keys;
    switch (role) {
        case BeaconRole::core_beacon:
            if (ingress != kNoIntf) keys.push_back(ingress);
            break;
        case BeaconRole::intra_isd_origin:
            for (auto& [iid, f] : as.interfaces) {
                if (iid == egress) continue;
                if (topo.node(f.neighbor).core || topo.rel_of(as.id, f.neighbor) == NeighborRel::peer)
                    keys.push_back(iid);
            }
            break;
        case BeaconRole::intra_isd_propagate:
            if (ingress != kNoIntf) keys.push_back(ingress);
            for (auto& [iid, f] : as.interfaces) {
                if (iid == egress || iid == ingress) continue;
                NeighborRel rel = topo.rel_of(as.id, f.neighbor);
                if (rel == NeighborRel::peer) keys.push_back(iid);
                else if (rel == NeighborRel::customer && iid < egress) keys.push_back(iid);
            }
            break;
    }
    return keys;
}

namespace detail {

struct Delivery {
    AsId to = 0;
    IntfId ingress = 0;
    RoutingMessage msg;
    BeaconKind kind = BeaconKind::flat;
    uint64_t hash = 0;
    uint32_t size_octets = 0;
};

inline uint64_t beacon_path_id(const RoutingMessage& msg) {
    uint64_t h = 0xcbf29ce484222325ULL;
    h = fnv1a64_append(h, msg.origin);
    for (const AsEntry& e : msg.entries) {
        h = fnv1a64_append(h, e.as);
        h = fnv1a64_append(h, (uint64_t(e.ingress) << 16) | e.egress);
    }
    return h;
}

inline bool contains_as(const RoutingMessage& msg, AsId as) {
    for (const AsEntry& e : msg.entries)
        if (e.as == as) return true;
    return false;
}

// Store insertion with per-(origin, ingress) retention. Returns true when
// the retained path set changed (timestamp refreshes of a known path don't
// count, which lets convergence detection terminate).
inline bool store_insert(BeaconStore& store, const Delivery& d, uint64_t now, uint32_t limit,
                         bool green) {
    auto& list = store.by_origin[{d.msg.origin, static_cast<uint8_t>(d.kind)}];
    uint64_t pid = beacon_path_id(d.msg);
    for (StoredPcb& s : list) {
        if (s.path_id != pid) continue;
        if (d.msg.timestamp > s.msg.timestamp) {
            s.msg = d.msg;
            s.hash = d.hash;
            s.received_at = now;
            s.size_octets = d.size_octets;
        }
        return false;
    }
    StoredPcb cand;
    cand.msg = d.msg;
    cand.kind = d.kind;
    cand.ingress = d.ingress;
    cand.received_at = now;
    cand.hash = d.hash;
    cand.path_id = pid;
    cand.size_octets = d.size_octets;

    size_t same_ingress = 0;
    for (const StoredPcb& s : list)
        if (s.ingress == d.ingress) ++same_ingress;
    if (limit == 0 || same_ingress < limit) {
        list.push_back(std::move(cand));
        return true;
    }
    // evict the worst among this ingress class (or reject the newcomer)
    auto worse = [&](const StoredPcb& a, const StoredPcb& b) {
        if (green) {
            double ca = cumulative_current_cidt(a.msg, now), cb = cumulative_current_cidt(b.msg, now);
            if (ca != cb) return ca > cb;
            if (a.msg.entries.size() != b.msg.entries.size())
                return a.msg.entries.size() > b.msg.entries.size();
            return a.hash > b.hash;
        }
        double ca = coverage_ratio(a.msg), cb = coverage_ratio(b.msg);
        if (ca != cb) return ca < cb;
        if (a.msg.timestamp != b.msg.timestamp) return a.msg.timestamp < b.msg.timestamp;
        return a.hash > b.hash;
    };
    size_t worst = SIZE_MAX;
    for (size_t i = 0; i < list.size(); ++i) {
        if (list[i].ingress != d.ingress) continue;
        if (worst == SIZE_MAX || worse(list[i], list[worst])) worst = i;
    }
    if (worst != SIZE_MAX && worse(list[worst], cand)) {
        list[worst] = std::move(cand);
        return true;
    }
    return false;
}

}  // namespace detail

// Extend a beacon with this AS's entry (building the extension against the
// AS's forecast database) and hand it to the neighbor behind `egress`.
// Returns the delivery; the caller owns buffering until the round ends.
inline detail::Delivery extend_and_send(Simulation& sim, AsNode& as, const RoutingMessage& pcb,
                                        BeaconKind kind, IntfId ingress, IntfId egress,
                                        uint64_t now) {
    const ForecastDatabase& db = sim.states.at(as.id).db;
    AsEntry entry;
    entry.as = as.id;
    entry.ingress = ingress;
    entry.egress = egress;
    if (sim.cfg.mode == DisseminationConfig::Mode::flat || kind == BeaconKind::flat) {
        entry.ext = build_extension(db, ingress, egress, pcb.timestamp, now, &sim.stats.clamp);
    } else {
        BeaconRole role;
        if (kind == BeaconKind::core) role = BeaconRole::core_beacon;
        else if (pcb.entries.empty()) role = BeaconRole::intra_isd_origin;
        else role = BeaconRole::intra_isd_propagate;
        std::vector<IntfId> keys = relevant_interfaces(*sim.topo, as, role, ingress, egress);
        entry.ext = build_extension_map(db, keys, egress, pcb.timestamp, now, &sim.stats.clamp);
    }

    RoutingMessage out = pcb;
    out.entries.push_back(std::move(entry));
    std::vector<uint8_t> bytes = serialize(out);

    detail::Delivery d;
    const Interface& f = as.intf(egress);
    d.to = f.neighbor;
    d.ingress = sim.topo->node(f.neighbor).intf_to(as.id);
    d.kind = kind;
    d.hash = fnv1a64(bytes);
    d.size_octets = static_cast<uint32_t>(bytes.size());
    d.msg = std::move(out);

    ++sim.stats.messages;
    sim.stats.octets += d.size_octets;
    ++sim.stats.size_hist[d.size_octets];
    if (sim.transcript) {
        TranscriptRow row;
        row.round = sim.round;
        row.sender = as.id;
        row.egress = egress;
        row.origin = d.msg.origin;
        row.hop_count = static_cast<uint32_t>(d.msg.entries.size());
        row.coverage = coverage_ratio(d.msg);
        row.current_cidt_mg_gbit = cumulative_current_cidt(d.msg, now) * kGPerBitToMgPerGbit;
        row.size_octets = d.size_octets;
        sim.transcript(row);
    }
    return d;
}

// One synchronous dissemination round. Returns true when any retained path
// set changed (origination refreshes alone do not count).
inline bool run_round(Simulation& sim) {
    Topology& topo = *sim.topo;
    const DisseminationConfig& cfg = sim.cfg;
    uint64_t now = sim.now_seconds();
    double now_h = static_cast<double>(sim.round) * cfg.round_hours;
    uint32_t store_limit = cfg.store_per_ingress ? cfg.store_per_ingress : cfg.retention_n;

    std::vector<detail::Delivery> deliveries;
    for (auto& [id, as] : topo.ases) {
        AsSimState& st = sim.states.at(id);
        if (now_h + 1e-9 < st.next_due_hours) continue;  // not acting this round
        double period = cfg.period_hours;
        auto ov = cfg.as_period_hours.find(id);
        if (ov != cfg.as_period_hours.end()) period = ov->second;
        while (st.next_due_hours <= now_h + 1e-9) st.next_due_hours += period;

        if (st.db.base_hour != hour_of(now) || st.db.records.empty())
            run_tcie_tick(as, *sim.provider, hour_start(now), st.db);

        bool is_origin = cfg.origins.empty()
                             ? (cfg.mode == DisseminationConfig::Mode::flat || as.core)
                             : std::find(cfg.origins.begin(), cfg.origins.end(), id) != cfg.origins.end();
        if (cfg.mode == DisseminationConfig::Mode::hierarchical && !as.core) is_origin = false;

        auto link_allowed = [&](IntfId eg, BeaconKind kind) {
            AsId nb = as.intf(eg).neighbor;
            if (cfg.mode == DisseminationConfig::Mode::flat) {
                if (cfg.export_policy == DisseminationConfig::Export::flood) return true;
                return true;  // origination: own beacons go everywhere under valley-free too
            }
            if (kind == BeaconKind::core) return as.core && topo.node(nb).core;
            return topo.rel_of(id, nb) == NeighborRel::customer;  // intra-ISD flows downhill
        };

        if (is_origin) {
            RoutingMessage fresh;
            fresh.timestamp = now;
            fresh.origin = id;
            if (cfg.mode == DisseminationConfig::Mode::flat) {
                for (auto& [eg, f] : as.interfaces)
                    deliveries.push_back(extend_and_send(sim, as, fresh, BeaconKind::flat, kNoIntf, eg, now));
            } else {
                for (auto& [eg, f] : as.interfaces) {
                    if (link_allowed(eg, BeaconKind::core))
                        deliveries.push_back(extend_and_send(sim, as, fresh, BeaconKind::core, kNoIntf, eg, now));
                    if (link_allowed(eg, BeaconKind::intra_isd))
                        deliveries.push_back(
                            extend_and_send(sim, as, fresh, BeaconKind::intra_isd, kNoIntf, eg, now));
                }
            }
        }

        for (auto& [key, list] : st.store.by_origin) {
            auto [origin, kind_u8] = key;
            auto kind = static_cast<BeaconKind>(kind_u8);
            if (origin == id) continue;
            std::vector<const StoredPcb*> cands = select_pcbs(st.store, origin, kind);
            for (auto& [eg, f] : as.interfaces) {
                AsId nb = f.neighbor;
                if (nb == origin) continue;
                if (cfg.mode == DisseminationConfig::Mode::hierarchical) {
                    if (kind == BeaconKind::core && !(as.core && topo.node(nb).core)) continue;
                    if (kind == BeaconKind::intra_isd && topo.rel_of(id, nb) != NeighborRel::customer)
                        continue;
                }
                std::vector<const StoredPcb*> eligible;
                for (const StoredPcb* c : cands) {
                    if (c->msg.entries.size() >= cfg.max_path_hops) continue;  // extension would exceed cap
                    if (detail::contains_as(c->msg, nb)) continue;
                    if (cfg.mode == DisseminationConfig::Mode::flat &&
                        cfg.export_policy == DisseminationConfig::Export::valley_free) {
                        // routes from peers/providers only flow to customers
                        NeighborRel from = topo.rel_of(id, topo.node(c->msg.entries.back().as).id);
                        NeighborRel to = topo.rel_of(id, nb);
                        bool from_customer = from == NeighborRel::customer;
                        if (!from_customer && to != NeighborRel::customer) continue;
                    }
                    eligible.push_back(c);
                }
                std::vector<const StoredPcb*> chosen =
                    cfg.green ? green_retain(std::move(eligible), cfg.retention_n, now)
                              : (eligible.size() > cfg.retention_n && cfg.retention_n > 0
                                     ? std::vector<const StoredPcb*>(eligible.begin(),
                                                                     eligible.begin() + cfg.retention_n)
                                     : eligible);
                for (const StoredPcb* c : chosen) {
                    if (!cfg.resend_retained) {
                        auto* mut = const_cast<StoredPcb*>(c);
                        if (std::find(mut->sent_on.begin(), mut->sent_on.end(), eg) != mut->sent_on.end())
                            continue;
                        mut->sent_on.push_back(eg);
                    }
                    deliveries.push_back(extend_and_send(sim, as, c->msg, kind, c->ingress, eg, now));
                }
            }
        }
    }

    bool changed = false;
    for (detail::Delivery& d : deliveries) {
        AsSimState& st = sim.states.at(d.to);
        if (detail::store_insert(st.store, d, now, store_limit, cfg.green)) changed = true;
    }
    ++sim.round;
    ++sim.stats.rounds;
    return changed;
}

// Run rounds until the retained path sets stop changing (or the cap hits).
// Returns the number of rounds executed.
inline uint32_t run_until_stable(Simulation& sim, uint32_t max_rounds, uint32_t quiet_rounds = 2) {
    uint32_t executed = 0, quiet = 0;
    while (executed < max_rounds) {
        bool changed = run_round(sim);
        ++executed;
        quiet = changed ? 0 : quiet + 1;
        if (quiet >= quiet_rounds) break;
    }
    return executed;
}

}  // namespace ciro
