#pragma once

// Endpoint path selection: stitch received beacons into end-to-end paths,
// score them from the embedded forecast vectors at the send instant, and
// pick the greenest. Paths built from segments traversed against beacon
// direction read the backward half of each entry's vector.

#include <cstdint>
#include <optional>
#include <vector>

#include "ciro/util.hpp"
#include "ciro/wire.hpp"

namespace ciro {

struct PathHop {
    const RoutingMessage* segment = nullptr;  // beacon this hop comes from
    size_t entry_index = 0;                   // index into segment->entries
    bool reversed = false;                    // traverse against beacon direction
    IntfId map_key = 0;                       // keyed-vector selector (0: use entry ingress)
};

struct EndToEndPath {
    std::vector<PathHop> hops;  // transit hops in traversal order
    AsId src = 0;
    AsId dst = 0;
};

// Sum of per-hop CIDT (g/bit) at the hour of `now_seconds`. A hop whose
// forecast window has expired makes the whole path unscorable (nullopt); a
// hop with no extension contributes zero.
inline std::optional<double> end_to_end_cidt(const EndToEndPath& path, uint64_t now_seconds) {
    double total = 0.0;
    for (const PathHop& h : path.hops) {
        const AsEntry& e = h.segment->entries.at(h.entry_index);
        if (e.ext.kind == ExtKind::absent) continue;
        auto idx = current_hour_index(now_seconds, h.segment->timestamp);
        if (!idx) return std::nullopt;
        const CidtWireVector* vec = nullptr;
        if (e.ext.kind == ExtKind::flat) {
            vec = &e.ext.flat;
        } else {
            IntfId key = h.map_key ? h.map_key : e.ingress;
            vec = e.ext.vector_for_key(key);
            if (!vec && e.ext.keyed.size() == 1) vec = &e.ext.keyed.front().second;
            if (!vec) continue;
        }
        uint8_t octet = h.reversed ? vec->backward(*idx) : vec->forward(*idx);
        total += decode_cidt(octet);
    }
    return total;
}

// A one-beacon path between the beacon's origin and the AS that received
// it. Transit hops are every entry except the origin's own. With
// toward_origin = false the path carries traffic origin -> receiver, in
// beacon direction, reading forward vector halves; with toward_origin =
// true it carries receiver -> origin, traversing the entries in reverse and
// reading the backward halves.
inline EndToEndPath from_single_segment(const RoutingMessage& msg, AsId receiver, bool toward_origin) {
    EndToEndPath p;
    if (toward_origin) {
        p.src = receiver;
        p.dst = msg.origin;
    } else {
        p.src = msg.origin;
        p.dst = receiver;
    }
    // transit entries: every entry except the origin's own (index 0)
    if (toward_origin) {
        for (size_t i = msg.entries.size(); i-- > 1;) {
            PathHop h;
            h.segment = &msg;
            h.entry_index = i;
            h.reversed = true;
            p.hops.push_back(h);
        }
    } else {
        for (size_t i = 1; i < msg.entries.size(); ++i) {
            PathHop h;
            h.segment = &msg;
            h.entry_index = i;
            h.reversed = false;
            p.hops.push_back(h);
        }
    }
    return p;
}

// AS-level hop sequence src..dst of a single-segment path.
inline std::vector<AsId> as_sequence(const RoutingMessage& msg, AsId receiver, bool toward_origin) {
    std::vector<AsId> seq;
    seq.push_back(msg.origin);
    for (size_t i = 1; i < msg.entries.size(); ++i) seq.push_back(msg.entries[i].as);
    seq.push_back(receiver);
    if (toward_origin) std::reverse(seq.begin(), seq.end());
    return seq;
}

// Pick the greenest scorable path: lowest CIDT, then fewest hops, then
// lexicographically smallest AS sequence. Unscorable paths lose to any
// scorable one. Returns the winning index, or nullopt if none scorable.
inline std::optional<size_t> select_greenest(const std::vector<EndToEndPath>& paths,
                                             const std::vector<std::vector<AsId>>& sequences,
                                             uint64_t now_seconds) {
    std::optional<size_t> best;
    std::optional<double> best_cidt;
    for (size_t i = 0; i < paths.size(); ++i) {
        auto c = end_to_end_cidt(paths[i], now_seconds);
        if (!c) continue;
        if (!best) {
            best = i;
            best_cidt = c;
            continue;
        }
        if (*c != *best_cidt) {
            if (*c < *best_cidt) { best = i; best_cidt = c; }
            continue;
        }
        const auto& cand = sequences.at(i);
        const auto& inc = sequences.at(*best);
        if (cand.size() != inc.size()) {
            if (cand.size() < inc.size()) { best = i; best_cidt = c; }
            continue;
        }
        if (cand < inc) { best = i; best_cidt = c; }
    }
    return best;
}

}  // namespace ciro
