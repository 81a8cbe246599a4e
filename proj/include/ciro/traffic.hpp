#pragma once

// Synthetic inter-domain traffic demand, stored as bytes/year per directed
// AS pair (consumers convert to bits at evaluation time). Two application
// classes: request/response HTTP demand driven by a Zipf popularity over
// content hosts, and broadcast video demand pushed from tagged service ASes
// to every user AS in proportion to its size.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ciro/rng.hpp"
#include "ciro/topology.hpp"
#include "ciro/util.hpp"

namespace ciro {

struct AsProfile {
    AsId as_id = 0;
    double size = 1.0;             // relative user population (IP-address count proxy)
    bool no_users = false;         // transit-only (sends no requests, receives no video)
    bool cdn_no_requests = false;  // hosts content but requests nothing
    std::optional<uint32_t> popularity_rank;
};

using TrafficMatrix = std::map<std::pair<AsId, AsId>, double>;  // (src,dst) -> bytes/year

inline constexpr double kDefaultDownloadFactor = 10.0;
inline constexpr double kDefaultZipfSlope = 1.2;
// 82 EB/month of request/response traffic, expressed per year.
inline constexpr double kDefaultHttpBytesPerYear = 82e18 * 12.0;
// Total internet traffic per year, the base for video service shares.
inline constexpr double kDefaultInternetBytesPerYear = 235e18 * 12.0;

// Raw Zipf weights: value ∝ rank^(-slope) over ranks 1..n, normalized.
inline std::vector<double> zipf_weights(size_t n, double slope) {
    if (n == 0) throw Error("zipf_weights: need at least one rank");
    if (!(slope > 0.0)) throw Error("zipf_weights: slope must be positive");
    std::vector<double> w(n);
    KahanSum total;
    for (size_t r = 0; r < n; ++r) {
        w[r] = std::pow(static_cast<double>(r + 1), -slope);
        total.add(w[r]);
    }
    double inv = 1.0 / total.value();
    for (double& v : w) v *= inv;
    return w;
}

// Per-AS popularity: the heaviest ranks go to `popular_set` in its given
// order; every other AS takes the remaining ranks in seeded-shuffle order.
inline std::map<AsId, double> zipf_popularity(const std::vector<AsId>& as_ids, double slope,
                                              uint64_t seed, const std::vector<AsId>& popular_set) {
    if (popular_set.size() > as_ids.size())
        throw Error("zipf_popularity: popular_set larger than the AS set");
    std::vector<double> w = zipf_weights(as_ids.size(), slope);

    std::set<AsId> known(as_ids.begin(), as_ids.end());
    std::map<AsId, double> pop;
    size_t rank = 0;
    for (AsId a : popular_set) {
        if (!known.count(a))
            throw Error("zipf_popularity: popular_set contains unknown AS " + std::to_string(a));
        if (pop.count(a)) throw Error("zipf_popularity: duplicate AS in popular_set");
        pop[a] = w[rank++];
    }
    std::vector<AsId> rest;
    for (AsId a : as_ids)
        if (!pop.count(a)) rest.push_back(a);
    Rng rng(mix_seed(seed, 0x504f5055ULL));
    rng.shuffle(rest);
    for (AsId a : rest) pop[a] = w[rank++];
    if (rank != as_ids.size()) throw Error("zipf_popularity: popular_set contains unknown ASes");
    return pop;
}

namespace detail {

inline double requester_size(const AsProfile& p) {
    return (p.no_users || p.cdn_no_requests) ? 0.0 : p.size;
}

}  // namespace detail

// Request/response demand: T(i,j) = S_i·p(j) + d·S_j·p(i) in relative
// units (requests i→j plus responses to j's requests at i), then scaled so
// the global sum equals total_bytes_per_year.
inline TrafficMatrix http_matrix(const std::map<AsId, AsProfile>& profiles,
                                 const std::map<AsId, double>& popularity,
                                 double d_http = kDefaultDownloadFactor,
                                 double total_bytes_per_year = kDefaultHttpBytesPerYear) {
    TrafficMatrix raw;
    for (auto& [i, pi] : profiles) {
        double si = detail::requester_size(pi);
        for (auto& [j, pj] : profiles) {
            if (i == j) continue;
            double sj = detail::requester_size(pj);
            double v = si * popularity.at(j) + d_http * sj * popularity.at(i);
            if (v > 0.0) raw[{i, j}] += v;
        }
    }
    KahanSum total;
    for (auto& [k, v] : raw) total.add(v);
    if (!(total.value() > 0.0)) throw Error("http_matrix: all-zero relative matrix, cannot scale");
    double scale = total_bytes_per_year / total.value();
    for (auto& [k, v] : raw) v *= scale;
    return raw;
}

struct VideoService {
    std::string name;
    AsId host = 0;
    double share = 0.0;  // fraction of total internet traffic
};

inline std::vector<VideoService> default_video_services(AsId a, AsId b, AsId c) {
    return {{"video_a", a, 0.15}, {"video_b", b, 0.114}, {"video_c", c, 0.037}};
}

// Broadcast demand: each service pushes share·total bytes/year from its
// host AS to user ASes in proportion to their size; the reverse leg is
// negligible and left zero.
inline TrafficMatrix video_matrix(const std::map<AsId, AsProfile>& profiles,
                                  const std::vector<VideoService>& services,
                                  double total_internet_bytes_per_year = kDefaultInternetBytesPerYear) {
    TrafficMatrix out;
    for (const VideoService& svc : services) {
        if (!profiles.count(svc.host))
            throw Error("video_matrix: unknown host AS " + std::to_string(svc.host));
        KahanSum size_total;
        for (auto& [j, pj] : profiles) {
            if (j == svc.host || pj.no_users || pj.size <= 0.0) continue;
            size_total.add(pj.size);
        }
        if (!(size_total.value() > 0.0))
            throw Error("video_matrix: no eligible viewers for service " + svc.name);
        double annual = svc.share * total_internet_bytes_per_year;
        for (auto& [j, pj] : profiles) {
            if (j == svc.host || pj.no_users || pj.size <= 0.0) continue;
            out[{svc.host, j}] += annual * pj.size / size_total.value();
        }
    }
    return out;
}

inline TrafficMatrix combine(const std::vector<TrafficMatrix>& parts) {
    TrafficMatrix out;
    for (const TrafficMatrix& m : parts)
        for (auto& [k, v] : m) out[k] += v;
    return out;
}

inline double matrix_total(const TrafficMatrix& m) {
    KahanSum s;
    for (auto& [k, v] : m) s.add(v);
    return s.value();
}

// Fold a full-mesh matrix down to the core: each non-core endpoint's demand
// is split evenly across the core ASes whose customer cones contain it;
// core endpoints stay put. Volume landing on a single AS after folding is
// dropped (it never crosses the core).
inline TrafficMatrix aggregate_to_core(const TrafficMatrix& m,
                                       const std::map<AsId, std::vector<AsId>>& cones) {
    std::map<AsId, std::vector<AsId>> covering;  // AS -> covering core ASes
    for (auto& [core, cone] : cones)
        for (AsId x : cone) covering[x].push_back(core);
    for (auto& [core, cone] : cones) covering[core] = {core};

    TrafficMatrix out;
    for (auto& [key, vol] : m) {
        auto [s, d] = key;
        auto cs = covering.find(s), cd = covering.find(d);
        if (cs == covering.end() || cs->second.empty())
            throw Error("aggregate_to_core: AS " + std::to_string(s) + " not covered by any core");
        if (cd == covering.end() || cd->second.empty())
            throw Error("aggregate_to_core: AS " + std::to_string(d) + " not covered by any core");
        double share = vol / (static_cast<double>(cs->second.size()) *
                              static_cast<double>(cd->second.size()));
        for (AsId a : cs->second)
            for (AsId b : cd->second)
                if (a != b) out[{a, b}] += share;
    }
    return out;
}

// Synthetic profiles: size follows the customer-cone weight (stub ASes
// size 1); no role flags, no pinned ranks.
inline std::map<AsId, AsProfile> profiles_from_topology(const Topology& topo) {
    std::vector<RelEdge> edges;
    edges.reserve(topo.links.size());
    for (const AsLink& l : topo.links) edges.push_back({l.a, l.b, l.rel});
    std::map<AsId, std::vector<AsId>> cones = customer_cones(edges);
    std::map<AsId, AsProfile> out;
    for (auto& [id, as] : topo.ases) {
        AsProfile p;
        p.as_id = id;
        auto it = cones.find(id);
        p.size = 1.0 + (it == cones.end() ? 0.0 : static_cast<double>(it->second.size()));
        out[id] = p;
    }
    return out;
}

// Full default demand for a topology: HTTP plus video hosted at the three
// largest-size ASes (deterministic given the profiles).
inline TrafficMatrix build_traffic(const std::map<AsId, AsProfile>& profiles, uint64_t seed,
                                   const std::vector<AsId>& popular_set = {},
                                   double http_bytes_per_year = kDefaultHttpBytesPerYear,
                                   double internet_bytes_per_year = kDefaultInternetBytesPerYear) {
    std::vector<AsId> ids;
    for (auto& [id, p] : profiles) ids.push_back(id);
    std::map<AsId, double> pop = zipf_popularity(ids, kDefaultZipfSlope, seed, popular_set);
    TrafficMatrix http = http_matrix(profiles, pop, kDefaultDownloadFactor, http_bytes_per_year);

    std::vector<AsId> by_size = ids;
    std::sort(by_size.begin(), by_size.end(), [&](AsId a, AsId b) {
        double sa = profiles.at(a).size, sb = profiles.at(b).size;
        if (sa != sb) return sa > sb;
        return a < b;
    });
    TrafficMatrix video;
    if (by_size.size() >= 3) {
        video = video_matrix(profiles, default_video_services(by_size[0], by_size[1], by_size[2]),
                             internet_bytes_per_year);
    }
    return combine({http, video});
}

}  // namespace ciro
