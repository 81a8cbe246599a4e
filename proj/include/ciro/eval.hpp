#pragma once

// End-to-end evaluation pipeline: build or load a topology, run forecast
// ticks and beacon dissemination, propagate the BGP baseline, synthesize a
// traffic matrix, and compare the greenest discovered paths against the BGP
// paths pair by pair. Emits CSV/JSON reports; every file carries the run
// seed so outputs are self-describing and reruns are byte-comparable.

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ciro/beaconing.hpp"
#include "ciro/bgp.hpp"
#include "ciro/endpoint.hpp"
#include "ciro/forecast.hpp"
#include "ciro/topology.hpp"
#include "ciro/topology_io.hpp"
#include "ciro/traffic.hpp"
#include "ciro/util.hpp"

namespace ciro {

struct ExperimentConfig {
    // topology: load from JSON when set, otherwise synthesize
    std::string topology_json;
    uint64_t seed = 42;
    uint32_t n_ases = 50;
    SynthParams synth;

    // CIE provider
    enum class Provider : uint8_t { annual, diurnal, csv } provider = Provider::diurnal;
    double diurnal_amplitude = 0.3;
    double diurnal_noise = 0.05;
    std::string cie_csv;

    // dissemination
    DisseminationConfig dissem;
    uint32_t rounds = 0;  // 0: run until stable (capped at max_rounds)
    uint32_t max_rounds = 48;

    // path comparison
    uint32_t k_paths = 5;

    // traffic
    double http_bytes_per_year = kDefaultHttpBytesPerYear;
    double internet_bytes_per_year = kDefaultInternetBytesPerYear;
    std::vector<AsId> popular_set;

    // output
    std::string out_dir = "out";
    bool write_transcript = false;
};

struct PairMetrics {
    AsId src = 0, dst = 0;
    double greenest_ciro_cidt = 0.0;        // g/bit, exact model value of the chosen path
    double greenest_ciro_quantized = 0.0;   // g/bit, the score the endpoint saw
    double greenest_bgp_cidt = 0.0;         // g/bit
    double mean_bgp_cidt = 0.0;             // g/bit over the BGP alternatives
    double mean_k_greenest_ciro_cidt = 0.0; // g/bit over the k greenest discovered paths
    double delay_ciro_ms = 0.0;
    double delay_bgp_ms = 0.0;
    std::vector<AsId> ciro_path;  // src..dst
    std::vector<AsId> bgp_path;   // src..dst (the preferred BGP route)
};

struct AsSavings {
    AsId as = 0;
    double savings_g_per_year = 0.0;
    double baseline_g_per_year = 0.0;
    double relative_reduction = 0.0;  // savings / baseline
};

struct OracleEntry {
    double cidt_g_bit = 0.0;
    uint32_t transit_hops = 0;
};

// Memoized per-hop costs at a fixed evaluation hour. A transit AS's
// contribution depends only on (as, ingress, egress), so AS-path CIDT and
// delay reduce to sums of cached terms; the equivalent uncached reference
// implementations live next to the BGP baseline.
class EvalCaches {
  public:
    EvalCaches(Topology& topo, CieLookup cie) : topo_(&topo), cie_(std::move(cie)) {
        for (const AsLink& l : topo.links) {
            GeoCoord ga = topo.node(l.a).border_router_loc(l.intf_a);
            GeoCoord gb = topo.node(l.b).border_router_loc(l.intf_b);
            link_km_[std::minmax(l.a, l.b)] = great_circle_km(ga, gb);
        }
    }

    double transit_cidt(AsId as, IntfId ing, IntfId eg) {
        auto key = std::make_tuple(as, ing, eg);
        auto it = cidt_.find(key);
        if (it != cidt_.end()) return it->second;
        double v = ::ciro::path_cidt(topo_->node(as).device_path(ing, eg), cie_);
        cidt_.emplace(key, v);
        return v;
    }

    double transit_km(AsId as, IntfId ing, IntfId eg) {
        auto key = std::make_tuple(as, ing, eg);
        auto it = km_.find(key);
        if (it != km_.end()) return it->second;
        const AsNode& n = topo_->node(as);
        double v = great_circle_km(n.border_router_loc(ing), n.border_router_loc(eg));
        km_.emplace(key, v);
        return v;
    }

    double link_km(AsId a, AsId b) const {
        auto it = link_km_.find(std::minmax(a, b));
        if (it == link_km_.end()) throw NotFound("no link " + std::to_string(a) + "-" + std::to_string(b));
        return it->second;
    }

    // Transit-only CIDT (g/bit) of an AS-level path src..dst.
    double path_cidt(const std::vector<AsId>& seq) {
        double total = 0.0;
        for (size_t i = 1; i + 1 < seq.size(); ++i) {
            const AsNode& n = topo_->node(seq[i]);
            total += transit_cidt(seq[i], n.intf_to(seq[i - 1]), n.intf_to(seq[i + 1]));
        }
        return total;
    }

    // One-way propagation delay (ms) over consecutive border routers.
    double path_delay_ms(const std::vector<AsId>& seq) {
        double km = 0.0;
        for (size_t i = 0; i + 1 < seq.size(); ++i) {
            km += link_km(seq[i], seq[i + 1]);
            if (i > 0) {
                const AsNode& n = topo_->node(seq[i]);
                km += transit_km(seq[i], n.intf_to(seq[i - 1]), n.intf_to(seq[i + 1]));
            }
        }
        return km * kMsPerKm;
    }

    Topology& topology() { return *topo_; }

  private:
    Topology* topo_;
    CieLookup cie_;
    std::map<std::tuple<AsId, IntfId, IntfId>, double> cidt_;
    std::map<std::tuple<AsId, IntfId, IntfId>, double> km_;
    std::map<std::pair<AsId, AsId>, double> link_km_;
};

// Exact greenest transit CIDT from src to every other AS: Dijkstra over
// (AS, ingress-interface) states, edge weight = the transit AS's
// device-path CIDT between its ingress and egress at the given CIE. This is
// the independent ground truth the discovered minima are checked against.
inline std::map<AsId, OracleEntry> greenest_oracle_from(EvalCaches& caches, AsId src) {
    Topology& topo = caches.topology();
    struct State {
        double cost;
        uint32_t hops;
        AsId as;
        IntfId ingress;
    };
    auto state_less = [](const State& x, const State& y) {
        if (x.cost != y.cost) return x.cost < y.cost;
        if (x.hops != y.hops) return x.hops < y.hops;
        if (x.as != y.as) return x.as < y.as;
        return x.ingress < y.ingress;
    };

    std::map<std::pair<AsId, IntfId>, std::pair<double, uint32_t>> best;
    std::vector<State> frontier;
    const AsNode& s = topo.node(src);
    for (auto& [eg, f] : s.interfaces) {
        IntfId in_v = topo.node(f.neighbor).intf_to(src);
        State st{0.0, 0, f.neighbor, in_v};
        auto key = std::make_pair(st.as, st.ingress);
        auto it = best.find(key);
        if (it == best.end() || st.cost < it->second.first) {
            best[key] = {st.cost, st.hops};
            frontier.push_back(st);
        }
    }
    std::set<std::pair<AsId, IntfId>> done;
    while (!frontier.empty()) {
        size_t pick = 0;
        for (size_t i = 1; i < frontier.size(); ++i)
            if (state_less(frontier[i], frontier[pick])) pick = i;
        State cur = frontier[pick];
        frontier.erase(frontier.begin() + static_cast<long>(pick));
        auto key = std::make_pair(cur.as, cur.ingress);
        if (done.count(key)) continue;
        done.insert(key);
        AsNode& u = topo.node(cur.as);
        for (auto& [eg, f] : u.interfaces) {
            if (eg == cur.ingress || f.neighbor == src) continue;
            double w = caches.transit_cidt(cur.as, cur.ingress, eg);
            State nx{cur.cost + w, cur.hops + 1, f.neighbor, topo.node(f.neighbor).intf_to(cur.as)};
            auto nkey = std::make_pair(nx.as, nx.ingress);
            if (done.count(nkey)) continue;
            auto it = best.find(nkey);
            if (it == best.end() || nx.cost < it->second.first ||
                (nx.cost == it->second.first && nx.hops < it->second.second)) {
                best[nkey] = {nx.cost, nx.hops};
                frontier.push_back(nx);
            }
        }
    }

    std::map<AsId, OracleEntry> out;
    for (auto& [key, ch] : best) {
        auto [as, ingress] = key;
        if (as == src) continue;
        auto it = out.find(as);
        if (it == out.end() || ch.first < it->second.cidt_g_bit ||
            (ch.first == it->second.cidt_g_bit && ch.second < it->second.transit_hops)) {
            out[as] = {ch.first, ch.second};
        }
    }
    return out;
}

// CIE lookup at a fixed hour, backed by a provider and cached per key.
class HourCie {
  public:
    HourCie(const CieProvider& provider, uint64_t hour_seconds)
        : provider_(&provider), base_(hour_start(hour_seconds)) {}

    double operator()(const GeoCoord& g) const {
        std::string key = provider_->location_key(g);
        auto it = cache_.find(key);
        if (it == cache_.end()) it = cache_.emplace(key, provider_->fetch(key, base_)).first;
        return it->second[0];
    }

    CieLookup lookup() const {
        return [this](const GeoCoord& g) { return (*this)(g); };
    }

  private:
    const CieProvider* provider_;
    uint64_t base_;
    mutable std::map<std::string, Hours24> cache_;
};

namespace detail {

struct ScoredPath {
    double quantized = 0.0;  // g/bit seen by the endpoint
    std::vector<AsId> sequence;
    uint32_t transit_hops = 0;
};

// All scorable discovered paths from origin `src` stored at `dst`, sorted
// by endpoint preference (quantized CIDT, hops, lexicographic sequence).
inline std::vector<ScoredPath> discovered_paths(const Simulation& sim, AsId src, AsId dst,
                                                uint64_t now) {
    std::vector<ScoredPath> out;
    auto kind = sim.cfg.mode == DisseminationConfig::Mode::hierarchical ? BeaconKind::core
                                                                        : BeaconKind::flat;
    auto sit = sim.states.find(dst);
    if (sit == sim.states.end()) return out;
    auto bit = sit->second.store.by_origin.find({src, static_cast<uint8_t>(kind)});
    if (bit == sit->second.store.by_origin.end()) return out;
    for (const StoredPcb& s : bit->second) {
        EndToEndPath p = from_single_segment(s.msg, dst, false);
        auto q = end_to_end_cidt(p, now);
        if (!q) continue;  // forecast window expired
        ScoredPath sp;
        sp.quantized = *q;
        sp.sequence = as_sequence(s.msg, dst, false);
        sp.transit_hops = static_cast<uint32_t>(p.hops.size());
        out.push_back(std::move(sp));
    }
    std::sort(out.begin(), out.end(), [](const ScoredPath& a, const ScoredPath& b) {
        if (a.quantized != b.quantized) return a.quantized < b.quantized;
        if (a.sequence.size() != b.sequence.size()) return a.sequence.size() < b.sequence.size();
        return a.sequence < b.sequence;
    });
    return out;
}

}  // namespace detail

struct EvalResult {
    std::vector<PairMetrics> pairs;
    size_t undefined_pairs = 0;  // pairs lacking a CIRo path, a BGP route, or both
    std::map<AsId, AsSavings> savings;
    double total_savings_g_per_year = 0.0;
    double total_baseline_g_per_year = 0.0;
    double greedy_gap_max_mg_gbit = 0.0;   // discovered greenest vs oracle minimum
    double greedy_gap_mean_mg_gbit = 0.0;
    uint64_t eval_time = 0;
};

// Compare discovered greenest paths against the BGP baseline for every
// ordered AS pair. Pairs missing either side are omitted and counted.
inline EvalResult compute_pair_metrics(Topology& topo, const Simulation& sim,
                                       const BgpTables& tables, const CieProvider& provider,
                                       uint32_t k_paths, uint64_t eval_time,
                                       bool with_oracle_gap = true) {
    EvalResult res;
    res.eval_time = eval_time;
    HourCie hour_cie(provider, eval_time);
    EvalCaches caches(topo, hour_cie.lookup());

    KahanSum gap_sum;
    size_t gap_count = 0;

    for (auto& [src, snode] : topo.ases) {
        std::map<AsId, OracleEntry> oracle;
        if (with_oracle_gap) oracle = greenest_oracle_from(caches, src);
        for (auto& [dst, dnode] : topo.ases) {
            if (src == dst) continue;
            std::vector<detail::ScoredPath> ciro = detail::discovered_paths(sim, src, dst, eval_time);
            std::vector<Route> bgp = k_bgp_alternatives(topo, tables, src, dst);
            if (ciro.empty() || bgp.empty()) {
                ++res.undefined_pairs;
                continue;
            }

            PairMetrics pm;
            pm.src = src;
            pm.dst = dst;
            pm.greenest_ciro_quantized = ciro.front().quantized;
            pm.ciro_path = ciro.front().sequence;
            pm.greenest_ciro_cidt = caches.path_cidt(pm.ciro_path);
            pm.delay_ciro_ms = caches.path_delay_ms(pm.ciro_path);

            KahanSum ciro_mean;
            size_t kc = std::min<size_t>(k_paths, ciro.size());
            for (size_t i = 0; i < kc; ++i) ciro_mean.add(caches.path_cidt(ciro[i].sequence));
            pm.mean_k_greenest_ciro_cidt = ciro_mean.value() / static_cast<double>(kc);

            // bgp[0] is the route the AS actually prefers
            pm.bgp_path = bgp.front().path;
            pm.delay_bgp_ms = caches.path_delay_ms(pm.bgp_path);
            KahanSum bgp_mean;
            double bgp_min = 0.0;
            size_t kb = std::min<size_t>(k_paths, bgp.size());
            for (size_t i = 0; i < kb; ++i) {
                double c = caches.path_cidt(bgp[i].path);
                bgp_mean.add(c);
                if (i == 0 || c < bgp_min) bgp_min = c;
            }
            pm.greenest_bgp_cidt = bgp_min;
            pm.mean_bgp_cidt = bgp_mean.value() / static_cast<double>(kb);

            if (with_oracle_gap) {
                auto oit = oracle.find(dst);
                if (oit != oracle.end()) {
                    double gap = (pm.greenest_ciro_cidt - oit->second.cidt_g_bit) * kGPerBitToMgPerGbit;
                    if (gap < 0.0) gap = 0.0;  // quantization can rank a cheaper-exact path first
                    if (gap > res.greedy_gap_max_mg_gbit) res.greedy_gap_max_mg_gbit = gap;
                    gap_sum.add(gap);
                    ++gap_count;
                }
            }
            res.pairs.push_back(std::move(pm));
        }
    }
    if (gap_count > 0) res.greedy_gap_mean_mg_gbit = gap_sum.value() / static_cast<double>(gap_count);
    return res;
}

// Annual per-source savings of greenest-CIRo over greenest-BGP, weighted by
// the traffic matrix (bytes/year -> bits/year). Matrix keys must name ASes
// present in the topology.
inline void carbon_footprint_savings(EvalResult& res, const TrafficMatrix& traffic,
                                     const std::set<AsId>& topology_ases) {
    for (auto& [key, vol] : traffic) {
        if (!topology_ases.count(key.first) || !topology_ases.count(key.second))
            throw Error("carbon_footprint_savings: traffic names AS outside the topology");
        (void)vol;
    }
    std::map<AsId, KahanSum> delta, base;
    for (const PairMetrics& pm : res.pairs) {
        auto it = traffic.find({pm.src, pm.dst});
        if (it == traffic.end()) continue;
        double bits = it->second * 8.0;
        delta[pm.src].add(bits * (pm.greenest_bgp_cidt - pm.greenest_ciro_cidt));
        base[pm.src].add(bits * pm.greenest_bgp_cidt);
    }
    KahanSum total, total_base;
    for (auto& [as, d] : delta) {
        AsSavings s;
        s.as = as;
        s.savings_g_per_year = d.value();
        s.baseline_g_per_year = base[as].value();
        s.relative_reduction =
            s.baseline_g_per_year > 0.0 ? s.savings_g_per_year / s.baseline_g_per_year : 0.0;
        total.add(s.savings_g_per_year);
        total_base.add(s.baseline_g_per_year);
        res.savings[as] = s;
    }
    res.total_savings_g_per_year = total.value();
    res.total_baseline_g_per_year = total_base.value();
}

// ---------------------------------------------------------------------------
// Report emission.

inline double percentile(std::vector<double> v, double q) {
    if (v.empty()) throw Error("percentile of empty set");
    std::sort(v.begin(), v.end());
    if (q <= 0.0) return v.front();
    if (q >= 1.0) return v.back();
    double rank = q * static_cast<double>(v.size() - 1);
    size_t lo = static_cast<size_t>(rank);
    double frac = rank - static_cast<double>(lo);
    if (lo + 1 >= v.size()) return v.back();
    return v[lo] + frac * (v[lo + 1] - v[lo]);
}

inline void write_cdf_csv(const std::string& path, const std::string& header_value_name,
                          std::vector<double> values, uint64_t seed) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << "# seed=" << seed << "\n";
    out << header_value_name << ",fraction_of_pairs\n";
    std::sort(values.begin(), values.end());
    for (size_t i = 0; i < values.size(); ++i) {
        out << fmt_double(values[i]) << ","
            << fmt_double(static_cast<double>(i + 1) / static_cast<double>(values.size())) << "\n";
    }
}

inline nlohmann::json percentile_block(const std::vector<double>& v) {
    nlohmann::json j;
    if (v.empty()) return j;
    for (auto [name, q] : {std::pair<const char*, double>{"p10", 0.10},
                           {"p25", 0.25},
                           {"p50", 0.50},
                           {"p75", 0.75},
                           {"p90", 0.90}})
        j[name] = percentile(v, q);
    j["min"] = *std::min_element(v.begin(), v.end());
    j["max"] = *std::max_element(v.begin(), v.end());
    j["count"] = v.size();
    return j;
}

struct PipelineOutput {
    std::filesystem::path dir;
    nlohmann::json summary;
};

inline void write_traffic_csv(const std::string& path, const TrafficMatrix& m, uint64_t seed) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << "# seed=" << seed << "\n";
    out << "src,dst,bytes_per_year\n";
    for (auto& [key, v] : m)
        out << key.first << "," << key.second << "," << fmt_double(v) << "\n";
}

inline void write_routes_csv(const std::string& path, const BgpTables& tables, uint64_t seed) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << "# seed=" << seed << "\n";
    out << "as,destination,path,learned_from\n";
    for (auto& [as, table] : tables) {
        for (auto& [dst, r] : table) {
            out << as << "," << dst << ",";
            for (size_t i = 0; i < r.path.size(); ++i) out << (i ? "-" : "") << r.path[i];
            const char* lf = r.learned_from == RouteSrc::self       ? "self"
                             : r.learned_from == RouteSrc::customer ? "customer"
                             : r.learned_from == RouteSrc::peer     ? "peer"
                                                                    : "provider";
            out << "," << lf << "\n";
        }
    }
}

inline void write_pair_metrics_csv(const std::string& path, const EvalResult& res, uint64_t seed) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << "# seed=" << seed << "\n";
    out << "src,dst,greenest_ciro_cidt_g_bit,greenest_ciro_quantized_g_bit,greenest_bgp_cidt_g_bit,"
           "mean_bgp_cidt_g_bit,mean_k_greenest_ciro_cidt_g_bit,abs_diff_g_per_gbit,"
           "relative_ratio,delay_ciro_ms,delay_bgp_ms,ciro_path,bgp_path\n";
    for (const PairMetrics& pm : res.pairs) {
        double diff_g_gbit = (pm.greenest_bgp_cidt - pm.greenest_ciro_cidt) * 1e9;
        double ratio = pm.greenest_bgp_cidt > 0.0 ? pm.greenest_ciro_cidt / pm.greenest_bgp_cidt
                       : pm.greenest_ciro_cidt == 0.0 ? 1.0
                                                      : 0.0;
        out << pm.src << "," << pm.dst << "," << fmt_double(pm.greenest_ciro_cidt) << ","
            << fmt_double(pm.greenest_ciro_quantized) << "," << fmt_double(pm.greenest_bgp_cidt)
            << "," << fmt_double(pm.mean_bgp_cidt) << ","
            << fmt_double(pm.mean_k_greenest_ciro_cidt) << "," << fmt_double(diff_g_gbit) << ","
            << fmt_double(ratio) << "," << fmt_double(pm.delay_ciro_ms) << ","
            << fmt_double(pm.delay_bgp_ms) << ",";
        for (size_t i = 0; i < pm.ciro_path.size(); ++i) out << (i ? "-" : "") << pm.ciro_path[i];
        out << ",";
        for (size_t i = 0; i < pm.bgp_path.size(); ++i) out << (i ? "-" : "") << pm.bgp_path[i];
        out << "\n";
    }
}

inline void write_savings_csv(const std::string& path, const EvalResult& res, uint64_t seed) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << "# seed=" << seed << "\n";
    out << "as,savings_g_per_year,baseline_g_per_year,relative_reduction\n";
    for (auto& [as, s] : res.savings)
        out << as << "," << fmt_double(s.savings_g_per_year) << ","
            << fmt_double(s.baseline_g_per_year) << "," << fmt_double(s.relative_reduction) << "\n";
}

}  // namespace ciro
