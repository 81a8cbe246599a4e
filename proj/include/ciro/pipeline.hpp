#pragma once

// Pipeline orchestration: run every stage in order against one config and
// emit all report files under the configured output directory. Any stage
// failure is re-thrown tagged with the stage name.

#include <filesystem>
#include <fstream>
#include <memory>
#include <set>

#include "ciro/eval.hpp"
#include "ciro/tables_json.hpp"

namespace ciro {

inline std::unique_ptr<CieProvider> make_provider(const ExperimentConfig& cfg, const Topology& topo) {
    switch (cfg.provider) {
        case ExperimentConfig::Provider::annual:
            return std::make_unique<StaticAnnualProvider>(topo);
        case ExperimentConfig::Provider::diurnal:
            return std::make_unique<SyntheticDiurnalProvider>(topo, cfg.diurnal_amplitude,
                                                              cfg.diurnal_noise, cfg.seed);
        case ExperimentConfig::Provider::csv: {
            std::ifstream in(cfg.cie_csv, std::ios::binary);
            if (!in) throw Error("cannot open CIE csv " + cfg.cie_csv);
            const Topology* t = &topo;
            return std::make_unique<CsvCieProvider>(
                in, [t](const GeoCoord& g) { return t->zone_of_point(g).name; });
        }
    }
    throw Error("unknown provider");
}

namespace detail {

template <typename F>
auto stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const std::exception& e) {
        throw Error(std::string("stage ") + name + ": " + e.what());
    }
}

}  // namespace detail

inline PipelineOutput run_pipeline(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    PipelineOutput out;
    out.dir = cfg.out_dir;
    fs::create_directories(out.dir);
    auto file = [&](const char* name) { return (out.dir / name).string(); };

    // -- topology ----------------------------------------------------------
    Topology topo = detail::stage("topology", [&] {
        if (!cfg.topology_json.empty()) {
            std::ifstream in(cfg.topology_json, std::ios::binary);
            if (!in) throw Error("cannot open " + cfg.topology_json);
            nlohmann::json j;
            in >> j;
            return topology_from_json(j);
        }
        return gen_synthetic(cfg.seed, cfg.n_ases, cfg.synth);
    });
    detail::stage("topology", [&] {
        std::ofstream o(file("topology.json"), std::ios::binary);
        if (!o) throw Error("cannot write topology.json");
        o << topology_to_json(topo).dump(2) << "\n";
        return 0;
    });

    // -- forecast provider --------------------------------------------------
    std::unique_ptr<CieProvider> provider =
        detail::stage("forecast", [&] { return make_provider(cfg, topo); });

    // -- beaconing -----------------------------------------------------------
    Simulation sim = detail::stage("beacon", [&] { return make_simulation(topo, *provider, cfg.dissem); });
    std::ofstream transcript_file;
    if (cfg.write_transcript) {
        transcript_file.open(file("transcript.csv"), std::ios::binary);
        if (!transcript_file) throw Error("stage beacon: cannot write transcript.csv");
        transcript_file << "# seed=" << cfg.seed << "\n";
        transcript_file << "round,sender,egress,origin,hop_count,coverage_ratio,"
                           "current_hour_cidt_mg_per_gbit,size_octets\n";
        sim.transcript = [&transcript_file](const TranscriptRow& r) {
            transcript_file << r.round << "," << r.sender << "," << r.egress << "," << r.origin
                            << "," << r.hop_count << "," << fmt_double(r.coverage) << ","
                            << fmt_double(r.current_cidt_mg_gbit) << "," << r.size_octets << "\n";
        };
    }
    uint32_t executed = detail::stage("beacon", [&] {
        if (cfg.rounds > 0) {
            for (uint32_t i = 0; i < cfg.rounds; ++i) run_round(sim);
            return cfg.rounds;
        }
        return run_until_stable(sim, cfg.max_rounds);
    });
    if (transcript_file.is_open()) transcript_file.close();
    uint64_t eval_time =
        cfg.dissem.start_time +
        static_cast<uint64_t>(std::llround((executed > 0 ? executed - 1 : 0) *
                                           cfg.dissem.round_hours * 3600.0));

    // -- bgp -----------------------------------------------------------------
    BgpTables tables = detail::stage("bgp", [&] { return propagate(topo); });
    detail::stage("bgp", [&] {
        write_routes_csv(file("routes.csv"), tables, cfg.seed);
        return 0;
    });

    // -- traffic --------------------------------------------------------------
    TrafficMatrix traffic = detail::stage("traffic", [&] {
        std::map<AsId, AsProfile> profiles = profiles_from_topology(topo);
        return build_traffic(profiles, cfg.seed, cfg.popular_set, cfg.http_bytes_per_year,
                             cfg.internet_bytes_per_year);
    });
    detail::stage("traffic", [&] {
        write_traffic_csv(file("traffic.csv"), traffic, cfg.seed);
        return 0;
    });

    // -- eval -------------------------------------------------------------------
    EvalResult res = detail::stage("eval", [&] {
        EvalResult r = compute_pair_metrics(topo, sim, tables, *provider, cfg.k_paths, eval_time);
        std::set<AsId> ids;
        for (auto& [id, n] : topo.ases) ids.insert(id);
        carbon_footprint_savings(r, traffic, ids);
        return r;
    });
    detail::stage("eval", [&] {
        write_pair_metrics_csv(file("pair_metrics.csv"), res, cfg.seed);
        write_savings_csv(file("savings.csv"), res, cfg.seed);
        return 0;
    });

    // -- report -------------------------------------------------------------------
    out.summary = detail::stage("report", [&] {
        std::vector<double> abs_diff, rel_ratio, lat_ratio, lat_ciro, reduction;
        size_t lat_le_1 = 0;
        for (const PairMetrics& pm : res.pairs) {
            abs_diff.push_back((pm.greenest_bgp_cidt - pm.greenest_ciro_cidt) * 1e9);
            if (pm.greenest_bgp_cidt > 0.0)
                rel_ratio.push_back(pm.greenest_ciro_cidt / pm.greenest_bgp_cidt);
            else if (pm.greenest_ciro_cidt == 0.0)
                rel_ratio.push_back(1.0);
            lat_ciro.push_back(pm.delay_ciro_ms);
            if (pm.delay_bgp_ms > 0.0) {
                double lr = pm.delay_ciro_ms / pm.delay_bgp_ms;
                lat_ratio.push_back(lr);
                if (lr <= 1.0) ++lat_le_1;
            }
        }
        size_t positive_reduction = 0;
        for (auto& [as, s] : res.savings) {
            reduction.push_back(s.relative_reduction);
            if (s.relative_reduction > 0.0) ++positive_reduction;
        }
        write_cdf_csv(file("cdf_abs_diff_g_per_gbit.csv"), "abs_diff_g_per_gbit", abs_diff, cfg.seed);
        write_cdf_csv(file("cdf_relative_cidt_ratio.csv"), "relative_cidt_ratio", rel_ratio, cfg.seed);
        write_cdf_csv(file("cdf_latency_ratio.csv"), "latency_ratio", lat_ratio, cfg.seed);
        write_cdf_csv(file("cdf_footprint_reduction.csv"), "relative_reduction", reduction, cfg.seed);

        nlohmann::json s;
        s["seed"] = cfg.seed;
        s["ases"] = topo.ases.size();
        s["links"] = topo.links.size();
        s["rounds_executed"] = executed;
        s["eval_time"] = iso8601_utc(eval_time);
        s["pairs_compared"] = res.pairs.size();
        s["pairs_undefined"] = res.undefined_pairs;
        if (!abs_diff.empty()) s["abs_diff_g_per_gbit"] = percentile_block(abs_diff);
        if (!rel_ratio.empty()) s["relative_cidt_ratio"] = percentile_block(rel_ratio);
        if (!lat_ratio.empty()) {
            s["latency_ratio"] = percentile_block(lat_ratio);
            s["latency_ratio_le_1_fraction"] =
                static_cast<double>(lat_le_1) / static_cast<double>(lat_ratio.size());
        }
        // one-way great-circle delays underestimate real propagation delay
        // by roughly 1.5x; ratios are unaffected
        s["latency_underestimation_factor_note"] = 1.5;
        if (!reduction.empty()) {
            s["footprint_relative_reduction"] = percentile_block(reduction);
            s["footprint_positive_fraction"] =
                static_cast<double>(positive_reduction) / static_cast<double>(reduction.size());
        }
        s["total_savings_g_per_year"] = res.total_savings_g_per_year;
        s["total_savings_t_per_year"] = res.total_savings_g_per_year / 1e6;
        s["total_baseline_g_per_year"] = res.total_baseline_g_per_year;
        s["greedy_gap_max_mg_per_gbit"] = res.greedy_gap_max_mg_gbit;
        s["greedy_gap_mean_mg_per_gbit"] = res.greedy_gap_mean_mg_gbit;

        nlohmann::json msg;
        msg["messages"] = sim.stats.messages;
        msg["octets"] = sim.stats.octets;
        msg["clamped_octets"] = sim.stats.clamp.clamped;
        msg["encoded_octets"] = sim.stats.clamp.encoded;
        if (!sim.stats.size_hist.empty()) {
            std::vector<double> sizes;
            for (auto& [sz, cnt] : sim.stats.size_hist)
                for (uint64_t i = 0; i < cnt; ++i) sizes.push_back(static_cast<double>(sz));
            msg["size_octets"] = percentile_block(sizes);
        }
        s["beacon_messages"] = msg;

        std::ofstream o(file("summary.json"), std::ios::binary);
        if (!o) throw Error("cannot write summary.json");
        o << s.dump(2) << "\n";
        return s;
    });
    return out;
}

}  // namespace ciro
