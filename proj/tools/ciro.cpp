// ciro — carbon-intelligent inter-domain routing toolkit.
//
// Subcommands cover the pipeline stages individually (topology, forecast,
// beacon, bgp, traffic, eval, report) plus `pipeline`, which runs them all
// under one seed and emits every report file into an output directory.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ciro/eval.hpp"
#include "ciro/pipeline.hpp"
#include "ciro/tables_json.hpp"

namespace fs = std::filesystem;
using namespace ciro;

namespace {

Topology load_topology(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open topology " + path);
    nlohmann::json j;
    in >> j;
    return topology_from_json(j);
}

void save_topology(const Topology& topo, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << topology_to_json(topo).dump(2) << "\n";
}

std::unique_ptr<CieProvider> provider_from_flags(const std::string& kind, const Topology& topo,
                                                 double amp, double noise, uint64_t seed,
                                                 const std::string& cie_csv) {
    ExperimentConfig cfg;
    if (kind == "annual") cfg.provider = ExperimentConfig::Provider::annual;
    else if (kind == "diurnal") cfg.provider = ExperimentConfig::Provider::diurnal;
    else if (kind == "csv") cfg.provider = ExperimentConfig::Provider::csv;
    else throw Error("unknown provider '" + kind + "' (annual|diurnal|csv)");
    cfg.diurnal_amplitude = amp;
    cfg.diurnal_noise = noise;
    cfg.seed = seed;
    cfg.cie_csv = cie_csv;
    return make_provider(cfg, topo);
}

struct DissemFlags {
    double period = 1.0;
    double round_hours = 1.0;
    std::string start_time = "2025-01-01T00:00:00Z";
    uint32_t retention = 5;
    uint32_t store_per_ingress = 0;
    bool no_green = false;
    uint32_t max_path_hops = 10;
    std::string export_policy = "flood";
    std::string mode = "flat";
    std::vector<AsId> origins;
    bool no_resend = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--period", period, "Dissemination period, hours");
        cmd->add_option("--round-hours", round_hours, "Simulated wall-clock per round, hours");
        cmd->add_option("--start-time", start_time, "Simulation start (ISO 8601 UTC)");
        cmd->add_option("--retention", retention, "Beacons retained per origin and egress (0 = all)");
        cmd->add_option("--store-per-ingress", store_per_ingress,
                        "Store bound per origin and ingress (0 = same as retention)");
        cmd->add_flag("--no-green", no_green, "Rank beacons by coverage/freshness instead of CIDT");
        cmd->add_option("--max-path-hops", max_path_hops, "Maximum AS hops per beacon path");
        cmd->add_option("--export", export_policy, "Export policy: flood|valley-free");
        cmd->add_option("--mode", mode, "Beaconing mode: flat|hierarchical");
        cmd->add_option("--origins", origins, "Restrict beacon origins to these ASes");
        cmd->add_flag("--no-resend", no_resend, "Send each retained beacon over an egress only once");
    }

    DisseminationConfig to_config() const {
        DisseminationConfig d;
        d.period_hours = period;
        d.round_hours = round_hours;
        d.start_time = parse_iso8601_utc(start_time);
        d.retention_n = retention;
        d.store_per_ingress = store_per_ingress;
        d.green = !no_green;
        d.max_path_hops = max_path_hops;
        if (export_policy == "flood") d.export_policy = DisseminationConfig::Export::flood;
        else if (export_policy == "valley-free")
            d.export_policy = DisseminationConfig::Export::valley_free;
        else throw Error("unknown export policy '" + export_policy + "'");
        if (mode == "flat") d.mode = DisseminationConfig::Mode::flat;
        else if (mode == "hierarchical") d.mode = DisseminationConfig::Mode::hierarchical;
        else throw Error("unknown mode '" + mode + "'");
        d.origins = origins;
        d.resend_retained = !no_resend;
        return d;
    }
};

std::vector<std::vector<std::string>> load_csv_rows(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::string t{trim(line)};
        if (t.empty() || t[0] == '#') continue;
        std::vector<std::string> fields;
        for (std::string_view f : split(t, ',')) fields.emplace_back(trim(f));
        rows.push_back(std::move(fields));
    }
    return rows;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"carbon-intelligent inter-domain routing toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a TOML/INI config file");
    app.allow_config_extras(CLI::config_extras_mode::ignore_all);

    // ---- topology ----------------------------------------------------------
    auto* t = app.add_subcommand("topology", "Build a topology (synthetic or ingested) as JSON");
    uint64_t t_seed = 42;
    uint32_t t_n = 50;
    SynthParams t_prm;
    std::string t_out = "topology.json";
    std::string t_rel, t_geo, t_routers, t_rlinks, t_mix;
    uint32_t t_core_k = 0;
    bool t_tables = false;
    t->add_option("--seed", t_seed, "Generator seed");
    t->add_option("-n,--ases", t_n, "Synthetic AS count");
    t->add_option("--attach-m", t_prm.attach_m, "Preferential-attachment links per new AS");
    t->add_option("--peer-fraction", t_prm.peer_fraction, "Peering link fraction");
    t->add_option("--core-fraction", t_prm.core_fraction, "Fraction of ASes labeled core");
    t->add_option("--pue", t_prm.pue, "Power usage effectiveness for all devices");
    t->add_option("--as-rel", t_rel, "Ingest: AS relationship file (a|b|rel)");
    t->add_option("--geo", t_geo, "Ingest: interface geo CSV (as_id,interface_id,lat,lon)");
    t->add_option("--routers", t_routers, "Ingest: router CSV (router_id,as_id,lat,lon)");
    t->add_option("--router-links", t_rlinks, "Ingest: router link CSV (router_a,router_b)");
    t->add_option("--mix", t_mix, "Ingest: energy-mix CSV (country,8 shares[,center_lat,center_lon])");
    t->add_option("--core-k", t_core_k, "Relabel cores as the k-core via iterative pruning");
    t->add_flag("--tables", t_tables, "Also write energy_tables.json next to the topology");
    t->callback([&] {
        Topology topo;
        if (!t_rel.empty()) {
            IngestInputs in;
            std::ifstream rel(t_rel, std::ios::binary);
            if (!rel) throw Error("cannot open " + t_rel);
            in.rel = load_as_rel(rel);
            if (t_geo.empty()) throw Error("ingest requires --geo");
            std::ifstream geo(t_geo, std::ios::binary);
            if (!geo) throw Error("cannot open " + t_geo);
            in.geo = load_geo_csv(geo);
            if (!t_routers.empty()) {
                std::ifstream r(t_routers, std::ios::binary);
                if (!r) throw Error("cannot open " + t_routers);
                in.routers = load_router_csv(r);
            }
            if (!t_rlinks.empty()) {
                std::ifstream r(t_rlinks, std::ios::binary);
                if (!r) throw Error("cannot open " + t_rlinks);
                in.router_links = load_router_link_csv(r);
            }
            if (t_mix.empty()) throw Error("ingest requires --mix");
            std::ifstream m(t_mix, std::ios::binary);
            if (!m) throw Error("cannot open " + t_mix);
            in.zones = load_energy_mix_csv(m);
            in.pue = t_prm.pue;
            topo = build_ingested_topology(in);
        } else {
            topo = gen_synthetic(t_seed, t_n, t_prm);
        }
        if (t_core_k > 0) {
            std::vector<RelEdge> edges;
            for (const AsLink& l : topo.links) edges.push_back({l.a, l.b, l.rel});
            std::set<AsId> core = prune_to_core(edges, t_core_k);
            for (auto& [id, node] : topo.ases) node.core = core.count(id) > 0;
        }
        save_topology(topo, t_out);
        if (t_tables) {
            fs::path dir = fs::path(t_out).parent_path();
            std::ofstream o((dir / "energy_tables.json").string(), std::ios::binary);
            o << tables_json().dump(2) << "\n";
        }
        std::cout << "wrote " << t_out << " (" << topo.ases.size() << " ASes, "
                  << topo.links.size() << " links)\n";
    });
    t->add_option("--out", t_out, "Output topology JSON path");

    // ---- forecast ----------------------------------------------------------
    auto* f = app.add_subcommand("forecast", "Run a forecast tick for one AS and dump its database");
    std::string f_topo, f_out = "forecast.csv", f_cie_out, f_provider = "diurnal", f_cie_csv;
    std::string f_time = "2025-01-01T00:00:00Z";
    uint64_t f_seed = 42;
    double f_amp = 0.3, f_noise = 0.05;
    AsId f_as = 0;
    f->add_option("--topology", f_topo, "Topology JSON")->required();
    f->add_option("--as", f_as, "AS to run the tick for")->required();
    f->add_option("--time", f_time, "Tick time (ISO 8601 UTC)");
    f->add_option("--provider", f_provider, "CIE provider: annual|diurnal|csv");
    f->add_option("--cie-csv", f_cie_csv, "CIE CSV input for --provider csv");
    f->add_option("--seed", f_seed, "Provider seed (diurnal)");
    f->add_option("--amplitude", f_amp, "Diurnal amplitude");
    f->add_option("--noise", f_noise, "Diurnal noise level");
    f->add_option("--out", f_out, "Forecast CSV output");
    f->add_option("--cie-out", f_cie_out, "Also dump per-zone CIE CSV here");
    f->callback([&] {
        Topology topo = load_topology(f_topo);
        auto provider = provider_from_flags(f_provider, topo, f_amp, f_noise, f_seed, f_cie_csv);
        uint64_t now = parse_iso8601_utc(f_time);
        AsNode& node = topo.node(f_as);
        ForecastDatabase db;
        run_tcie_tick(node, *provider, now, db);
        std::ofstream out(f_out, std::ios::binary);
        if (!out) throw Error("cannot write " + f_out);
        dump_forecast_csv(db, out);
        std::cout << "wrote " << f_out << " (" << db.records.size() << " interface pairs)\n";
        if (!f_cie_out.empty()) {
            std::ofstream cie(f_cie_out, std::ios::binary);
            if (!cie) throw Error("cannot write " + f_cie_out);
            dump_cie_csv(topo, *provider, hour_start(now), cie);
            std::cout << "wrote " << f_cie_out << "\n";
        }
    });

    // ---- beacon ------------------------------------------------------------
    auto* b = app.add_subcommand("beacon", "Run beacon dissemination rounds");
    std::string b_topo, b_provider = "diurnal", b_cie_csv, b_transcript, b_stats;
    uint64_t b_seed = 42;
    double b_amp = 0.3, b_noise = 0.05;
    uint32_t b_rounds = 0, b_max_rounds = 48;
    DissemFlags b_dissem;
    b->add_option("--topology", b_topo, "Topology JSON")->required();
    b->add_option("--provider", b_provider, "CIE provider: annual|diurnal|csv");
    b->add_option("--cie-csv", b_cie_csv, "CIE CSV input for --provider csv");
    b->add_option("--seed", b_seed, "Provider seed (diurnal)");
    b->add_option("--amplitude", b_amp, "Diurnal amplitude");
    b->add_option("--noise", b_noise, "Diurnal noise level");
    b->add_option("--rounds", b_rounds, "Rounds to run (0 = until stable)");
    b->add_option("--max-rounds", b_max_rounds, "Round cap when running until stable");
    b->add_option("--transcript", b_transcript, "Write per-message transcript CSV here");
    b->add_option("--stats", b_stats, "Write run statistics JSON here");
    b_dissem.attach(b);
    b->callback([&] {
        Topology topo = load_topology(b_topo);
        auto provider = provider_from_flags(b_provider, topo, b_amp, b_noise, b_seed, b_cie_csv);
        Simulation sim = make_simulation(topo, *provider, b_dissem.to_config());
        std::ofstream tf;
        if (!b_transcript.empty()) {
            tf.open(b_transcript, std::ios::binary);
            if (!tf) throw Error("cannot write " + b_transcript);
            tf << "# seed=" << b_seed << "\n";
            tf << "round,sender,egress,origin,hop_count,coverage_ratio,"
                  "current_hour_cidt_mg_per_gbit,size_octets\n";
            sim.transcript = [&tf](const TranscriptRow& r) {
                tf << r.round << "," << r.sender << "," << r.egress << "," << r.origin << ","
                   << r.hop_count << "," << fmt_double(r.coverage) << ","
                   << fmt_double(r.current_cidt_mg_gbit) << "," << r.size_octets << "\n";
            };
        }
        uint32_t executed;
        if (b_rounds > 0) {
            for (uint32_t i = 0; i < b_rounds; ++i) run_round(sim);
            executed = b_rounds;
        } else {
            executed = run_until_stable(sim, b_max_rounds);
        }
        nlohmann::json s;
        s["seed"] = b_seed;
        s["rounds"] = executed;
        s["messages"] = sim.stats.messages;
        s["octets"] = sim.stats.octets;
        s["clamped_octets"] = sim.stats.clamp.clamped;
        s["encoded_octets"] = sim.stats.clamp.encoded;
        std::cout << s.dump(2) << "\n";
        if (!b_stats.empty()) {
            std::ofstream out(b_stats, std::ios::binary);
            if (!out) throw Error("cannot write " + b_stats);
            out << s.dump(2) << "\n";
        }
    });

    // ---- bgp ---------------------------------------------------------------
    auto* g = app.add_subcommand("bgp", "Propagate BGP routes and dump routing tables");
    std::string g_topo, g_out = "routes.csv";
    uint64_t g_order_seed = 0;
    g->add_option("--topology", g_topo, "Topology JSON")->required();
    g->add_option("--out", g_out, "Routing-table CSV output");
    g->add_option("--order-seed", g_order_seed, "Processing-order shuffle seed (0 = sorted)");
    g->callback([&] {
        Topology topo = load_topology(g_topo);
        BgpTables tables = propagate(topo, g_order_seed);
        write_routes_csv(g_out, tables, topo.seed);
        size_t routes = 0;
        for (auto& [as, tbl] : tables) routes += tbl.size();
        std::cout << "wrote " << g_out << " (" << routes << " routes)\n";
    });

    // ---- traffic -------------------------------------------------------------
    auto* tr = app.add_subcommand("traffic", "Synthesize the inter-domain traffic matrix");
    std::string tr_topo, tr_out = "traffic.csv", tr_profiles_in, tr_profiles_out, tr_agg;
    uint64_t tr_seed = 42;
    std::vector<AsId> tr_popular;
    double tr_http = kDefaultHttpBytesPerYear, tr_total = kDefaultInternetBytesPerYear;
    tr->add_option("--topology", tr_topo, "Topology JSON")->required();
    tr->add_option("--seed", tr_seed, "Popularity shuffle seed");
    tr->add_option("--out", tr_out, "Traffic matrix CSV output (src,dst,bytes_per_year)");
    tr->add_option("--profiles", tr_profiles_in,
                   "AS profile CSV input (as_id,size,flags,rank); default derives from topology");
    tr->add_option("--profiles-out", tr_profiles_out, "Write the effective profiles CSV here");
    tr->add_option("--popular", tr_popular, "Popular-AS list (heaviest Zipf ranks, in order)");
    tr->add_option("--http-bytes-per-year", tr_http, "HTTP class total, bytes/year");
    tr->add_option("--internet-bytes-per-year", tr_total,
                   "Total internet traffic, bytes/year (video share base)");
    tr->add_option("--aggregate-to-core", tr_agg, "Also write the core-folded matrix CSV here");
    tr->callback([&] {
        Topology topo = load_topology(tr_topo);
        std::map<AsId, AsProfile> profiles;
        if (!tr_profiles_in.empty()) {
            for (auto& row : load_csv_rows(tr_profiles_in)) {
                if (row.size() > 0 && row[0] == "as_id") continue;  // header
                if (row.size() != 4) throw Error("profiles csv: expected as_id,size,flags,rank");
                AsProfile p;
                p.as_id = static_cast<AsId>(parse_int(row[0]));
                p.size = parse_double(row[1]);
                for (std::string_view flag : split(row[2], '|')) {
                    std::string fl{trim(flag)};
                    if (fl == "no_users") p.no_users = true;
                    else if (fl == "cdn_no_requests") p.cdn_no_requests = true;
                    else if (!fl.empty()) throw Error("profiles csv: unknown flag " + fl);
                }
                if (!row[3].empty()) p.popularity_rank = static_cast<uint32_t>(parse_int(row[3]));
                profiles[p.as_id] = p;
            }
        } else {
            profiles = profiles_from_topology(topo);
        }
        if (!tr_profiles_out.empty()) {
            std::ofstream out(tr_profiles_out, std::ios::binary);
            if (!out) throw Error("cannot write " + tr_profiles_out);
            out << "# seed=" << tr_seed << "\n";
            out << "as_id,size,flags,rank\n";
            for (auto& [id, p] : profiles) {
                std::string flags;
                if (p.no_users) flags = "no_users";
                if (p.cdn_no_requests) flags += (flags.empty() ? "" : "|") +
                                                std::string("cdn_no_requests");
                out << id << "," << fmt_double(p.size) << "," << flags << ",";
                if (p.popularity_rank) out << *p.popularity_rank;
                out << "\n";
            }
        }
        TrafficMatrix m = build_traffic(profiles, tr_seed, tr_popular, tr_http, tr_total);
        write_traffic_csv(tr_out, m, tr_seed);
        std::cout << "wrote " << tr_out << " (" << m.size() << " pairs, total "
                  << fmt_double(matrix_total(m)) << " bytes/year)\n";
        if (!tr_agg.empty()) {
            std::vector<RelEdge> edges;
            for (const AsLink& l : topo.links) edges.push_back({l.a, l.b, l.rel});
            std::map<AsId, std::vector<AsId>> cones = customer_cones(edges);
            std::map<AsId, std::vector<AsId>> core_cones;
            for (auto& [id, node] : topo.ases)
                if (node.core) core_cones[id] = cones.count(id) ? cones[id] : std::vector<AsId>{};
            if (core_cones.empty()) throw Error("--aggregate-to-core: topology has no core ASes");
            TrafficMatrix folded = aggregate_to_core(m, core_cones);
            write_traffic_csv(tr_agg, folded, tr_seed);
            std::cout << "wrote " << tr_agg << " (" << folded.size() << " core pairs)\n";
        }
    });

    // ---- eval / pipeline -------------------------------------------------------
    ExperimentConfig ecfg;
    DissemFlags e_dissem;
    std::string e_provider = "diurnal", e_topology_json;
    auto add_pipeline_flags = [&](CLI::App* cmd) {
        cmd->add_option("--seed", ecfg.seed, "Run seed");
        cmd->add_option("-n,--ases", ecfg.n_ases, "Synthetic AS count");
        cmd->add_option("--topology", e_topology_json, "Use this topology JSON instead of synthesizing");
        cmd->add_option("--provider", e_provider, "CIE provider: annual|diurnal|csv");
        cmd->add_option("--cie-csv", ecfg.cie_csv, "CIE CSV input for --provider csv");
        cmd->add_option("--amplitude", ecfg.diurnal_amplitude, "Diurnal amplitude");
        cmd->add_option("--noise", ecfg.diurnal_noise, "Diurnal noise level");
        cmd->add_option("--rounds", ecfg.rounds, "Rounds to run (0 = until stable)");
        cmd->add_option("--max-rounds", ecfg.max_rounds, "Round cap when running until stable");
        cmd->add_option("--k-paths", ecfg.k_paths, "Alternatives per pair for mean metrics");
        cmd->add_option("--http-bytes-per-year", ecfg.http_bytes_per_year, "HTTP class total");
        cmd->add_option("--internet-bytes-per-year", ecfg.internet_bytes_per_year,
                        "Total internet traffic (video share base)");
        cmd->add_option("--popular", ecfg.popular_set, "Popular-AS list for Zipf head ranks");
        cmd->add_option("--out-dir", ecfg.out_dir, "Output directory");
        cmd->add_flag("--transcript", ecfg.write_transcript, "Write the beacon transcript CSV");
        cmd->add_option("--attach-m", ecfg.synth.attach_m, "Preferential-attachment links per new AS");
        cmd->add_option("--peer-fraction", ecfg.synth.peer_fraction, "Peering link fraction");
        cmd->add_option("--core-fraction", ecfg.synth.core_fraction, "Fraction of ASes labeled core");
        cmd->add_option("--pue", ecfg.synth.pue, "Power usage effectiveness");
        e_dissem.attach(cmd);
    };
    auto run_full = [&](bool announce) {
        if (e_provider == "annual") ecfg.provider = ExperimentConfig::Provider::annual;
        else if (e_provider == "diurnal") ecfg.provider = ExperimentConfig::Provider::diurnal;
        else if (e_provider == "csv") ecfg.provider = ExperimentConfig::Provider::csv;
        else throw Error("unknown provider '" + e_provider + "'");
        ecfg.topology_json = e_topology_json;
        ecfg.dissem = e_dissem.to_config();
        PipelineOutput out = run_pipeline(ecfg);
        if (announce) std::cout << out.summary.dump(2) << "\n";
    };
    auto* e = app.add_subcommand("eval", "Run all stages and emit pair metrics and savings");
    add_pipeline_flags(e);
    e->callback([&] { run_full(false); });
    auto* p = app.add_subcommand("pipeline", "Run all stages and print the summary JSON");
    add_pipeline_flags(p);
    p->callback([&] { run_full(true); });

    // ---- report ------------------------------------------------------------
    auto* r = app.add_subcommand("report", "Rebuild CDF files and summary from metric CSVs");
    std::string r_pairs, r_savings, r_out_dir = "out";
    uint64_t r_seed = 42;
    r->add_option("--pairs", r_pairs, "pair_metrics.csv from eval")->required();
    r->add_option("--savings", r_savings, "savings.csv from eval");
    r->add_option("--out-dir", r_out_dir, "Output directory");
    r->add_option("--seed", r_seed, "Seed recorded in output headers");
    r->callback([&] {
        fs::create_directories(r_out_dir);
        auto rows = load_csv_rows(r_pairs);
        std::vector<double> abs_diff, rel_ratio, lat_ratio, reduction;
        size_t lat_le_1 = 0;
        for (auto& row : rows) {
            if (row.size() < 11 || row[0] == "src") continue;
            abs_diff.push_back(parse_double(row[7]));
            rel_ratio.push_back(parse_double(row[8]));
            double dc = parse_double(row[9]), db = parse_double(row[10]);
            if (db > 0.0) {
                double lr = dc / db;
                lat_ratio.push_back(lr);
                if (lr <= 1.0) ++lat_le_1;
            }
        }
        if (!r_savings.empty()) {
            for (auto& row : load_csv_rows(r_savings)) {
                if (row.size() != 4 || row[0] == "as") continue;
                reduction.push_back(parse_double(row[3]));
            }
        }
        auto file = [&](const char* n) { return (fs::path(r_out_dir) / n).string(); };
        write_cdf_csv(file("cdf_abs_diff_g_per_gbit.csv"), "abs_diff_g_per_gbit", abs_diff, r_seed);
        write_cdf_csv(file("cdf_relative_cidt_ratio.csv"), "relative_cidt_ratio", rel_ratio, r_seed);
        write_cdf_csv(file("cdf_latency_ratio.csv"), "latency_ratio", lat_ratio, r_seed);
        if (!reduction.empty())
            write_cdf_csv(file("cdf_footprint_reduction.csv"), "relative_reduction", reduction, r_seed);
        nlohmann::json s;
        s["seed"] = r_seed;
        s["pairs_compared"] = abs_diff.size();
        if (!abs_diff.empty()) s["abs_diff_g_per_gbit"] = percentile_block(abs_diff);
        if (!rel_ratio.empty()) s["relative_cidt_ratio"] = percentile_block(rel_ratio);
        if (!lat_ratio.empty()) {
            s["latency_ratio"] = percentile_block(lat_ratio);
            s["latency_ratio_le_1_fraction"] =
                static_cast<double>(lat_le_1) / static_cast<double>(lat_ratio.size());
        }
        s["latency_underestimation_factor_note"] = 1.5;
        if (!reduction.empty()) s["footprint_relative_reduction"] = percentile_block(reduction);
        std::ofstream o(file("summary.json"), std::ios::binary);
        if (!o) throw Error("cannot write summary.json");
        o << s.dump(2) << "\n";
        std::cout << s.dump(2) << "\n";
    });

    // ---- tables ------------------------------------------------------------
    auto* tb = app.add_subcommand("tables", "Print the embedded energy/CIE constant tables as JSON");
    std::string tb_out;
    tb->add_option("--out", tb_out, "Write to this file instead of stdout");
    tb->callback([&] {
        if (tb_out.empty()) {
            std::cout << tables_json().dump(2) << "\n";
        } else {
            std::ofstream o(tb_out, std::ios::binary);
            if (!o) throw Error("cannot write " + tb_out);
            o << tables_json().dump(2) << "\n";
        }
    });

    try {
        CLI11_PARSE(app, argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
