#pragma once

// Topology ingestion from text formats and the canonical JSON interchange
// form. Ingested inputs: AS-relationship lines ("a|b|rel", rel -1 = a
// provides b, 0 = peers), a per-interface geo CSV, router/router-link CSVs,
// and an energy-mix CSV per grid zone. Interface ids for ingested graphs
// are assigned per AS in ascending-neighbor order, which is the convention
// the geo CSV keys against.

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ciro/topology.hpp"
#include "ciro/util.hpp"

namespace ciro {

inline std::vector<RelEdge> load_as_rel(std::istream& in) {
    std::vector<RelEdge> edges;
    std::set<std::pair<AsId, AsId>> seen;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t{trim(line)};
        if (t.empty() || t[0] == '#') continue;
        std::vector<std::string_view> parts = split(t, '|');
        auto fail = [&](const std::string& why) {
            throw Error("as-rel line " + std::to_string(lineno) + ": " + why + ": " + t);
        };
        if (parts.size() != 3) fail("expected a|b|rel");
        RelEdge e;
        long long a, b, r;
        try {
            a = parse_int(trim(parts[0]));
            b = parse_int(trim(parts[1]));
            r = parse_int(trim(parts[2]));
        } catch (const Error&) {
            fail("non-numeric field");
            throw;  // unreachable
        }
        if (a <= 0 || b <= 0) fail("AS numbers must be positive");
        if (a == b) fail("self-loop");
        if (r != -1 && r != 0) fail("relationship must be -1 (p2c) or 0 (p2p)");
        e.a = static_cast<AsId>(a);
        e.b = static_cast<AsId>(b);
        e.rel = (r == -1) ? Rel::p2c : Rel::p2p;
        auto key = std::minmax(e.a, e.b);
        if (!seen.insert({key.first, key.second}).second) fail("duplicate AS pair");
        edges.push_back(e);
    }
    return edges;
}

inline void dump_as_rel(std::ostream& out, const std::vector<RelEdge>& edges) {
    for (const RelEdge& e : edges)
        out << e.a << '|' << e.b << '|' << (e.rel == Rel::p2c ? "-1" : "0") << '\n';
}

namespace detail {

inline std::vector<std::vector<std::string>> read_csv(std::istream& in,
                                                      const std::string& first_header_field) {
    std::vector<std::vector<std::string>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        std::string t{trim(line)};
        if (t.empty() || t[0] == '#') continue;
        std::vector<std::string> fields;
        for (std::string_view f : split(t, ',')) fields.emplace_back(trim(f));
        if (first && !fields.empty() && fields[0] == first_header_field) {
            first = false;
            continue;  // header row
        }
        first = false;
        rows.push_back(std::move(fields));
    }
    return rows;
}

}  // namespace detail

// geo CSV: as_id, interface_id, lat, lon
inline std::map<std::pair<AsId, IntfId>, GeoCoord> load_geo_csv(std::istream& in) {
    std::map<std::pair<AsId, IntfId>, GeoCoord> out;
    for (auto& row : detail::read_csv(in, "as_id")) {
        if (row.size() != 4) throw Error("geo csv: expected as_id,interface_id,lat,lon");
        AsId as = static_cast<AsId>(parse_int(row[0]));
        auto intf = static_cast<IntfId>(parse_int(row[1]));
        GeoCoord g{parse_double(row[2]), parse_double(row[3])};
        if (!out.insert({{as, intf}, g}).second)
            throw Error("geo csv: duplicate (as, interface) " + row[0] + "," + row[1]);
    }
    return out;
}

struct RouterRow {
    RouterId id = 0;
    AsId as = 0;
    GeoCoord loc;
};

// router CSV: router_id, as_id, lat, lon
inline std::vector<RouterRow> load_router_csv(std::istream& in) {
    std::vector<RouterRow> out;
    std::set<RouterId> seen;
    for (auto& row : detail::read_csv(in, "router_id")) {
        if (row.size() != 4) throw Error("router csv: expected router_id,as_id,lat,lon");
        RouterRow r;
        r.id = static_cast<RouterId>(parse_int(row[0]));
        r.as = static_cast<AsId>(parse_int(row[1]));
        r.loc = {parse_double(row[2]), parse_double(row[3])};
        if (!seen.insert(r.id).second) throw Error("router csv: duplicate router " + row[0]);
        out.push_back(r);
    }
    return out;
}

// router link CSV: router_a, router_b
inline std::vector<std::pair<RouterId, RouterId>> load_router_link_csv(std::istream& in) {
    std::vector<std::pair<RouterId, RouterId>> out;
    for (auto& row : detail::read_csv(in, "router_a")) {
        if (row.size() != 2) throw Error("router link csv: expected router_a,router_b");
        out.push_back({static_cast<RouterId>(parse_int(row[0])),
                       static_cast<RouterId>(parse_int(row[1]))});
    }
    return out;
}

// energy-mix CSV: country, coal, gas, biomass, solar, geothermal, nuclear,
// wind, hydro [, center_lat, center_lon]. Rows without centers get evenly
// spaced equatorial centers (deterministic by row order).
inline std::vector<Zone> load_energy_mix_csv(std::istream& in) {
    std::vector<Zone> zones;
    std::vector<size_t> missing_center;
    for (auto& row : detail::read_csv(in, "country")) {
        if (row.size() != 9 && row.size() != 11)
            throw Error("energy-mix csv: expected 9 or 11 columns, got " +
                        std::to_string(row.size()));
        Zone z;
        z.name = row[0];
        for (int i = 0; i < kResourceCount; ++i) z.mix.shares[i] = parse_double(row[1 + i]);
        z.cie_annual = cie_from_mix(z.mix);
        if (row.size() == 11) {
            z.center = {parse_double(row[9]), parse_double(row[10])};
        } else {
            missing_center.push_back(zones.size());
        }
        zones.push_back(std::move(z));
    }
    for (size_t k = 0; k < missing_center.size(); ++k) {
        double lon = -180.0 + 360.0 * (static_cast<double>(k) + 0.5) /
                                  static_cast<double>(missing_center.size());
        zones[missing_center[k]].center = {0.0, lon};
    }
    return zones;
}

struct IngestInputs {
    std::vector<RelEdge> rel;
    std::map<std::pair<AsId, IntfId>, GeoCoord> geo;
    std::vector<RouterRow> routers;
    std::vector<std::pair<RouterId, RouterId>> router_links;
    std::vector<Zone> zones;
    double pue = 2.0;
};

// Assemble a topology from ingested pieces. Interface ids are assigned per
// AS in ascending-neighbor order; every interface must have a geo row.
inline Topology build_ingested_topology(const IngestInputs& in) {
    Topology topo;
    for (const Zone& z : in.zones) topo.zones[z.name] = z;
    if (topo.zones.empty()) throw Error("ingest: no energy-mix zones");

    std::map<AsId, std::set<AsId>> neighbors;
    for (const RelEdge& e : in.rel) {
        neighbors[e.a].insert(e.b);
        neighbors[e.b].insert(e.a);
    }
    if (neighbors.empty()) throw Error("ingest: empty AS graph");

    std::map<AsId, std::map<AsId, IntfId>> intf_of;  // as -> neighbor -> intf id
    for (auto& [id, nbs] : neighbors) {
        AsNode node;
        node.id = id;
        node.pue = in.pue;
        IntfId next = 1;
        for (AsId nb : nbs) {
            Interface f;
            f.id = next;
            f.neighbor = nb;
            auto git = in.geo.find({id, next});
            if (git == in.geo.end())
                throw Error("ingest: missing geo row for AS " + std::to_string(id) +
                            " interface " + std::to_string(next));
            f.geo = git->second;
            node.interfaces[next] = f;
            intf_of[id][nb] = next;
            ++next;
        }
        double lat = 0.0, lon = 0.0;
        for (auto& [iid, f] : node.interfaces) {
            lat += f.geo.lat_deg;
            lon += f.geo.lon_deg;
        }
        auto cnt = static_cast<double>(node.interfaces.size());
        node.loc = {lat / cnt, lon / cnt};
        topo.ases[id] = std::move(node);
    }

    for (const RelEdge& e : in.rel) {
        AsLink l;
        l.a = e.a;
        l.b = e.b;
        l.rel = e.rel;
        l.intf_a = intf_of[e.a][e.b];
        l.intf_b = intf_of[e.b][e.a];
        l.geo_a = topo.node(e.a).intf(l.intf_a).geo;
        l.geo_b = topo.node(e.b).intf(l.intf_b).geo;
        topo.links.push_back(l);
    }

    for (const RouterRow& r : in.routers) {
        auto it = topo.ases.find(r.as);
        if (it == topo.ases.end())
            throw Error("ingest: router " + std::to_string(r.id) + " names unknown AS " +
                        std::to_string(r.as));
        it->second.intra.routers.push_back({r.id, r.loc});
    }
    std::map<RouterId, AsId> owner;
    for (const RouterRow& r : in.routers) owner[r.id] = r.as;
    for (auto& [id, node] : topo.ases)
        std::sort(node.intra.routers.begin(), node.intra.routers.end(),
                  [](const Router& x, const Router& y) { return x.id < y.id; });
    for (auto& [ra, rb] : in.router_links) {
        auto ita = owner.find(ra), itb = owner.find(rb);
        if (ita == owner.end() || itb == owner.end())
            throw Error("ingest: router link names unknown router");
        if (ita->second != itb->second)
            throw Error("ingest: router link crosses ASes " + std::to_string(ita->second) +
                        " and " + std::to_string(itb->second));
        AsNode& node = topo.node(ita->second);
        double km = great_circle_km(node.intra.router(ra).loc, node.intra.router(rb).loc);
        node.intra.links.push_back({ra, rb, std::max(km, 1e-3)});
    }

    for (auto& [id, node] : topo.ases) {
        node.zone = topo.zone_of_point(node.loc).name;
        map_border_routers(node);
    }
    return topo;
}

// ---------------------------------------------------------------------------
// Canonical JSON interchange (schema versioned).

inline constexpr int kTopologySchema = 1;

inline nlohmann::json topology_to_json(const Topology& topo) {
    nlohmann::json j;
    j["schema"] = kTopologySchema;
    j["seed"] = topo.seed;

    nlohmann::json zones = nlohmann::json::array();
    for (auto& [name, z] : topo.zones) {
        nlohmann::json zj;
        zj["name"] = z.name;
        zj["center"] = {z.center.lat_deg, z.center.lon_deg};
        nlohmann::json mix;
        for (int i = 0; i < kResourceCount; ++i)
            mix[resource_name(static_cast<Resource>(i))] = z.mix.shares[i];
        zj["mix"] = mix;
        zj["cie_annual"] = z.cie_annual;
        zones.push_back(zj);
    }
    j["zones"] = zones;

    nlohmann::json ases = nlohmann::json::array();
    for (auto& [id, node] : topo.ases) {
        nlohmann::json aj;
        aj["id"] = id;
        aj["loc"] = {node.loc.lat_deg, node.loc.lon_deg};
        aj["zone"] = node.zone;
        aj["core"] = node.core;
        aj["pue"] = node.pue;
        nlohmann::json routers = nlohmann::json::array();
        for (const Router& r : node.intra.routers)
            routers.push_back({r.id, r.loc.lat_deg, r.loc.lon_deg});
        aj["routers"] = routers;
        nlohmann::json ilinks = nlohmann::json::array();
        for (const IntraLink& l : node.intra.links) ilinks.push_back({l.a, l.b, l.km});
        aj["intra_links"] = ilinks;
        nlohmann::json intfs = nlohmann::json::array();
        for (auto& [iid, f] : node.interfaces)
            intfs.push_back({f.id, f.neighbor, f.geo.lat_deg, f.geo.lon_deg, f.router});
        aj["interfaces"] = intfs;
        ases.push_back(aj);
    }
    j["ases"] = ases;

    nlohmann::json links = nlohmann::json::array();
    for (const AsLink& l : topo.links)
        links.push_back({l.a, l.b, l.rel == Rel::p2c ? "p2c" : "p2p", l.intf_a, l.intf_b});
    j["links"] = links;
    return j;
}

inline Topology topology_from_json(const nlohmann::json& j) {
    if (!j.contains("schema") || j.at("schema").get<int>() != kTopologySchema)
        throw Error("topology json: unsupported schema");
    Topology topo;
    topo.seed = j.value("seed", uint64_t{0});

    for (const auto& zj : j.at("zones")) {
        Zone z;
        z.name = zj.at("name").get<std::string>();
        z.center = {zj.at("center").at(0).get<double>(), zj.at("center").at(1).get<double>()};
        for (int i = 0; i < kResourceCount; ++i)
            z.mix.shares[i] = zj.at("mix").at(resource_name(static_cast<Resource>(i))).get<double>();
        z.cie_annual = zj.at("cie_annual").get<double>();
        topo.zones[z.name] = z;
    }

    for (const auto& aj : j.at("ases")) {
        AsNode node;
        node.id = aj.at("id").get<AsId>();
        node.loc = {aj.at("loc").at(0).get<double>(), aj.at("loc").at(1).get<double>()};
        node.zone = aj.at("zone").get<std::string>();
        node.core = aj.at("core").get<bool>();
        node.pue = aj.at("pue").get<double>();
        for (const auto& rj : aj.at("routers"))
            node.intra.routers.push_back(
                {rj.at(0).get<RouterId>(), {rj.at(1).get<double>(), rj.at(2).get<double>()}});
        for (const auto& lj : aj.at("intra_links"))
            node.intra.links.push_back(
                {lj.at(0).get<RouterId>(), lj.at(1).get<RouterId>(), lj.at(2).get<double>()});
        for (const auto& fj : aj.at("interfaces")) {
            Interface f;
            f.id = fj.at(0).get<IntfId>();
            f.neighbor = fj.at(1).get<AsId>();
            f.geo = {fj.at(2).get<double>(), fj.at(3).get<double>()};
            f.router = fj.at(4).get<RouterId>();
            node.interfaces[f.id] = f;
        }
        topo.ases[node.id] = std::move(node);
    }

    for (const auto& lj : j.at("links")) {
        AsLink l;
        l.a = lj.at(0).get<AsId>();
        l.b = lj.at(1).get<AsId>();
        std::string rel = lj.at(2).get<std::string>();
        if (rel == "p2c") l.rel = Rel::p2c;
        else if (rel == "p2p") l.rel = Rel::p2p;
        else throw Error("topology json: bad relationship " + rel);
        l.intf_a = lj.at(3).get<IntfId>();
        l.intf_b = lj.at(4).get<IntfId>();
        l.geo_a = topo.node(l.a).intf(l.intf_a).geo;
        l.geo_b = topo.node(l.b).intf(l.intf_b).geo;
        topo.links.push_back(l);
    }
    return topo;
}

}  // namespace ciro
