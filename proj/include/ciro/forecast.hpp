#pragma once

// Per-AS forecast database: 24-hour CIDT vectors for every directed pair of
// border interfaces, refreshed by two periodic tasks. T_CIE re-fetches
// carbon-intensity-of-electricity forecasts and recomputes everything;
// T_path recomputes only pairs whose intra-domain path set changed, reusing
// the cached CIE vectors.

#include <array>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <string>

#include "ciro/model.hpp"
#include "ciro/topology.hpp"
#include "ciro/util.hpp"

namespace ciro {

using Hours24 = std::array<double, 24>;

// Source of hourly CIE forecasts (g/kWh), addressed by an opaque location
// key so vectors can be cached and reused across devices in the same region.
struct CieProvider {
    virtual ~CieProvider() = default;
    virtual std::string location_key(const GeoCoord& loc) const = 0;
    // 24 hourly values starting at base_hour (hours since epoch). Throws on
    // unavailable data; a throwing fetch aborts the whole tick.
    virtual Hours24 fetch(const std::string& key, uint64_t base_hour) const = 0;
};

struct ForecastDatabase {
    uint64_t base_hour = 0;  // hours since epoch; slot i covers base_hour+i
    std::map<std::pair<IntfId, IntfId>, Hours24> records;     // g/bit
    std::map<std::string, Hours24> cie_cache;                 // g/kWh, per location key
    std::map<std::pair<IntfId, IntfId>, uint64_t> path_fps;   // path-set fingerprints
};

inline const Hours24& query_forecast(const ForecastDatabase& db, IntfId ingress, IntfId egress) {
    auto it = db.records.find({ingress, egress});
    if (it == db.records.end())
        throw NotFound("no forecast record for interface pair " + std::to_string(ingress) + "->" +
                       std::to_string(egress));
    return it->second;
}

namespace detail {

inline Hours24 compute_pair_vector(AsNode& as, IntfId ing, IntfId eg,
                                   const std::map<std::string, Hours24>& cie_cache,
                                   const std::function<std::string(const GeoCoord&)>& key_of) {
    // Single stored path per pair: the weighted hop mean reduces to the
    // path value itself.
    const IntraDomainPath& path = as.device_path(ing, eg);
    Hours24 out{};
    for (int h = 0; h < 24; ++h) {
        CieLookup cie = [&](const GeoCoord& loc) -> double {
            auto it = cie_cache.find(key_of(loc));
            if (it == cie_cache.end()) throw NotFound("CIE vector missing for location key");
            return it->second[static_cast<size_t>(h)];
        };
        out[static_cast<size_t>(h)] = path_cidt(path, cie);
    }
    return out;
}

}  // namespace detail

// Full refresh at an hour boundary: fetch CIE per distinct location key,
// recompute all directed interface-pair records. The database is replaced
// atomically; any fetch failure leaves it untouched.
inline void run_tcie_tick(AsNode& as, const CieProvider& provider, uint64_t now_seconds,
                          ForecastDatabase& db) {
    uint64_t base_hour = hour_of(now_seconds);
    auto key_of = [&](const GeoCoord& loc) { return provider.location_key(loc); };

    // distinct location keys over all devices of all pairs
    std::map<std::string, Hours24> cie;
    std::map<std::pair<IntfId, IntfId>, uint64_t> fps;
    for (auto& [i, fi] : as.interfaces) {
        for (auto& [j, fj] : as.interfaces) {
            if (i == j) continue;
            const IntraDomainPath& p = as.device_path(i, j);
            fps[{i, j}] = as.path_fingerprint(i, j);
            for (const Device& d : p.devices) {
                cie.emplace(key_of(d.location), Hours24{});
                for (const Device& r : d.redundants) cie.emplace(key_of(r.location), Hours24{});
            }
        }
    }
    for (auto& [key, vec] : cie) vec = provider.fetch(key, base_hour);

    std::map<std::pair<IntfId, IntfId>, Hours24> records;
    for (auto& [pair, fp] : fps)
        records[pair] = detail::compute_pair_vector(as, pair.first, pair.second, cie, key_of);

    db.base_hour = base_hour;
    db.records = std::move(records);
    db.cie_cache = std::move(cie);
    db.path_fps = std::move(fps);
}

// Path-change refresh: recomputes only pairs whose path fingerprint moved
// (and newly appeared pairs), against the CIE vectors cached at the last
// T_CIE tick. Vanished pairs are dropped. base_hour is unchanged.
inline void run_tpath_tick(AsNode& as, const CieProvider& provider, ForecastDatabase& db) {
    auto key_of = [&](const GeoCoord& loc) { return provider.location_key(loc); };
    std::map<std::pair<IntfId, IntfId>, Hours24> records;
    std::map<std::pair<IntfId, IntfId>, uint64_t> fps;
    for (auto& [i, fi] : as.interfaces) {
        for (auto& [j, fj] : as.interfaces) {
            if (i == j) continue;
            uint64_t fp = as.path_fingerprint(i, j);
            fps[{i, j}] = fp;
            auto old = db.path_fps.find({i, j});
            if (old != db.path_fps.end() && old->second == fp) {
                records[{i, j}] = db.records.at({i, j});
            } else {
                records[{i, j}] = detail::compute_pair_vector(as, i, j, db.cie_cache, key_of);
            }
        }
    }
    db.records = std::move(records);
    db.path_fps = std::move(fps);
}

// --- providers ---------------------------------------------------------------

// Flat annual-average CIE per zone of a topology.
struct StaticAnnualProvider : CieProvider {
    const Topology* topo;

    explicit StaticAnnualProvider(const Topology& t) : topo(&t) {}

    std::string location_key(const GeoCoord& loc) const override {
        return topo->zone_of_point(loc).name;
    }
    Hours24 fetch(const std::string& key, uint64_t) const override {
        auto it = topo->zones.find(key);
        if (it == topo->zones.end()) throw NotFound("unknown zone: " + key);
        Hours24 v;
        v.fill(it->second.cie_annual);
        return v;
    }
};

// Seeded day-night swing around the zone's annual mean plus small noise;
// values are a pure function of (zone, absolute hour).
struct SyntheticDiurnalProvider : CieProvider {
    const Topology* topo;
    double amplitude;
    double noise_frac;
    uint64_t seed;

    SyntheticDiurnalProvider(const Topology& t, double amp = 0.3, double noise = 0.05, uint64_t sd = 1)
        : topo(&t), amplitude(amp), noise_frac(noise), seed(sd) {}

    std::string location_key(const GeoCoord& loc) const override {
        return topo->zone_of_point(loc).name;
    }
    Hours24 fetch(const std::string& key, uint64_t base_hour) const override {
        auto it = topo->zones.find(key);
        if (it == topo->zones.end()) throw NotFound("unknown zone: " + key);
        double annual = it->second.cie_annual;
        uint64_t kh = fnv1a64(std::span(reinterpret_cast<const uint8_t*>(key.data()), key.size()));
        Hours24 v;
        for (int h = 0; h < 24; ++h) {
            uint64_t abs_hour = base_hour + static_cast<uint64_t>(h);
            double phase = static_cast<double>(kh % 24);
            double swing = amplitude * std::sin(2.0 * 3.141592653589793 *
                                                (static_cast<double>(abs_hour % 24) + phase) / 24.0);
            uint64_t z = mix_seed(seed ^ kh, abs_hour);
            double u = (static_cast<double>(z >> 11) * 0x1.0p-53) * 2.0 - 1.0;
            double val = annual * (1.0 + swing) + annual * noise_frac * u;
            v[static_cast<size_t>(h)] = std::max(val, 0.5);
        }
        return v;
    }
};

// CIE vectors from a CSV file: location_id, base_hour_iso8601, v0..v23.
struct CsvCieProvider : CieProvider {
    std::function<std::string(const GeoCoord&)> resolver;
    std::map<std::pair<std::string, uint64_t>, Hours24> table;  // (key, base_hour)

    CsvCieProvider(std::istream& in, std::function<std::string(const GeoCoord&)> res)
        : resolver(std::move(res)) {
        std::string line;
        size_t ln = 0;
        while (std::getline(in, line)) {
            ++ln;
            std::string_view sv = trim(line);
            if (sv.empty() || sv.front() == '#') continue;
            auto f = split(sv, ',');
            if (f.size() != 26) throw Error("CIE CSV line " + std::to_string(ln) + ": want 26 columns");
            if (trim(f[0]) == "location_id") continue;  // header row
            Hours24 v;
            for (int h = 0; h < 24; ++h) v[static_cast<size_t>(h)] = parse_double(trim(f[2 + h]));
            uint64_t bh = hour_of(parse_iso8601_utc(trim(f[1])));
            table[{std::string(trim(f[0])), bh}] = v;
        }
    }

    std::string location_key(const GeoCoord& loc) const override { return resolver(loc); }
    Hours24 fetch(const std::string& key, uint64_t base_hour) const override {
        auto it = table.find({key, base_hour});
        if (it == table.end())
            throw NotFound("CIE CSV has no record for " + key + " at hour " + std::to_string(base_hour));
        return it->second;
    }
};

// --- CSV dump / load ---------------------------------------------------------

// Layout: one row per record, 26 columns: ingress, egress, h0..h23 (g/bit).
inline void dump_forecast_csv(const ForecastDatabase& db, std::ostream& out) {
    out << "# base_hour=" << iso8601_utc(db.base_hour * 3600) << "\n";
    out << "ingress,egress";
    for (int h = 0; h < 24; ++h) out << ",h" << h;
    out << "\n";
    for (auto& [pair, v] : db.records) {
        out << pair.first << "," << pair.second;
        for (int h = 0; h < 24; ++h) out << "," << fmt_double(v[static_cast<size_t>(h)]);
        out << "\n";
    }
}

inline ForecastDatabase load_forecast_csv(std::istream& in) {
    ForecastDatabase db;
    std::string line;
    size_t ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        std::string_view sv = trim(line);
        if (sv.empty()) continue;
        if (sv.front() == '#') {
            auto pos = sv.find("base_hour=");
            if (pos != std::string_view::npos)
                db.base_hour = hour_of(parse_iso8601_utc(trim(sv.substr(pos + 10))));
            continue;
        }
        auto f = split(sv, ',');
        if (f.size() != 26) throw Error("forecast CSV line " + std::to_string(ln) + ": want 26 columns");
        if (trim(f[0]) == "ingress") continue;  // header row
        auto ing = static_cast<IntfId>(parse_int(trim(f[0])));
        auto eg = static_cast<IntfId>(parse_int(trim(f[1])));
        Hours24 v;
        for (int h = 0; h < 24; ++h) v[static_cast<size_t>(h)] = parse_double(trim(f[2 + h]));
        db.records[{ing, eg}] = v;
    }
    return db;
}

inline void dump_cie_csv(const Topology& topo, const CieProvider& provider, uint64_t base_hour,
                         std::ostream& out) {
    out << "location_id,base_hour_iso8601";
    for (int h = 0; h < 24; ++h) out << ",v" << h;
    out << "\n";
    for (auto& [name, zone] : topo.zones) {
        Hours24 v = provider.fetch(name, base_hour);
        out << name << "," << iso8601_utc(base_hour * 3600);
        for (int h = 0; h < 24; ++h) out << "," << fmt_double(v[static_cast<size_t>(h)]);
        out << "\n";
    }
}

}  // namespace ciro
