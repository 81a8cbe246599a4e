#pragma once

// Energy and carbon cost model for network devices and intra-domain paths.
//
// Unit conventions, used throughout the library:
//   EIDT  kWh/bit   (energy intensity of data transmission)
//   CIDT  g/bit     (carbon intensity of data transmission; CO2-equivalent)
//   CIE   g/kWh     (carbon intensity of electricity)
//   power kW, capacity bit/s, distance km.
// Externally reported CIDT values use mg/Gbit (1 g/bit = 1e12 mg/Gbit).

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ciro/geo.hpp"
#include "ciro/util.hpp"

namespace ciro {

inline constexpr double kSecondsPerHour = 3600.0;
// J/Gbit -> kWh/bit: divide by 3.6e6 J/kWh and 1e9 bit/Gbit.
inline constexpr double kJoulePerGbitToKwhPerBit = 1.0 / 3.6e15;
inline constexpr double kGPerBitToMgPerGbit = 1e12;

enum class DeviceKind : uint8_t {
    core_router,
    wdm_switch,
    transponder,
    muxponder,
    amplifier,
    regenerator,
};

inline constexpr int kDeviceKindCount = 6;

inline const char* device_kind_name(DeviceKind k) {
    switch (k) {
        case DeviceKind::core_router: return "core_router";
        case DeviceKind::wdm_switch: return "wdm_switch";
        case DeviceKind::transponder: return "transponder";
        case DeviceKind::muxponder: return "muxponder";
        case DeviceKind::amplifier: return "amplifier";
        case DeviceKind::regenerator: return "regenerator";
    }
    throw Error("bad device kind");
}

inline DeviceKind device_kind_from_name(std::string_view s) {
    for (int i = 0; i < kDeviceKindCount; ++i) {
        auto k = static_cast<DeviceKind>(i);
        if (s == device_kind_name(k)) return k;
    }
    throw Error("unknown device kind: " + std::string(s));
}

// Typical per-bit energy use of backbone device classes, J/Gbit.
inline double typical_energy_intensity_j_per_gbit(DeviceKind k) {
    switch (k) {
        case DeviceKind::core_router: return 10.0;
        case DeviceKind::wdm_switch: return 0.05;
        case DeviceKind::transponder: return 1.5;
        case DeviceKind::muxponder: return 1.5;
        case DeviceKind::amplifier: return 0.03;
        case DeviceKind::regenerator: return 3.0;
    }
    throw Error("bad device kind");
}

inline double typical_energy_intensity_kwh_per_bit(DeviceKind k) {
    return typical_energy_intensity_j_per_gbit(k) * kJoulePerGbitToKwhPerBit;
}

// Electricity generation resources and their carbon intensity, g/kWh.
enum class Resource : uint8_t { coal, natural_gas, biomass, solar, geothermal, nuclear, wind, hydro };

inline constexpr int kResourceCount = 8;

inline const char* resource_name(Resource r) {
    switch (r) {
        case Resource::coal: return "coal";
        case Resource::natural_gas: return "natural_gas";
        case Resource::biomass: return "biomass";
        case Resource::solar: return "solar";
        case Resource::geothermal: return "geothermal";
        case Resource::nuclear: return "nuclear";
        case Resource::wind: return "wind";
        case Resource::hydro: return "hydro";
    }
    throw Error("bad resource");
}

inline Resource resource_from_name(std::string_view s) {
    for (int i = 0; i < kResourceCount; ++i) {
        auto r = static_cast<Resource>(i);
        if (s == resource_name(r)) return r;
    }
    throw Error("unknown resource: " + std::string(s));
}

inline double resource_cie_g_per_kwh(Resource r) {
    switch (r) {
        case Resource::coal: return 1001.0;
        case Resource::natural_gas: return 469.0;
        case Resource::biomass: return 230.0;
        case Resource::solar: return 46.0;
        case Resource::geothermal: return 45.0;
        case Resource::nuclear: return 16.0;
        case Resource::wind: return 12.0;
        case Resource::hydro: return 4.0;
    }
    throw Error("bad resource");
}

// Generation mix of a grid region: fractional shares per resource.
struct EnergyMix {
    std::array<double, kResourceCount> shares{};  // indexed by Resource

    double& operator[](Resource r) { return shares[static_cast<size_t>(r)]; }
    double operator[](Resource r) const { return shares[static_cast<size_t>(r)]; }
};

// Mix-weighted mean carbon intensity of electricity, g/kWh.
inline double cie_from_mix(const EnergyMix& mix) {
    double sum = 0.0, cie = 0.0;
    bool any = false;
    for (int i = 0; i < kResourceCount; ++i) {
        double s = mix.shares[static_cast<size_t>(i)];
        if (s < 0.0 || s > 1.0) throw Error("energy mix share out of [0,1]");
        if (s > 0.0) any = true;
        sum += s;
        cie += s * resource_cie_g_per_kwh(static_cast<Resource>(i));
    }
    if (!any) throw Error("energy mix has no nonzero share");
    if (sum < 1.0 - 1e-9 || sum > 1.0 + 1e-9) throw Error("energy mix shares must sum to 1");
    return cie;
}

// Measured electrical spec of a device. When known=false the model falls
// back to the typical per-kind energy intensity.
struct DeviceSpec {
    bool known = false;
    double p_max_kw = 0.0;
    double p_idle_kw = 0.0;
    double c_max_bps = 0.0;
};

// Marginal energy per additional bit, kWh/bit.
inline double marginal_eidt(double p_max_kw, double p_idle_kw, double c_max_bps) {
    if (c_max_bps <= 0.0) throw Error("marginal_eidt: capacity must be positive");
    if (p_idle_kw < 0.0 || p_max_kw < p_idle_kw) throw Error("marginal_eidt: need p_max >= p_idle >= 0");
    return (1.0 / kSecondsPerHour) * (p_max_kw - p_idle_kw) / c_max_bps;
}

struct Device {
    DeviceKind kind = DeviceKind::core_router;
    DeviceSpec spec;
    GeoCoord location;
    double pue = 2.0;  // facility power usage effectiveness (eta)
    // Idle standby devices amortized onto this device's traffic.
    std::vector<Device> redundants;
};

// Location-resolved carbon intensity of electricity, g/kWh.
using CieLookup = std::function<double(const GeoCoord&)>;

// Carbon cost of pushing one extra bit through the device, g/bit.
inline double device_marginal_cidt(const Device& d, const CieLookup& cie) {
    double eidt = d.spec.known
                      ? marginal_eidt(d.spec.p_max_kw, d.spec.p_idle_kw, d.spec.c_max_bps)
                      : typical_energy_intensity_kwh_per_bit(d.kind);
    return d.pue * eidt * cie(d.location);
}

// Idle-power share amortized per bit at full utilization, plus the standby
// cost of redundant devices, g/bit. Redundants are normalized by the primary
// device's capacity: they serve no traffic of their own. A redundant without
// a known spec duplicates the primary's own term (identical co-located unit).
inline double device_amortized_cidt(const Device& d, const CieLookup& cie) {
    double total = 0.0;
    if (d.spec.known) {
        if (d.spec.c_max_bps <= 0.0) throw Error("device_amortized_cidt: capacity must be positive");
        total += d.pue * (d.spec.p_idle_kw / d.spec.c_max_bps / kSecondsPerHour) * cie(d.location);
    }
    for (const Device& r : d.redundants) {
        if (r.spec.known) {
            if (!d.spec.known)
                throw Error("device_amortized_cidt: known-spec redundant needs known primary capacity");
            total += r.pue * (r.spec.p_idle_kw / d.spec.c_max_bps / kSecondsPerHour) * cie(r.location);
        } else if (d.spec.known) {
            total += r.pue * (d.spec.p_idle_kw / d.spec.c_max_bps / kSecondsPerHour) * cie(r.location);
        } else {
            total += r.pue * typical_energy_intensity_kwh_per_bit(r.kind) * cie(r.location);
        }
    }
    return total;
}

inline double device_cidt(const Device& d, const CieLookup& cie) {
    return device_marginal_cidt(d, cie) + device_amortized_cidt(d, cie);
}

// One intra-domain forwarding path between two border interfaces.
struct IntraDomainPath {
    std::vector<Device> devices;
    double weight = 1.0;  // traffic share when several paths carry the flow
};

inline double path_cidt(const IntraDomainPath& p, const CieLookup& cie) {
    double sum = 0.0;
    for (const Device& d : p.devices) sum += device_cidt(d, cie);
    return sum;
}

// Weighted mean CIDT over the intra-domain paths serving one interface pair.
inline double hop_cidt(const std::vector<IntraDomainPath>& paths, const CieLookup& cie) {
    if (paths.empty()) throw Error("hop_cidt: no paths");
    double wsum = 0.0, acc = 0.0;
    for (const IntraDomainPath& p : paths) {
        if (p.weight <= 0.0) throw Error("hop_cidt: path weight must be positive");
        wsum += p.weight;
        acc += p.weight * path_cidt(p, cie);
    }
    return acc / wsum;
}

}  // namespace ciro
