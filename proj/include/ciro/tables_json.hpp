#pragma once

// Machine-readable dump of the embedded constant tables, for audit.

#include <json.hpp>

#include "ciro/model.hpp"

namespace ciro {

inline nlohmann::json tables_json() {
    nlohmann::json j;
    j["schema"] = 1;
    auto& dev = j["typical_energy_intensity_j_per_gbit"];
    for (int i = 0; i < kDeviceKindCount; ++i) {
        auto k = static_cast<DeviceKind>(i);
        dev[device_kind_name(k)] = typical_energy_intensity_j_per_gbit(k);
    }
    auto& cie = j["resource_cie_g_per_kwh"];
    for (int i = 0; i < kResourceCount; ++i) {
        auto r = static_cast<Resource>(i);
        cie[resource_name(r)] = resource_cie_g_per_kwh(r);
    }
    return j;
}

}  // namespace ciro
