#pragma once

// Wire codec for carbon-forecast extensions carried in path-dissemination
// messages. All integers big-endian. Message layout:
//
//   magic   u32  0x43495230 ("CIR0")
//   version u8   1
//   timestamp u64  origination time, unix seconds
//   origin  u64  origin AS
//   count   u16  number of AS entries            -> header = 23 octets
//
// per entry:
//   as_id   u64
//   ingress u16   (0 = none)
//   egress  u16
//   kind    u8    0 absent | 1 flat | 2 map
//   kind 1: 48 octets (24 forward-direction hours, 24 backward)
//   kind 2: key_count u16, then per key: intf u16 + 48 octets
//
// CIDT slots are quantized to one octet in mg/Gbit (1 g/bit = 1e12 mg/Gbit),
// rounded half-up, clamped to 255.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ciro/forecast.hpp"
#include "ciro/topology.hpp"
#include "ciro/util.hpp"

namespace ciro {

inline constexpr uint32_t kWireMagic = 0x43495230;  // "CIR0"
inline constexpr uint8_t kWireVersion = 1;
inline constexpr size_t kHeaderOctets = 23;
inline constexpr size_t kVectorOctets = 48;

struct ClampStats {
    uint64_t clamped = 0;
    uint64_t encoded = 0;
};

// g/bit -> quantized mg/Gbit octet, round half-up, clamp to [0,255].
inline uint8_t encode_cidt(double g_per_bit, ClampStats* stats = nullptr) {
    if (!(g_per_bit >= 0.0)) throw Error("encode_cidt: value must be finite and non-negative");
    double mg_per_gbit = g_per_bit * kGPerBitToMgPerGbit;
    double rounded = std::floor(mg_per_gbit + 0.5);
    if (stats) ++stats->encoded;
    if (rounded > 255.0) {
        if (stats) ++stats->clamped;
        return 255;
    }
    return static_cast<uint8_t>(rounded);
}

inline double decode_cidt(uint8_t octet) { return static_cast<double>(octet) * 1e-12; }

// Right-shift by k slots, zero-filling the past; k >= 24 clears the vector.
template <class T, size_t N>
inline std::array<T, N> align_shift(const std::array<T, N>& v, uint64_t k) {
    std::array<T, N> out{};
    if (k >= N) return out;
    for (size_t i = static_cast<size_t>(k); i < N; ++i) out[i] = v[i - k];
    return out;
}

// 24 forward + 24 backward hourly slots.
struct CidtWireVector {
    std::array<uint8_t, kVectorOctets> octets{};

    uint8_t forward(size_t hour) const { return octets[hour]; }
    uint8_t backward(size_t hour) const { return octets[24 + hour]; }

    bool operator==(const CidtWireVector&) const = default;
};

enum class ExtKind : uint8_t { absent = 0, flat = 1, map = 2 };

struct CidtExtension {
    ExtKind kind = ExtKind::absent;
    CidtWireVector flat;
    std::vector<std::pair<IntfId, CidtWireVector>> keyed;  // sorted by interface

    bool operator==(const CidtExtension&) const = default;

    const CidtWireVector* vector_for_key(IntfId key) const {
        if (kind == ExtKind::flat) return &flat;
        if (kind != ExtKind::map) return nullptr;
        for (auto& [k, v] : keyed)
            if (k == key) return &v;
        return nullptr;
    }
};

struct AsEntry {
    AsId as = 0;
    IntfId ingress = 0;  // 0 = none (origination)
    IntfId egress = 0;
    CidtExtension ext;

    bool operator==(const AsEntry&) const = default;
};

struct RoutingMessage {
    uint64_t timestamp = 0;  // unix seconds
    AsId origin = 0;
    std::vector<AsEntry> entries;

    bool operator==(const RoutingMessage&) const = default;
};

// Slot index of "now" within a message's 24-hour window, or nothing when the
// message window has expired (or lies in the future).
inline std::optional<size_t> current_hour_index(uint64_t now_seconds, uint64_t msg_timestamp) {
    uint64_t hn = hour_of(now_seconds), ht = hour_of(msg_timestamp);
    if (hn < ht) return std::nullopt;
    uint64_t k = hn - ht;
    if (k >= 24) return std::nullopt;
    return static_cast<size_t>(k);
}

namespace detail {

inline CidtWireVector encode_pair_vectors(const Hours24& fwd, const Hours24& bwd, uint64_t shift,
                                          ClampStats* stats) {
    CidtWireVector v;
    Hours24 f = align_shift(fwd, shift), b = align_shift(bwd, shift);
    for (size_t i = 0; i < 24; ++i) {
        // zero-filled (expired) slots encode as zero octets, not rounded data
        v.octets[i] = (i < shift || shift >= 24) ? 0 : encode_cidt(f[i], stats);
        v.octets[24 + i] = (i < shift || shift >= 24) ? 0 : encode_cidt(b[i], stats);
    }
    return v;
}

}  // namespace detail

// Flat extension for the [ingress, egress] hop of a message originated at
// msg_timestamp, aligned so slot i covers hour(msg_timestamp)+i. Missing
// forecast records (either direction) yield an absent extension.
inline CidtExtension build_extension(const ForecastDatabase& db, IntfId ingress, IntfId egress,
                                     uint64_t msg_timestamp, uint64_t now_seconds,
                                     ClampStats* stats = nullptr) {
    if (hour_of(now_seconds) < hour_of(msg_timestamp))
        throw Error("build_extension: message timestamp is in the future");
    CidtExtension ext;
    auto fw = db.records.find({ingress, egress});
    auto bw = db.records.find({egress, ingress});
    if (fw == db.records.end() || bw == db.records.end()) return ext;  // absent
    uint64_t k = hour_of(now_seconds) - hour_of(msg_timestamp);
    ext.kind = ExtKind::flat;
    ext.flat = detail::encode_pair_vectors(fw->second, bw->second, k, stats);
    return ext;
}

// Map-form extension: one keyed vector per relevant interface K, covering the
// [K, egress] segment. Keys lacking forecast records are skipped; an empty
// map degrades to an absent extension.
inline CidtExtension build_extension_map(const ForecastDatabase& db, const std::vector<IntfId>& keys,
                                         IntfId egress, uint64_t msg_timestamp, uint64_t now_seconds,
                                         ClampStats* stats = nullptr) {
    if (hour_of(now_seconds) < hour_of(msg_timestamp))
        throw Error("build_extension_map: message timestamp is in the future");
    uint64_t k = hour_of(now_seconds) - hour_of(msg_timestamp);
    CidtExtension ext;
    std::vector<IntfId> sorted = keys;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (IntfId key : sorted) {
        if (key == egress) continue;
        auto fw = db.records.find({key, egress});
        auto bw = db.records.find({egress, key});
        if (fw == db.records.end() || bw == db.records.end()) continue;
        ext.keyed.push_back({key, detail::encode_pair_vectors(fw->second, bw->second, k, stats)});
    }
    if (!ext.keyed.empty()) ext.kind = ExtKind::map;
    return ext;
}

// --- serialization -----------------------------------------------------------

namespace detail {

inline void put16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}
inline void put32(std::vector<uint8_t>& out, uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<uint8_t>(v >> s));
}
inline void put64(std::vector<uint8_t>& out, uint64_t v) {
    for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<uint8_t>(v >> s));
}

struct Reader {
    std::span<const uint8_t> buf;
    size_t pos = 0;

    void need(size_t n) const {
        if (pos + n > buf.size()) throw Error("deserialize: truncated message");
    }
    uint8_t u8() {
        need(1);
        return buf[pos++];
    }
    uint16_t u16() {
        need(2);
        uint16_t v = (uint16_t(buf[pos]) << 8) | buf[pos + 1];
        pos += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = (v << 8) | buf[pos + i];
        pos += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = (v << 8) | buf[pos + i];
        pos += 8;
        return v;
    }
};

}  // namespace detail

inline std::vector<uint8_t> serialize(const RoutingMessage& msg) {
    if (msg.entries.size() > 0xffff) throw Error("serialize: too many entries");
    std::vector<uint8_t> out;
    detail::put32(out, kWireMagic);
    out.push_back(kWireVersion);
    detail::put64(out, msg.timestamp);
    detail::put64(out, msg.origin);
    detail::put16(out, static_cast<uint16_t>(msg.entries.size()));
    for (const AsEntry& e : msg.entries) {
        detail::put64(out, e.as);
        detail::put16(out, e.ingress);
        detail::put16(out, e.egress);
        out.push_back(static_cast<uint8_t>(e.ext.kind));
        if (e.ext.kind == ExtKind::flat) {
            out.insert(out.end(), e.ext.flat.octets.begin(), e.ext.flat.octets.end());
        } else if (e.ext.kind == ExtKind::map) {
            if (e.ext.keyed.empty() || e.ext.keyed.size() > 0xffff)
                throw Error("serialize: bad map extension key count");
            detail::put16(out, static_cast<uint16_t>(e.ext.keyed.size()));
            for (auto& [key, vec] : e.ext.keyed) {
                detail::put16(out, key);
                out.insert(out.end(), vec.octets.begin(), vec.octets.end());
            }
        }
    }
    return out;
}

inline RoutingMessage deserialize(std::span<const uint8_t> buf) {
    detail::Reader r{buf};
    if (r.u32() != kWireMagic) throw Error("deserialize: bad magic");
    uint8_t ver = r.u8();
    if (ver != kWireVersion) throw Error("deserialize: unsupported version " + std::to_string(ver));
    RoutingMessage msg;
    msg.timestamp = r.u64();
    msg.origin = r.u64();
    uint16_t count = r.u16();
    msg.entries.reserve(count);
    for (uint16_t i = 0; i < count; ++i) {
        AsEntry e;
        e.as = r.u64();
        e.ingress = r.u16();
        e.egress = r.u16();
        uint8_t kind = r.u8();
        if (kind > 2) throw Error("deserialize: bad extension kind " + std::to_string(kind));
        e.ext.kind = static_cast<ExtKind>(kind);
        if (e.ext.kind == ExtKind::flat) {
            r.need(kVectorOctets);
            std::copy_n(buf.begin() + r.pos, kVectorOctets, e.ext.flat.octets.begin());
            r.pos += kVectorOctets;
        } else if (e.ext.kind == ExtKind::map) {
            uint16_t kc = r.u16();
            if (kc == 0) throw Error("deserialize: empty map extension");
            for (uint16_t j = 0; j < kc; ++j) {
                IntfId key = r.u16();
                CidtWireVector v;
                r.need(kVectorOctets);
                std::copy_n(buf.begin() + r.pos, kVectorOctets, v.octets.begin());
                r.pos += kVectorOctets;
                e.ext.keyed.push_back({key, v});
            }
        }
        msg.entries.push_back(std::move(e));
    }
    if (r.pos != buf.size()) throw Error("deserialize: trailing bytes");
    return msg;
}

inline uint64_t message_hash(const RoutingMessage& msg) {
    std::vector<uint8_t> bytes = serialize(msg);
    return fnv1a64(bytes);
}

// Sum of decoded current-hour forward slots over all entries carrying an
// extension, g/bit. Entries without usable data contribute zero; an expired
// window makes every slot zero as well.
inline double cumulative_current_cidt(const RoutingMessage& msg, uint64_t now_seconds) {
    auto idx = current_hour_index(now_seconds, msg.timestamp);
    if (!idx) return 0.0;
    double sum = 0.0;
    for (const AsEntry& e : msg.entries) {
        const CidtWireVector* v = e.ext.vector_for_key(e.ingress);
        if (!v && e.ext.kind == ExtKind::map && e.ext.keyed.size() == 1) v = &e.ext.keyed[0].second;
        if (v) sum += decode_cidt(v->forward(*idx));
    }
    return sum;
}

}  // namespace ciro
