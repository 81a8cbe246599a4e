#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ciro {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct NotFound : Error {
    explicit NotFound(const std::string& what) : Error(what) {}
};

// 64-bit FNV-1a over raw octets; used for deterministic tiebreaks.
inline uint64_t fnv1a64(std::span<const uint8_t> bytes) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (uint8_t b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline uint64_t fnv1a64_append(uint64_t h, uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xff;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Unix seconds -> whole hours since epoch (UTC).
inline uint64_t hour_of(uint64_t unix_seconds) { return unix_seconds / 3600; }

inline uint64_t hour_start(uint64_t unix_seconds) { return unix_seconds - unix_seconds % 3600; }

// Civil-date conversion (days algorithm); enough for ISO 8601 output.
inline std::string iso8601_utc(uint64_t unix_seconds) {
    int64_t z = static_cast<int64_t>(unix_seconds / 86400);
    int64_t rem = static_cast<int64_t>(unix_seconds % 86400);
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const int64_t doe = z - era * 146097;
    const int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int64_t y = yoe + era * 400;
    const int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const int64_t mp = (5 * doy + 2) / 153;
    const int64_t d = doy - (153 * mp + 2) / 5 + 1;
    const int64_t m = mp < 10 ? mp + 3 : mp - 9;
    const int64_t year = m <= 2 ? y + 1 : y;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04lld-%02lld-%02lldT%02lld:%02lld:%02lldZ",
                  static_cast<long long>(year), static_cast<long long>(m), static_cast<long long>(d),
                  static_cast<long long>(rem / 3600), static_cast<long long>(rem / 60 % 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

inline uint64_t parse_iso8601_utc(std::string_view s) {
    int year, mon, day, hh, mm, ss;
    if (std::sscanf(std::string(s).c_str(), "%d-%d-%dT%d:%d:%dZ", &year, &mon, &day, &hh, &mm, &ss) != 6)
        throw Error("bad ISO 8601 timestamp: " + std::string(s));
    const int64_t y = year - (mon <= 2 ? 1 : 0);
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const int64_t yoe = y - era * 400;
    const int64_t mp = mon > 2 ? mon - 3 : mon + 9;
    const int64_t doy = (153 * mp + 2) / 5 + day - 1;
    const int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    const int64_t days = era * 146097 + doe - 719468;
    return static_cast<uint64_t>(days * 86400 + hh * 3600 + mm * 60 + ss);
}

// Shortest round-trip decimal form; keeps text outputs reproducible.
inline std::string fmt_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw Error("fmt_double failed");
    return std::string(buf, end);
}

inline double parse_double(std::string_view s) {
    double v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw Error("bad number: '" + std::string(s) + "'");
    return v;
}

inline int64_t parse_int(std::string_view s) {
    int64_t v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw Error("bad integer: '" + std::string(s) + "'");
    return v;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    size_t start = 0;
    while (true) {
        size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

// Compensated (Kahan) accumulator for long sums in scaling/conservation checks.
struct KahanSum {
    double sum = 0.0, c = 0.0;
    void add(double x) {
        double y = x - c;
        double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

}  // namespace ciro
