#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "geosmr/errors.hpp"
#include "geosmr/strings.hpp"

namespace geosmr {

inline constexpr double kEarthRadiusKm = 6371.0;

struct GeoPoint {
    double lat_deg = 0.0;
    double lon_deg = 0.0;

    bool valid() const {
        return std::isfinite(lat_deg) && std::isfinite(lon_deg) &&
               lat_deg >= -90.0 && lat_deg <= 90.0 &&
               lon_deg >= -180.0 && lon_deg <= 180.0;
    }
};

// Region names are case-insensitive; canonical form is lowercase.
inline std::string canonical_region(std::string_view name) {
    return to_lower(trim(name));
}

inline double haversine_km(const GeoPoint& a, const GeoPoint& b) {
    constexpr double deg2rad = std::numbers::pi / 180.0;
    const double lat1 = a.lat_deg * deg2rad;
    const double lat2 = b.lat_deg * deg2rad;
    const double dlat = (b.lat_deg - a.lat_deg) * deg2rad;
    const double dlon = (b.lon_deg - a.lon_deg) * deg2rad;
    const double s1 = std::sin(dlat / 2.0);
    const double s2 = std::sin(dlon / 2.0);
    const double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
    return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(std::min(1.0, h)));
}

class RegionRegistry {
public:
    void add(std::string_view name, GeoPoint point) {
        std::string canon = canonical_region(name);
        if (canon.empty()) throw ValidationError("region name must be a non-empty token");
        if (!point.valid()) {
            throw ValidationError("coordinates out of range for region '" + canon + "'");
        }
        if (entries_.contains(canon)) {
            throw ValidationError("duplicate region '" + canon + "' in registry");
        }
        entries_.emplace(canon, point);
        names_.push_back(std::move(canon));
    }

    bool contains(std::string_view name) const {
        return entries_.contains(canonical_region(name));
    }

    const GeoPoint& at(std::string_view name) const {
        auto it = entries_.find(canonical_region(name));
        if (it == entries_.end()) throw UnknownRegionError(std::string(name));
        return it->second;
    }

    std::size_t size() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }

    // Format: header `region,lat,lon`, one row per region, `#` comments.
    static RegionRegistry parse_csv(std::string_view text) {
        RegionRegistry reg;
        bool header_seen = false;
        std::size_t line_no = 0;
        for (std::string_view line : split(text, '\n')) {
            ++line_no;
            line = trim(line);
            if (line.empty() || line.front() == '#') continue;
            if (!header_seen) {
                if (to_lower(line) != "region,lat,lon") {
                    throw ParseError("registry line 1: expected header 'region,lat,lon'");
                }
                header_seen = true;
                continue;
            }
            auto cells = split(line, ',');
            if (cells.size() != 3) {
                throw ParseError("registry line " + std::to_string(line_no) +
                                 ": expected 3 fields, got " + std::to_string(cells.size()));
            }
            GeoPoint p{parse_double(cells[1], "lat"), parse_double(cells[2], "lon")};
            reg.add(cells[0], p);
        }
        if (!header_seen) throw ParseError("registry: empty document");
        return reg;
    }

    std::string to_csv() const {
        std::string out = "region,lat,lon\n";
        for (const auto& name : names_) {
            const GeoPoint& p = entries_.at(name);
            out += name;
            out += ',';
            out += format_double(p.lat_deg);
            out += ',';
            out += format_double(p.lon_deg);
            out += '\n';
        }
        return out;
    }

    // The 13 candidate regions with city-center coordinates. The upstream
    // latency tables never publish datacenter coordinates, so city centers
    // are the documented default; override via a registry file if needed.
    static const RegionRegistry& builtin() {
        static const RegionRegistry reg = [] {
            RegionRegistry r;
            r.add("paris", {48.86, 2.35});
            r.add("iowa", {41.59, -93.63});
            r.add("toronto", {43.65, -79.38});
            r.add("seoul", {37.57, 126.98});
            r.add("london", {51.51, -0.13});
            r.add("california", {37.77, -122.42});
            r.add("victoria", {48.43, -123.37});
            r.add("gavle", {60.67, 17.14});
            r.add("sao_paulo", {-23.55, -46.63});
            r.add("tokyo", {35.68, 139.77});
            r.add("singapore", {1.35, 103.82});
            r.add("virginia", {37.54, -77.44});
            r.add("chennai", {13.08, 80.27});
            return r;
        }();
        return reg;
    }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, GeoPoint> entries_;
};

inline double min_pairwise_distance_km(std::span<const std::string> regions,
                                       const RegionRegistry& registry) {
    if (regions.size() < 2) {
        throw DegeneratePlacementError("min pairwise distance needs at least 2 regions, got " +
                                       std::to_string(regions.size()));
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < regions.size(); ++i) {
        const GeoPoint& a = registry.at(regions[i]);
        for (std::size_t j = i + 1; j < regions.size(); ++j) {
            best = std::min(best, haversine_km(a, registry.at(regions[j])));
        }
    }
    return best;
}

}  // namespace geosmr
