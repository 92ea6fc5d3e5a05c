#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "geosmr/errors.hpp"
#include "geosmr/geo.hpp"
#include "geosmr/strings.hpp"

namespace geosmr {

using RegionIndex = std::uint32_t;

// Measured round-trip times in milliseconds. Entry (i,j) is the RTT from
// region i to region j; asymmetric matrices are accepted as-is.
struct RttMatrix {
    std::vector<std::string> regions;
    std::vector<double> rtt_ms;  // row-major, regions.size() x regions.size()

    std::size_t size() const { return regions.size(); }
    double at(std::size_t i, std::size_t j) const { return rtt_ms[i * regions.size() + j]; }
    double& at(std::size_t i, std::size_t j) { return rtt_ms[i * regions.size() + j]; }

    void validate() const {
        const std::size_t n = regions.size();
        if (rtt_ms.size() != n * n) throw ValidationError("RTT matrix is not square");
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const double v = at(i, j);
                if (!std::isfinite(v)) {
                    throw ValidationError("non-finite RTT for (" + regions[i] + "," + regions[j] + ")");
                }
                if (v < 0.0) {
                    throw ValidationError("negative RTT for (" + regions[i] + "," + regions[j] + "): " +
                                          format_double(v));
                }
                if (i == j && v != 0.0) {
                    throw ValidationError("nonzero diagonal RTT for " + regions[i] + ": " +
                                          format_double(v));
                }
            }
        }
    }
};

// Format: first line `region,<r1>,<r2>,...`; each following line
// `<ri>,v1,v2,...` in header order, values in milliseconds.
inline RttMatrix parse_rtt_csv(std::string_view text) {
    RttMatrix m;
    bool header_seen = false;
    std::size_t row = 0;
    std::size_t line_no = 0;
    for (std::string_view line : split(text, '\n')) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        auto cells = split(line, ',');
        if (!header_seen) {
            if (cells.size() < 2 || canonical_region(cells[0]) != "region") {
                throw ParseError("rtt line " + std::to_string(line_no) +
                                 ": expected header 'region,<r1>,...'");
            }
            std::unordered_map<std::string, bool> seen;
            for (std::size_t i = 1; i < cells.size(); ++i) {
                std::string name = canonical_region(cells[i]);
                if (name.empty()) throw ParseError("rtt header: empty region name");
                if (seen.contains(name)) throw ValidationError("duplicate region '" + name + "' in rtt header");
                seen.emplace(name, true);
                m.regions.push_back(std::move(name));
            }
            m.rtt_ms.assign(m.regions.size() * m.regions.size(), 0.0);
            header_seen = true;
            continue;
        }
        if (row >= m.regions.size()) {
            throw ParseError("rtt line " + std::to_string(line_no) + ": more rows than header regions");
        }
        if (cells.size() != m.regions.size() + 1) {
            throw ParseError("rtt line " + std::to_string(line_no) + ": expected " +
                             std::to_string(m.regions.size() + 1) + " fields, got " +
                             std::to_string(cells.size()));
        }
        if (canonical_region(cells[0]) != m.regions[row]) {
            throw ParseError("rtt line " + std::to_string(line_no) + ": row label '" +
                             std::string(cells[0]) + "' does not match header order (expected '" +
                             m.regions[row] + "')");
        }
        for (std::size_t j = 0; j < m.regions.size(); ++j) {
            m.at(row, j) = parse_double(cells[j + 1], "rtt(" + m.regions[row] + "," + m.regions[j] + ")");
        }
        ++row;
    }
    if (!header_seen) throw ParseError("rtt: empty document");
    if (row != m.regions.size()) {
        throw ParseError("rtt: expected " + std::to_string(m.regions.size()) + " rows, got " +
                         std::to_string(row));
    }
    m.validate();
    return m;
}

inline std::string to_csv(const RttMatrix& m) {
    std::string out = "region";
    for (const auto& r : m.regions) {
        out += ',';
        out += r;
    }
    out += '\n';
    for (std::size_t i = 0; i < m.size(); ++i) {
        out += m.regions[i];
        for (std::size_t j = 0; j < m.size(); ++j) {
            out += ',';
            out += format_double(m.at(i, j));
        }
        out += '\n';
    }
    return out;
}

// Ping-log loader: whitespace-separated lines `src dst rtt_ms`, averaged per
// directed pair. Missing pairs are hard errors, never imputed.
inline RttMatrix parse_ping_log(std::string_view text) {
    struct Acc {
        double sum = 0.0;
        std::size_t count = 0;
    };
    std::vector<std::string> order;
    std::unordered_map<std::string, RegionIndex> index;
    std::map<std::pair<RegionIndex, RegionIndex>, Acc> pairs;
    auto intern = [&](std::string_view name) {
        std::string canon = canonical_region(name);
        auto it = index.find(canon);
        if (it != index.end()) return it->second;
        const auto id = static_cast<RegionIndex>(order.size());
        index.emplace(canon, id);
        order.push_back(std::move(canon));
        return id;
    };

    std::size_t line_no = 0;
    for (std::string_view line : split(text, '\n')) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        std::vector<std::string_view> fields;
        std::size_t pos = 0;
        while (pos < line.size()) {
            while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
            std::size_t end = pos;
            while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
            if (end > pos) fields.push_back(line.substr(pos, end - pos));
            pos = end;
        }
        if (fields.empty()) continue;
        if (fields.size() != 3) {
            throw ParseError("ping line " + std::to_string(line_no) + ": expected 'src dst rtt_ms'");
        }
        const RegionIndex a = intern(fields[0]);
        const RegionIndex b = intern(fields[1]);
        const double v = parse_double(fields[2], "rtt");
        auto& acc = pairs[{a, b}];
        acc.sum += v;
        acc.count += 1;
    }
    if (order.empty()) throw ParseError("ping log: empty document");

    RttMatrix m;
    m.regions = order;
    const std::size_t n = order.size();
    m.rtt_ms.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) {
                auto it = pairs.find({static_cast<RegionIndex>(i), static_cast<RegionIndex>(j)});
                if (it != pairs.end() && it->second.sum != 0.0) {
                    throw ValidationError("nonzero self RTT measured for " + order[i]);
                }
                continue;
            }
            auto it = pairs.find({static_cast<RegionIndex>(i), static_cast<RegionIndex>(j)});
            if (it == pairs.end()) {
                throw ValidationError("missing RTT measurement for (" + order[i] + "," + order[j] + ")");
            }
            m.at(i, j) = it->second.sum / static_cast<double>(it->second.count);
        }
    }
    m.validate();
    return m;
}

// Loads either format; a `region,...` header marks the matrix CSV.
inline RttMatrix load_rtt(std::string_view text) {
    for (std::string_view line : split(text, '\n')) {
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        auto cells = split(line, ',');
        if (cells.size() >= 2 && canonical_region(cells[0]) == "region") return parse_rtt_csv(text);
        return parse_ping_log(text);
    }
    throw ParseError("rtt: empty document");
}

// Replaces each directed pair with the mean of the two directions.
inline RttMatrix symmetrize(RttMatrix m) {
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = i + 1; j < m.size(); ++j) {
            const double mean = (m.at(i, j) + m.at(j, i)) / 2.0;
            m.at(i, j) = mean;
            m.at(j, i) = mean;
        }
    }
    return m;
}

// Distance-plausible sample matrix: RTT = distance * ms_per_km + base.
// Synthetic — stands in for a measured table so everything runs out of the box.
inline RttMatrix synthetic_rtt(const RegionRegistry& registry, double ms_per_km = 0.01,
                               double base_ms = 5.0) {
    RttMatrix m;
    m.regions = registry.names();
    const std::size_t n = m.regions.size();
    m.rtt_ms.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double km = haversine_km(registry.at(m.regions[i]), registry.at(m.regions[j]));
            m.at(i, j) = km * ms_per_km + base_ms;
        }
    }
    return m;
}

// One-way delays derived as RTT/2. Immutable after construction.
class DelayModel {
public:
    explicit DelayModel(const RttMatrix& rtt) : regions_(rtt.regions) {
        rtt.validate();
        const std::size_t n = regions_.size();
        owd_ms_.resize(n * n);
        for (std::size_t i = 0; i < n * n; ++i) owd_ms_[i] = rtt.rtt_ms[i] / 2.0;
        for (RegionIndex i = 0; i < n; ++i) index_.emplace(regions_[i], i);
    }

    RegionIndex size() const { return static_cast<RegionIndex>(regions_.size()); }

    double owd(RegionIndex a, RegionIndex b) const { return owd_ms_[a * regions_.size() + b]; }

    double owd(std::string_view a, std::string_view b) const {
        return owd(index_of(a), index_of(b));
    }

    RegionIndex index_of(std::string_view name) const {
        auto it = index_.find(canonical_region(name));
        if (it == index_.end()) throw UnknownRegionError(std::string(name));
        return it->second;
    }

    bool contains(std::string_view name) const { return index_.contains(canonical_region(name)); }

    const std::string& name(RegionIndex i) const { return regions_[i]; }
    const std::vector<std::string>& regions() const { return regions_; }

private:
    std::vector<std::string> regions_;
    std::unordered_map<std::string, RegionIndex> index_;
    std::vector<double> owd_ms_;
};

}  // namespace geosmr
