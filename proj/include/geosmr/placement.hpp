#pragma once

#include <algorithm>
#include <cstdint>
#include <future>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geosmr/errors.hpp"
#include "geosmr/geo.hpp"
#include "geosmr/model.hpp"
#include "geosmr/rtt.hpp"

namespace geosmr {

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    std::uint64_t result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        result = result * (n - k + i) / i;
    }
    return result;
}

// Streams the k-combinations of a universe in lexicographic order of universe
// positions, so sweeps never materialize the full candidate set.
class PlacementStream {
public:
    PlacementStream(std::span<const RegionIndex> universe, std::uint32_t n)
        : universe_(universe.begin(), universe.end()), n_(n) {
        if (n < 1 || n > universe.size()) {
            throw InvalidCountError("replica count " + std::to_string(n) +
                                    " outside [1," + std::to_string(universe.size()) + "]");
        }
        positions_.resize(n);
        for (std::uint32_t i = 0; i < n; ++i) positions_[i] = i;
    }

    // Fills `out` with the next combination; false when exhausted.
    bool next(std::vector<RegionIndex>& out) {
        if (done_) return false;
        out.resize(n_);
        for (std::uint32_t i = 0; i < n_; ++i) out[i] = universe_[positions_[i]];
        advance();
        return true;
    }

private:
    void advance() {
        const std::uint32_t m = static_cast<std::uint32_t>(universe_.size());
        std::int64_t i = static_cast<std::int64_t>(n_) - 1;
        while (i >= 0 && positions_[static_cast<std::size_t>(i)] == m - n_ + static_cast<std::uint32_t>(i)) {
            --i;
        }
        if (i < 0) {
            done_ = true;
            return;
        }
        ++positions_[static_cast<std::size_t>(i)];
        for (std::size_t j = static_cast<std::size_t>(i) + 1; j < n_; ++j) {
            positions_[j] = positions_[j - 1] + 1;
        }
    }

    std::vector<RegionIndex> universe_;
    std::uint32_t n_;
    std::vector<std::uint32_t> positions_;
    bool done_ = false;
};

template <typename Visitor>
inline void enumerate_placements(std::span<const RegionIndex> universe, std::uint32_t n,
                                 Visitor&& visit) {
    PlacementStream stream(universe, n);
    std::vector<RegionIndex> combo;
    while (stream.next(combo)) visit(std::span<const RegionIndex>(combo));
}

// Pairwise great-circle distances for the regions of a delay model, resolved
// once so the filter is a table lookup.
class DistanceTable {
public:
    DistanceTable(const DelayModel& d, const RegionRegistry& registry) : n_(d.size()) {
        km_.resize(static_cast<std::size_t>(n_) * n_, 0.0);
        for (RegionIndex i = 0; i < n_; ++i) {
            const GeoPoint& a = registry.at(d.name(i));
            for (RegionIndex j = i + 1; j < n_; ++j) {
                const double km = haversine_km(a, registry.at(d.name(j)));
                km_[i * n_ + j] = km;
                km_[j * n_ + i] = km;
            }
        }
    }

    double km(RegionIndex a, RegionIndex b) const { return km_[a * n_ + b]; }

    double min_pairwise_km(std::span<const RegionIndex> regions) const {
        if (regions.size() < 2) {
            throw DegeneratePlacementError("min pairwise distance needs at least 2 regions");
        }
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < regions.size(); ++i) {
            for (std::size_t j = i + 1; j < regions.size(); ++j) {
                best = std::min(best, km(regions[i], regions[j]));
            }
        }
        return best;
    }

    // Single-replica placements have no pair to violate the separation rule.
    bool passes(std::span<const RegionIndex> regions, double min_distance_km) const {
        if (regions.size() < 2) return true;
        return min_pairwise_km(regions) >= min_distance_km;
    }

private:
    RegionIndex n_;
    std::vector<double> km_;
};

inline std::vector<std::vector<RegionIndex>> filter_by_distance(
    std::span<const std::vector<RegionIndex>> placements, const DistanceTable& table,
    double min_distance_km) {
    std::vector<std::vector<RegionIndex>> kept;
    for (const auto& p : placements) {
        if (table.passes(p, min_distance_km)) kept.push_back(p);
    }
    return kept;
}

enum class LeaderPolicy : std::uint8_t { Best, Fixed };

struct PlacementQuery {
    std::vector<RegionIndex> universe;
    std::uint32_t n = 3;
    double min_distance_km = 0.0;
    ProtocolKind protocol = ProtocolKind::MultiPaxos;
    Workload workload;
    ReadPolicy read_policy = ReadPolicy::NearestReplica;
    LeaderPolicy leader_policy = LeaderPolicy::Best;
    std::optional<RegionIndex> fixed_leader;
};

struct PlacementResult {
    Placement placement;
    double latency_ms = 0.0;
    std::optional<RegionIndex> leader;
    std::uint64_t n_candidates = 0;  // placements surviving the filter
};

namespace detail {

// el_avg for one candidate under the query's leader policy; nullopt when a
// fixed leader is not part of the candidate.
inline std::optional<std::pair<double, std::optional<RegionIndex>>> evaluate_candidate(
    const PlacementQuery& q, const DelayModel& d, std::span<const RegionIndex> replicas) {
    Placement placement;
    placement.replicas.assign(replicas.begin(), replicas.end());
    if (!needs_leader(q.protocol)) {
        return std::make_pair(el_avg(d, q.protocol, placement, q.workload, q.read_policy),
                              std::optional<RegionIndex>{});
    }
    if (q.leader_policy == LeaderPolicy::Fixed) {
        if (!q.fixed_leader) throw MissingLeaderError("fixed leader policy needs a leader region");
        for (std::uint32_t pos = 0; pos < placement.replicas.size(); ++pos) {
            if (placement.replicas[pos] == *q.fixed_leader) {
                placement.leader_pos = pos;
                return std::make_pair(el_avg(d, q.protocol, placement, q.workload, q.read_policy),
                                      std::optional<RegionIndex>(*q.fixed_leader));
            }
        }
        return std::nullopt;
    }
    const LeaderChoice choice = best_leader(d, q.protocol, placement, q.workload, q.read_policy);
    return std::make_pair(choice.el_avg_ms, std::optional<RegionIndex>(choice.leader));
}

}  // namespace detail

// Exhaustive scan of the filtered candidates; ties go to enumeration order.
inline PlacementResult optimal_placement(const PlacementQuery& q, const DelayModel& d,
                                         const RegionRegistry& registry,
                                         unsigned threads = 1) {
    q.workload.validate();
    const bool fixed = q.leader_policy == LeaderPolicy::Fixed && needs_leader(q.protocol);
    if (fixed && !q.fixed_leader) {
        throw MissingLeaderError("fixed leader policy needs a leader region");
    }
    const DistanceTable table(d, registry);

    // A fixed leader that is not part of a candidate makes it unevaluable,
    // which counts as infeasible.
    std::vector<std::vector<RegionIndex>> surviving;
    {
        PlacementStream stream(q.universe, q.n);
        std::vector<RegionIndex> combo;
        while (stream.next(combo)) {
            if (!table.passes(combo, q.min_distance_km)) continue;
            if (fixed && std::find(combo.begin(), combo.end(), *q.fixed_leader) == combo.end()) {
                continue;
            }
            surviving.push_back(combo);
        }
    }
    if (surviving.empty()) {
        throw NoFeasiblePlacementError(
            "no feasible placement for n=" + std::to_string(q.n) + " at min distance " +
            format_double(q.min_distance_km) + " km");
    }

    struct Best {
        double latency = std::numeric_limits<double>::infinity();
        std::uint64_t order = std::numeric_limits<std::uint64_t>::max();
        std::vector<RegionIndex> replicas;
        std::optional<RegionIndex> leader;
    };

    auto scan = [&](std::size_t begin, std::size_t end) {
        Best best;
        for (std::size_t i = begin; i < end; ++i) {
            auto evaluated = detail::evaluate_candidate(q, d, surviving[i]);
            if (!evaluated) continue;
            if (evaluated->first < best.latency) {
                best = Best{evaluated->first, i, surviving[i], evaluated->second};
            }
        }
        return best;
    };

    Best best;
    if (threads <= 1 || surviving.size() < 2) {
        best = scan(0, surviving.size());
    } else {
        const std::size_t chunk = (surviving.size() + threads - 1) / threads;
        std::vector<std::future<Best>> futures;
        for (std::size_t begin = 0; begin < surviving.size(); begin += chunk) {
            const std::size_t end = std::min(begin + chunk, surviving.size());
            futures.push_back(std::async(std::launch::async, scan, begin, end));
        }
        for (auto& f : futures) {
            Best local = f.get();
            if (local.latency < best.latency ||
                (local.latency == best.latency && local.order < best.order)) {
                best = std::move(local);
            }
        }
    }

    PlacementResult result;
    result.n_candidates = surviving.size();
    result.placement.replicas = best.replicas;
    if (best.leader) {
        for (std::uint32_t pos = 0; pos < best.replicas.size(); ++pos) {
            if (best.replicas[pos] == *best.leader) result.placement.leader_pos = pos;
        }
    }
    result.latency_ms = best.latency;
    result.leader = best.leader;
    return result;
}

}  // namespace geosmr
