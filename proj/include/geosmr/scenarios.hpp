#pragma once

#include <array>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geosmr/errors.hpp"
#include "geosmr/geo.hpp"
#include "geosmr/model.hpp"
#include "geosmr/placement.hpp"
#include "geosmr/rtt.hpp"

namespace geosmr {

inline constexpr int kSchemaVersion = 1;

enum class DistributionKind : std::uint8_t { Global, US, Custom };

struct ClientDistribution {
    DistributionKind kind = DistributionKind::Custom;
    std::vector<std::string> clients;

    static ClientDistribution global() {
        return {DistributionKind::Global, {"paris", "sao_paulo", "toronto", "victoria", "tokyo"}};
    }
    static ClientDistribution us() {
        return {DistributionKind::US, {"virginia", "california", "iowa"}};
    }
    static ClientDistribution custom(std::vector<std::string> clients) {
        return {DistributionKind::Custom, std::move(clients)};
    }
};

inline constexpr const char* to_string(DistributionKind k) {
    switch (k) {
        case DistributionKind::Global: return "global";
        case DistributionKind::US: return "us";
        case DistributionKind::Custom: return "custom";
    }
    return "?";
}

inline Workload make_workload(const ClientDistribution& dist, const DelayModel& d, double p_write,
                              double p_slow) {
    Workload w;
    w.p_write = p_write;
    w.p_slow = p_slow;
    for (const auto& name : dist.clients) w.clients.push_back(d.index_of(name));
    w.validate();
    return w;
}

enum class ServiceKind : std::uint8_t { StatusResponse, FullResponse };

inline constexpr const char* to_string(ServiceKind k) {
    return k == ServiceKind::StatusResponse ? "status" : "full";
}

// Full-response services pay the commit-to-execution delay on every write.
// Protocols that pre-partition the commit log (Mencius, Domino) must fill
// other replicas' slots with no-ops before executing, so their delay sits two
// orders of magnitude above the rest. Defaults are group midpoints of the
// measured ranges and can be overridden per protocol.
struct ServiceMode {
    ServiceKind kind = ServiceKind::StatusResponse;
    std::array<double, kAllProtocols.size()> commit_to_exec_ms = {2.0, 77.6, 2.0, 77.6, 2.0};

    double write_penalty_ms(ProtocolKind p) const {
        if (kind == ServiceKind::StatusResponse) return 0.0;
        return commit_to_exec_ms[static_cast<std::size_t>(p)];
    }

    static ServiceMode status() { return {}; }
    static ServiceMode full() { return {ServiceKind::FullResponse, {2.0, 77.6, 2.0, 77.6, 2.0}}; }
};

inline std::vector<RegionIndex> full_universe(const DelayModel& d) {
    std::vector<RegionIndex> u(d.size());
    for (RegionIndex i = 0; i < d.size(); ++i) u[i] = i;
    return u;
}

enum class SweepAxis : std::uint8_t { Distance, ReplicaCount, SlowPathRate };

inline constexpr const char* to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::Distance: return "distance";
        case SweepAxis::ReplicaCount: return "replicas";
        case SweepAxis::SlowPathRate: return "slow-path";
    }
    return "?";
}

inline SweepAxis parse_axis(std::string_view name) {
    const std::string s = to_lower(trim(name));
    if (s == "distance") return SweepAxis::Distance;
    if (s == "replicas" || s == "replica-count") return SweepAxis::ReplicaCount;
    if (s == "slow-path" || s == "slow-path-rate") return SweepAxis::SlowPathRate;
    throw ValidationError("unknown sweep axis '" + s + "' (expected distance|replicas|slow-path)");
}

inline std::vector<double> default_p_slow_values() {
    std::vector<double> v;
    for (int i = 0; i <= 10; ++i) v.push_back(static_cast<double>(i) / 10.0);
    return v;
}

inline std::vector<std::uint32_t> default_replica_counts() { return {3, 4, 5, 6, 7}; }

struct SweepSpec {
    SweepAxis axis = SweepAxis::Distance;
    std::vector<double> values;
    // held-constant parameters
    std::uint32_t n = 3;
    double min_distance_km = 3000.0;
    double p_slow = 0.2;
    double p_write = 1.0;
    ReadPolicy read_policy = ReadPolicy::NearestReplica;

    static SweepSpec distance() {
        SweepSpec s;
        s.axis = SweepAxis::Distance;
        s.values = {0.0, 1000.0, 2000.0, 3000.0, 4000.0, 5000.0};
        return s;
    }
    static SweepSpec replica_count() {
        SweepSpec s;
        s.axis = SweepAxis::ReplicaCount;
        s.values = {3, 4, 5, 6, 7};
        return s;
    }
    static SweepSpec slow_path_rate() {
        SweepSpec s;
        s.axis = SweepAxis::SlowPathRate;
        s.values = default_p_slow_values();
        return s;
    }
};

struct CellResult {
    std::optional<double> latency_ms;  // nullopt: no feasible placement
    std::vector<RegionIndex> replicas;
    std::optional<RegionIndex> leader;
};

namespace detail {

inline CellResult evaluate_cell(ProtocolKind p, std::uint32_t n, double min_distance_km,
                                double p_slow, const ClientDistribution& dist,
                                const ServiceMode& mode, double p_write, ReadPolicy policy,
                                const DelayModel& d, const RegionRegistry& registry) {
    PlacementQuery q;
    q.universe = full_universe(d);
    q.n = n;
    q.min_distance_km = min_distance_km;
    q.protocol = p;
    q.workload = make_workload(dist, d, p_write, p_slow);
    q.read_policy = policy;
    q.leader_policy = LeaderPolicy::Best;
    try {
        PlacementResult r = optimal_placement(q, d, registry);
        CellResult cell;
        // The penalty is a per-protocol constant, so it cannot change which
        // placement wins, only the cross-protocol comparison.
        cell.latency_ms = r.latency_ms + mode.write_penalty_ms(p) * p_write;
        cell.replicas = r.placement.replicas;
        cell.leader = r.leader;
        return cell;
    } catch (const NoFeasiblePlacementError&) {
        return {};
    }
}

}  // namespace detail

struct SweepRow {
    double axis_value = 0.0;
    ProtocolKind protocol = ProtocolKind::MultiPaxos;
    std::optional<double> latency_ms;
    std::vector<std::string> placement;
    std::optional<std::string> leader;
};

inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, const ClientDistribution& dist,
                                       const ServiceMode& mode, const DelayModel& d,
                                       const RegionRegistry& registry) {
    std::vector<SweepRow> rows;
    for (double value : spec.values) {
        std::uint32_t n = spec.n;
        double d_km = spec.min_distance_km;
        double p_slow = spec.p_slow;
        switch (spec.axis) {
            case SweepAxis::Distance: d_km = value; break;
            case SweepAxis::ReplicaCount: n = static_cast<std::uint32_t>(value); break;
            case SweepAxis::SlowPathRate: p_slow = value; break;
        }
        for (ProtocolKind p : kAllProtocols) {
            CellResult cell = detail::evaluate_cell(p, n, d_km, p_slow, dist, mode, spec.p_write,
                                                    spec.read_policy, d, registry);
            SweepRow row;
            row.axis_value = value;
            row.protocol = p;
            row.latency_ms = cell.latency_ms;
            for (RegionIndex r : cell.replicas) row.placement.push_back(d.name(r));
            if (cell.leader) row.leader = d.name(*cell.leader);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

struct ProtocolMapCell {
    std::uint32_t n = 0;
    double p_slow = 0.0;
    std::array<std::optional<double>, kAllProtocols.size()> latency_ms;
    std::vector<ProtocolKind> winners;  // argmin within 1e-9 ms, enum order
};

inline constexpr double kWinnerToleranceMs = 1e-9;

inline std::vector<ProtocolKind> winners_of(
    const std::array<std::optional<double>, kAllProtocols.size()>& latencies) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& v : latencies) {
        if (v) best = std::min(best, *v);
    }
    std::vector<ProtocolKind> winners;
    if (!std::isfinite(best)) return winners;
    for (ProtocolKind p : kAllProtocols) {
        const auto& v = latencies[static_cast<std::size_t>(p)];
        if (v && *v - best <= kWinnerToleranceMs) winners.push_back(p);
    }
    return winners;
}

inline std::vector<ProtocolMapCell> protocol_map(std::span<const std::uint32_t> n_values,
                                                 std::span<const double> p_slow_values,
                                                 const ClientDistribution& dist,
                                                 const ServiceMode& mode, double min_distance_km,
                                                 const DelayModel& d,
                                                 const RegionRegistry& registry,
                                                 double p_write = 1.0,
                                                 ReadPolicy policy = ReadPolicy::NearestReplica) {
    std::vector<ProtocolMapCell> cells;
    for (std::uint32_t n : n_values) {
        for (double p_slow : p_slow_values) {
            ProtocolMapCell cell;
            cell.n = n;
            cell.p_slow = p_slow;
            for (ProtocolKind p : kAllProtocols) {
                cell.latency_ms[static_cast<std::size_t>(p)] =
                    detail::evaluate_cell(p, n, min_distance_km, p_slow, dist, mode, p_write,
                                          policy, d, registry)
                        .latency_ms;
            }
            cell.winners = winners_of(cell.latency_ms);
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

// ---- guideline-backed recommendations ----

struct GuidelineRef {
    int id = 0;
    bool favors = true;
};

inline const char* guideline_text(int id) {
    switch (id) {
        case 1:
            return "full-response services: prefer protocols without pre-partitioned commit logs "
                   "(MultiPaxos, FastPaxos, EPaxos); log gaps delay execution in Mencius/Domino";
        case 2:
            return "replica distance: Domino stays strong across separations for status-response "
                   "services; for full-response, MultiPaxos suits short separations and EPaxos "
                   "larger ones";
        case 3:
            return "replica count: with many replicas, protocols that use nearby replicas "
                   "(Mencius/Domino for status-response, EPaxos for full-response) degrade least";
        case 4:
            return "conflict rate: frequent slow paths favor protocols without one (MultiPaxos, "
                   "Mencius)";
        case 5:
            return "client distribution: for full-response services, dispersed clients favor "
                   "EPaxos and concentrated clients MultiPaxos; Mencius/Domino fit "
                   "status-response either way";
    }
    return "";
}

struct RecommendInputs {
    ServiceMode mode;
    std::uint32_t n = 3;
    double min_distance_km = 3000.0;
    double p_slow = 0.2;
    ClientDistribution dist = ClientDistribution::global();
    double p_write = 1.0;
    ReadPolicy read_policy = ReadPolicy::NearestReplica;
};

struct Recommendation {
    ProtocolKind protocol = ProtocolKind::MultiPaxos;
    std::optional<double> latency_ms;
    std::vector<GuidelineRef> guidelines;
};

// Annotation thresholds; the ranking itself always comes from the models.
inline constexpr std::uint32_t kManyReplicas = 5;
inline constexpr double kHighSlowPathRate = 0.5;
inline constexpr double kShortDistanceKm = 1000.0;

inline std::vector<GuidelineRef> applicable_guidelines(const RecommendInputs& in, ProtocolKind p) {
    std::vector<GuidelineRef> refs;
    const bool full = in.mode.kind == ServiceKind::FullResponse;
    const bool partitioned_log = p == ProtocolKind::Mencius || p == ProtocolKind::Domino;

    if (full && partitioned_log) refs.push_back({1, false});

    if (!full && p == ProtocolKind::Domino) refs.push_back({2, true});
    if (full && p == ProtocolKind::MultiPaxos && in.min_distance_km <= kShortDistanceKm) {
        refs.push_back({2, true});
    }
    if (full && p == ProtocolKind::EPaxos && in.min_distance_km > kShortDistanceKm) {
        refs.push_back({2, true});
    }

    if (in.n >= kManyReplicas) {
        if (!full && partitioned_log) refs.push_back({3, true});
        if (full && p == ProtocolKind::EPaxos) refs.push_back({3, true});
    }

    if (in.p_slow >= kHighSlowPathRate &&
        (p == ProtocolKind::MultiPaxos || p == ProtocolKind::Mencius)) {
        refs.push_back({4, true});
    }

    if (in.dist.kind != DistributionKind::Custom) {
        if (!full && partitioned_log) refs.push_back({5, true});
        if (full && in.dist.kind == DistributionKind::Global && p == ProtocolKind::EPaxos) {
            refs.push_back({5, true});
        }
        if (full && in.dist.kind == DistributionKind::US && p == ProtocolKind::MultiPaxos) {
            refs.push_back({5, true});
        }
    }
    return refs;
}

inline std::vector<Recommendation> recommend(const RecommendInputs& in, const DelayModel& d,
                                             const RegionRegistry& registry) {
    std::array<std::optional<double>, kAllProtocols.size()> latencies;
    for (ProtocolKind p : kAllProtocols) {
        latencies[static_cast<std::size_t>(p)] =
            detail::evaluate_cell(p, in.n, in.min_distance_km, in.p_slow, in.dist, in.mode,
                                  in.p_write, in.read_policy, d, registry)
                .latency_ms;
    }
    std::vector<Recommendation> ranking;
    for (ProtocolKind p : kAllProtocols) {
        ranking.push_back({p, latencies[static_cast<std::size_t>(p)], applicable_guidelines(in, p)});
    }
    std::stable_sort(ranking.begin(), ranking.end(), [](const auto& a, const auto& b) {
        if (a.latency_ms.has_value() != b.latency_ms.has_value()) return a.latency_ms.has_value();
        if (!a.latency_ms) return false;
        return *a.latency_ms < *b.latency_ms;
    });
    // Within the winner tolerance the map reports a tie; lead with the same
    // protocol the map lists first so the two agree.
    if (!ranking.empty() && ranking.front().latency_ms) {
        const double best = *ranking.front().latency_ms;
        std::size_t lead = 0;
        for (std::size_t i = 1; i < ranking.size(); ++i) {
            if (!ranking[i].latency_ms || *ranking[i].latency_ms - best > kWinnerToleranceMs) break;
            if (ranking[i].protocol < ranking[lead].protocol) lead = i;
        }
        if (lead != 0) {
            std::rotate(ranking.begin(), ranking.begin() + static_cast<std::ptrdiff_t>(lead),
                        ranking.begin() + static_cast<std::ptrdiff_t>(lead) + 1);
        }
    }
    return ranking;
}

// ---- renderers: CSV and a JSON mirror carrying the same values ----

namespace detail {

inline std::string join(std::span<const std::string> parts, char sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

}  // namespace detail

inline std::string sweep_to_csv(std::span<const SweepRow> rows) {
    std::string out = "axis_value,protocol,latency_ms,placement,leader\n";
    for (const SweepRow& r : rows) {
        out += format_double(r.axis_value);
        out += ',';
        out += to_string(r.protocol);
        out += ',';
        if (r.latency_ms) out += format_double(*r.latency_ms);
        out += ',';
        out += detail::join(r.placement, ';');
        out += ',';
        if (r.leader) out += *r.leader;
        out += '\n';
    }
    return out;
}

inline nlohmann::json sweep_to_json(const SweepSpec& spec, std::span<const SweepRow> rows) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "sweep";
    j["axis"] = to_string(spec.axis);
    nlohmann::json out_rows = nlohmann::json::array();
    for (const SweepRow& r : rows) {
        nlohmann::json row;
        row["axis_value"] = r.axis_value;
        row["protocol"] = to_string(r.protocol);
        row["latency_ms"] = r.latency_ms ? nlohmann::json(*r.latency_ms) : nlohmann::json(nullptr);
        row["placement"] = r.placement;
        row["leader"] = r.leader ? nlohmann::json(*r.leader) : nlohmann::json(nullptr);
        out_rows.push_back(std::move(row));
    }
    j["rows"] = std::move(out_rows);
    return j;
}

inline std::string map_to_csv(std::span<const ProtocolMapCell> cells) {
    std::string out = "n,p_slow,winner(s),mp_ms,me_ms,fp_ms,do_ms,ep_ms\n";
    for (const ProtocolMapCell& c : cells) {
        out += std::to_string(c.n);
        out += ',';
        out += format_double(c.p_slow);
        out += ',';
        std::vector<std::string> names;
        for (ProtocolKind p : c.winners) names.emplace_back(to_string(p));
        out += detail::join(names, ';');
        for (ProtocolKind p : kAllProtocols) {
            out += ',';
            const auto& v = c.latency_ms[static_cast<std::size_t>(p)];
            if (v) out += format_double(*v);
        }
        out += '\n';
    }
    return out;
}

inline nlohmann::json map_to_json(std::span<const ProtocolMapCell> cells) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "protocol_map";
    nlohmann::json out_cells = nlohmann::json::array();
    for (const ProtocolMapCell& c : cells) {
        nlohmann::json cell;
        cell["n"] = c.n;
        cell["p_slow"] = c.p_slow;
        nlohmann::json winners = nlohmann::json::array();
        for (ProtocolKind p : c.winners) winners.push_back(to_string(p));
        cell["winners"] = std::move(winners);
        nlohmann::json lat;
        for (ProtocolKind p : kAllProtocols) {
            const auto& v = c.latency_ms[static_cast<std::size_t>(p)];
            lat[to_string(p)] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
        }
        cell["latency_ms"] = std::move(lat);
        out_cells.push_back(std::move(cell));
    }
    j["cells"] = std::move(out_cells);
    return j;
}

inline std::string recommendations_to_csv(std::span<const Recommendation> ranking) {
    std::string out = "rank,protocol,latency_ms,guidelines\n";
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        const Recommendation& r = ranking[i];
        out += std::to_string(i + 1);
        out += ',';
        out += to_string(r.protocol);
        out += ',';
        if (r.latency_ms) out += format_double(*r.latency_ms);
        out += ',';
        std::vector<std::string> notes;
        for (const GuidelineRef& g : r.guidelines) {
            notes.push_back(std::string(g.favors ? "+" : "-") + "G" + std::to_string(g.id));
        }
        out += detail::join(notes, ';');
        out += '\n';
    }
    return out;
}

inline nlohmann::json recommendations_to_json(const RecommendInputs& in,
                                              std::span<const Recommendation> ranking) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "recommend";
    j["inputs"] = {{"mode", to_string(in.mode.kind)},
                   {"n", in.n},
                   {"min_distance_km", in.min_distance_km},
                   {"p_slow", in.p_slow},
                   {"p_w", in.p_write},
                   {"clients", to_string(in.dist.kind)}};
    nlohmann::json out_rows = nlohmann::json::array();
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        const Recommendation& r = ranking[i];
        nlohmann::json row;
        row["rank"] = i + 1;
        row["protocol"] = to_string(r.protocol);
        row["latency_ms"] = r.latency_ms ? nlohmann::json(*r.latency_ms) : nlohmann::json(nullptr);
        nlohmann::json guides = nlohmann::json::array();
        for (const GuidelineRef& g : r.guidelines) {
            guides.push_back({{"id", g.id}, {"favors", g.favors}, {"text", guideline_text(g.id)}});
        }
        row["guidelines"] = std::move(guides);
        out_rows.push_back(std::move(row));
    }
    j["ranking"] = std::move(out_rows);
    return j;
}

}  // namespace geosmr
