#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geosmr/errors.hpp"
#include "geosmr/rtt.hpp"

namespace geosmr {

enum class ProtocolKind : std::uint8_t { MultiPaxos, Mencius, FastPaxos, Domino, EPaxos };

inline constexpr std::array<ProtocolKind, 5> kAllProtocols = {
    ProtocolKind::MultiPaxos, ProtocolKind::Mencius, ProtocolKind::FastPaxos,
    ProtocolKind::Domino, ProtocolKind::EPaxos};

inline constexpr const char* to_string(ProtocolKind p) {
    switch (p) {
        case ProtocolKind::MultiPaxos: return "multipaxos";
        case ProtocolKind::Mencius: return "mencius";
        case ProtocolKind::FastPaxos: return "fastpaxos";
        case ProtocolKind::Domino: return "domino";
        case ProtocolKind::EPaxos: return "epaxos";
    }
    return "?";
}

inline ProtocolKind parse_protocol(std::string_view name) {
    const std::string s = to_lower(trim(name));
    for (ProtocolKind p : kAllProtocols) {
        if (s == to_string(p)) return p;
    }
    throw ValidationError("unknown protocol '" + s +
                          "' (expected multipaxos|mencius|fastpaxos|domino|epaxos)");
}

// MultiPaxos, FastPaxos and Domino are driven through a designated leader;
// Mencius and EPaxos coordinate through the replica nearest to the client.
inline constexpr bool needs_leader(ProtocolKind p) {
    return p == ProtocolKind::MultiPaxos || p == ProtocolKind::FastPaxos ||
           p == ProtocolKind::Domino;
}

enum class ReadPolicy : std::uint8_t { NearestReplica, LeaderOnly };
enum class DominoBranch : std::uint8_t { Mencius, FastPaxos };

inline constexpr const char* to_string(DominoBranch b) {
    return b == DominoBranch::Mencius ? "mencius" : "fastpaxos";
}

struct Placement {
    std::vector<RegionIndex> replicas;                // no duplicates
    std::optional<std::uint32_t> leader_pos;          // index into replicas

    std::optional<RegionIndex> leader_region() const {
        if (!leader_pos) return std::nullopt;
        return replicas.at(*leader_pos);
    }
};

struct Workload {
    std::vector<RegionIndex> clients;  // multiset, duplicates weight the average
    double p_write = 1.0;
    double p_slow = 0.0;

    void validate() const {
        if (clients.empty()) throw ValidationError("workload needs at least one client");
        if (!(p_write >= 0.0 && p_write <= 1.0)) throw ValidationError("p_w must be in [0,1]");
        if (!(p_slow >= 0.0 && p_slow <= 1.0)) throw ValidationError("p_slow must be in [0,1]");
    }
};

struct ProtocolEstimate {
    double total_ms = 0.0;
    double fast_ms = 0.0;   // normal-path latency
    double slow_ms = 0.0;   // isolated slow-path latency, weighted into total by p_slow
    std::optional<DominoBranch> domino_branch;
    std::optional<RegionIndex> leader_used;
    std::optional<double> min_multi_paxos_ms;  // Domino's branch comparator
};

inline constexpr std::size_t majority_quorum(std::size_t n) { return n / 2 + 1; }
inline constexpr std::size_t fast_quorum(std::size_t n) { return (3 * n + 3) / 4; }

namespace detail {

inline double kth_smallest(std::vector<double>& values, std::size_t k) {
    auto nth = values.begin() + static_cast<std::ptrdiff_t>(k - 1);
    std::nth_element(values.begin(), nth, values.end());
    return *nth;
}

inline void require_member(const DelayModel& d, std::span<const RegionIndex> replicas,
                           RegionIndex leader) {
    for (RegionIndex r : replicas) {
        if (r == leader) return;
    }
    throw LeaderNotInPlacementError("leader '" + d.name(leader) + "' is not in the placement");
}

inline void require_probability(double p, std::string_view what) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw ValidationError(std::string(what) + " must be in [0,1], got " + format_double(p));
    }
}

}  // namespace detail

// k-th smallest element of a multiset, 1-based, duplicates counted.
inline double find_kth(std::span<const double> times, std::size_t k) {
    if (k < 1 || k > times.size()) {
        throw std::out_of_range("find_kth: k=" + std::to_string(k) + " outside [1," +
                                std::to_string(times.size()) + "]");
    }
    thread_local std::vector<double> scratch;
    scratch.assign(times.begin(), times.end());
    return detail::kth_smallest(scratch, k);
}

// Replica with the shortest one-way delay from the client; ties go to the
// lowest list index.
inline RegionIndex opt_leader(const DelayModel& d, std::span<const RegionIndex> replicas,
                              RegionIndex client) {
    if (replicas.empty()) throw DegeneratePlacementError("placement has no replicas");
    RegionIndex best = replicas[0];
    double best_owd = d.owd(client, best);
    for (std::size_t i = 1; i < replicas.size(); ++i) {
        const double v = d.owd(client, replicas[i]);
        if (v < best_owd) {
            best_owd = v;
            best = replicas[i];
        }
    }
    return best;
}

// Client request -> leader propose -> majority accept -> commit -> first
// response back at the client.
inline double multi_paxos(const DelayModel& d, std::span<const RegionIndex> replicas,
                          RegionIndex leader, RegionIndex client) {
    detail::require_member(d, replicas, leader);
    const std::size_t n = replicas.size();
    const double s_req = d.owd(client, leader);

    thread_local std::vector<double> accept_times;
    accept_times.clear();
    for (RegionIndex r : replicas) {
        const double s_pro = s_req + d.owd(leader, r);
        accept_times.push_back(s_pro + d.owd(r, leader));
    }
    const double s_acc = detail::kth_smallest(accept_times, majority_quorum(n));

    double best = std::numeric_limits<double>::infinity();
    for (RegionIndex r : replicas) {
        const double s_cmt = s_acc + d.owd(leader, r);
        best = std::min(best, s_cmt + d.owd(r, client));
    }
    return best;
}

inline double mencius(const DelayModel& d, std::span<const RegionIndex> replicas,
                      RegionIndex client) {
    return multi_paxos(d, replicas, opt_leader(d, replicas, client), client);
}

// Client proposes to all replicas directly; done at the fast-quorum-th
// round-trip response.
inline double fast_path(const DelayModel& d, std::span<const RegionIndex> replicas,
                        RegionIndex client) {
    if (replicas.empty()) throw DegeneratePlacementError("placement has no replicas");
    const std::size_t n = replicas.size();
    thread_local std::vector<double> response_times;
    response_times.clear();
    for (RegionIndex r : replicas) {
        response_times.push_back(d.owd(client, r) + d.owd(r, client));
    }
    return detail::kth_smallest(response_times, fast_quorum(n));
}

// Leader-initiated resolution round; the clock starts at the leader, not at
// the client.
inline double slow_path(const DelayModel& d, std::span<const RegionIndex> replicas,
                        RegionIndex leader, RegionIndex client) {
    detail::require_member(d, replicas, leader);
    const std::size_t n = replicas.size();

    thread_local std::vector<double> accept_times;
    accept_times.clear();
    for (RegionIndex r : replicas) {
        const double s_spro = d.owd(leader, r);
        accept_times.push_back(s_spro + d.owd(r, leader));
    }
    const double s_acc = detail::kth_smallest(accept_times, majority_quorum(n));

    double best = std::numeric_limits<double>::infinity();
    for (RegionIndex r : replicas) {
        const double s_cmt = s_acc + d.owd(leader, r);
        best = std::min(best, s_cmt + d.owd(r, client));
    }
    return best;
}

inline ProtocolEstimate fast_paxos(const DelayModel& d, std::span<const RegionIndex> replicas,
                                   RegionIndex leader, RegionIndex client, double p_slow) {
    detail::require_probability(p_slow, "p_slow");
    ProtocolEstimate e;
    e.fast_ms = fast_path(d, replicas, client);
    e.slow_ms = slow_path(d, replicas, leader, client);
    e.total_ms = e.fast_ms + e.slow_ms * p_slow;
    e.leader_used = leader;
    return e;
}

// Picks Mencius when the best MultiPaxos latency across leaders beats the
// conflict-free FastPaxos latency, otherwise FastPaxos.
inline ProtocolEstimate domino(const DelayModel& d, std::span<const RegionIndex> replicas,
                               RegionIndex leader, RegionIndex client, double p_slow) {
    detail::require_probability(p_slow, "p_slow");
    detail::require_member(d, replicas, leader);
    double min_mp = std::numeric_limits<double>::infinity();
    for (RegionIndex r : replicas) {
        min_mp = std::min(min_mp, multi_paxos(d, replicas, r, client));
    }
    const double fast = fast_path(d, replicas, client);

    ProtocolEstimate e;
    e.min_multi_paxos_ms = min_mp;
    if (min_mp <= fast) {
        const RegionIndex coordinator = opt_leader(d, replicas, client);
        e.fast_ms = multi_paxos(d, replicas, coordinator, client);
        e.slow_ms = 0.0;
        e.total_ms = e.fast_ms;
        e.domino_branch = DominoBranch::Mencius;
        e.leader_used = coordinator;
    } else {
        e.fast_ms = fast;
        e.slow_ms = slow_path(d, replicas, leader, client);
        e.total_ms = e.fast_ms + e.slow_ms * p_slow;
        e.domino_branch = DominoBranch::FastPaxos;
        e.leader_used = leader;
    }
    return e;
}

inline ProtocolEstimate epaxos(const DelayModel& d, std::span<const RegionIndex> replicas,
                               RegionIndex client, double p_slow) {
    detail::require_probability(p_slow, "p_slow");
    const RegionIndex coordinator = opt_leader(d, replicas, client);
    ProtocolEstimate e;
    e.fast_ms = multi_paxos(d, replicas, coordinator, client);
    e.slow_ms = slow_path(d, replicas, coordinator, client);
    e.total_ms = e.fast_ms + e.slow_ms * p_slow;
    e.leader_used = coordinator;
    return e;
}

inline double read_latency(const DelayModel& d, std::span<const RegionIndex> replicas,
                           RegionIndex client, ReadPolicy policy,
                           std::optional<RegionIndex> leader = std::nullopt) {
    if (replicas.empty()) throw DegeneratePlacementError("placement has no replicas");
    if (policy == ReadPolicy::NearestReplica) {
        double best = std::numeric_limits<double>::infinity();
        for (RegionIndex r : replicas) best = std::min(best, d.owd(client, r));
        return 2.0 * best;
    }
    if (!leader) throw MissingLeaderError("leader-only reads need a leader");
    detail::require_member(d, replicas, *leader);
    return 2.0 * d.owd(client, *leader);
}

// Write-path estimate for one client, dispatched per protocol.
inline ProtocolEstimate protocol_estimate(const DelayModel& d, ProtocolKind p,
                                          std::span<const RegionIndex> replicas,
                                          std::optional<RegionIndex> leader, RegionIndex client,
                                          double p_slow) {
    if (needs_leader(p) && !leader) {
        throw MissingLeaderError(std::string(to_string(p)) + " needs a leader");
    }
    switch (p) {
        case ProtocolKind::MultiPaxos: {
            ProtocolEstimate e;
            e.fast_ms = multi_paxos(d, replicas, *leader, client);
            e.total_ms = e.fast_ms;
            e.leader_used = leader;
            return e;
        }
        case ProtocolKind::Mencius: {
            ProtocolEstimate e;
            const RegionIndex coordinator = opt_leader(d, replicas, client);
            e.fast_ms = multi_paxos(d, replicas, coordinator, client);
            e.total_ms = e.fast_ms;
            e.leader_used = coordinator;
            return e;
        }
        case ProtocolKind::FastPaxos:
            return fast_paxos(d, replicas, *leader, client, p_slow);
        case ProtocolKind::Domino:
            return domino(d, replicas, *leader, client, p_slow);
        case ProtocolKind::EPaxos:
            return epaxos(d, replicas, client, p_slow);
    }
    throw ValidationError("unreachable protocol dispatch");
}

// Per-client expected latency: write term weighted by p_w, read term by 1-p_w.
// Terms with zero weight are not evaluated.
inline double estimate(const DelayModel& d, ProtocolKind p, const Placement& placement,
                       RegionIndex client, const Workload& w, ReadPolicy policy) {
    double write = 0.0;
    if (w.p_write > 0.0) {
        write = protocol_estimate(d, p, placement.replicas, placement.leader_region(), client,
                                  w.p_slow)
                    .total_ms;
    }
    double read = 0.0;
    if (w.p_write < 1.0) {
        read = read_latency(d, placement.replicas, client, policy, placement.leader_region());
    }
    return write * w.p_write + read * (1.0 - w.p_write);
}

// Mean over the client multiset.
inline double el_avg(const DelayModel& d, ProtocolKind p, const Placement& placement,
                     const Workload& w, ReadPolicy policy) {
    w.validate();
    double sum = 0.0;
    for (RegionIndex c : w.clients) sum += estimate(d, p, placement, c, w, policy);
    return sum / static_cast<double>(w.clients.size());
}

struct LeaderChoice {
    RegionIndex leader;
    double el_avg_ms;
};

// Leader minimizing el_avg; ties go to the lowest replica index.
inline LeaderChoice best_leader(const DelayModel& d, ProtocolKind p, const Placement& placement,
                                const Workload& w, ReadPolicy policy) {
    if (!needs_leader(p)) {
        throw NotLeaderBasedError(std::string(to_string(p)) + " does not take a leader");
    }
    if (placement.replicas.empty()) throw DegeneratePlacementError("placement has no replicas");
    Placement candidate = placement;
    LeaderChoice best{placement.replicas[0], std::numeric_limits<double>::infinity()};
    for (std::uint32_t pos = 0; pos < placement.replicas.size(); ++pos) {
        candidate.leader_pos = pos;
        const double v = el_avg(d, p, candidate, w, policy);
        if (v < best.el_avg_ms) {
            best = {placement.replicas[pos], v};
        }
    }
    return best;
}

}  // namespace geosmr
