#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <queue>
#include <span>
#include <vector>

#include "geosmr/errors.hpp"
#include "geosmr/model.hpp"
#include "geosmr/rtt.hpp"

// Message-level replay of each protocol's communication pattern. This is the
// verification oracle for the closed-form models, so it deliberately shares no
// computation with them: quorum counting, leader scanning and branch selection
// are all re-derived from delivered events.

namespace geosmr {

enum class MessageKind : std::uint8_t {
    Request,
    Propose,
    Accept,
    Commit,
    Response,
    FastPropose,
    FastResponse,
    SlowPropose,
    SlowAccept,
    SlowCommit,
    SlowResponse,
};

inline constexpr const char* to_string(MessageKind k) {
    switch (k) {
        case MessageKind::Request: return "request";
        case MessageKind::Propose: return "propose";
        case MessageKind::Accept: return "accept";
        case MessageKind::Commit: return "commit";
        case MessageKind::Response: return "response";
        case MessageKind::FastPropose: return "fast_propose";
        case MessageKind::FastResponse: return "fast_response";
        case MessageKind::SlowPropose: return "slow_propose";
        case MessageKind::SlowAccept: return "slow_accept";
        case MessageKind::SlowCommit: return "slow_commit";
        case MessageKind::SlowResponse: return "slow_response";
    }
    return "?";
}

enum class SimPath : std::uint8_t { Normal, Slow };

// Node ids are replica positions 0..n-1; the client is node n.
struct Message {
    MessageKind kind;
    std::uint32_t from = 0;
    std::uint32_t to = 0;
    double send_ms = 0.0;
    double deliver_ms = 0.0;
    std::uint32_t instance = 0;
    std::uint64_t seq = 0;  // global send order, breaks delivery ties
};

struct SimResult {
    double latency_ms = 0.0;
    std::vector<Message> trace;  // in delivery order
};

namespace sim_detail {

struct LaterDelivery {
    bool operator()(const Message& a, const Message& b) const {
        if (a.deliver_ms != b.deliver_ms) return a.deliver_ms > b.deliver_ms;
        return a.seq > b.seq;
    }
};

class Engine {
public:
    Engine(const DelayModel& d, std::span<const RegionIndex> replicas, RegionIndex client_region)
        : d_(d), replicas_(replicas), client_region_(client_region) {}

    std::uint32_t client_node() const { return static_cast<std::uint32_t>(replicas_.size()); }

    RegionIndex region_of(std::uint32_t node) const {
        return node == client_node() ? client_region_ : replicas_[node];
    }

    void send(MessageKind kind, std::uint32_t from, std::uint32_t to, double at) {
        Message m;
        m.kind = kind;
        m.from = from;
        m.to = to;
        m.send_ms = at;
        m.deliver_ms = at + d_.owd(region_of(from), region_of(to));
        m.seq = next_seq_++;
        pending_.push(m);
    }

    template <typename Handler>
    SimResult run(Handler&& on_deliver) {
        SimResult result;
        result.latency_ms = std::numeric_limits<double>::quiet_NaN();
        while (!pending_.empty()) {
            Message m = pending_.top();
            pending_.pop();
            result.trace.push_back(m);
            on_deliver(m, result);
        }
        return result;
    }

private:
    const DelayModel& d_;
    std::span<const RegionIndex> replicas_;
    RegionIndex client_region_;
    std::priority_queue<Message, std::vector<Message>, LaterDelivery> pending_;
    std::uint64_t next_seq_ = 0;
};

inline std::uint32_t nearest_replica_pos(const DelayModel& d, std::span<const RegionIndex> replicas,
                                         RegionIndex client) {
    std::uint32_t best = 0;
    for (std::uint32_t pos = 1; pos < replicas.size(); ++pos) {
        if (d.owd(client, replicas[pos]) < d.owd(client, replicas[best])) best = pos;
    }
    return best;
}

inline SimResult replay_multi_paxos(const DelayModel& d, std::span<const RegionIndex> replicas,
                                    std::uint32_t leader_pos, RegionIndex client) {
    Engine eng(d, replicas, client);
    const std::uint32_t n = static_cast<std::uint32_t>(replicas.size());
    const std::uint32_t client_node = eng.client_node();
    std::size_t accepts = 0;
    bool responded = false;

    eng.send(MessageKind::Request, client_node, leader_pos, 0.0);
    return eng.run([&](const Message& m, SimResult& out) {
        switch (m.kind) {
            case MessageKind::Request:
                for (std::uint32_t i = 0; i < n; ++i) {
                    eng.send(MessageKind::Propose, leader_pos, i, m.deliver_ms);
                }
                break;
            case MessageKind::Propose:
                eng.send(MessageKind::Accept, m.to, leader_pos, m.deliver_ms);
                break;
            case MessageKind::Accept:
                if (++accepts == majority_quorum(n)) {
                    for (std::uint32_t i = 0; i < n; ++i) {
                        eng.send(MessageKind::Commit, leader_pos, i, m.deliver_ms);
                    }
                }
                break;
            case MessageKind::Commit:
                eng.send(MessageKind::Response, m.to, client_node, m.deliver_ms);
                break;
            case MessageKind::Response:
                if (!responded) {
                    responded = true;
                    out.latency_ms = m.deliver_ms;
                }
                break;
            default:
                break;
        }
    });
}

inline SimResult replay_fast_path(const DelayModel& d, std::span<const RegionIndex> replicas,
                                  RegionIndex client) {
    Engine eng(d, replicas, client);
    const std::uint32_t n = static_cast<std::uint32_t>(replicas.size());
    const std::uint32_t client_node = eng.client_node();
    std::size_t responses = 0;

    for (std::uint32_t i = 0; i < n; ++i) {
        eng.send(MessageKind::FastPropose, client_node, i, 0.0);
    }
    return eng.run([&](const Message& m, SimResult& out) {
        switch (m.kind) {
            case MessageKind::FastPropose:
                eng.send(MessageKind::FastResponse, m.to, client_node, m.deliver_ms);
                break;
            case MessageKind::FastResponse:
                if (++responses == fast_quorum(n)) out.latency_ms = m.deliver_ms;
                break;
            default:
                break;
        }
    });
}

inline SimResult replay_slow_path(const DelayModel& d, std::span<const RegionIndex> replicas,
                                  std::uint32_t leader_pos, RegionIndex client) {
    Engine eng(d, replicas, client);
    const std::uint32_t n = static_cast<std::uint32_t>(replicas.size());
    const std::uint32_t client_node = eng.client_node();
    std::size_t accepts = 0;
    bool responded = false;

    for (std::uint32_t i = 0; i < n; ++i) {
        eng.send(MessageKind::SlowPropose, leader_pos, i, 0.0);
    }
    return eng.run([&](const Message& m, SimResult& out) {
        switch (m.kind) {
            case MessageKind::SlowPropose:
                eng.send(MessageKind::SlowAccept, m.to, leader_pos, m.deliver_ms);
                break;
            case MessageKind::SlowAccept:
                if (++accepts == majority_quorum(n)) {
                    for (std::uint32_t i = 0; i < n; ++i) {
                        eng.send(MessageKind::SlowCommit, leader_pos, i, m.deliver_ms);
                    }
                }
                break;
            case MessageKind::SlowCommit:
                eng.send(MessageKind::SlowResponse, m.to, client_node, m.deliver_ms);
                break;
            case MessageKind::SlowResponse:
                if (!responded) {
                    responded = true;
                    out.latency_ms = m.deliver_ms;
                }
                break;
            default:
                break;
        }
    });
}

inline std::uint32_t leader_pos_of(const DelayModel& d, std::span<const RegionIndex> replicas,
                                   RegionIndex leader) {
    for (std::uint32_t pos = 0; pos < replicas.size(); ++pos) {
        if (replicas[pos] == leader) return pos;
    }
    throw LeaderNotInPlacementError("leader '" + d.name(leader) + "' is not in the placement");
}

}  // namespace sim_detail

inline SimResult des_run_traced(const DelayModel& d, ProtocolKind p,
                                std::span<const RegionIndex> replicas,
                                std::optional<RegionIndex> leader, RegionIndex client,
                                SimPath path) {
    if (replicas.empty()) throw DegeneratePlacementError("placement has no replicas");
    if (needs_leader(p) && !leader) {
        throw MissingLeaderError(std::string(to_string(p)) + " needs a leader");
    }
    using sim_detail::leader_pos_of;
    using sim_detail::nearest_replica_pos;

    if (path == SimPath::Slow) {
        switch (p) {
            case ProtocolKind::FastPaxos:
                return sim_detail::replay_slow_path(d, replicas, leader_pos_of(d, replicas, *leader),
                                                    client);
            case ProtocolKind::EPaxos:
                return sim_detail::replay_slow_path(d, replicas,
                                                    nearest_replica_pos(d, replicas, client), client);
            default:
                throw InvalidPathError(std::string(to_string(p)) + " has no isolated slow path");
        }
    }

    switch (p) {
        case ProtocolKind::MultiPaxos:
            return sim_detail::replay_multi_paxos(d, replicas, leader_pos_of(d, replicas, *leader),
                                                  client);
        case ProtocolKind::Mencius:
            return sim_detail::replay_multi_paxos(d, replicas,
                                                  nearest_replica_pos(d, replicas, client), client);
        case ProtocolKind::FastPaxos:
            return sim_detail::replay_fast_path(d, replicas, client);
        case ProtocolKind::EPaxos:
            return sim_detail::replay_multi_paxos(d, replicas,
                                                  nearest_replica_pos(d, replicas, client), client);
        case ProtocolKind::Domino: {
            double min_mp = std::numeric_limits<double>::infinity();
            for (std::uint32_t pos = 0; pos < replicas.size(); ++pos) {
                min_mp = std::min(min_mp,
                                  sim_detail::replay_multi_paxos(d, replicas, pos, client).latency_ms);
            }
            SimResult fast = sim_detail::replay_fast_path(d, replicas, client);
            if (min_mp <= fast.latency_ms) {
                return sim_detail::replay_multi_paxos(
                    d, replicas, nearest_replica_pos(d, replicas, client), client);
            }
            return fast;
        }
    }
    throw ValidationError("unreachable protocol dispatch");
}

inline double des_run(const DelayModel& d, ProtocolKind p, std::span<const RegionIndex> replicas,
                      std::optional<RegionIndex> leader, RegionIndex client, SimPath path) {
    return des_run_traced(d, p, replicas, leader, client, path).latency_ms;
}

struct ClientComparison {
    RegionIndex client;
    double model_ms = 0.0;
    double oracle_ms = 0.0;
    double abs_diff_ms = 0.0;
};

// Replays every client of the workload through the simulator and composes the
// totals with the same p_slow / p_w weighting the models use.
inline std::vector<ClientComparison> des_compare(const DelayModel& d, ProtocolKind p,
                                                 const Placement& placement, const Workload& w,
                                                 ReadPolicy policy) {
    w.validate();
    const std::span<const RegionIndex> replicas(placement.replicas);
    const std::optional<RegionIndex> leader = placement.leader_region();
    if (needs_leader(p) && !leader) {
        throw MissingLeaderError(std::string(to_string(p)) + " needs a leader");
    }

    std::vector<ClientComparison> report;
    report.reserve(w.clients.size());
    for (RegionIndex c : w.clients) {
        const double model_ms = estimate(d, p, placement, c, w, policy);

        double write = 0.0;
        if (w.p_write > 0.0) {
            switch (p) {
                case ProtocolKind::MultiPaxos:
                case ProtocolKind::Mencius:
                    write = des_run(d, p, replicas, leader, c, SimPath::Normal);
                    break;
                case ProtocolKind::FastPaxos:
                case ProtocolKind::EPaxos:
                    write = des_run(d, p, replicas, leader, c, SimPath::Normal) +
                            des_run(d, p, replicas, leader, c, SimPath::Slow) * w.p_slow;
                    break;
                case ProtocolKind::Domino: {
                    double min_mp = std::numeric_limits<double>::infinity();
                    for (std::uint32_t pos = 0; pos < replicas.size(); ++pos) {
                        min_mp = std::min(
                            min_mp, sim_detail::replay_multi_paxos(d, replicas, pos, c).latency_ms);
                    }
                    const double fast = sim_detail::replay_fast_path(d, replicas, c).latency_ms;
                    if (min_mp <= fast) {
                        write = sim_detail::replay_multi_paxos(
                                    d, replicas, sim_detail::nearest_replica_pos(d, replicas, c), c)
                                    .latency_ms;
                    } else {
                        const double slow =
                            sim_detail::replay_slow_path(
                                d, replicas, sim_detail::leader_pos_of(d, replicas, *leader), c)
                                .latency_ms;
                        write = fast + slow * w.p_slow;
                    }
                    break;
                }
            }
        }

        double read = 0.0;
        if (w.p_write < 1.0) {
            // A read is one request/response round trip; no protocol variance.
            if (policy == ReadPolicy::LeaderOnly && !leader) {
                throw MissingLeaderError("leader-only reads need a leader");
            }
            const std::uint32_t target_pos =
                policy == ReadPolicy::NearestReplica
                    ? sim_detail::nearest_replica_pos(d, replicas, c)
                    : sim_detail::leader_pos_of(d, replicas, *leader);
            read = d.owd(c, replicas[target_pos]) + d.owd(replicas[target_pos], c);
        }

        const double oracle_ms = write * w.p_write + read * (1.0 - w.p_write);
        report.push_back({c, model_ms, oracle_ms, std::abs(model_ms - oracle_ms)});
    }
    return report;
}

// One JSON object per delivered message, for debugging and figures.
inline void write_trace_jsonl(std::ostream& os, const SimResult& result, const DelayModel& d,
                              std::span<const RegionIndex> replicas, RegionIndex client) {
    auto node_name = [&](std::uint32_t node) {
        if (node == replicas.size()) return "c:" + d.name(client);
        return "r" + std::to_string(node) + ":" + d.name(replicas[node]);
    };
    for (const Message& m : result.trace) {
        os << "{\"kind\":\"" << to_string(m.kind) << "\",\"from\":\"" << node_name(m.from)
           << "\",\"to\":\"" << node_name(m.to) << "\",\"send_ms\":" << format_double(m.send_ms)
           << ",\"deliver_ms\":" << format_double(m.deliver_ms) << ",\"instance\":" << m.instance
           << "}\n";
    }
}

}  // namespace geosmr
